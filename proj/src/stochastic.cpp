#include "dff/stochastic.hpp"

#include <cmath>

namespace dff {

namespace {

double checked_log(double arg, double log_scale) {
  if (arg <= 0) {
    throw Error(ErrorKind::InvalidArgument, "log argument must be positive");
  }
  return std::log(arg) * log_scale;
}

}  // namespace

double q_threshold(double eps, std::int64_t t, double delta,
                   double log_scale) {
  if (t < 1) {
    throw Error(ErrorKind::InvalidArgument, "q requires t >= 1");
  }
  if (delta <= 0 || eps < 0) {
    throw Error(ErrorKind::InvalidArgument, "q requires delta > 0, eps >= 0");
  }
  double td = static_cast<double>(t);
  double L = checked_log(8.0 * td * td * td / delta, log_scale);
  return eps * td + (2.0 / 3.0) * L + std::sqrt(2.0 * eps * td * L);
}

double gamma_threshold(double eps, double r, std::int64_t t, double delta,
                       double log_scale) {
  if (t < 1) {
    throw Error(ErrorKind::InvalidArgument, "gamma requires t >= 1");
  }
  if (eps >= 0.5) {
    throw Error(ErrorKind::InvalidArgument, "gamma requires eps < 1/2");
  }
  if (delta <= 0 || r < 0) {
    throw Error(ErrorKind::InvalidArgument,
                "gamma requires delta > 0, r >= 0");
  }
  double td = static_cast<double>(t);
  double L = checked_log(8.0 * td * td / delta, log_scale);
  return (r + 4.0 * std::sqrt(r) * std::pow(L, 1.5)) / (1.0 - 2.0 * eps) - r +
         1.0;
}

std::string to_string(NkClock clock) {
  return clock == NkClock::Creation ? "creation" : "feedback";
}

NkClock nk_clock_from_string(const std::string& name) {
  if (name == "creation") return NkClock::Creation;
  if (name == "feedback") return NkClock::Feedback;
  throw Error(ErrorKind::InvalidArgument, "unknown nk clock: " + name);
}

void StroParams::validate() const {
  if (m < 1) {
    throw Error(ErrorKind::InvalidArgument, "m must be >= 1");
  }
  if (!(eps >= 0.0 && eps <= 0.25)) {
    throw Error(ErrorKind::InvalidArgument, "eps must be in [0, 1/4]");
  }
  if (!(sigma >= 0.0 && sigma <= eps)) {
    throw Error(ErrorKind::InvalidArgument, "sigma must be in [0, eps]");
  }
  if (!(delta > 0.0 && delta <= std::exp(-2.0))) {
    throw Error(ErrorKind::InvalidArgument, "delta must be in (0, 1/e^2]");
  }
}

double StroParams::rule_creation_bound() const {
  return 4.0 * m * std::log(4.0 / delta);
}

StateDelta stro_step(StroState& state, const Example& x_t,
                     const PredictionOutcome& outcome,
                     const std::optional<Feedback>& feedback) {
  state.t += 1;
  const std::int64_t t = state.t;
  const StroParams& p = state.params;

  if (outcome.matched_rule) {
    if (!feedback) return StateDelta{};
    Rule& rule = state.base.rules[*outcome.matched_rule];
    rule.mistake_count++;
    std::uint32_t rule_id = rule.id;

    const Literal& phi = feedback->feature;
    if (rule.fcount.count(phi) == 0) {
      rule.first_seen.insert_or_assign(phi, t);
    }
    std::int64_t t_feature = t - rule.first_seen.at(phi) + 1;
    std::int64_t t_rule = t - rule.created_at + 1;

    double n_s = q_threshold(p.sigma, t_feature, p.delta, p.log_scale) + 1.0;
    double n_k = q_threshold(
        p.eps, p.nk_clock == NkClock::Creation ? t_rule : t_feature, p.delta,
        p.log_scale);

    auto result = handle_mistake(rule, phi, n_k, n_s, p.m);
    StateDelta delta;
    delta.rule_id = rule_id;
    if (result.refined) delta.refined_with = phi;
    if (result.deleted) {
      state.base.rules.erase(state.base.rules.begin() +
                             static_cast<std::ptrdiff_t>(*outcome.matched_rule));
      delta.tag = DeltaTag::Delete;
    } else {
      delta.tag = result.refined ? DeltaTag::Refine : DeltaTag::CounterInc;
    }
    return delta;
  }

  state.n_lr += 1;
  if (!feedback) return StateDelta{};

  double r = static_cast<double>(t - state.t_lr - state.n_lr + 1);
  double gate = gamma_threshold(p.eps, r, t, p.delta, p.log_scale);
  if (static_cast<double>(state.n_lr) < gate) return StateDelta{};

  Rule rule;
  rule.id = state.base.rules_ever_created++;
  rule.representative = x_t;
  rule.label = feedback->correct_label;
  rule.created_at = t;
  state.base.rules.push_back(std::move(rule));
  state.n_lr = 0;
  state.t_lr = t;
  StateDelta delta;
  delta.tag = DeltaTag::Create;
  delta.rule_id = state.base.rules.back().id;
  return delta;
}

}  // namespace dff
