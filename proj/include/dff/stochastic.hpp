#pragma once

// Stochastic-setting learner: the same rule machinery as the adversarial
// learner, but with the fixed budgets k and s replaced by time-dependent
// concentration thresholds, and rule creation gated on evidence that enough
// probability mass falls outside the current rules.

#include <cstdint>
#include <optional>

#include "dff/learner.hpp"
#include "dff/types.hpp"

namespace dff {

// Exception threshold q(eps, t) = eps*t + (2/3)*log(8t^3/delta)
//                                 + sqrt(2*eps*t*log(8t^3/delta)).
// Monotone nondecreasing in t and eps. Logs are natural by default;
// log_scale rescales them (1/ln(b) evaluates logs in base b).
double q_threshold(double eps, std::int64_t t, double delta,
                   double log_scale = 1.0);

// Rule-creation threshold
// gamma(eps, r, t) = (r + 4*sqrt(r)*log^{3/2}(8t^2/delta)) / (1 - 2*eps)
//                    - r + 1.
double gamma_threshold(double eps, double r, std::int64_t t, double delta,
                       double log_scale = 1.0);

// Which clock feeds the deletion threshold n_k: the rule's creation round
// (the default), or the first round the current feature was charged.
enum class NkClock { Creation, Feedback };

std::string to_string(NkClock clock);
NkClock nk_clock_from_string(const std::string& name);

struct StroParams {
  std::uint32_t m = 1;
  double eps = 0.0;    // max exception probability, <= 1/4
  double sigma = 0.0;  // max mass of similar exceptions, <= eps
  double delta = 0.05; // confidence, <= 1/e^2
  NkClock nk_clock = NkClock::Creation;
  double log_scale = 1.0;

  void validate() const;

  // R(m, delta): high-probability cap on the number of rules ever created.
  double rule_creation_bound() const;
};

struct StroState {
  LearnerState base;  // params.k / params.s unused
  StroParams params;
  std::int64_t t = 0;     // rounds seen
  std::int64_t t_lr = 0;  // round of the last rule creation
  std::int64_t n_lr = 0;  // unmatched examples since t_lr

  void init(const Example& x0, LabelId y0) { base.init(x0, y0); }
};

// Advances one protocol round. Must be called every round, including
// correct ones: the unmatched-example counter feeds the creation gate.
// `outcome` is this round's prediction from predict(state.base, x_t);
// `feedback` is absent on correct predictions (and on audited-out rows).
StateDelta stro_step(StroState& state, const Example& x_t,
                     const PredictionOutcome& outcome,
                     const std::optional<Feedback>& feedback);

}  // namespace dff
