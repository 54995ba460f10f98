#include "dff/learner.hpp"

#include <algorithm>
#include <functional>

namespace dff {

std::string to_string(DeltaTag tag) {
  switch (tag) {
    case DeltaTag::None: return "none";
    case DeltaTag::CounterInc: return "counter-inc";
    case DeltaTag::Refine: return "refine";
    case DeltaTag::Delete: return "delete";
    case DeltaTag::Create: return "create";
  }
  return "unknown";
}

bool Rule::matches(const Bits& bits) const {
  for (const auto& lit : conjunction) {
    if (!lit.eval(bits)) return false;
  }
  return true;  // the empty conjunction matches everything
}

PredictionOutcome predict(const LearnerState& state, const Example& x) {
  for (std::size_t i = 0; i < state.rules.size(); ++i) {
    if (state.rules[i].matches(x.bits)) {
      return PredictionOutcome{state.rules[i].label,
                               state.rules[i].representative.id, i};
    }
  }
  return PredictionOutcome{state.default_label, state.default_example.id,
                           std::nullopt};
}

HandleResult handle_mistake(Rule& rule, const Literal& phi, double n_k,
                            double n_s, std::uint32_t m) {
  HandleResult result;
  std::int64_t count = ++rule.fcount[phi];

  if (static_cast<double>(count) > n_s) {
    Literal negated = phi.negated();
    if (std::find(rule.conjunction.begin(), rule.conjunction.end(), negated) ==
        rule.conjunction.end()) {
      rule.conjunction.push_back(negated);
    }
    rule.fcount.erase(phi);
    result.refined = true;
    if (rule.conjunction.size() >= m) {
      result.deleted = true;
    }
    return result;
  }

  std::int64_t b = static_cast<std::int64_t>(m) - 1 -
                   static_cast<std::int64_t>(rule.conjunction.size());
  std::vector<std::int64_t> values;
  values.reserve(rule.fcount.size());
  for (const auto& [lit, v] : rule.fcount) values.push_back(v);
  std::sort(values.begin(), values.end(), std::greater<>());
  std::int64_t tail = 0;
  for (std::size_t i = static_cast<std::size_t>(std::max<std::int64_t>(b, 0));
       i < values.size(); ++i) {
    tail += values[i];
  }
  if (static_cast<double>(tail) > n_k) {
    result.deleted = true;
  }
  return result;
}

StateDelta observe(LearnerState& state, const Example& x_t,
                   const PredictionOutcome& outcome,
                   const std::optional<Feedback>& feedback, std::int64_t t) {
  if (!feedback) return StateDelta{};

  if (outcome.matched_rule) {
    Rule& rule = state.rules[*outcome.matched_rule];
    rule.mistake_count++;
    std::uint32_t rule_id = rule.id;
    auto result = handle_mistake(rule, feedback->feature,
                                 static_cast<double>(state.params.k),
                                 static_cast<double>(state.params.s),
                                 state.params.m);
    StateDelta delta;
    delta.rule_id = rule_id;
    if (result.refined) delta.refined_with = feedback->feature;
    if (result.deleted) {
      state.rules.erase(state.rules.begin() +
                        static_cast<std::ptrdiff_t>(*outcome.matched_rule));
      delta.tag = DeltaTag::Delete;
    } else {
      delta.tag = result.refined ? DeltaTag::Refine : DeltaTag::CounterInc;
    }
    return delta;
  }

  // Unmatched mistake: start a fresh empty rule anchored at x_t. The
  // feedback feature is recorded in the transcript but not used here.
  Rule rule;
  rule.id = state.rules_ever_created++;
  rule.representative = x_t;
  rule.label = feedback->correct_label;
  rule.created_at = t;
  state.rules.push_back(std::move(rule));
  StateDelta delta;
  delta.tag = DeltaTag::Create;
  delta.rule_id = state.rules.back().id;
  return delta;
}

}  // namespace dff
