#pragma once

// Rule-list learner for the adversarial setting. State is a list of
// conjunction rules, each anchored to the representative example whose
// mistake created it, plus a default prediction from the first labeled
// example. Mistakes on a matched rule feed per-feature counters; a counter
// passing the similarity threshold refines the conjunction with the negated
// feature, and rules that grow to m literals or accumulate too much counter
// mass beyond the m-1-|C| largest entries are deleted.
//
// The mistake handler takes real-valued thresholds so the stochastic
// variant can reuse it with time-dependent values; the adversarial learner
// passes its integer budgets k and s unchanged.

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "dff/teacher.hpp"
#include "dff/types.hpp"

namespace dff {

struct Rule {
  std::uint32_t id = 0;  // creation ordinal within the run
  Example representative;
  LabelId label = 0;
  std::vector<Literal> conjunction;            // insertion order
  std::map<Literal, std::int64_t> fcount;      // sparse; absent = 0
  std::map<Literal, std::int64_t> first_seen;  // first round each feature hit
  std::int64_t created_at = 0;
  std::int64_t mistake_count = 0;  // diagnostic

  bool matches(const Bits& bits) const;
};

struct LearnerParams {
  std::uint32_t m = 1;
  std::uint32_t k = 0;
  std::uint32_t s = 0;
};

struct LearnerState {
  Example default_example;  // x0
  LabelId default_label = 0;  // y0
  std::vector<Rule> rules;  // L, in creation order
  LearnerParams params;
  std::uint32_t rules_ever_created = 0;

  void init(const Example& x0, LabelId y0) {
    default_example = x0;
    default_label = y0;
  }
};

struct PredictionOutcome {
  LabelId predicted = 0;
  ExampleId explanation = 0;
  std::optional<std::size_t> matched_rule;  // index into rules, this round
};

enum class DeltaTag { None, CounterInc, Refine, Delete, Create };

std::string to_string(DeltaTag tag);

struct StateDelta {
  DeltaTag tag = DeltaTag::None;
  std::optional<std::uint32_t> rule_id;
  std::optional<Literal> refined_with;  // feature whose negation was added
};

// First rule in creation order whose conjunction x satisfies; the default
// (y0, x0) otherwise.
PredictionOutcome predict(const LearnerState& state, const Example& x);

struct HandleResult {
  bool refined = false;
  bool deleted = false;
};

// One mistake on a matched rule, exactly the counter/refine/delete cascade.
// Thresholds compare strictly: a counter must exceed n_s to refine, and the
// counter sum without the b = m-1-|C| largest entries must exceed n_k to
// delete. The caller erases the rule from L when `deleted` comes back true.
HandleResult handle_mistake(Rule& rule, const Literal& phi, double n_k,
                            double n_s, std::uint32_t m);

// Applies one round of feedback to the adversarial learner: nothing on a
// correct prediction, handle_mistake with thresholds (k, s) on a matched
// mistake, and a fresh empty rule labeled with the corrected label on an
// unmatched mistake.
StateDelta observe(LearnerState& state, const Example& x_t,
                   const PredictionOutcome& outcome,
                   const std::optional<Feedback>& feedback, std::int64_t t);

}  // namespace dff
