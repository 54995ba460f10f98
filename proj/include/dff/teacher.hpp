#pragma once

// The teacher side of the interaction protocol: on an incorrect prediction
// it supplies the correct label and a feature separating the current example
// from the learner's explanation. Component pairs always get the same
// literal (the representation's separation table). When an exception is
// involved, the feature is chosen by a pluggable strategy, subject to the
// per-(explanation, feature) budget: at most s distinct exceptions (or mass
// at most sigma in the stochastic setting) may be charged the same feature
// against the same non-exception explanation.

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <unordered_map>
#include <vector>

#include "dff/types.hpp"

namespace dff {

struct Feedback {
  LabelId correct_label = 0;  // y_t
  Literal feature;            // true on x_t, false on the explanation
};

enum class ExceptionStrategy {
  // Fill one feature per explanation with up to s distinct exceptions
  // before moving to the next; maximal counter pressure on the learner.
  SharedFeature,
  // Each exception draws a uniformly random in-budget separating literal.
  RandomFresh,
  // Keep the componentwise feature behavior whenever the component pair has
  // a table entry; only the label deviates. Falls back to the first
  // in-budget literal when the components share a label.
  LabelFlipOnly,
};

std::string to_string(ExceptionStrategy strategy);
ExceptionStrategy exception_strategy_from_string(const std::string& name);

class Teacher {
 public:
  Teacher(const Instance& instance, ExceptionStrategy strategy,
          std::uint64_t seed);

  // Switches the budget from a distinct-exception count (the instance's s)
  // to probability mass: the charged mass per (explanation, feature) may not
  // exceed sigma. `weights` are per example position in instance order.
  void use_mass_budget(std::vector<double> weights, double sigma);

  // Returns nothing when the prediction is correct. Throws
  // Error{ProtocolViolation} when the explanation was never labeled with the
  // predicted label, and Error{Infeasible} when no in-budget separating
  // literal exists.
  std::optional<Feedback> respond(ExampleId x_t, LabelId prediction,
                                  ExampleId explanation);

  // Largest realized |M_{x̂,φ}|: distinct exceptions charged the same
  // feature against the same non-exception explanation.
  std::uint32_t max_distinct_charges() const;

  // Rounds where both the example and the explanation were exceptions
  // (teacher behavior there is unconstrained by the budget).
  std::uint64_t both_exception_rounds() const { return both_exception_rounds_; }

 private:
  struct Charges {
    std::set<ExampleId> members;
    double mass = 0.0;
  };

  std::vector<Literal> candidate_literals(const Bits& x_bits,
                                          const Bits& ex_bits) const;
  bool in_budget(const Charges* charges, ExampleId x_t) const;
  void charge(ExampleId explanation, const Literal& lit, ExampleId x_t);
  Literal choose_feature(ExampleId x_t, ExampleId explanation, bool budgeted);

  const Instance& instance_;
  ExceptionStrategy strategy_;
  std::mt19937_64 rng_;
  bool mass_budget_ = false;
  double sigma_ = 0.0;
  std::vector<double> weights_;
  std::map<std::pair<ExampleId, Literal>, Charges> charges_;
  // Feature memo per (explanation, example) pair so repeats of the same
  // exception pair replay the same literal.
  std::map<std::pair<ExampleId, ExampleId>, Literal> pair_memo_;
  std::uint64_t both_exception_rounds_ = 0;
};

// Inconsistency filter for teacher feedback. Rows whose feature does not
// separate the two examples, or whose correct label contradicts an earlier
// revealed label for the same example, are flagged; learners ignore them.
class FeedbackAuditor {
 public:
  enum class Flag { FeatureNotSeparating, LabelContradiction };

  // Records a label revealed outside of feedback (the initial example, or a
  // correct prediction confirming the predicted label).
  void observe_label(ExampleId id, LabelId label);

  // Audits one feedback row; consistent rows update the label memory.
  std::optional<Flag> audit(const Example& x_t, const Example& explanation,
                            const Feedback& feedback);

 private:
  std::unordered_map<ExampleId, LabelId> seen_labels_;
};

std::string to_string(FeedbackAuditor::Flag flag);

}  // namespace dff
