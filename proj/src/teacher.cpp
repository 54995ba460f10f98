#include "dff/teacher.hpp"

#include <algorithm>

namespace dff {

std::string to_string(ExceptionStrategy strategy) {
  switch (strategy) {
    case ExceptionStrategy::SharedFeature: return "shared-feature";
    case ExceptionStrategy::RandomFresh: return "random-fresh";
    case ExceptionStrategy::LabelFlipOnly: return "label-flip-only";
  }
  return "unknown";
}

ExceptionStrategy exception_strategy_from_string(const std::string& name) {
  if (name == "shared-feature") return ExceptionStrategy::SharedFeature;
  if (name == "random-fresh") return ExceptionStrategy::RandomFresh;
  if (name == "label-flip-only") return ExceptionStrategy::LabelFlipOnly;
  throw Error(ErrorKind::InvalidArgument,
              "unknown exception strategy: " + name);
}

Teacher::Teacher(const Instance& instance, ExceptionStrategy strategy,
                 std::uint64_t seed)
    : instance_(instance), strategy_(strategy), rng_(seed) {}

void Teacher::use_mass_budget(std::vector<double> weights, double sigma) {
  mass_budget_ = true;
  weights_ = std::move(weights);
  sigma_ = sigma;
}

std::vector<Literal> Teacher::candidate_literals(const Bits& x_bits,
                                                 const Bits& ex_bits) const {
  std::vector<Literal> out;
  for (FeatureIndex j = 0; j < instance_.d; ++j) {
    if (x_bits[j] != ex_bits[j]) {
      out.push_back(Literal{j, x_bits[j]});
    }
  }
  return out;
}

bool Teacher::in_budget(const Charges* charges, ExampleId x_t) const {
  if (charges == nullptr) return true;
  if (charges->members.count(x_t)) return true;  // re-charge is free
  if (mass_budget_) {
    double w = weights_[instance_.index_of(x_t)];
    return charges->mass + w <= sigma_ + 1e-12;
  }
  return charges->members.size() < instance_.s;
}

void Teacher::charge(ExampleId explanation, const Literal& lit,
                     ExampleId x_t) {
  Charges& c = charges_[{explanation, lit}];
  if (c.members.insert(x_t).second && mass_budget_) {
    c.mass += weights_[instance_.index_of(x_t)];
  }
}

Literal Teacher::choose_feature(ExampleId x_t, ExampleId explanation,
                                bool budgeted) {
  // Repeats of the same (explanation, example) pair replay the same literal.
  auto memo = pair_memo_.find({explanation, x_t});
  if (memo != pair_memo_.end()) return memo->second;

  const Bits& x_bits = instance_.example(x_t).bits;
  const Bits& ex_bits = instance_.example(explanation).bits;
  auto candidates = candidate_literals(x_bits, ex_bits);
  if (candidates.empty()) {
    throw Error(ErrorKind::Infeasible,
                "examples " + std::to_string(x_t) + " and " +
                    std::to_string(explanation) +
                    " are bitwise identical; no separating literal exists");
  }

  auto charges_for = [&](const Literal& lit) -> const Charges* {
    if (!budgeted) return nullptr;
    auto it = charges_.find({explanation, lit});
    return it == charges_.end() ? nullptr : &it->second;
  };
  auto lit_in_budget = [&](const Literal& lit) {
    return !budgeted || in_budget(charges_for(lit), x_t);
  };

  std::vector<Literal> affordable;
  for (const auto& lit : candidates) {
    if (lit_in_budget(lit)) affordable.push_back(lit);
  }
  if (affordable.empty()) {
    throw Error(ErrorKind::Infeasible,
                "no in-budget literal separates example " +
                    std::to_string(x_t) + " from explanation " +
                    std::to_string(explanation));
  }

  Literal chosen = affordable.front();
  switch (strategy_) {
    case ExceptionStrategy::SharedFeature: {
      // Heaviest in-budget literal first: keeps the learner's counters as
      // high as the budget allows before opening a fresh feature.
      std::size_t best = 0;
      for (const auto& lit : affordable) {
        const Charges* c = charges_for(lit);
        std::size_t load = c ? c->members.size() : 0;
        if (load > best) {
          best = load;
          chosen = lit;
        }
      }
      break;
    }
    case ExceptionStrategy::RandomFresh: {
      std::size_t idx = rng_() % affordable.size();
      chosen = affordable[idx];
      break;
    }
    case ExceptionStrategy::LabelFlipOnly: {
      ComponentId ci = instance_.home_component(x_t);
      ComponentId cj = instance_.home_component(explanation);
      auto pair_lit = instance_.representation.separating(ci, cj);
      if (pair_lit && lit_in_budget(*pair_lit) && pair_lit->eval(x_bits) &&
          !pair_lit->eval(ex_bits)) {
        chosen = *pair_lit;
      }
      break;
    }
  }

  pair_memo_.emplace(std::make_pair(explanation, x_t), chosen);
  return chosen;
}

std::optional<Feedback> Teacher::respond(ExampleId x_t, LabelId prediction,
                                         ExampleId explanation) {
  LabelId truth = instance_.concept(x_t);
  if (instance_.concept(explanation) != prediction) {
    throw Error(ErrorKind::ProtocolViolation,
                "explanation " + std::to_string(explanation) +
                    " was never labeled " + std::to_string(prediction));
  }
  if (prediction == truth) return std::nullopt;

  bool x_exc = instance_.is_exception(x_t);
  bool ex_exc = instance_.is_exception(explanation);

  Literal feature;
  if (!x_exc && !ex_exc) {
    ComponentId ci = instance_.home_component(x_t);
    ComponentId cj = instance_.home_component(explanation);
    auto lit = instance_.representation.separating(ci, cj);
    if (!lit) {
      throw Error(ErrorKind::Infeasible,
                  "no separation entry for component pair (" +
                      std::to_string(ci) + "," + std::to_string(cj) + ")");
    }
    feature = *lit;
  } else {
    if (x_exc && ex_exc) ++both_exception_rounds_;
    bool budgeted = x_exc && !ex_exc;
    feature = choose_feature(x_t, explanation, budgeted);
    if (budgeted) charge(explanation, feature, x_t);
  }

  if (!feature.eval(instance_.example(x_t).bits) ||
      feature.eval(instance_.example(explanation).bits)) {
    throw Error(ErrorKind::ProtocolViolation,
                "chosen feature does not separate the examples");
  }
  return Feedback{truth, feature};
}

std::uint32_t Teacher::max_distinct_charges() const {
  std::size_t best = 0;
  for (const auto& [key, c] : charges_) {
    best = std::max(best, c.members.size());
  }
  return static_cast<std::uint32_t>(best);
}

void FeedbackAuditor::observe_label(ExampleId id, LabelId label) {
  seen_labels_.emplace(id, label);
}

std::optional<FeedbackAuditor::Flag> FeedbackAuditor::audit(
    const Example& x_t, const Example& explanation, const Feedback& feedback) {
  if (!feedback.feature.eval(x_t.bits) ||
      feedback.feature.eval(explanation.bits)) {
    return Flag::FeatureNotSeparating;
  }
  auto it = seen_labels_.find(x_t.id);
  if (it != seen_labels_.end() && it->second != feedback.correct_label) {
    return Flag::LabelContradiction;
  }
  seen_labels_.emplace(x_t.id, feedback.correct_label);
  return std::nullopt;
}

std::string to_string(FeedbackAuditor::Flag flag) {
  switch (flag) {
    case FeedbackAuditor::Flag::FeatureNotSeparating:
      return "feature-not-separating";
    case FeedbackAuditor::Flag::LabelContradiction:
      return "label-contradiction";
  }
  return "unknown";
}

}  // namespace dff
