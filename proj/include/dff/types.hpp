#pragma once

// Ground-truth data model for learning from discriminative feature feedback
// with an imperfect teacher: feature universe, examples, components,
// representations, and concepts with exceptions.
//
// Everything in this header is immutable after construction and safe to
// share read-only across concurrent trials.

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace dff {

using FeatureIndex = std::uint32_t;
using ExampleId = std::uint32_t;
using ComponentId = std::uint32_t;
using LabelId = std::uint32_t;

using Bits = std::vector<bool>;

enum class ErrorKind {
  InvalidArgument,
  Parse,
  Infeasible,
  SizeLimit,
  BudgetExceeded,
  ProtocolViolation,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

// A single Boolean feature test: coordinate plus required value.
// polarity=true means the coordinate must be 1 for the literal to hold.
struct Literal {
  FeatureIndex feature = 0;
  bool polarity = true;

  bool eval(const Bits& bits) const { return bits[feature] == polarity; }
  Literal negated() const { return Literal{feature, !polarity}; }

  friend bool operator==(const Literal&, const Literal&) = default;
  friend auto operator<=>(const Literal&, const Literal&) = default;
};

std::string to_string(const Literal& lit);

struct Example {
  ExampleId id = 0;
  Bits bits;
};

struct Component {
  ComponentId id = 0;
  LabelId label = 0;
  std::vector<ExampleId> members;  // sorted, unique
};

// The teacher's internal component family plus the table of discriminating
// features. The separation table holds an entry for every ordered pair of
// components with differing labels; the stored literal is true on every
// member of the first component and false on every member of the second,
// and separation(j,i) is the negation of separation(i,j).
struct Representation {
  std::vector<Component> components;
  std::map<std::pair<ComponentId, ComponentId>, Literal> separation;

  const Component* find_component(ComponentId id) const;
  std::optional<Literal> separating(ComponentId i, ComponentId j) const;
};

// A full ground-truth instance a simulation runs against: representation,
// target concept (with its exception set), and the enumerated example
// universe. `component_of` materializes the fixed choice of home component
// for every example; `exceptions` is exactly the set of examples whose
// concept label deviates from their home component's label.
struct Instance {
  std::uint32_t d = 0;            // feature-universe size
  std::uint32_t label_count = 0;  // |Y|
  Representation representation;
  std::vector<Example> examples;
  std::unordered_map<ExampleId, ComponentId> component_of;
  std::unordered_map<ExampleId, LabelId> concept_label;
  std::vector<ExampleId> exceptions;  // sorted, unique
  std::uint32_t k = 0;                // declared bound on |exceptions|
  std::uint32_t s = 0;                // declared bound on max |M_{x̂,φ}|

  std::size_t index_of(ExampleId id) const;
  const Example& example(ExampleId id) const;
  ComponentId home_component(ExampleId id) const;
  LabelId concept(ExampleId id) const;
  bool is_exception(ExampleId id) const;
  std::uint32_t m() const {
    return static_cast<std::uint32_t>(representation.components.size());
  }

  // Rebuilds the id -> position index. Call after examples change.
  void reindex();

 private:
  std::unordered_map<ExampleId, std::size_t> index_;
};

enum class ViolationKind {
  Malformed,       // dangling ids, wrong vector lengths, bad label symbols
  Coverage,        // example not in any component
  Purity,          // non-exception member disagrees with component label
  Separation,      // missing/inconsistent/invalid separation entry
  ExceptionSet,    // exception set differs from the concept's deviation set
  ExceptionCount,  // |exceptions| > k, or s out of range
};

std::string to_string(ViolationKind kind);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

}  // namespace dff
