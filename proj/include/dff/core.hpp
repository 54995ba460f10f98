#pragma once

// Validation and the representation-expansion constructions: disjointness
// normalization, exception absorption into singleton components, the
// hypercube family that forces large exception-free representations, and a
// brute-force oracle for the minimum exception-free representation size.

#include <cstdint>
#include <optional>

#include "dff/types.hpp"

namespace dff {

// Checks every representation/instance invariant and reports all violations.
// Structural problems (dangling ids, wrong bit-vector lengths) are reported
// as Malformed violations rather than thrown.
ValidationReport validate_instance(const Instance& instance);

// Restricts every component to the examples whose home component it is.
// Component count, ids, labels and the separation table are preserved;
// separation literals stay valid on the shrunken member sets. Idempotent.
Representation normalize_disjoint(
    const Representation& rep,
    const std::unordered_map<ExampleId, ComponentId>& component_of);

struct ExpandResult {
  Representation representation;
  std::unordered_map<ExampleId, ComponentId> component_of;
};

// Absorbs every exception into the representation: each exception's home
// component is split along the feature coordinates into parts that disagree
// with the exception somewhere, plus a singleton for the exception itself.
// The result has at most m + d*k components and zero exceptions with
// respect to the instance's concept.
//
// Throws Error{Infeasible} when no single literal can separate the new
// singleton from some same-label component (possible when an exception is
// bitwise too close to other components' members).
ExpandResult expand_representation(const Instance& instance);

// Packages an ExpandResult as a full exception-free Instance over the same
// examples and concept, ready for validate_instance.
Instance expanded_instance(const Instance& instance, const ExpandResult& result);

// The single-component instance over {0,1}^d whose concept deviates only on
// the all-zeros point. Any exception-free representation of it needs at
// least d+1 components. d is capped at 16 (explicit enumeration).
Instance hypercube_lower_bound_instance(std::uint32_t d);

// Exhaustive search for the smallest exception-free representation of the
// instance's concept using coordinate literals: examples are partitioned
// into label-pure groups such that every differing-label pair of groups is
// separated by some literal. Returns nullopt when no representation of size
// <= max_size exists. Throws Error{BudgetExceeded} when the search exceeds
// work_budget explored states.
std::optional<std::uint32_t> min_exception_free_size(
    const Instance& instance, std::uint32_t max_size,
    std::uint64_t work_budget = 50'000'000);

}  // namespace dff
