#pragma once

// Instance and stream generation: random instances with planted exceptions,
// the hidden-pair-assignment family that forces quadratic mistakes, and the
// i.i.d. sampler for the stochastic setting. Generators are pure functions
// of their parameters and seed.

#include <cstdint>
#include <random>
#include <vector>

#include "dff/learner.hpp"
#include "dff/serialize.hpp"
#include "dff/types.hpp"

namespace dff {

// Stable seed derivation so one trial seed can drive several independent
// generators (instance, stream, teacher) without correlation.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id);

struct RandomInstanceParams {
  std::uint32_t m = 1;
  std::uint32_t d = 1;
  std::uint32_t labels = 2;
  std::uint32_t k = 0;
  std::uint32_t s = 0;
  std::uint32_t examples_per_component = 2;
  std::uint64_t seed = 0;
};

// Builds a valid instance: every differing-label component pair gets a
// dedicated coordinate (1 on the lower-id side), every planted exception
// gets a private coordinate that isolates it from all other examples, and
// the remaining coordinates are random. Exceptions are planted by
// relabeling k random examples. Requires d >= #pairs + k.
Instance gen_random_instance(const RandomInstanceParams& params);

enum class ExceptionPlacement { Front, Back, Uniform };

std::string to_string(ExceptionPlacement placement);
ExceptionPlacement exception_placement_from_string(const std::string& name);

// An adversarial-order stream: shuffled passes over the non-exception
// examples, with each planted exception inserted exactly once at a position
// chosen by the placement policy. The first element (a non-exception) plays
// the role of the initial labeled example; `n` counts prediction rounds.
Stream adversarial_stream(const Instance& instance, std::uint64_t n,
                          ExceptionPlacement placement, std::uint64_t seed);

struct LowerBoundResult {
  Instance instance;
  Stream stream;
};

// The hidden-assignment construction over m components with two candidate
// features per component pair. Which of the two separates each pair is
// drawn uniformly at random, so each pair example's label is an unrevealed
// fair coin until the teacher discloses that pair's feature. The stream
// presents every pair example once, in uniformly random order, after an
// initial example that lies in component 0 under every assignment.
LowerBoundResult lower_bound_stream(std::uint32_t m, std::uint64_t seed);

// Per-example sampling weights for the stochastic setting: exceptions carry
// mass min(eps/k, sigma) each, non-exceptions share the rest uniformly.
// Weights are stored by example position; the instance is passed back in
// wherever ids or bits are needed.
class StochasticSampler {
 public:
  StochasticSampler(const Instance& instance, double eps, double sigma);

  // One initial example plus n i.i.d. prediction rounds.
  Stream sample(const Instance& instance, std::uint64_t n,
                std::uint64_t seed) const;

  const std::vector<double>& weights() const { return weights_; }
  double exception_mass() const { return exception_mass_; }

  // Probability mass of examples satisfied by none of the given rules.
  double mass_outside(const Instance& instance,
                      const std::vector<Rule>& rules) const;

 private:
  std::size_t draw_index(std::mt19937_64& rng) const;

  std::vector<double> weights_;     // by example position
  std::vector<double> cumulative_;  // prefix sums
  double exception_mass_ = 0.0;
};

}  // namespace dff
