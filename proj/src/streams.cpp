#include "dff/streams.hpp"

#include <algorithm>
#include <set>

#include "dff/core.hpp"

namespace dff {

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream_id + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

namespace {

bool random_bit(std::mt19937_64& rng) { return (rng() & 1ull) != 0; }

template <typename T>
void shuffle_in_place(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    std::swap(v[i - 1], v[rng() % i]);
  }
}

}  // namespace

Instance gen_random_instance(const RandomInstanceParams& params) {
  if (params.m < 1 || params.labels < 1 || params.examples_per_component < 1) {
    throw Error(ErrorKind::InvalidArgument,
                "m, labels and examples_per_component must be >= 1");
  }
  if (params.s > params.k) {
    throw Error(ErrorKind::InvalidArgument, "s must not exceed k");
  }
  if (params.k > 0 && params.labels < 2) {
    throw Error(ErrorKind::Infeasible,
                "exceptions require at least two labels");
  }
  const std::uint64_t total =
      static_cast<std::uint64_t>(params.m) * params.examples_per_component;
  if (params.k > total) {
    throw Error(ErrorKind::Infeasible, "more exceptions than examples");
  }

  std::mt19937_64 rng(params.seed);

  std::vector<LabelId> comp_label(params.m);
  for (std::uint32_t i = 0; i < params.m; ++i) {
    comp_label[i] = i % params.labels;
  }
  shuffle_in_place(comp_label, rng);

  // One dedicated coordinate per differing-label component pair, one
  // private coordinate per exception, the rest random.
  std::vector<std::pair<ComponentId, ComponentId>> pairs;
  for (ComponentId i = 0; i < params.m; ++i) {
    for (ComponentId j = i + 1; j < params.m; ++j) {
      if (comp_label[i] != comp_label[j]) pairs.emplace_back(i, j);
    }
  }
  const std::uint32_t pair_coords = static_cast<std::uint32_t>(pairs.size());
  if (params.d < pair_coords + params.k) {
    throw Error(ErrorKind::Infeasible,
                "d=" + std::to_string(params.d) + " too small: need " +
                    std::to_string(pair_coords) + " pair coordinates plus " +
                    std::to_string(params.k) + " exception coordinates");
  }

  std::vector<ExampleId> all_ids(total);
  for (std::uint64_t i = 0; i < total; ++i) {
    all_ids[i] = static_cast<ExampleId>(i);
  }
  std::vector<ExampleId> pool = all_ids;
  shuffle_in_place(pool, rng);
  std::vector<ExampleId> exceptions(pool.begin(), pool.begin() + params.k);
  std::sort(exceptions.begin(), exceptions.end());

  Instance inst;
  inst.d = params.d;
  inst.label_count = params.labels;
  inst.k = params.k;
  inst.s = params.s;
  inst.exceptions = exceptions;

  std::unordered_map<ExampleId, std::uint32_t> exception_slot;
  for (std::uint32_t idx = 0; idx < exceptions.size(); ++idx) {
    exception_slot[exceptions[idx]] = idx;
  }

  for (ComponentId c = 0; c < params.m; ++c) {
    Component comp;
    comp.id = c;
    comp.label = comp_label[c];
    inst.representation.components.push_back(std::move(comp));
  }

  for (ExampleId id = 0; id < total; ++id) {
    ComponentId c =
        static_cast<ComponentId>(id / params.examples_per_component);
    Example ex;
    ex.id = id;
    ex.bits.resize(params.d);
    for (std::uint32_t p = 0; p < pair_coords; ++p) {
      if (pairs[p].first == c) {
        ex.bits[p] = true;
      } else if (pairs[p].second == c) {
        ex.bits[p] = false;
      } else {
        ex.bits[p] = random_bit(rng);
      }
    }
    auto slot = exception_slot.find(id);
    for (std::uint32_t e = 0; e < params.k; ++e) {
      ex.bits[pair_coords + e] =
          slot != exception_slot.end() && slot->second == e;
    }
    for (std::uint32_t j = pair_coords + params.k; j < params.d; ++j) {
      ex.bits[j] = random_bit(rng);
    }
    inst.examples.push_back(std::move(ex));
    inst.representation.components[c].members.push_back(id);
    inst.component_of[id] = c;
    inst.concept_label[id] = comp_label[c];
  }

  for (ExampleId id : exceptions) {
    LabelId home = inst.concept_label[id];
    LabelId flipped = static_cast<LabelId>(
        (home + 1 + rng() % (params.labels - 1)) % params.labels);
    inst.concept_label[id] = flipped;
  }

  for (std::uint32_t p = 0; p < pair_coords; ++p) {
    Literal lit{p, true};
    inst.representation.separation.emplace(pairs[p], lit);
    inst.representation.separation.emplace(
        std::make_pair(pairs[p].second, pairs[p].first), lit.negated());
  }

  inst.reindex();
  auto report = validate_instance(inst);
  if (!report.ok()) {
    throw Error(ErrorKind::InvalidArgument,
                "generated instance failed validation: " +
                    report.violations.front().detail);
  }
  return inst;
}

std::string to_string(ExceptionPlacement placement) {
  switch (placement) {
    case ExceptionPlacement::Front: return "front";
    case ExceptionPlacement::Back: return "back";
    case ExceptionPlacement::Uniform: return "uniform";
  }
  return "unknown";
}

ExceptionPlacement exception_placement_from_string(const std::string& name) {
  if (name == "front") return ExceptionPlacement::Front;
  if (name == "back") return ExceptionPlacement::Back;
  if (name == "uniform") return ExceptionPlacement::Uniform;
  throw Error(ErrorKind::InvalidArgument, "unknown placement: " + name);
}

Stream adversarial_stream(const Instance& instance, std::uint64_t n,
                          ExceptionPlacement placement, std::uint64_t seed) {
  std::vector<ExampleId> non_exc;
  for (const auto& ex : instance.examples) {
    if (!instance.is_exception(ex.id)) non_exc.push_back(ex.id);
  }
  if (non_exc.empty()) {
    throw Error(ErrorKind::Infeasible,
                "adversarial stream needs a non-exception example");
  }
  const std::uint64_t k = instance.exceptions.size();
  if (n < k) {
    throw Error(ErrorKind::InvalidArgument,
                "stream length " + std::to_string(n) +
                    " cannot place " + std::to_string(k) + " exceptions");
  }

  std::mt19937_64 rng(seed);
  std::vector<ExampleId> pass = non_exc;
  shuffle_in_place(pass, rng);

  Stream stream;
  stream.init = pass.front();
  std::size_t cursor = 1;
  std::vector<ExampleId> base;
  base.reserve(n - k);
  while (base.size() < n - k) {
    if (cursor == pass.size()) {
      shuffle_in_place(pass, rng);
      cursor = 0;
    }
    base.push_back(pass[cursor++]);
  }

  std::vector<ExampleId> exc_order(instance.exceptions.begin(),
                                   instance.exceptions.end());
  shuffle_in_place(exc_order, rng);

  std::set<std::uint64_t> positions;
  switch (placement) {
    case ExceptionPlacement::Front:
      for (std::uint64_t i = 0; i < k; ++i) positions.insert(i);
      break;
    case ExceptionPlacement::Back:
      for (std::uint64_t i = 0; i < k; ++i) positions.insert(n - k + i);
      break;
    case ExceptionPlacement::Uniform:
      while (positions.size() < k) positions.insert(rng() % n);
      break;
  }

  stream.rounds.reserve(n);
  std::size_t base_cursor = 0;
  std::size_t exc_cursor = 0;
  for (std::uint64_t pos = 0; pos < n; ++pos) {
    if (positions.count(pos)) {
      stream.rounds.push_back(exc_order[exc_cursor++]);
    } else {
      stream.rounds.push_back(base[base_cursor++]);
    }
  }
  return stream;
}

LowerBoundResult lower_bound_stream(std::uint32_t m, std::uint64_t seed) {
  if (m < 2) {
    throw Error(ErrorKind::InvalidArgument,
                "lower bound construction requires m >= 2");
  }
  std::mt19937_64 rng(seed);

  std::vector<std::pair<ComponentId, ComponentId>> pairs;
  std::map<std::pair<ComponentId, ComponentId>, std::uint32_t> pair_index;
  for (ComponentId i = 0; i < m; ++i) {
    for (ComponentId j = i + 1; j < m; ++j) {
      pair_index[{i, j}] = static_cast<std::uint32_t>(pairs.size());
      pairs.emplace_back(i, j);
    }
  }
  const std::uint32_t n_pairs = static_cast<std::uint32_t>(pairs.size());

  std::vector<bool> in_s(n_pairs);
  for (std::uint32_t p = 0; p < n_pairs; ++p) in_s[p] = random_bit(rng);

  Instance inst;
  inst.d = 2 * n_pairs;
  inst.label_count = m;
  inst.k = 0;
  inst.s = 0;

  for (ComponentId c = 0; c < m; ++c) {
    Component comp;
    comp.id = c;
    comp.label = c;
    inst.representation.components.push_back(std::move(comp));
  }

  // Both candidate coordinates of a pair are set to 1 when that value bars
  // the example from the pair's higher-id component, 0 when it bars it from
  // the lower-id one; the example's own pair keeps candidate 0 positive and
  // candidate 1 negative, so the hidden choice decides its component.
  auto exclude_all_but = [&](Bits& bits, ComponentId a) {
    for (ComponentId l = 0; l < m; ++l) {
      if (l == a) continue;
      auto key = a < l ? std::make_pair(a, l) : std::make_pair(l, a);
      std::uint32_t p = pair_index.at(key);
      bool value = a < l;  // 1 bars the higher side, 0 bars the lower side
      bits[2 * p] = value;
      bits[2 * p + 1] = value;
    }
  };

  for (std::uint32_t p = 0; p < n_pairs; ++p) {
    auto [a, b] = pairs[p];
    Example ex;
    ex.id = p;
    ex.bits.resize(inst.d);
    exclude_all_but(ex.bits, a);
    exclude_all_but(ex.bits, b);
    ex.bits[2 * p] = true;
    ex.bits[2 * p + 1] = false;
    inst.examples.push_back(std::move(ex));

    ComponentId home = in_s[p] ? a : b;
    inst.component_of[p] = home;
    inst.concept_label[p] = home;
  }

  Example star;
  star.id = n_pairs;
  star.bits.resize(inst.d);
  exclude_all_but(star.bits, 0);
  inst.examples.push_back(std::move(star));
  inst.component_of[n_pairs] = 0;
  inst.concept_label[n_pairs] = 0;

  for (const auto& ex : inst.examples) {
    inst.representation.components[inst.component_of[ex.id]]
        .members.push_back(ex.id);
  }

  for (std::uint32_t p = 0; p < n_pairs; ++p) {
    std::uint32_t active = in_s[p] ? 0 : 1;
    Literal lit{2 * p + active, true};
    inst.representation.separation.emplace(pairs[p], lit);
    inst.representation.separation.emplace(
        std::make_pair(pairs[p].second, pairs[p].first), lit.negated());
  }

  inst.reindex();
  auto report = validate_instance(inst);
  if (!report.ok()) {
    throw Error(ErrorKind::InvalidArgument,
                "lower bound instance failed validation: " +
                    report.violations.front().detail);
  }

  Stream stream;
  stream.init = star.id;
  stream.rounds.resize(n_pairs);
  for (std::uint32_t p = 0; p < n_pairs; ++p) stream.rounds[p] = p;
  shuffle_in_place(stream.rounds, rng);

  return LowerBoundResult{std::move(inst), std::move(stream)};
}

StochasticSampler::StochasticSampler(const Instance& instance, double eps,
                                     double sigma) {
  if (eps < 0 || eps >= 1) {
    throw Error(ErrorKind::InvalidArgument, "eps must be in [0, 1)");
  }
  if (sigma < 0 || sigma > eps) {
    throw Error(ErrorKind::InvalidArgument, "sigma must be in [0, eps]");
  }
  const std::size_t k = instance.exceptions.size();
  const std::size_t total = instance.examples.size();
  if (total == 0 || total == k) {
    throw Error(ErrorKind::Infeasible,
                "sampler needs at least one non-exception example");
  }

  double w_exc = k == 0 ? 0.0 : std::min(eps / static_cast<double>(k), sigma);
  exception_mass_ = w_exc * static_cast<double>(k);
  double w_non = (1.0 - exception_mass_) / static_cast<double>(total - k);

  weights_.resize(total);
  cumulative_.resize(total);
  double acc = 0.0;
  for (std::size_t i = 0; i < total; ++i) {
    weights_[i] = instance.is_exception(instance.examples[i].id) ? w_exc
                                                                 : w_non;
    acc += weights_[i];
    cumulative_[i] = acc;
  }
  cumulative_.back() = 1.0;
}

std::size_t StochasticSampler::draw_index(std::mt19937_64& rng) const {
  double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
  std::size_t idx = static_cast<std::size_t>(it - cumulative_.begin());
  if (idx >= cumulative_.size()) idx = cumulative_.size() - 1;
  return idx;
}

Stream StochasticSampler::sample(const Instance& instance, std::uint64_t n,
                                 std::uint64_t seed) const {
  std::mt19937_64 rng(seed);
  Stream stream;
  stream.init = instance.examples[draw_index(rng)].id;
  stream.rounds.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    stream.rounds.push_back(instance.examples[draw_index(rng)].id);
  }
  return stream;
}

double StochasticSampler::mass_outside(const Instance& instance,
                                       const std::vector<Rule>& rules) const {
  double mass = 0.0;
  for (std::size_t i = 0; i < instance.examples.size(); ++i) {
    bool inside = false;
    for (const auto& rule : rules) {
      if (rule.matches(instance.examples[i].bits)) {
        inside = true;
        break;
      }
    }
    if (!inside) mass += weights_[i];
  }
  return mass;
}

}  // namespace dff
