#include "dff/core.hpp"

#include <algorithm>
#include <cstdint>
#include <map>
#include <set>
#include <unordered_set>

namespace dff {

namespace {

std::string pair_str(ComponentId i, ComponentId j) {
  return "(" + std::to_string(i) + "," + std::to_string(j) + ")";
}

}  // namespace

ValidationReport validate_instance(const Instance& instance) {
  ValidationReport report;
  auto flag = [&](ViolationKind kind, std::string detail) {
    report.violations.push_back({kind, std::move(detail)});
  };

  // Structural pass: build local lookups, flagging anything dangling or
  // mis-sized so the semantic checks below cannot crash.
  std::unordered_map<ExampleId, const Example*> by_id;
  for (const auto& ex : instance.examples) {
    if (!by_id.emplace(ex.id, &ex).second) {
      flag(ViolationKind::Malformed,
           "duplicate example id " + std::to_string(ex.id));
    }
    if (ex.bits.size() != instance.d) {
      flag(ViolationKind::Malformed,
           "example " + std::to_string(ex.id) + " has " +
               std::to_string(ex.bits.size()) + " bits, expected " +
               std::to_string(instance.d));
    }
  }

  std::unordered_map<ComponentId, const Component*> comps;
  for (const auto& comp : instance.representation.components) {
    if (!comps.emplace(comp.id, &comp).second) {
      flag(ViolationKind::Malformed,
           "duplicate component id " + std::to_string(comp.id));
    }
    if (comp.label >= instance.label_count) {
      flag(ViolationKind::Malformed,
           "component " + std::to_string(comp.id) + " label out of range");
    }
    for (ExampleId member : comp.members) {
      if (!by_id.count(member)) {
        flag(ViolationKind::Malformed,
             "component " + std::to_string(comp.id) + " member " +
                 std::to_string(member) + " is not an example");
      }
    }
    if (!std::is_sorted(comp.members.begin(), comp.members.end()) ||
        std::adjacent_find(comp.members.begin(), comp.members.end()) !=
            comp.members.end()) {
      flag(ViolationKind::Malformed,
           "component " + std::to_string(comp.id) +
               " members not sorted/unique");
    }
  }

  auto known_example = [&](ExampleId id) { return by_id.count(id) != 0; };
  auto bits_ok = [&](ExampleId id) {
    auto it = by_id.find(id);
    return it != by_id.end() && it->second->bits.size() == instance.d;
  };

  for (const auto& ex : instance.examples) {
    auto lit = instance.concept_label.find(ex.id);
    if (lit == instance.concept_label.end()) {
      flag(ViolationKind::Malformed,
           "example " + std::to_string(ex.id) + " has no concept label");
    } else if (lit->second >= instance.label_count) {
      flag(ViolationKind::Malformed,
           "example " + std::to_string(ex.id) + " concept label out of range");
    }
    auto cit = instance.component_of.find(ex.id);
    if (cit == instance.component_of.end()) {
      flag(ViolationKind::Malformed,
           "example " + std::to_string(ex.id) + " has no home component");
    } else {
      auto comp = comps.find(cit->second);
      if (comp == comps.end()) {
        flag(ViolationKind::Malformed,
             "example " + std::to_string(ex.id) +
                 " home component does not exist");
      } else if (!std::binary_search(comp->second->members.begin(),
                                     comp->second->members.end(), ex.id)) {
        flag(ViolationKind::Malformed,
             "example " + std::to_string(ex.id) +
                 " not a member of its home component " +
                 std::to_string(cit->second));
      }
    }
  }

  if (!std::is_sorted(instance.exceptions.begin(), instance.exceptions.end()) ||
      std::adjacent_find(instance.exceptions.begin(),
                         instance.exceptions.end()) !=
          instance.exceptions.end()) {
    flag(ViolationKind::Malformed, "exception list not sorted/unique");
  }
  for (ExampleId id : instance.exceptions) {
    if (!known_example(id)) {
      flag(ViolationKind::Malformed,
           "exception " + std::to_string(id) + " is not an example");
    }
  }

  std::set<ExampleId> exception_set(instance.exceptions.begin(),
                                    instance.exceptions.end());

  // Coverage: every example appears in at least one component.
  std::unordered_set<ExampleId> covered;
  for (const auto& comp : instance.representation.components) {
    covered.insert(comp.members.begin(), comp.members.end());
  }
  for (const auto& ex : instance.examples) {
    if (!covered.count(ex.id)) {
      flag(ViolationKind::Coverage,
           "example " + std::to_string(ex.id) + " is in no component");
    }
  }

  // Purity: each component is pure in its label except for exceptions.
  for (const auto& comp : instance.representation.components) {
    for (ExampleId member : comp.members) {
      if (exception_set.count(member)) continue;
      auto lit = instance.concept_label.find(member);
      if (lit != instance.concept_label.end() && lit->second != comp.label) {
        flag(ViolationKind::Purity,
             "component " + std::to_string(comp.id) + " member " +
                 std::to_string(member) + " has concept label " +
                 std::to_string(lit->second) + " != " +
                 std::to_string(comp.label));
      }
    }
  }

  // Separation: completeness, example-level validity, negation symmetry.
  const auto& sep = instance.representation.separation;
  for (const auto& a : instance.representation.components) {
    for (const auto& b : instance.representation.components) {
      if (a.id == b.id || a.label == b.label) continue;
      auto it = sep.find({a.id, b.id});
      if (it == sep.end()) {
        flag(ViolationKind::Separation,
             "no separating literal for pair " + pair_str(a.id, b.id));
        continue;
      }
      const Literal& lit = it->second;
      if (lit.feature >= instance.d) {
        flag(ViolationKind::Malformed,
             "separation " + pair_str(a.id, b.id) + " feature out of range");
        continue;
      }
      for (ExampleId member : a.members) {
        if (bits_ok(member) && !lit.eval(by_id.at(member)->bits)) {
          flag(ViolationKind::Separation,
               "literal " + to_string(lit) + " for " + pair_str(a.id, b.id) +
                   " is false on member " + std::to_string(member) + " of " +
                   std::to_string(a.id));
        }
      }
      for (ExampleId member : b.members) {
        if (bits_ok(member) && lit.eval(by_id.at(member)->bits)) {
          flag(ViolationKind::Separation,
               "literal " + to_string(lit) + " for " + pair_str(a.id, b.id) +
                   " is true on member " + std::to_string(member) + " of " +
                   std::to_string(b.id));
        }
      }
      auto rit = sep.find({b.id, a.id});
      if (rit != sep.end() && rit->second != lit.negated()) {
        flag(ViolationKind::Separation,
             "separation " + pair_str(b.id, a.id) +
                 " is not the negation of " + pair_str(a.id, b.id));
      }
    }
  }
  for (const auto& [key, lit] : sep) {
    auto a = comps.find(key.first);
    auto b = comps.find(key.second);
    if (a == comps.end() || b == comps.end()) {
      flag(ViolationKind::Malformed,
           "separation entry " + pair_str(key.first, key.second) +
               " names unknown component");
    } else if (a->second->label == b->second->label) {
      flag(ViolationKind::Separation,
           "separation entry " + pair_str(key.first, key.second) +
               " for same-label pair");
    }
  }

  // Exception set must equal the concept's deviation set exactly.
  for (const auto& ex : instance.examples) {
    auto cit = instance.component_of.find(ex.id);
    auto lit = instance.concept_label.find(ex.id);
    if (cit == instance.component_of.end() ||
        lit == instance.concept_label.end())
      continue;
    auto comp = comps.find(cit->second);
    if (comp == comps.end()) continue;
    bool deviates = lit->second != comp->second->label;
    bool listed = exception_set.count(ex.id) != 0;
    if (deviates && !listed) {
      flag(ViolationKind::ExceptionSet,
           "example " + std::to_string(ex.id) +
               " deviates from its home component but is not listed");
    } else if (!deviates && listed) {
      flag(ViolationKind::ExceptionSet,
           "example " + std::to_string(ex.id) +
               " is listed as an exception but does not deviate");
    }
  }

  if (instance.exceptions.size() > instance.k) {
    flag(ViolationKind::ExceptionCount,
         std::to_string(instance.exceptions.size()) + " exceptions exceed k=" +
             std::to_string(instance.k));
  }
  if (instance.s > instance.k) {
    flag(ViolationKind::ExceptionCount,
         "s=" + std::to_string(instance.s) + " exceeds k=" +
             std::to_string(instance.k));
  }

  return report;
}

Representation normalize_disjoint(
    const Representation& rep,
    const std::unordered_map<ExampleId, ComponentId>& component_of) {
  Representation out;
  out.separation = rep.separation;
  out.components.reserve(rep.components.size());
  for (const auto& comp : rep.components) {
    Component shrunk;
    shrunk.id = comp.id;
    shrunk.label = comp.label;
    for (ExampleId member : comp.members) {
      auto it = component_of.find(member);
      if (it != component_of.end() && it->second == comp.id) {
        shrunk.members.push_back(member);
      }
    }
    out.components.push_back(std::move(shrunk));
  }
  return out;
}

namespace {

// First coordinate where the two bit vectors differ, if any.
std::optional<FeatureIndex> first_difference(const Bits& a, const Bits& b) {
  for (std::size_t j = 0; j < a.size(); ++j) {
    if (a[j] != b[j]) return static_cast<FeatureIndex>(j);
  }
  return std::nullopt;
}

// A literal true on `target` and false on every listed member, if one exists.
std::optional<Literal> literal_isolating(
    const Instance& instance, const Bits& target,
    const std::vector<ExampleId>& members) {
  for (FeatureIndex j = 0; j < instance.d; ++j) {
    bool ok = true;
    for (ExampleId member : members) {
      if (instance.example(member).bits[j] == target[j]) {
        ok = false;
        break;
      }
    }
    if (ok) return Literal{j, target[j]};
  }
  return std::nullopt;
}

}  // namespace

ExpandResult expand_representation(const Instance& instance) {
  auto report = validate_instance(instance);
  if (!report.ok()) {
    throw Error(ErrorKind::InvalidArgument,
                "expand_representation requires a valid instance: " +
                    report.violations.front().detail);
  }

  Representation rep =
      normalize_disjoint(instance.representation, instance.component_of);
  std::unordered_map<ExampleId, ComponentId> component_of =
      instance.component_of;

  ComponentId next_id = 0;
  for (const auto& comp : rep.components) next_id = std::max(next_id, comp.id);
  ++next_id;

  for (ExampleId ex_id : instance.exceptions) {
    const Bits& x_bits = instance.example(ex_id).bits;
    LabelId x_label = instance.concept(ex_id);
    ComponentId home_id = component_of.at(ex_id);

    auto home_it =
        std::find_if(rep.components.begin(), rep.components.end(),
                     [&](const Component& c) { return c.id == home_id; });
    Component home = *home_it;
    rep.components.erase(home_it);

    // Split the home component along the first coordinate on which each
    // member disagrees with the exception; the exception itself becomes a
    // singleton labeled with its concept label.
    std::map<FeatureIndex, Component> buckets;
    for (ExampleId member : home.members) {
      if (member == ex_id) continue;
      auto j = first_difference(instance.example(member).bits, x_bits);
      if (!j) {
        throw Error(ErrorKind::Infeasible,
                    "example " + std::to_string(member) +
                        " is bitwise identical to exception " +
                        std::to_string(ex_id));
      }
      auto [it, fresh] = buckets.try_emplace(*j);
      if (fresh) {
        it->second.id = next_id++;
        it->second.label = home.label;
      }
      it->second.members.push_back(member);
      component_of[member] = it->second.id;
    }

    Component singleton;
    singleton.id = next_id++;
    singleton.label = x_label;
    singleton.members = {ex_id};
    component_of[ex_id] = singleton.id;

    // Drop the retired component's separation entries; buckets and the
    // singleton inherit or get fresh literals below.
    std::map<std::pair<ComponentId, ComponentId>, Literal> inherited;
    for (auto it = rep.separation.begin(); it != rep.separation.end();) {
      if (it->first.first == home_id || it->first.second == home_id) {
        inherited.emplace(it->first, it->second);
        it = rep.separation.erase(it);
      } else {
        ++it;
      }
    }
    auto home_vs = [&](ComponentId other) -> std::optional<Literal> {
      auto it = inherited.find({home_id, other});
      if (it == inherited.end()) return std::nullopt;
      return it->second;
    };

    auto add_pair = [&](ComponentId a, ComponentId b, Literal lit) {
      rep.separation.insert_or_assign({a, b}, lit);
      rep.separation.insert_or_assign({b, a}, lit.negated());
    };

    for (auto& [coord, bucket] : buckets) {
      // Against the singleton: the split coordinate itself.
      add_pair(bucket.id, singleton.id, Literal{coord, !x_bits[coord]});
      // Against surviving components: the retired component's literal.
      for (const auto& other : rep.components) {
        if (other.label == bucket.label) continue;
        if (auto lit = home_vs(other.id)) add_pair(bucket.id, other.id, *lit);
      }
    }

    for (const auto& other : rep.components) {
      if (other.label == x_label) continue;
      if (auto lit = home_vs(other.id)) {
        // The singleton sits inside the retired component, so its literal
        // against `other` still applies.
        add_pair(singleton.id, other.id, *lit);
      } else {
        // `other` shares the retired component's label; a fresh literal
        // against the exception is required.
        auto lit = literal_isolating(instance, x_bits, other.members);
        if (!lit) {
          throw Error(ErrorKind::Infeasible,
                      "no literal separates exception " +
                          std::to_string(ex_id) + " from component " +
                          std::to_string(other.id));
        }
        add_pair(singleton.id, other.id, *lit);
      }
    }

    for (auto& [coord, bucket] : buckets) {
      std::sort(bucket.members.begin(), bucket.members.end());
      rep.components.push_back(std::move(bucket));
    }
    rep.components.push_back(std::move(singleton));
  }

  return ExpandResult{std::move(rep), std::move(component_of)};
}

Instance expanded_instance(const Instance& instance,
                           const ExpandResult& result) {
  Instance out;
  out.d = instance.d;
  out.label_count = instance.label_count;
  out.representation = result.representation;
  out.examples = instance.examples;
  out.component_of = result.component_of;
  out.concept_label = instance.concept_label;
  out.exceptions = {};
  out.k = 0;
  out.s = 0;
  out.reindex();
  return out;
}

Instance hypercube_lower_bound_instance(std::uint32_t d) {
  if (d < 1) {
    throw Error(ErrorKind::InvalidArgument, "hypercube requires d >= 1");
  }
  if (d > 16) {
    throw Error(ErrorKind::SizeLimit,
                "hypercube instance capped at d <= 16, got d=" +
                    std::to_string(d));
  }
  Instance inst;
  inst.d = d;
  inst.label_count = 2;
  inst.k = 1;
  inst.s = 1;

  const std::uint32_t n = 1u << d;
  Component all;
  all.id = 0;
  all.label = 0;
  for (std::uint32_t v = 0; v < n; ++v) {
    Example ex;
    ex.id = v;
    ex.bits.resize(d);
    for (std::uint32_t j = 0; j < d; ++j) ex.bits[j] = (v >> j) & 1u;
    inst.examples.push_back(std::move(ex));
    all.members.push_back(v);
    inst.component_of[v] = 0;
    inst.concept_label[v] = (v == 0) ? 1 : 0;
  }
  inst.representation.components.push_back(std::move(all));
  inst.exceptions = {0};
  inst.reindex();
  return inst;
}

namespace {

struct GroupState {
  LabelId label = 0;
  std::uint64_t uniform1 = 0;  // coordinates where every member is 1
  std::uint64_t uniform0 = 0;  // coordinates where every member is 0
  std::uint32_t size = 0;
};

bool groups_separable(const GroupState& a, const GroupState& b) {
  return ((a.uniform1 & b.uniform0) | (a.uniform0 & b.uniform1)) != 0;
}

struct MinSizeSearch {
  const Instance* instance = nullptr;
  std::vector<std::uint64_t> bits;   // packed example bit vectors
  std::vector<LabelId> labels;       // concept labels by example position
  std::uint64_t full_mask = 0;
  std::uint64_t budget = 0;
  std::uint64_t work = 0;

  bool feasible(std::uint32_t n) {
    std::vector<GroupState> groups(n);
    return place(0, 0, groups);
  }

  bool place(std::size_t idx, std::uint32_t used,
             std::vector<GroupState>& groups) {
    if (++work > budget) {
      throw Error(ErrorKind::BudgetExceeded,
                  "min_exception_free_size search budget exceeded");
    }
    if (idx == bits.size()) return true;
    // First-use group ordering removes permutation symmetry.
    std::uint32_t limit =
        std::min<std::uint32_t>(used + 1, static_cast<std::uint32_t>(groups.size()));
    for (std::uint32_t g = 0; g < limit; ++g) {
      GroupState& grp = groups[g];
      if (grp.size > 0 && grp.label != labels[idx]) continue;
      GroupState saved = grp;
      if (grp.size == 0) {
        grp.label = labels[idx];
        grp.uniform1 = bits[idx];
        grp.uniform0 = ~bits[idx] & full_mask;
      } else {
        grp.uniform1 &= bits[idx];
        grp.uniform0 &= ~bits[idx] & full_mask;
      }
      grp.size++;
      bool ok = true;
      for (std::uint32_t h = 0; h < std::max(used, g + 1); ++h) {
        if (h == g || groups[h].size == 0) continue;
        if (groups[h].label != grp.label && !groups_separable(grp, groups[h])) {
          ok = false;
          break;
        }
      }
      if (ok && place(idx + 1, std::max(used, g + 1), groups)) return true;
      grp = saved;
    }
    return false;
  }
};

}  // namespace

std::optional<std::uint32_t> min_exception_free_size(const Instance& instance,
                                                     std::uint32_t max_size,
                                                     std::uint64_t work_budget) {
  if (instance.d > 64) {
    throw Error(ErrorKind::SizeLimit,
                "min_exception_free_size supports d <= 64");
  }
  if (instance.examples.empty()) return 0;

  MinSizeSearch search;
  search.instance = &instance;
  search.budget = work_budget;
  search.full_mask =
      instance.d == 64 ? ~0ull : ((1ull << instance.d) - 1);
  for (const auto& ex : instance.examples) {
    std::uint64_t packed = 0;
    for (std::uint32_t j = 0; j < instance.d; ++j) {
      if (ex.bits[j]) packed |= 1ull << j;
    }
    search.bits.push_back(packed);
    search.labels.push_back(instance.concept(ex.id));
  }

  for (std::uint32_t n = 1; n <= max_size; ++n) {
    if (search.feasible(n)) return n;
  }
  return std::nullopt;
}

}  // namespace dff
