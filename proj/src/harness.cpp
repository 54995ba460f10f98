#include "dff/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "json.hpp"

namespace dff {

using ordered_json = nlohmann::ordered_json;

std::string to_string(LearnerType type) {
  switch (type) {
    case LearnerType::Robust: return "robust";
    case LearnerType::Stochastic: return "stochastic";
    case LearnerType::Baseline: return "baseline";
  }
  return "unknown";
}

LearnerType learner_type_from_string(const std::string& name) {
  if (name == "robust") return LearnerType::Robust;
  if (name == "stochastic") return LearnerType::Stochastic;
  if (name == "baseline") return LearnerType::Baseline;
  throw Error(ErrorKind::InvalidArgument, "unknown learner type: " + name);
}

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.10g", v);
  return buf;
}

Config config_from_object(const ordered_json& doc) {
  Config cfg;
  cfg.id = doc.value("id", std::string("default"));

  if (doc.contains("instance")) {
    const auto& inst = doc.at("instance");
    if (inst.contains("path")) {
      cfg.instance.path = inst.at("path").get<std::string>();
    }
    if (inst.contains("data")) {
      cfg.instance.inline_json = inst.at("data").dump();
    }
    if (inst.contains("lowerBound")) {
      cfg.instance.lower_bound_m =
          inst.at("lowerBound").at("m").get<std::uint32_t>();
    }
    if (inst.contains("generate")) {
      const auto& gen = inst.at("generate");
      RandomInstanceParams params;
      params.m = gen.value("m", 1u);
      params.d = gen.value("d", 1u);
      params.labels = gen.value("labels", 2u);
      params.k = gen.value("k", 0u);
      params.s = gen.value("s", 0u);
      params.examples_per_component = gen.value("examplesPerComponent", 2u);
      params.seed = gen.value("seed", 0ull);
      cfg.instance.generate = params;
    }
  }

  if (doc.contains("teacher")) {
    const auto& teach = doc.at("teacher");
    if (teach.contains("strategy")) {
      cfg.teacher.strategy = exception_strategy_from_string(
          teach.at("strategy").get<std::string>());
    }
  }

  if (doc.contains("learner")) {
    const auto& lrn = doc.at("learner");
    if (lrn.contains("type")) {
      cfg.learner.type =
          learner_type_from_string(lrn.at("type").get<std::string>());
    }
    if (lrn.contains("m")) cfg.learner.m = lrn.at("m").get<std::uint32_t>();
    if (lrn.contains("k")) cfg.learner.k = lrn.at("k").get<std::uint32_t>();
    if (lrn.contains("s")) cfg.learner.s = lrn.at("s").get<std::uint32_t>();
    cfg.learner.eps = lrn.value("eps", 0.0);
    cfg.learner.sigma = lrn.value("sigma", 0.0);
    cfg.learner.delta = lrn.value("delta", 0.05);
    if (lrn.contains("nkClock")) {
      cfg.learner.nk_clock =
          nk_clock_from_string(lrn.at("nkClock").get<std::string>());
    }
    cfg.learner.log_base = lrn.value("logBase", 0.0);
  }

  if (doc.contains("stream")) {
    const auto& stream = doc.at("stream");
    cfg.stream.mode = stream.value("mode", std::string("adversarial"));
    cfg.stream.n = stream.value("n", 0ull);
    cfg.stream.seed = stream.value("seed", 0ull);
    if (stream.contains("placement")) {
      cfg.stream.placement = exception_placement_from_string(
          stream.at("placement").get<std::string>());
    }
    if (stream.contains("path")) {
      cfg.stream.path = stream.at("path").get<std::string>();
    }
  }

  if (doc.contains("sweep")) {
    const auto& sweep = doc.at("sweep");
    if (sweep.contains("seeds")) {
      const auto& seeds = sweep.at("seeds");
      if (seeds.is_array()) {
        cfg.sweep.seeds = seeds.get<std::vector<std::uint64_t>>();
      } else {
        auto count = seeds.value("count", 1ull);
        auto base = seeds.value("base", 0ull);
        for (std::uint64_t i = 0; i < count; ++i) {
          cfg.sweep.seeds.push_back(base + i);
        }
      }
    }
    cfg.sweep.parallelism = sweep.value("parallelism", 0u);
  }
  if (cfg.sweep.seeds.empty()) cfg.sweep.seeds.push_back(cfg.stream.seed);

  if (doc.contains("output")) {
    const auto& out = doc.at("output");
    cfg.output.dir = out.value("dir", std::string());
    if (out.contains("formats")) {
      cfg.output.formats = out.at("formats").get<std::vector<std::string>>();
    }
  }

  return cfg;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw Error(ErrorKind::Io, "cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw Error(ErrorKind::Io, "cannot write " + path);
  }
  out << data;
}

}  // namespace

std::vector<Config> configs_from_json(const std::string& text) {
  ordered_json doc = ordered_json::parse(text, nullptr, false);
  if (doc.is_discarded()) {
    throw Error(ErrorKind::Parse, "malformed config JSON");
  }
  std::vector<Config> configs;
  if (doc.contains("configs")) {
    for (const auto& entry : doc.at("configs")) {
      configs.push_back(config_from_object(entry));
    }
  } else {
    configs.push_back(config_from_object(doc));
  }
  if (configs.empty()) {
    throw Error(ErrorKind::InvalidArgument, "config file defines no configs");
  }
  return configs;
}

std::string transcript_row_to_json(const TranscriptRow& row) {
  ordered_json doc;
  doc["t"] = row.t;
  doc["example"] = row.example;
  doc["matched"] = row.matched;
  doc["predicted"] = row.predicted;
  doc["explanation"] = row.explanation;
  doc["correct"] = row.correct;
  if (row.feedback) {
    doc["feedback"] = {{"label", row.feedback->correct_label},
                       {"feature", row.feedback->feature.feature},
                       {"polarity", row.feedback->feature.polarity}};
  } else {
    doc["feedback"] = nullptr;
  }
  doc["delta"] = row.delta;
  doc["audit"] = row.audit ? ordered_json(*row.audit) : ordered_json(nullptr);
  doc["deltaRule"] =
      row.delta_rule ? ordered_json(*row.delta_rule) : ordered_json(nullptr);
  return doc.dump();
}

std::string transcript_to_jsonl(const std::vector<TranscriptRow>& rows) {
  std::string out;
  for (const auto& row : rows) {
    out += transcript_row_to_json(row);
    out += '\n';
  }
  return out;
}

bool TrialReport::invariants_clean() const {
  for (const auto& inv : invariants) {
    if (inv.violations > 0) return false;
  }
  return true;
}

const InvariantResult* TrialReport::invariant(const std::string& id) const {
  for (const auto& inv : invariants) {
    if (inv.id == id) return &inv;
  }
  return nullptr;
}

const BoundCheck* TrialReport::bound(const std::string& id) const {
  for (const auto& b : bounds) {
    if (b.id == id) return &b;
  }
  return nullptr;
}

std::string trial_report_to_json(const TrialReport& report, int indent) {
  ordered_json doc;
  doc["configId"] = report.config_id;
  doc["seed"] = report.seed;
  doc["learner"] = to_string(report.learner_type);
  doc["m"] = report.m;
  doc["kOrEps"] = report.k_or_eps;
  doc["sOrSigma"] = report.s_or_sigma;
  doc["delta"] = report.delta;
  doc["n"] = report.n;
  doc["mistakes"] = report.mistakes;
  doc["rulesCreated"] = report.rules_created;
  doc["rulesDeleted"] = report.rules_deleted;
  doc["auditFlagged"] = report.audit_flagged;
  doc["maxDistinctCharges"] = report.max_distinct_charges;

  ordered_json rules = ordered_json::array();
  for (const auto& r : report.rules) {
    ordered_json entry;
    entry["id"] = r.id;
    entry["representative"] = r.representative;
    entry["representativeException"] = r.representative_exception;
    entry["createdAt"] = r.created_at;
    entry["deletedAt"] =
        r.deleted_at ? ordered_json(*r.deleted_at) : ordered_json(nullptr);
    entry["mistakes"] = r.mistakes;
    rules.push_back(std::move(entry));
  }
  doc["rules"] = std::move(rules);

  ordered_json invariants = ordered_json::object();
  for (const auto& inv : report.invariants) {
    ordered_json entry;
    entry["violations"] = inv.violations;
    entry["firstRound"] =
        inv.first_round ? ordered_json(*inv.first_round) : ordered_json(nullptr);
    invariants[inv.id] = std::move(entry);
  }
  doc["invariants"] = std::move(invariants);

  ordered_json bounds = ordered_json::object();
  for (const auto& b : report.bounds) {
    bounds[b.id] = {{"bound", b.bound},
                    {"observed", b.observed},
                    {"margin", b.margin()},
                    {"pass", b.pass}};
  }
  doc["bounds"] = std::move(bounds);

  if (report.learner_type == LearnerType::Stochastic) {
    ordered_json creations = ordered_json::array();
    for (const auto& c : report.creations) {
      creations.push_back({{"t", c.t}, {"outsideMass", c.outside_mass}});
    }
    doc["creations"] = std::move(creations);
    ordered_json curve = ordered_json::array();
    for (const auto& p : report.rate_curve) {
      curve.push_back({{"t", p.t}, {"mistakes", p.mistakes}});
    }
    doc["rateCurve"] = std::move(curve);
  }

  doc["error"] = report.error ? ordered_json(*report.error) : ordered_json(nullptr);
  return doc.dump(indent) + "\n";
}

namespace {

struct Tally {
  std::uint64_t violations = 0;
  std::optional<std::int64_t> first_round;
  void hit(std::int64_t t) {
    if (violations == 0) first_round = t;
    ++violations;
  }
};

// Ground-truth invariant checks, run incrementally on state deltas.
class InvariantMonitor {
 public:
  InvariantMonitor(const Instance& instance, bool stochastic, std::uint32_t m,
                   std::uint32_t k, std::uint32_t s, double rule_bound)
      : instance_(instance),
        stochastic_(stochastic),
        m_(m),
        k_(k),
        s_(s),
        rule_bound_(rule_bound) {}

  // Lemma "no component split": a refinement of a rule anchored at a
  // non-exception must keep its whole component satisfied, and the feature
  // must uniformly cover some component holding a non-exception.
  void on_refine(ExampleId representative, const Literal& phi,
                 std::int64_t t) {
    if (instance_.is_exception(representative)) return;
    ComponentId home = instance_.home_component(representative);
    const Component* comp = instance_.representation.find_component(home);
    bool clean = true;
    for (ExampleId member : comp->members) {
      if (phi.eval(instance_.example(member).bits)) {
        clean = false;
        break;
      }
    }
    if (clean && !witness_component_exists(phi, home)) clean = false;
    if (!clean) tally(stochastic_ ? "lemma6" : "lemma1").hit(t);
  }

  // Lemma "no duplicate components": two live rules never both sit on the
  // same component via non-exception representatives.
  void on_create(ExampleId representative, const std::vector<Rule>& live,
                 std::uint32_t rules_ever_created, std::int64_t t,
                 double outside_mass, double eps) {
    if (!instance_.is_exception(representative)) {
      ComponentId home = instance_.home_component(representative);
      for (const auto& rule : live) {
        if (rule.representative.id == representative) continue;
        if (instance_.is_exception(rule.representative.id)) continue;
        if (instance_.home_component(rule.representative.id) == home) {
          tally(stochastic_ ? "lemma7" : "lemma2").hit(t);
          break;
        }
      }
    }
    if (stochastic_) {
      if (rules_ever_created > rule_bound_) tally("lemma10").hit(t);
      if (outside_mass >= 0 && outside_mass < 2.0 * eps - 1e-12) {
        tally("lemma9").hit(t);
      }
    } else {
      if (rules_ever_created > m_ + k_) tally("lemma4").hit(t);
    }
  }

  void on_delete(ExampleId representative, std::int64_t t) {
    if (!instance_.is_exception(representative)) {
      tally(stochastic_ ? "lemma8" : "lemma3").hit(t);
    }
  }

  void on_rule_mistakes(std::uint64_t rule_mistakes, std::int64_t t) {
    if (stochastic_) return;
    std::uint64_t bound =
        static_cast<std::uint64_t>(s_ + 1) * (m_ - 1) + k_ + 1;
    if (rule_mistakes > bound) tally("lemma5").hit(t);
  }

  void on_counter(std::int64_t value, std::int64_t t) {
    if (stochastic_) return;
    if (value > static_cast<std::int64_t>(s_)) tally("counter-cap").hit(t);
  }

  std::vector<InvariantResult> results() const {
    std::vector<std::string> ids =
        stochastic_
            ? std::vector<std::string>{"lemma6", "lemma7", "lemma8", "lemma9",
                                       "lemma10"}
            : std::vector<std::string>{"lemma1", "lemma2", "lemma3", "lemma4",
                                       "lemma5", "counter-cap"};
    std::vector<InvariantResult> out;
    for (const auto& id : ids) {
      InvariantResult res;
      res.id = id;
      auto it = tallies_.find(id);
      if (it != tallies_.end()) {
        res.violations = it->second.violations;
        res.first_round = it->second.first_round;
      }
      out.push_back(std::move(res));
    }
    return out;
  }

 private:
  bool witness_component_exists(const Literal& phi, ComponentId home) const {
    for (const auto& comp : instance_.representation.components) {
      if (comp.id == home || comp.members.empty()) continue;
      bool uniform_true = true;
      bool has_non_exception = false;
      for (ExampleId member : comp.members) {
        if (!phi.eval(instance_.example(member).bits)) {
          uniform_true = false;
          break;
        }
        if (!instance_.is_exception(member)) has_non_exception = true;
      }
      if (uniform_true && has_non_exception) return true;
    }
    return false;
  }

  Tally& tally(const std::string& id) { return tallies_[id]; }

  const Instance& instance_;
  bool stochastic_;
  std::uint32_t m_, k_, s_;
  double rule_bound_;
  std::map<std::string, Tally> tallies_;
};

}  // namespace

TrialResult run_trial(const TrialInput& input) {
  const Instance& inst = *input.instance;
  const bool stochastic = input.learner.type == LearnerType::Stochastic;

  std::uint32_t m = input.learner.m.value_or(inst.m());
  std::uint32_t k = input.learner.k.value_or(inst.k);
  std::uint32_t s = input.learner.s.value_or(inst.s);
  if (input.learner.type == LearnerType::Baseline) {
    k = 0;
    s = 0;
  }
  if (m < 1) {
    throw Error(ErrorKind::InvalidArgument, "learner needs m >= 1");
  }

  double log_scale = input.learner.log_base > 0
                         ? 1.0 / std::log(input.learner.log_base)
                         : 1.0;

  TrialResult result;
  TrialReport& report = result.report;
  report.config_id = input.config_id;
  report.seed = input.seed;
  report.learner_type = input.learner.type;
  report.m = m;
  report.k_or_eps = stochastic ? input.learner.eps : static_cast<double>(k);
  report.s_or_sigma =
      stochastic ? input.learner.sigma : static_cast<double>(s);
  report.delta = stochastic ? input.learner.delta : 0.0;
  report.n = input.stream.rounds.size();

  Teacher teacher(inst, input.teacher.strategy, derive_seed(input.seed, 3));
  if (stochastic && input.sampler) {
    teacher.use_mass_budget(input.sampler->weights(), input.learner.sigma);
  }

  const Example& x0 = inst.example(input.stream.init);
  LabelId y0 = inst.concept(x0.id);

  LearnerState robust;
  StroState stro;
  if (stochastic) {
    stro.params.m = m;
    stro.params.eps = input.learner.eps;
    stro.params.sigma = input.learner.sigma;
    stro.params.delta = input.learner.delta;
    stro.params.nk_clock = input.learner.nk_clock;
    stro.params.log_scale = log_scale;
    stro.params.validate();
    stro.init(x0, y0);
  } else {
    robust.params = LearnerParams{m, k, s};
    robust.init(x0, y0);
  }
  auto& rules = stochastic ? stro.base.rules : robust.rules;
  auto rules_ever_created = [&]() {
    return stochastic ? stro.base.rules_ever_created
                      : robust.rules_ever_created;
  };

  FeedbackAuditor auditor;
  auditor.observe_label(x0.id, y0);

  InvariantMonitor monitor(inst, stochastic, m, k, s,
                           stochastic ? stro.params.rule_creation_bound() : 0);
  std::map<std::uint32_t, RuleStats> rule_stats;

  const std::uint64_t checkpoint =
      stochastic ? std::max<std::uint64_t>(1, report.n / 100) : 0;

  if (input.keep_transcript) {
    TranscriptRow row;
    row.t = 0;
    row.example = x0.id;
    row.matched = "init";
    row.predicted = y0;
    row.explanation = x0.id;
    row.correct = true;
    result.transcript.push_back(std::move(row));
  }

  for (std::uint64_t i = 0; i < input.stream.rounds.size(); ++i) {
    const std::int64_t t = static_cast<std::int64_t>(i) + 1;
    const Example& x = inst.example(input.stream.rounds[i]);

    PredictionOutcome outcome =
        stochastic ? predict(stro.base, x) : predict(robust, x);
    LabelId truth = inst.concept(x.id);
    bool correct = outcome.predicted == truth;

    std::optional<std::uint32_t> matched_id;
    if (outcome.matched_rule) matched_id = rules[*outcome.matched_rule].id;

    std::optional<Feedback> feedback;
    std::optional<std::string> audit_flag;
    if (!correct) {
      feedback = teacher.respond(x.id, outcome.predicted, outcome.explanation);
      auto flag = auditor.audit(x, inst.example(outcome.explanation), *feedback);
      if (flag) {
        audit_flag = to_string(*flag);
        ++report.audit_flagged;
      }
    } else {
      auditor.observe_label(x.id, truth);
    }

    if (!correct && matched_id) {
      auto& stats = rule_stats[*matched_id];
      ++stats.mistakes;
      monitor.on_rule_mistakes(stats.mistakes, t);
    }

    // Audited-out feedback is ignored by the learner; the round still
    // advances the stochastic clocks.
    std::optional<Feedback> learner_feedback = audit_flag ? std::nullopt : feedback;

    double outside_mass = -1.0;
    if (stochastic && input.sampler && !outcome.matched_rule &&
        learner_feedback) {
      outside_mass = input.sampler->mass_outside(inst, rules);
    }

    StateDelta delta = stochastic
                           ? stro_step(stro, x, outcome, learner_feedback)
                           : observe(robust, x, outcome, learner_feedback, t);

    switch (delta.tag) {
      case DeltaTag::Create: {
        RuleStats stats;
        stats.id = *delta.rule_id;
        stats.representative = x.id;
        stats.representative_exception = inst.is_exception(x.id);
        stats.created_at = t;
        rule_stats[stats.id] = stats;
        monitor.on_create(x.id, rules, rules_ever_created(), t, outside_mass,
                          input.learner.eps);
        if (stochastic) {
          report.creations.push_back(CreationDiag{t, outside_mass});
        }
        break;
      }
      case DeltaTag::Refine:
        monitor.on_refine(rule_stats[*delta.rule_id].representative,
                          *delta.refined_with, t);
        break;
      case DeltaTag::Delete: {
        auto& stats = rule_stats[*delta.rule_id];
        stats.deleted_at = t;
        ++report.rules_deleted;
        monitor.on_delete(stats.representative, t);
        break;
      }
      case DeltaTag::CounterInc: {
        for (const auto& rule : rules) {
          if (rule.id == *delta.rule_id) {
            auto it = rule.fcount.find(learner_feedback->feature);
            monitor.on_counter(it == rule.fcount.end() ? 0 : it->second, t);
            break;
          }
        }
        break;
      }
      case DeltaTag::None:
        break;
    }

    if (!correct) ++report.mistakes;
    if (stochastic && checkpoint > 0 &&
        (static_cast<std::uint64_t>(t) % checkpoint == 0 ||
         static_cast<std::uint64_t>(t) == report.n)) {
      report.rate_curve.push_back(
          RatePoint{t, report.mistakes});
    }

    if (input.keep_transcript) {
      TranscriptRow row;
      row.t = t;
      row.example = x.id;
      row.matched = matched_id ? std::to_string(*matched_id) : "default";
      row.predicted = outcome.predicted;
      row.explanation = outcome.explanation;
      row.correct = correct;
      row.feedback = feedback;
      row.delta = to_string(delta.tag);
      row.audit = audit_flag;
      row.delta_rule = delta.rule_id;
      result.transcript.push_back(std::move(row));
    }
  }

  report.rules_created = rules_ever_created();
  report.max_distinct_charges = teacher.max_distinct_charges();
  for (const auto& [id, stats] : rule_stats) report.rules.push_back(stats);
  report.invariants = monitor.results();
  report.bounds = verify_bounds(report);
  return result;
}

std::vector<BoundCheck> verify_bounds(const TrialReport& report) {
  std::vector<BoundCheck> checks;
  if (report.learner_type == LearnerType::Stochastic) {
    BoundCheck lemma10;
    lemma10.id = "lemma10";
    lemma10.bound = 4.0 * report.m * std::log(4.0 / report.delta);
    lemma10.observed = static_cast<double>(report.rules_created);
    lemma10.pass = lemma10.observed <= lemma10.bound;
    checks.push_back(lemma10);
    return checks;
  }

  const double m = report.m;
  const double k = report.k_or_eps;
  const double s = report.s_or_sigma;

  BoundCheck thm3;
  thm3.id = "thm3";
  thm3.bound = (m + k) * ((s + 1) * (m - 1) + k + 2);
  thm3.observed = static_cast<double>(report.mistakes);
  thm3.pass = thm3.observed <= thm3.bound;
  checks.push_back(thm3);

  BoundCheck lemma4;
  lemma4.id = "lemma4";
  lemma4.bound = m + k;
  lemma4.observed = static_cast<double>(report.rules_created);
  lemma4.pass = lemma4.observed <= lemma4.bound;
  checks.push_back(lemma4);

  BoundCheck lemma5;
  lemma5.id = "lemma5";
  lemma5.bound = (s + 1) * (m - 1) + k + 1;
  std::uint64_t worst = 0;
  for (const auto& rule : report.rules) {
    worst = std::max(worst, rule.mistakes);
  }
  lemma5.observed = static_cast<double>(worst);
  lemma5.pass = lemma5.observed <= lemma5.bound;
  checks.push_back(lemma5);

  return checks;
}

PreparedTrial prepare_trial(const Config& config, std::uint64_t seed) {
  PreparedTrial prep;

  if (config.stream.mode == "lower-bound" || config.instance.lower_bound_m) {
    std::uint32_t m = config.instance.lower_bound_m.value_or(
        config.learner.m.value_or(0));
    if (m < 2) {
      throw Error(ErrorKind::InvalidArgument,
                  "lower-bound mode needs instance.lowerBound.m >= 2");
    }
    auto lb = lower_bound_stream(m, derive_seed(seed, 1));
    prep.instance = std::move(lb.instance);
    prep.stream = std::move(lb.stream);
    return prep;
  }

  if (config.instance.path) {
    prep.instance = instance_from_json(read_file(*config.instance.path));
  } else if (config.instance.inline_json) {
    prep.instance = instance_from_json(*config.instance.inline_json);
  } else if (config.instance.generate) {
    RandomInstanceParams params = *config.instance.generate;
    params.seed = derive_seed(seed, 1);
    prep.instance = gen_random_instance(params);
  } else {
    throw Error(ErrorKind::InvalidArgument,
                "config has no instance source (path/data/generate)");
  }

  if (config.stream.path) {
    prep.stream = stream_from_json(read_file(*config.stream.path));
    if (config.stream.mode == "stochastic") {
      prep.sampler.emplace(prep.instance, config.learner.eps,
                           config.learner.sigma);
    }
    return prep;
  }

  if (config.stream.mode == "adversarial") {
    std::uint64_t n = config.stream.n;
    if (n == 0) n = 4 * prep.instance.examples.size();
    prep.stream = adversarial_stream(prep.instance, n,
                                     config.stream.placement,
                                     derive_seed(seed, 2));
  } else if (config.stream.mode == "stochastic") {
    if (config.stream.n == 0) {
      throw Error(ErrorKind::InvalidArgument,
                  "stochastic stream needs stream.n > 0");
    }
    prep.sampler.emplace(prep.instance, config.learner.eps,
                         config.learner.sigma);
    prep.stream = prep.sampler->sample(prep.instance, config.stream.n,
                                       derive_seed(seed, 2));
  } else {
    throw Error(ErrorKind::InvalidArgument,
                "unknown stream mode: " + config.stream.mode);
  }
  return prep;
}

namespace {

TrialReport run_one(const Config& config, std::uint64_t seed,
                    bool keep_transcript,
                    std::vector<TranscriptRow>* transcript_out) {
  try {
    PreparedTrial prep = prepare_trial(config, seed);
    TrialInput input;
    input.instance = &prep.instance;
    input.stream = std::move(prep.stream);
    input.teacher = config.teacher;
    input.learner = config.learner;
    input.seed = seed;
    input.config_id = config.id;
    input.keep_transcript = keep_transcript;
    input.sampler = prep.sampler ? &*prep.sampler : nullptr;
    TrialResult result = run_trial(input);
    if (transcript_out) *transcript_out = std::move(result.transcript);
    return result.report;
  } catch (const std::exception& e) {
    TrialReport report;
    report.config_id = config.id;
    report.seed = seed;
    report.learner_type = config.learner.type;
    report.error = e.what();
    return report;
  }
}

}  // namespace

SweepResult sweep(const std::vector<Config>& configs, bool keep_transcripts) {
  if (configs.empty()) {
    throw Error(ErrorKind::InvalidArgument, "sweep needs at least one config");
  }

  struct Task {
    const Config* config;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (const auto& config : configs) {
    for (std::uint64_t seed : config.sweep.seeds) {
      tasks.push_back(Task{&config, seed});
    }
  }

  std::uint32_t parallelism = configs.front().sweep.parallelism;
  if (parallelism == 0) {
    parallelism = std::max(1u, std::thread::hardware_concurrency());
  }
  parallelism = std::min<std::uint32_t>(
      parallelism, static_cast<std::uint32_t>(tasks.size()));

  SweepResult result;
  result.trials.resize(tasks.size());
  std::vector<std::vector<TranscriptRow>> transcripts;
  if (keep_transcripts) transcripts.resize(tasks.size());

  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t idx = next.fetch_add(1);
      if (idx >= tasks.size()) break;
      result.trials[idx] =
          run_one(*tasks[idx].config, tasks[idx].seed, keep_transcripts,
                  keep_transcripts ? &transcripts[idx] : nullptr);
    }
  };

  if (parallelism <= 1) {
    worker();
  } else {
    std::vector<std::thread> threads;
    threads.reserve(parallelism);
    for (std::uint32_t i = 0; i < parallelism; ++i) {
      threads.emplace_back(worker);
    }
    for (auto& thread : threads) thread.join();
  }

  if (keep_transcripts) {
    result.transcripts = std::move(transcripts);
  }
  return result;
}

std::string SweepResult::metrics_csv() const {
  std::string csv =
      "config_id,seed,learner,m,k_or_eps,s_or_sigma,n,mistakes,rules_created,"
      "rules_deleted,thm3_bound,thm3_pass,lemma1,lemma2,lemma3,lemma4,lemma5,"
      "counter_cap,lemma6,lemma7,lemma8,lemma9,lemma10,error\n";
  auto inv_cell = [](const TrialReport& r, const char* id) -> std::string {
    const InvariantResult* inv = r.invariant(id);
    return inv ? std::to_string(inv->violations) : std::string();
  };
  for (const auto& r : trials) {
    csv += r.config_id + ',' + std::to_string(r.seed) + ',' +
           to_string(r.learner_type) + ',' + std::to_string(r.m) + ',' +
           format_double(r.k_or_eps) + ',' + format_double(r.s_or_sigma) +
           ',' + std::to_string(r.n) + ',' + std::to_string(r.mistakes) + ',' +
           std::to_string(r.rules_created) + ',' +
           std::to_string(r.rules_deleted) + ',';
    const BoundCheck* thm3 = r.bound("thm3");
    csv += thm3 ? format_double(thm3->bound) : std::string();
    csv += ',';
    csv += thm3 ? (thm3->pass ? "1" : "0") : std::string();
    for (const char* id : {"lemma1", "lemma2", "lemma3", "lemma4", "lemma5",
                           "counter-cap", "lemma6", "lemma7", "lemma8",
                           "lemma9", "lemma10"}) {
      csv += ',';
      csv += inv_cell(r, id);
    }
    csv += ',';
    if (r.error) csv += *r.error;
    csv += '\n';
  }
  return csv;
}

std::string SweepResult::aggregate_json(int indent) const {
  std::map<std::string, std::vector<const TrialReport*>> by_config;
  std::vector<std::string> order;
  for (const auto& trial : trials) {
    if (!by_config.count(trial.config_id)) order.push_back(trial.config_id);
    by_config[trial.config_id].push_back(&trial);
  }

  ordered_json doc;
  ordered_json configs = ordered_json::array();
  for (const auto& id : order) {
    const auto& group = by_config[id];
    ordered_json entry;
    entry["config"] = id;
    entry["trials"] = group.size();
    std::uint64_t errors = 0;
    std::uint64_t mistakes_sum = 0, mistakes_max = 0;
    std::uint64_t mistakes_min = ~0ull;
    std::uint64_t rules_sum = 0;
    std::map<std::string, std::uint64_t> bound_pass, bound_total;
    std::map<std::string, std::uint64_t> clean_trials, inv_total;
    for (const auto* trial : group) {
      if (trial->error) {
        ++errors;
        continue;
      }
      mistakes_sum += trial->mistakes;
      mistakes_max = std::max(mistakes_max, trial->mistakes);
      mistakes_min = std::min(mistakes_min, trial->mistakes);
      rules_sum += trial->rules_created;
      for (const auto& b : trial->bounds) {
        ++bound_total[b.id];
        if (b.pass) ++bound_pass[b.id];
      }
      for (const auto& inv : trial->invariants) {
        ++inv_total[inv.id];
        if (inv.violations == 0) ++clean_trials[inv.id];
      }
    }
    std::size_t ok = group.size() - errors;
    entry["errors"] = errors;
    if (ok > 0) {
      entry["mistakes"] = {
          {"mean", static_cast<double>(mistakes_sum) / ok},
          {"min", mistakes_min},
          {"max", mistakes_max}};
      entry["rulesCreatedMean"] = static_cast<double>(rules_sum) / ok;
    }
    ordered_json bounds = ordered_json::object();
    for (const auto& [bid, total] : bound_total) {
      bounds[bid] = {{"pass", bound_pass[bid]}, {"total", total}};
    }
    entry["bounds"] = std::move(bounds);
    ordered_json invs = ordered_json::object();
    for (const auto& [iid, total] : inv_total) {
      invs[iid] = {{"cleanTrials", clean_trials[iid]}, {"total", total}};
    }
    entry["invariants"] = std::move(invs);
    configs.push_back(std::move(entry));
  }
  doc["configs"] = std::move(configs);
  doc["totalTrials"] = trials.size();
  return doc.dump(indent) + "\n";
}

SweepResult sweep_to_dir(const std::vector<Config>& configs,
                         const std::string& out_dir) {
  bool want_transcripts = false;
  for (const auto& config : configs) {
    for (const auto& format : config.output.formats) {
      if (format == "transcripts") want_transcripts = true;
    }
  }

  SweepResult result = sweep(configs, want_transcripts);

  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/metrics.csv", result.metrics_csv());
  write_file(out_dir + "/aggregate.json", result.aggregate_json());
  if (want_transcripts) {
    for (std::size_t i = 0; i < result.trials.size(); ++i) {
      const auto& trial = result.trials[i];
      std::string name = out_dir + "/transcript_" + trial.config_id + "_" +
                         std::to_string(trial.seed) + ".jsonl";
      write_file(name, transcript_to_jsonl(result.transcripts[i]));
    }
  }
  return result;
}

}  // namespace dff
