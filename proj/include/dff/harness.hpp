#pragma once

// Experiment execution: configuration, the protocol loop with per-round
// invariant auditing against ground truth, transcript recording, seed
// sweeps, and closed-form bound verification.
//
// Invariant violations are recorded as data, never thrown: the stochastic
// suites need violation frequencies across seeds.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dff/learner.hpp"
#include "dff/serialize.hpp"
#include "dff/stochastic.hpp"
#include "dff/streams.hpp"
#include "dff/teacher.hpp"
#include "dff/types.hpp"

namespace dff {

enum class LearnerType { Robust, Stochastic, Baseline };

std::string to_string(LearnerType type);
LearnerType learner_type_from_string(const std::string& name);

struct InstanceConfig {
  std::optional<std::string> path;         // load from file
  std::optional<std::string> inline_json;  // embedded instance object
  std::optional<RandomInstanceParams> generate;
  std::optional<std::uint32_t> lower_bound_m;
};

struct TeacherConfig {
  ExceptionStrategy strategy = ExceptionStrategy::SharedFeature;
};

struct LearnerConfig {
  LearnerType type = LearnerType::Robust;
  std::optional<std::uint32_t> m;  // defaults to the instance's m
  std::optional<std::uint32_t> k;  // defaults to the instance's k (robust)
  std::optional<std::uint32_t> s;  // defaults to the instance's s (robust)
  double eps = 0.0;
  double sigma = 0.0;
  double delta = 0.05;
  NkClock nk_clock = NkClock::Creation;
  double log_base = 0.0;  // 0 = natural log
};

struct StreamConfig {
  std::string mode = "adversarial";  // adversarial | stochastic | lower-bound
  std::uint64_t n = 0;
  std::uint64_t seed = 0;
  ExceptionPlacement placement = ExceptionPlacement::Uniform;
  std::optional<std::string> path;  // replay a serialized stream
};

struct SweepSection {
  std::vector<std::uint64_t> seeds;
  std::uint32_t parallelism = 0;  // 0 = hardware concurrency
};

struct OutputSection {
  std::string dir;
  std::vector<std::string> formats;  // e.g. "csv", "json", "transcripts"
};

struct Config {
  std::string id = "default";
  InstanceConfig instance;
  TeacherConfig teacher;
  LearnerConfig learner;
  StreamConfig stream;
  SweepSection sweep;
  OutputSection output;
};

// Parses a config file: either one config object or {"configs": [...]}.
std::vector<Config> configs_from_json(const std::string& text);

struct TranscriptRow {
  std::int64_t t = 0;
  ExampleId example = 0;
  std::string matched;  // "init" | "default" | rule id
  LabelId predicted = 0;
  ExampleId explanation = 0;
  bool correct = true;
  std::optional<Feedback> feedback;
  std::string delta = "none";
  std::optional<std::string> audit;
  std::optional<std::uint32_t> delta_rule;
};

std::string transcript_row_to_json(const TranscriptRow& row);
std::string transcript_to_jsonl(const std::vector<TranscriptRow>& rows);

struct RuleStats {
  std::uint32_t id = 0;
  ExampleId representative = 0;
  bool representative_exception = false;
  std::int64_t created_at = 0;
  std::optional<std::int64_t> deleted_at;
  std::uint64_t mistakes = 0;
};

struct InvariantResult {
  std::string id;  // lemma1..lemma5, counter-cap, lemma6..lemma10
  std::uint64_t violations = 0;
  std::optional<std::int64_t> first_round;
};

struct BoundCheck {
  std::string id;  // thm3, lemma4, lemma5, lemma10
  double bound = 0;
  double observed = 0;
  bool pass = true;
  double margin() const { return bound - observed; }
};

struct CreationDiag {
  std::int64_t t = 0;
  double outside_mass = 0;  // ground-truth mass outside L, pre-creation
};

struct RatePoint {
  std::int64_t t = 0;
  std::uint64_t mistakes = 0;
};

struct TrialReport {
  std::string config_id = "default";
  std::uint64_t seed = 0;
  LearnerType learner_type = LearnerType::Robust;
  std::uint32_t m = 1;
  double k_or_eps = 0;
  double s_or_sigma = 0;
  double delta = 0;
  std::uint64_t n = 0;  // prediction rounds
  std::uint64_t mistakes = 0;
  std::uint32_t rules_created = 0;
  std::uint32_t rules_deleted = 0;
  std::uint64_t audit_flagged = 0;
  std::uint32_t max_distinct_charges = 0;  // realized max |M_{x̂,φ}|
  std::vector<RuleStats> rules;
  std::vector<InvariantResult> invariants;
  std::vector<BoundCheck> bounds;
  std::vector<CreationDiag> creations;   // stochastic only
  std::vector<RatePoint> rate_curve;     // stochastic only
  std::optional<std::string> error;      // trial aborted

  bool invariants_clean() const;
  const InvariantResult* invariant(const std::string& id) const;
  const BoundCheck* bound(const std::string& id) const;
};

std::string trial_report_to_json(const TrialReport& report, int indent = 2);

struct TrialInput {
  const Instance* instance = nullptr;
  Stream stream;
  TeacherConfig teacher;
  LearnerConfig learner;
  std::uint64_t seed = 0;
  std::string config_id = "default";
  bool keep_transcript = true;
  const StochasticSampler* sampler = nullptr;  // stochastic ground truth
};

struct TrialResult {
  TrialReport report;
  std::vector<TranscriptRow> transcript;
};

// Runs the full protocol round by round: prediction, teacher response,
// inconsistency audit, learner update, and ground-truth invariant checks.
// Deterministic given (input, seed).
TrialResult run_trial(const TrialInput& input);

// Closed-form bound checks recomputed from a report's parameters.
std::vector<BoundCheck> verify_bounds(const TrialReport& report);

struct SweepResult {
  std::vector<TrialReport> trials;  // config-major, then seed order
  // Filled only when transcripts were requested; parallel to `trials`.
  std::vector<std::vector<TranscriptRow>> transcripts;

  std::string metrics_csv() const;
  std::string aggregate_json(int indent = 2) const;
};

// Materializes a config's instance (file, inline, generated, or the lower
// bound construction) and the stream for one trial seed. Sub-generators are
// seeded independently from the trial seed.
struct PreparedTrial {
  Instance instance;
  Stream stream;
  std::optional<StochasticSampler> sampler;
};
PreparedTrial prepare_trial(const Config& config, std::uint64_t seed);

// Runs every (config, seed) trial, in parallel when asked. Per-trial
// failures are captured in the report, never aborting the sweep.
SweepResult sweep(const std::vector<Config>& configs,
                  bool keep_transcripts = false);

// Runs a sweep and writes metrics.csv, aggregate.json and (when the config
// output formats include "transcripts") per-trial transcript files.
SweepResult sweep_to_dir(const std::vector<Config>& configs,
                         const std::string& out_dir);

}  // namespace dff
