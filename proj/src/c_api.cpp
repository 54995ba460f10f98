#include "dff/dff.h"

#include <cstdlib>
#include <cstring>
#include <string>

#include "dff/core.hpp"
#include "dff/harness.hpp"
#include "dff/serialize.hpp"
#include "dff/streams.hpp"
#include "json.hpp"

struct dff_instance {
  dff::Instance value;
};

struct dff_result {
  dff::TrialResult value;
};

namespace {

thread_local std::string g_last_error;

int status_of(const dff::Error& e) {
  switch (e.kind()) {
    case dff::ErrorKind::InvalidArgument: return DFF_ERR_INVALID_ARGUMENT;
    case dff::ErrorKind::Parse: return DFF_ERR_PARSE;
    case dff::ErrorKind::Infeasible: return DFF_ERR_INFEASIBLE;
    case dff::ErrorKind::SizeLimit: return DFF_ERR_SIZE_LIMIT;
    case dff::ErrorKind::BudgetExceeded: return DFF_ERR_BUDGET_EXCEEDED;
    case dff::ErrorKind::ProtocolViolation: return DFF_ERR_PROTOCOL;
    case dff::ErrorKind::Io: return DFF_ERR_IO;
  }
  return DFF_ERR_INTERNAL;
}

template <typename Fn>
dff_status wrap(Fn&& fn) {
  try {
    fn();
    return DFF_OK;
  } catch (const dff::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DFF_ERR_INTERNAL;
  }
}

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

dff_status require(bool ok, const char* message) {
  if (!ok) {
    g_last_error = message;
    return DFF_ERR_INVALID_ARGUMENT;
  }
  return DFF_OK;
}

}  // namespace

extern "C" {

const char* dff_version(void) { return "1.0.0"; }

const char* dff_last_error(void) { return g_last_error.c_str(); }

void dff_string_free(char* str) { std::free(str); }

void dff_instance_free(dff_instance* instance) { delete instance; }

void dff_result_free(dff_result* result) { delete result; }

dff_status dff_instance_from_json(const char* json, dff_instance** out) {
  if (auto st = require(json && out, "null argument")) return st;
  return wrap([&] {
    auto holder = std::make_unique<dff_instance>();
    holder->value = dff::instance_from_json(json);
    *out = holder.release();
  });
}

dff_status dff_instance_to_json(const dff_instance* instance, char** out) {
  if (auto st = require(instance && out, "null argument")) return st;
  return wrap([&] { *out = dup_string(dff::instance_to_json(instance->value)); });
}

dff_status dff_instance_generate(const char* params_json, dff_instance** out) {
  if (auto st = require(params_json && out, "null argument")) return st;
  return wrap([&] {
    auto doc = nlohmann::json::parse(params_json, nullptr, false);
    if (doc.is_discarded()) {
      throw dff::Error(dff::ErrorKind::Parse, "malformed params JSON");
    }
    dff::RandomInstanceParams params;
    params.m = doc.value("m", 1u);
    params.d = doc.value("d", 1u);
    params.labels = doc.value("labels", 2u);
    params.k = doc.value("k", 0u);
    params.s = doc.value("s", 0u);
    params.examples_per_component = doc.value("examplesPerComponent", 2u);
    params.seed = doc.value("seed", 0ull);
    auto holder = std::make_unique<dff_instance>();
    holder->value = dff::gen_random_instance(params);
    *out = holder.release();
  });
}

dff_status dff_instance_hypercube(uint32_t d, dff_instance** out) {
  if (auto st = require(out != nullptr, "null argument")) return st;
  return wrap([&] {
    auto holder = std::make_unique<dff_instance>();
    holder->value = dff::hypercube_lower_bound_instance(d);
    *out = holder.release();
  });
}

dff_status dff_instance_validate(const dff_instance* instance,
                                 char** report_json) {
  if (auto st = require(instance && report_json, "null argument")) return st;
  return wrap([&] {
    auto report = dff::validate_instance(instance->value);
    *report_json = dup_string(dff::validation_report_to_json(report));
  });
}

dff_status dff_instance_expand(const dff_instance* instance,
                               dff_instance** out) {
  if (auto st = require(instance && out, "null argument")) return st;
  return wrap([&] {
    auto result = dff::expand_representation(instance->value);
    auto holder = std::make_unique<dff_instance>();
    holder->value = dff::expanded_instance(instance->value, result);
    *out = holder.release();
  });
}

dff_status dff_instance_min_size(const dff_instance* instance,
                                 uint32_t max_size, uint64_t work_budget,
                                 int32_t* out_size) {
  if (auto st = require(instance && out_size, "null argument")) return st;
  return wrap([&] {
    auto size = dff::min_exception_free_size(instance->value, max_size,
                                             work_budget);
    *out_size = size ? static_cast<int32_t>(*size) : -1;
  });
}

dff_status dff_instance_lower_bound(uint32_t m, uint64_t seed,
                                    dff_instance** out, char** stream_json) {
  if (auto st = require(out && stream_json, "null argument")) return st;
  return wrap([&] {
    auto result = dff::lower_bound_stream(m, seed);
    auto holder = std::make_unique<dff_instance>();
    holder->value = std::move(result.instance);
    *stream_json = dup_string(dff::stream_to_json(result.stream));
    *out = holder.release();
  });
}

dff_status dff_trial_run(const char* config_json, int64_t seed_override,
                         dff_result** out) {
  if (auto st = require(config_json && out, "null argument")) return st;
  return wrap([&] {
    auto configs = dff::configs_from_json(config_json);
    const dff::Config& config = configs.front();
    std::uint64_t seed = seed_override >= 0
                             ? static_cast<std::uint64_t>(seed_override)
                             : config.stream.seed;
    auto prep = dff::prepare_trial(config, seed);
    dff::TrialInput input;
    input.instance = &prep.instance;
    input.stream = std::move(prep.stream);
    input.teacher = config.teacher;
    input.learner = config.learner;
    input.seed = seed;
    input.config_id = config.id;
    input.keep_transcript = true;
    input.sampler = prep.sampler ? &*prep.sampler : nullptr;
    auto holder = std::make_unique<dff_result>();
    holder->value = dff::run_trial(input);
    *out = holder.release();
  });
}

dff_status dff_result_report_json(const dff_result* result, char** out) {
  if (auto st = require(result && out, "null argument")) return st;
  return wrap([&] {
    *out = dup_string(dff::trial_report_to_json(result->value.report));
  });
}

dff_status dff_result_transcript_jsonl(const dff_result* result, char** out) {
  if (auto st = require(result && out, "null argument")) return st;
  return wrap([&] {
    *out = dup_string(dff::transcript_to_jsonl(result->value.transcript));
  });
}

dff_status dff_sweep_run(const char* config_json, const char* out_dir,
                         char** summary_json) {
  if (auto st = require(config_json && out_dir && summary_json,
                        "null argument"))
    return st;
  return wrap([&] {
    auto configs = dff::configs_from_json(config_json);
    auto result = dff::sweep_to_dir(configs, out_dir);
    *summary_json = dup_string(result.aggregate_json());
  });
}

dff_status dff_verify_bounds(const char* report_json, char** verdict_json) {
  if (auto st = require(report_json && verdict_json, "null argument"))
    return st;
  return wrap([&] {
    auto doc = nlohmann::json::parse(report_json, nullptr, false);
    if (doc.is_discarded()) {
      throw dff::Error(dff::ErrorKind::Parse, "malformed report JSON");
    }
    dff::TrialReport report;
    report.learner_type =
        dff::learner_type_from_string(doc.value("learner", "robust"));
    report.m = doc.value("m", 1u);
    report.k_or_eps = doc.value("kOrEps", 0.0);
    report.s_or_sigma = doc.value("sOrSigma", 0.0);
    report.delta = doc.value("delta", 0.0);
    report.mistakes = doc.value("mistakes", 0ull);
    report.rules_created = doc.value("rulesCreated", 0u);
    if (doc.contains("rules")) {
      for (const auto& entry : doc.at("rules")) {
        dff::RuleStats stats;
        stats.mistakes = entry.value("mistakes", 0ull);
        report.rules.push_back(stats);
      }
    }
    auto checks = dff::verify_bounds(report);
    nlohmann::ordered_json verdict;
    bool all_pass = true;
    nlohmann::ordered_json bounds = nlohmann::ordered_json::object();
    for (const auto& check : checks) {
      bounds[check.id] = {{"bound", check.bound},
                          {"observed", check.observed},
                          {"margin", check.margin()},
                          {"pass", check.pass}};
      all_pass = all_pass && check.pass;
    }
    verdict["bounds"] = std::move(bounds);
    verdict["allPass"] = all_pass;
    *verdict_json = dup_string(verdict.dump(2) + "\n");
  });
}

}  // extern "C"
