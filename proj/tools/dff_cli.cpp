// Command-line front end for the dff shared library.
//
// Subcommands:
//   gen-instance          generate (or build the hypercube) instance JSON
//   run-adversarial       one adversarial trial from a config file
//   run-stochastic        one stochastic trial from a config file
//   run-lower-bound       one trial on the hidden-assignment hard stream
//   expand-representation exception-free expansion of an instance file
//   verify-bounds         re-check closed-form bounds from a report file
//   sweep                 run every (config, seed) trial, write CSV/JSON
//
// The default output directory is --out, then $DFF_OUT_DIR, then ./out.
// --seed overrides the seed found in the config file.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "dff/dff.h"
#include "json.hpp"

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path);
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const std::string& path, const std::string& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw std::runtime_error("cannot write " + path);
  }
  out << data;
}

std::string take_string(char* owned) {
  std::string copy = owned ? owned : "";
  dff_string_free(owned);
  return copy;
}

[[noreturn]] void fail(const std::string& context) {
  std::cerr << "error: " << context << ": " << dff_last_error() << "\n";
  std::exit(1);
}

std::string resolve_out_dir(const std::string& flag_value) {
  if (!flag_value.empty()) return flag_value;
  if (const char* env = std::getenv("DFF_OUT_DIR")) return env;
  return "out";
}

// Patches mode/seed into the config so the subcommand name wins over the
// file contents.
std::string patch_config(const std::string& text, const std::string& mode,
                         std::int64_t seed) {
  auto doc = nlohmann::ordered_json::parse(text);
  if (!mode.empty()) doc["stream"]["mode"] = mode;
  if (seed >= 0) doc["stream"]["seed"] = seed;
  return doc.dump();
}

int run_single(const std::string& config_json, std::int64_t seed,
               const std::string& out_dir) {
  dff_result* result = nullptr;
  if (dff_trial_run(config_json.c_str(), seed, &result) != DFF_OK) {
    fail("run trial");
  }
  char* report_raw = nullptr;
  char* transcript_raw = nullptr;
  dff_result_report_json(result, &report_raw);
  dff_result_transcript_jsonl(result, &transcript_raw);
  std::string report = take_string(report_raw);
  std::string transcript = take_string(transcript_raw);
  dff_result_free(result);

  std::filesystem::create_directories(out_dir);
  write_file(out_dir + "/report.json", report);
  write_file(out_dir + "/transcript.jsonl", transcript);

  auto doc = nlohmann::json::parse(report);
  std::cout << "mistakes: " << doc["mistakes"] << "\n"
            << "rules created: " << doc["rulesCreated"]
            << ", deleted: " << doc["rulesDeleted"] << "\n";
  bool all_pass = true;
  for (const auto& [id, bound] : doc["bounds"].items()) {
    bool pass = bound["pass"].get<bool>();
    all_pass = all_pass && pass;
    std::cout << id << ": " << (pass ? "pass" : "FAIL")
              << " (bound " << bound["bound"] << ", observed "
              << bound["observed"] << ")\n";
  }
  std::cout << "report: " << out_dir << "/report.json\n";
  return all_pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discriminative feature feedback simulator"};
  app.require_subcommand(1);

  // gen-instance
  auto* gen = app.add_subcommand("gen-instance", "Generate an instance file");
  std::uint32_t g_m = 2, g_d = 4, g_labels = 2, g_k = 0, g_s = 0, g_epc = 2;
  std::uint64_t g_seed = 0;
  std::uint32_t g_hypercube = 0;
  std::string g_out;
  gen->add_option("--m", g_m, "components");
  gen->add_option("--d", g_d, "feature count");
  gen->add_option("--labels", g_labels, "label count");
  gen->add_option("--k", g_k, "exceptions");
  gen->add_option("--s", g_s, "similar-exception bound");
  gen->add_option("--epc", g_epc, "examples per component");
  gen->add_option("--seed", g_seed, "generator seed");
  gen->add_option("--hypercube", g_hypercube,
                  "build the d-dimensional hypercube instance instead");
  gen->add_option("--out", g_out, "output file (default stdout)");

  // run-*
  struct RunArgs {
    std::string config;
    std::int64_t seed = -1;
    std::string out;
  };
  RunArgs adv, sto, low;
  std::uint32_t low_m = 0;
  auto add_run = [&](const char* name, const char* desc, RunArgs& args) {
    auto* cmd = app.add_subcommand(name, desc);
    cmd->add_option("--config", args.config, "config JSON file");
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out, "output directory");
    return cmd;
  };
  auto* run_adv =
      add_run("run-adversarial", "Run one adversarial trial", adv);
  auto* run_sto = add_run("run-stochastic", "Run one stochastic trial", sto);
  auto* run_low =
      add_run("run-lower-bound", "Run one lower-bound-stream trial", low);
  run_low->add_option("--m", low_m, "components (builds a minimal config)");

  // expand-representation
  auto* expand = app.add_subcommand("expand-representation",
                                    "Exception-free expansion of an instance");
  std::string e_instance, e_out;
  expand->add_option("--instance", e_instance, "instance JSON file")
      ->required();
  expand->add_option("--out", e_out, "output file (default stdout)");

  // verify-bounds
  auto* verify = app.add_subcommand("verify-bounds",
                                    "Re-check bounds from a report file");
  std::string v_report;
  verify->add_option("--report", v_report, "report JSON file")->required();

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a seed sweep");
  std::string s_config, s_out;
  sweep_cmd->add_option("--config", s_config, "config JSON file")->required();
  sweep_cmd->add_option("--out", s_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      dff_instance* instance = nullptr;
      if (g_hypercube > 0) {
        if (dff_instance_hypercube(g_hypercube, &instance) != DFF_OK) {
          fail("hypercube instance");
        }
      } else {
        nlohmann::json params = {{"m", g_m},
                                 {"d", g_d},
                                 {"labels", g_labels},
                                 {"k", g_k},
                                 {"s", g_s},
                                 {"examplesPerComponent", g_epc},
                                 {"seed", g_seed}};
        if (dff_instance_generate(params.dump().c_str(), &instance) !=
            DFF_OK) {
          fail("generate instance");
        }
      }
      char* json_raw = nullptr;
      dff_instance_to_json(instance, &json_raw);
      std::string json = take_string(json_raw);
      char* report_raw = nullptr;
      dff_instance_validate(instance, &report_raw);
      std::string report = take_string(report_raw);
      dff_instance_free(instance);
      if (g_out.empty()) {
        std::cout << json;
      } else {
        write_file(g_out, json);
        std::cout << "wrote " << g_out << "\n";
      }
      auto doc = nlohmann::json::parse(report);
      std::cerr << "validation: " << (doc["ok"].get<bool>() ? "ok" : "FAILED")
                << "\n";
      return doc["ok"].get<bool>() ? 0 : 1;
    }

    if (run_adv->parsed() || run_sto->parsed() || run_low->parsed()) {
      RunArgs& args = run_adv->parsed() ? adv : run_sto->parsed() ? sto : low;
      std::string mode = run_adv->parsed()
                             ? "adversarial"
                             : run_sto->parsed() ? "stochastic" : "lower-bound";
      std::string config_text;
      if (!args.config.empty()) {
        config_text = read_file(args.config);
      } else if (run_low->parsed() && low_m >= 2) {
        nlohmann::json cfg = {
            {"instance", {{"lowerBound", {{"m", low_m}}}}},
            {"stream", {{"mode", "lower-bound"}, {"seed", 0}}}};
        config_text = cfg.dump();
      } else {
        std::cerr << "error: need --config (or --m for run-lower-bound)\n";
        return 1;
      }
      return run_single(patch_config(config_text, mode, args.seed), -1,
                        resolve_out_dir(args.out));
    }

    if (expand->parsed()) {
      dff_instance* instance = nullptr;
      if (dff_instance_from_json(read_file(e_instance).c_str(), &instance) !=
          DFF_OK) {
        fail("parse instance");
      }
      dff_instance* expanded = nullptr;
      if (dff_instance_expand(instance, &expanded) != DFF_OK) {
        dff_instance_free(instance);
        fail("expand representation");
      }
      char* json_raw = nullptr;
      dff_instance_to_json(expanded, &json_raw);
      std::string json = take_string(json_raw);
      dff_instance_free(instance);
      dff_instance_free(expanded);
      if (e_out.empty()) {
        std::cout << json;
      } else {
        write_file(e_out, json);
        std::cout << "wrote " << e_out << "\n";
      }
      return 0;
    }

    if (verify->parsed()) {
      char* verdict_raw = nullptr;
      if (dff_verify_bounds(read_file(v_report).c_str(), &verdict_raw) !=
          DFF_OK) {
        fail("verify bounds");
      }
      std::string verdict = take_string(verdict_raw);
      std::cout << verdict;
      auto doc = nlohmann::json::parse(verdict);
      return doc["allPass"].get<bool>() ? 0 : 1;
    }

    if (sweep_cmd->parsed()) {
      std::string out_dir = resolve_out_dir(s_out);
      char* summary_raw = nullptr;
      if (dff_sweep_run(read_file(s_config).c_str(), out_dir.c_str(),
                        &summary_raw) != DFF_OK) {
        fail("sweep");
      }
      std::cout << take_string(summary_raw);
      std::cout << "metrics: " << out_dir << "/metrics.csv\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
