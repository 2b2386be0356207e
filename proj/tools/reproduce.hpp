#pragma once

// Golden-file replay of the worked examples. Each row is one CLI invocation
// against the bundled fixtures; its stdout and exit code must match
// golden/<row>.out byte for byte.

#include "report.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace episteme::cli {

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

struct GoldenRow {
  std::string name;
  std::vector<std::string> args;  // "@file" is resolved against the fixture dir
  int exit_code;
};

inline const std::vector<GoldenRow>& golden_rows() {
  static const std::vector<GoldenRow> rows = {
      {"misalign_omega_real", {"--model", "@u4.json", "misalign", "--space", "omega_real", "--mode", "both"}, 3},
      {"misalign_full", {"--model", "@u4.json", "misalign", "--space", "full"}, 0},
      {"closure_a_minimal", {"--model", "@u4.json", "closure", "--space", "omega_real", "--agent", "a"}, 0},
      {"closure_b_minimal", {"--model", "@u4.json", "closure", "--space", "omega_real", "--agent", "b"}, 0},
      {"closure_a_definition",
       {"--model", "@u4.json", "closure", "--space", "omega_real", "--agent", "a", "--mode", "definition"}, 0},
      {"classify_minimal", {"--model", "@u4.json", "classify", "--space", "omega_real", "--profile", "minimal"}, 0},
      {"classify_degenerate", {"--model", "@u4.json", "classify", "--space", "full", "--profile", "space:full"}, 0},
      {"cb_rain_or_not",
       {"--model", "@u4.json", "cb", "--space", "full", "--event", "@u4_event_rn.json", "--m", "inf", "--trace"}, 0},
      {"real_cb_a",
       {"--model", "@u4.json", "real-cb", "--space", "omega_real", "--agent", "a", "--event", "@u4_event_rn.json"}, 0},
      {"real_cb_b",
       {"--model", "@u4.json", "real-cb", "--space", "omega_real", "--agent", "b", "--event", "@u4_event_rn.json"}, 0},
      {"prior_common_full", {"--model", "@u4.json", "prior", "common", "--space", "full"}, 0},
      {"prior_common_rr", {"--model", "@u4.json", "prior", "common", "--space", "rr"}, 0},
      {"prior_common_nn", {"--model", "@u4.json", "prior", "common", "--space", "nn"}, 0},
      {"prior_common_odds_conflict", {"--model", "@odds_conflict.json", "prior", "common", "--space", "full"}, 0},
      {"prior_consistent_check",
       {"--model", "@u4.json", "prior", "consistent", "--space", "omega_real", "--pi", "@u4_pi_half.json"}, 0},
      {"prior_consistent_find", {"--model", "@u4.json", "prior", "consistent", "--space", "omega_real"}, 0},
      {"trade_check_s1",
       {"--model", "@u4.json", "trade", "check", "--space", "omega_real", "--trade", "@u4_rain_bet.json", "--sem", "s1"}, 3},
      {"trade_check_s2",
       {"--model", "@u4.json", "trade", "check", "--space", "omega_real", "--trade", "@u4_rain_bet.json", "--sem", "s2"}, 0},
      {"trade_find_s1", {"--model", "@u4.json", "trade", "find", "--space", "omega_real", "--sem", "s1"}, 3},
      {"trade_find_s2", {"--model", "@u4.json", "trade", "find", "--space", "omega_real", "--sem", "s2"}, 0},
      {"trade_find_common_s1",
       {"--model", "@u4.json", "trade", "find", "--space", "full", "--profile", "space:full", "--sem", "s1"}, 0},
      {"trade_find_common_s2",
       {"--model", "@u4.json", "trade", "find", "--space", "full", "--profile", "space:full", "--sem", "s2"}, 0},
      {"no_trade_classical",
       {"--model", "@shared_belief.json", "trade", "no-trade-theorem", "--space", "full", "--pi", "@shared_pi.json"}, 0},
      {"no_trade_generalized",
       {"--model", "@u4.json", "trade", "no-trade-theorem", "--space", "omega_real", "--profile", "space:full", "--pi",
        "@u4_pi_half.json"},
       0},
      {"no_trade_minimal",
       {"--model", "@u4.json", "trade", "no-trade-theorem", "--space", "omega_real", "--profile", "minimal", "--pi",
        "@u4_pi_half.json"},
       0},
      {"dot_misaligned",
       {"--model", "@u4.json", "dot", "--space", "full", "--real", "omega_real", "--nodes", "@u4_event_omega_tilde.json"}, 0},
      {"dot_aligned", {"--model", "@u4.json", "dot", "--space", "full", "--nodes", "@u4_event_omega_tilde.json"}, 0},
  };
  return rows;
}

struct ReproduceOptions {
  std::string fixture_dir;
  bool update = false;
  bool timings = false;
};

struct ReproduceResult {
  bool ok = false;
  RunReport report;
};

inline std::vector<std::string> resolve_args(const GoldenRow& row, const std::filesystem::path& dir) {
  std::vector<std::string> out;
  for (const auto& a : row.args) out.push_back(a.rfind('@', 0) == 0 ? (dir / a.substr(1)).string() : a);
  return out;
}

/// Golden text: exit code line, then the captured stdout.
inline std::string golden_text(int code, const std::string& stdout_text) {
  return "exit " + std::to_string(code) + "\n" + stdout_text;
}

inline ReproduceResult reproduce(const ReproduceOptions& opt) {
  namespace fs = std::filesystem;
  const fs::path dir(opt.fixture_dir);
  std::vector<fs::path> files;
  if (fs::is_directory(dir))
    for (const auto& e : fs::directory_iterator(dir))
      if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  if (files.empty()) throw InputError("fixture directory '" + opt.fixture_dir + "' has no fixture files");
  std::sort(files.begin(), files.end());

  ReproduceResult res;
  res.report.command = "reproduce";
  for (const auto& f : files) res.report.inputs.push_back({f.filename().string(), f.filename().string(), sha256_hex(read_file(f.string()))});

  const fs::path golden = dir / "golden";
  if (opt.update) fs::create_directories(golden);
  json rows = json::array(), mismatches = json::array(), times = json::object();
  const auto start = std::chrono::steady_clock::now();
  for (const auto& row : golden_rows()) {
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream out, err;
    const int code = run(resolve_args(row, dir), out, err);
    const auto t1 = std::chrono::steady_clock::now();
    times[row.name] = std::chrono::duration<double, std::milli>(t1 - t0).count();
    const std::string got = golden_text(code, out.str());
    const fs::path file = golden / (row.name + ".out");
    std::string status;
    if (opt.update) {
      std::ofstream(file, std::ios::binary) << got;
      status = code == row.exit_code ? "updated" : "exit-mismatch";
    } else if (!fs::exists(file)) {
      status = "missing-golden";
    } else if (code != row.exit_code) {
      status = "exit-mismatch";
    } else {
      status = read_file(file.string()) == got ? "match" : "output-mismatch";
    }
    if (status != "match" && status != "updated") mismatches.push_back(row.name);
    rows.push_back({{"name", row.name}, {"exit", code}, {"expected_exit", row.exit_code}, {"status", status}});
  }
  res.ok = mismatches.empty();
  res.report.verdict = !res.ok ? "fail" : opt.update ? "updated" : "pass";
  res.report.result = {{"rows", std::move(rows)}, {"mismatches", std::move(mismatches)}};
  if (opt.timings) {
    times["total"] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    res.report.timings = std::move(times);
  }
  return res;
}

}  // namespace episteme::cli
