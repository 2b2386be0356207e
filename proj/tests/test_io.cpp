#include "cli.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

using namespace episteme;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run invoke(std::vector<std::string> args) {
  for (auto& a : args)
    if (a.rfind('@', 0) == 0) a = fixtures::path(a.substr(1));
  std::ostringstream out, err;
  const int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

json parse(const Run& r) { return json::parse(r.out); }

/// Envelope shape every JSON report shares.
void expect_report_shape(const json& j) {
  ASSERT_TRUE(j.is_object());
  ASSERT_TRUE(j.contains("command") && j["command"].is_string());
  ASSERT_TRUE(j.contains("inputs") && j["inputs"].is_object());
  for (const auto& [_, in] : j["inputs"].items()) {
    ASSERT_TRUE(in["file"].is_string());
    ASSERT_TRUE(std::regex_match(in["sha256"].get<std::string>(), std::regex("[0-9a-f]{64}")));
  }
  ASSERT_TRUE(j.contains("verdict") && j["verdict"].is_string());
  ASSERT_TRUE(j.contains("result"));
}

/// Line-oriented check against the subset of the DOT grammar export_dot
/// emits: a digraph of node and edge statements with quoted or bare
/// attribute values.
bool valid_dot(const std::string& text) {
  static const std::string id = R"(([A-Za-z_][A-Za-z0-9_]*|"[^"]*"))";
  static const std::string attr = id + R"(\s*=\s*)" + id;
  static const std::string attrs = R"((\s*\[\s*)" + attr + R"((\s*,\s*)" + attr + R"()*\s*\])?)";
  static const std::regex open(R"(digraph\s+)" + id + R"(\s*\{)");
  static const std::regex node(R"(\s*(node\s*|)" + id + R"())" + attrs + R"(\s*;)");
  static const std::regex edge(R"(\s*)" + id + R"(\s*->\s*)" + id + attrs + R"(\s*;)");
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || !std::regex_match(line, open)) return false;
  bool closed = false;
  while (std::getline(in, line)) {
    if (closed) return false;
    if (line == "}") closed = true;
    else if (!std::regex_match(line, node) && !std::regex_match(line, edge)) return false;
  }
  return closed;
}

std::set<std::string> edges(const std::string& dot) {
  std::set<std::string> out;
  std::istringstream in(dot);
  for (std::string line; std::getline(in, line);)
    if (line.find("->") != std::string::npos) out.insert(line.substr(2));
  return out;
}

int binary_exit(const std::string& args) {
  const std::string cmd = std::string(EPISTEME_BINARY) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

fs::path scratch(const std::string& name) {
  auto p = fs::temp_directory_path() / ("episteme_test_" + name + "_" + std::to_string(::getpid()));
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, HelpAndUsage) {
  auto help = invoke({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("misalign"), std::string::npos);
  EXPECT_EQ(invoke({"--model", "@u4.json", "misalign", "--help"}).code, 0);

  for (const auto& bad : std::vector<std::vector<std::string>>{
           {},
           {"--model", "@u4.json", "frobnicate"},
           {"--model", "@u4.json", "misalign"},
           {"--model", "@u4.json", "misalign", "--space", "full", "--mode", "sideways"},
           {"--model", "@u4.json", "cb", "--space", "full", "--event", "@u4_event_rn.json", "--m", "-1"},
           {"--model", "@u4.json", "classify", "--space", "full", "--profile", "maximal"},
           {"--model", "@u4.json", "--out", "dot", "misalign", "--space", "full"},
           {"misalign", "--space", "full"},
       }) {
    auto r = invoke(bad);
    EXPECT_EQ(r.code, cli::kUsage) << r.out;
    EXPECT_EQ(parse(r)["error"]["kind"], "usage");
  }
}

TEST(Cli, RunningExampleVerdicts) {
  auto mis = invoke({"--model", "@u4.json", "misalign", "--space", "omega_real"});
  EXPECT_EQ(mis.code, 3);
  auto j = parse(mis);
  expect_report_shape(j);
  EXPECT_EQ(j["verdict"], "misaligned");
  EXPECT_EQ(j["result"]["definition"]["witness"]["type_i"], "a.tr");
  EXPECT_EQ(j["result"]["definition"]["witness"]["order_m"], 2);
  EXPECT_EQ(j["result"]["closure"]["witness"]["agent_j"], "b");

  auto aligned = invoke({"--model", "@u4.json", "misalign", "--space", "full", "--mode", "def"});
  EXPECT_EQ(aligned.code, 0);
  EXPECT_FALSE(parse(aligned)["result"].contains("closure"));

  auto cls = parse(invoke({"--model", "@u4.json", "classify", "--space", "omega_real", "--profile", "minimal"}));
  EXPECT_EQ(cls["result"]["cell"], "non-degenerate/non-common");
  EXPECT_EQ(cls["result"]["trade_cell"], "speculative-trade example");

  auto clo = parse(invoke({"--model", "@u4.json", "closure", "--space", "omega_real", "--agent", "b"}));
  EXPECT_EQ(clo["result"]["closure"], json::parse(R"({"a": ["tn"], "b": ["tn"]})"));

  auto rcb = parse(invoke({"--model", "@u4.json", "real-cb", "--space", "omega_real", "--agent", "a", "--event",
                        "@u4_event_rn.json", "--m", "3"}));
  EXPECT_EQ(rcb["result"]["types"], json::parse(R"(["a.tr"])"));
}

TEST(Cli, ModelAndInputErrors) {
  auto missing = invoke({"--model", "@does_not_exist.json", "misalign", "--space", "full"});
  EXPECT_EQ(missing.code, cli::kModelError);
  EXPECT_EQ(parse(missing)["error"]["kind"], "io");

  auto redundant = invoke({"--model", "@u8.json", "misalign", "--space", "full"});
  EXPECT_EQ(redundant.code, cli::kModelError);
  EXPECT_EQ(parse(redundant)["error"]["kind"], "redundant");
  EXPECT_EQ(invoke({"--model", "@u8.json", "--allow-redundant", "misalign", "--space", "full"}).code, 0);

  auto nospace = invoke({"--model", "@u4.json", "misalign", "--space", "nowhere"});
  EXPECT_EQ(nospace.code, cli::kModelError);

  auto open = invoke({"--model", "@u4.json", "prior", "common", "--space", "omega_real"});
  EXPECT_EQ(open.code, cli::kModelError);
  EXPECT_EQ(parse(open)["error"]["kind"], "invalid-input");

  const auto dir = scratch("errors");
  std::ofstream(dir / "half.json") << R"({"r,tr,tn": "1/2"})";
  auto short_pi = invoke({"--model", "@u4.json", "prior", "consistent", "--space", "omega_real", "--pi",
                       (dir / "half.json").string()});
  EXPECT_EQ(short_pi.code, cli::kModelError);
  EXPECT_EQ(parse(short_pi)["error"]["kind"], "probability-sum");
  fs::remove_all(dir);
}

TEST(Cli, BinaryExitCodes) {
  const std::string model = "--model " + fixtures::path("u4.json");
  EXPECT_EQ(binary_exit("--help"), 0);
  EXPECT_EQ(binary_exit(model + " misalign --space omega_real"), 3);
  EXPECT_EQ(binary_exit(model + " misalign --space full"), 0);
  EXPECT_EQ(binary_exit(model + " misalign"), 2);
  EXPECT_EQ(binary_exit("--model /nonexistent misalign --space full"), 1);
  EXPECT_EQ(binary_exit(model + " trade find --space omega_real --sem s1"), 3);
}

TEST(Cli, EveryGoldenRowIsValidAndDeterministic) {
  for (const auto& row : cli::golden_rows()) {
    auto a = invoke(row.args);
    auto b = invoke(row.args);
    EXPECT_EQ(a.code, row.exit_code) << row.name;
    EXPECT_EQ(a.out, b.out) << row.name;
    if (row.name.rfind("dot_", 0) == 0) {
      EXPECT_TRUE(valid_dot(a.out)) << a.out;
    } else {
      expect_report_shape(parse(a));
    }
  }
}

TEST(Cli, ShaOfKnownInput) {
  EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Dot, ArrowPatternOfTheFourStateScenario) {
  auto m = fixtures::u4();
  const auto& full = m.space("full");
  const auto& real = m.space("omega_real");
  DotOptions opt{std::vector<TypeSet>{real.types(0), real.types(1)},
                 parse_event(fixtures::read("u4_event_omega_tilde.json"), m.ambient)};
  const auto text = export_dot(full, opt);
  EXPECT_TRUE(valid_dot(text));
  // s0 = (r,tr,tr), s4 = (r,tr,tn), s5 = (n,tr,tn), s7 = (n,tn,tn)
  EXPECT_EQ(edges(text), (std::set<std::string>{
                             "s0 -> s0 [color=blue];",
                             "s0 -> s0 [color=green, style=dashed];",
                             "s4 -> s0 [color=blue];",
                             "s4 -> s7 [color=green];",
                             "s5 -> s0 [color=blue];",
                             "s5 -> s7 [color=green];",
                             "s7 -> s7 [color=blue, style=dashed];",
                             "s7 -> s7 [color=green];",
                         }));
  EXPECT_NE(text.find("s4 [label=\"r,tr,tn\", style=filled"), std::string::npos);
  EXPECT_EQ(text.find("s0 [label=\"r,tr,tr\", style=filled"), std::string::npos);

  const auto plain = export_dot(full, {std::nullopt, opt.nodes});
  EXPECT_EQ(plain.find("dashed"), std::string::npos);
  EXPECT_EQ(plain.find("[label=\"r,tr,tr\"]"), std::string::npos);  // every node filled
  EXPECT_EQ(edges(plain).size(), 8u);
}

TEST(Dot, FractionLabelsAndReach) {
  auto m = fixtures::u8();
  const auto& sa = m.space("structure_a");
  const auto text = export_dot(sa);
  EXPECT_TRUE(valid_dot(text));
  EXPECT_NE(text.find("label=\"1/2\""), std::string::npos);
  EXPECT_TRUE(belief_reach(sa) == sa.states());  // closed spaces reach nothing new

  auto u4 = fixtures::u4();
  EXPECT_TRUE(belief_reach(u4.space("omega_real")) == parse_event(fixtures::read("u4_event_omega_tilde.json"), u4.ambient));
}

TEST(Reproduce, PassesAndIsByteIdentical) {
  auto a = invoke({"reproduce"});
  auto b = invoke({"reproduce"});
  EXPECT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
  auto j = parse(a);
  expect_report_shape(j);
  EXPECT_EQ(j["verdict"], "pass");
  EXPECT_TRUE(j["result"]["mismatches"].empty());
  EXPECT_EQ(j["result"]["rows"].size(), cli::golden_rows().size());
  EXPECT_FALSE(j.contains("timings"));
  EXPECT_TRUE(parse(invoke({"reproduce", "--timings"})).contains("timings"));
}

TEST(Reproduce, EmptyDirectoryAndMismatches) {
  const auto empty = scratch("empty");
  auto none = invoke({"reproduce", "--fixtures", empty.string()});
  EXPECT_EQ(none.code, cli::kModelError);
  EXPECT_EQ(parse(none)["error"]["kind"], "io");

  const auto copy = scratch("copy");
  fs::copy(EPISTEME_FIXTURE_DIR, copy, fs::copy_options::recursive);
  {
    std::ofstream tamper(copy / "golden" / "misalign_full.out", std::ios::app);
    tamper << " ";
  }
  fs::remove(copy / "golden" / "dot_aligned.out");
  auto r = invoke({"reproduce", "--fixtures", copy.string()});
  EXPECT_EQ(r.code, cli::kModelError);
  auto j = parse(r);
  EXPECT_EQ(j["verdict"], "fail");
  EXPECT_EQ(j["result"]["mismatches"], json::parse(R"(["misalign_full", "dot_aligned"])"));
  fs::remove_all(empty);
  fs::remove_all(copy);
}
