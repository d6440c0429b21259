#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "suites.hpp"

using namespace chernlab;
using namespace chernlab::cli;

namespace {

struct Run {
  int code = -1;
  std::string out;
  std::string err;
};

Run call(std::vector<std::string> args) {
  args.insert(args.begin(), "chernlab");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  Run r;
  r.code = run(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::vector<Json> lines(const std::string& text) {
  std::vector<Json> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(Json::parse(line));
  return out;
}

}  // namespace

TEST_CASE("verify lemma21 through the command line") {
  auto r = call({"verify", "lemma21", "--n", "3", "--trials", "100", "--mode", "exact"});
  CHECK(r.code == 0);
  auto recs = lines(r.out);
  REQUIRE(recs.size() == 100);
  for (const auto& j : recs) {
    CHECK(j["pass"] == true);
    CHECK(j["value"] == 0.0);
    CHECK(j["runtime_ms"] == 0);
  }
  CHECK(recs[7]["parameters"]["trial"] == 7);
  CHECK(r.err.find("100/100") != std::string::npos);

  CHECK(call({"verify", "lemma21", "--n", "1", "--trials", "1"}).code == 0);
  CHECK(call({"verify", "lemma21", "--n", "0"}).code == 2);
  CHECK(call({"verify", "lemma21", "--mode", "fuzzy"}).code == 2);
  CHECK(call({"verify", "lemma21", "--bogus"}).code == 2);
  CHECK(call({"verify"}).code == 2);
  CHECK(call({}).code == 2);
  CHECK(call({"--help"}).code == 0);
}

TEST_CASE("record layout") {
  auto r = call({"charnum", "--model", "torus", "--class", "e"});
  CHECK(r.code == 0);
  auto recs = lines(r.out);
  REQUIRE(recs.size() == 1);
  std::vector<std::string> keys;
  for (auto it = recs[0].begin(); it != recs[0].end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> want{"command", "parameters", "quantity", "value", "expected", "tolerance", "pass", "reliable", "provenance", "runtime_ms", "detail"};
  CHECK(keys == want);
  CHECK(recs[0]["parameters"]["model"] == "torus");
  CHECK(recs[0]["provenance"] == "cohomology ring of torus");

  CHECK(call({"charnum", "--model", "nope", "--class", "e"}).code == 2);
  CHECK(call({"charnum", "--model", "s2", "--class", "c1"}).code == 2);
  CHECK(call({"charnum", "--model", "o1-sum-o1", "--class", "c2", "--grid", "10"}).code == 2);
  CHECK(call({"transgression", "--model", "cp2"}).code == 2);
}

TEST_CASE("unknown expectations are informational") {
  auto r = call({"charnum", "--model", "o-2", "--class", "c1"});
  CHECK(r.code == 0);
  auto recs = lines(r.out);
  CHECK(recs[0]["expected"] == -2.0);
  CHECK(std::abs(recs[0]["value"].get<double>() + 2.0) <= 1e-2);
  auto t = call({"charnum", "--model", "torus-perturbed", "--class", "e", "--grid", "32"});
  CHECK(t.code == 0);
}

TEST_CASE("failing checks exit 1") {
  // an impossible tolerance turns the pass into a failure
  auto r = call({"transgression", "--model", "ts2", "--check", "--grid", "4", "--tol", "1e-300"});
  CHECK(r.code == 1);
  CHECK(r.err.find("FAIL max_residual") != std::string::npos);
}

TEST_CASE("config file presets and flag override") {
  const std::string path = "cli_test_config.ini";
  {
    std::ofstream out(path);
    out << "[charnum]\nmodel=o2\nclass=c1\n";
  }
  auto preset = lines(call({"--config", path, "charnum"}).out);
  REQUIRE(preset.size() == 1);
  CHECK(preset[0]["parameters"]["model"] == "o2");
  auto over = lines(call({"--config", path, "charnum", "--model", "o3"}).out);
  CHECK(over[0]["parameters"]["model"] == "o3");
  CHECK(over[0]["expected"] == 3.0);
  {
    std::ofstream out(path);
    out << "[charnum]\nnot_an_option=1\n";
  }
  CHECK(call({"--config", path, "charnum", "--model", "o1", "--class", "c1"}).code == 2);
  std::remove(path.c_str());
}

TEST_CASE("csv emission") {
  const std::string dir = "cli_test_csv";
  std::filesystem::remove_all(dir);
  auto r = call({"zeros", "--section", "torus-sine", "--emit-csv", dir});
  CHECK(r.code == 0);
  std::ifstream in(dir + "/zeros-torus-sine.csv");
  REQUIRE(in.good());
  std::string line, header;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.rfind("#", 0) == 0) continue;
    if (header.empty()) {
      header = line;
      continue;
    }
    ++rows;
  }
  CHECK(header == "patch,index,flag,x0,x1");
  CHECK(rows == 4);
  std::filesystem::remove_all(dir);
}

TEST_CASE("zeros records and flags") {
  auto recs = lines(call({"zeros", "--section", "s2-rotation"}).out);
  int zeros = 0;
  for (const auto& j : recs) {
    if (j["quantity"] == "zero_index") {
      ++zeros;
      CHECK(j["value"] == 1.0);
      CHECK(j["detail"]["refine_residual"].get<double>() <= 1e-10);
    }
    if (j["quantity"] == "index_sum") CHECK(j["value"] == 2.0);
  }
  CHECK(zeros == 2);
  CHECK(call({"zeros", "--section", "s2-rotation", "--model", "torus"}).code == 2);
  CHECK(call({"zeros", "--section", "nope"}).code == 2);
}

TEST_CASE("same arguments, same bytes") {
  const std::vector<std::string> args{"verify", "pf-squared", "--trials", "5", "--seed", "42"};
  const auto a = call(args), b = call(args);
  CHECK(a.out == b.out);
  CHECK(a.out != call({"verify", "pf-squared", "--trials", "5", "--seed", "43"}).out);
  CHECK(pfaffian_suite({4}, 3, 9, Mode::Float).json_lines() == pfaffian_suite({4}, 3, 9, Mode::Float).json_lines());
  // trial t does not depend on how many trials run
  auto five = lines(call({"verify", "corollary22", "--n", "2", "--trials", "5", "--seed", "3"}).out);
  auto two = lines(call({"verify", "corollary22", "--n", "2", "--trials", "2", "--seed", "3"}).out);
  CHECK(five[1] == two[1]);
}

TEST_CASE("suite functions reject bad arguments") {
  CHECK_THROWS_AS(pfaffian_suite({3}, 1, 1, Mode::Exact), UsageError);
  CHECK_THROWS_AS(pf_squared_suite({2}, 0, 1), UsageError);
  CHECK_THROWS_AS(corollary22_suite({5}, 1, 1), UsageError);
  CHECK_THROWS_AS(whitney_suite(2, 3, 1, 1), UsageError);
  CHECK_THROWS_AS(parse_mode("approx"), UsageError);
  CHECK_THROWS_AS(build_model({"real-s2"}), UsageError);
  CHECK(whitney_suite(1, 2, 3, 5).all_pass());
  CHECK(pfaffian_suite({4}, 3, 5, Mode::Float, 8).all_pass());
}
