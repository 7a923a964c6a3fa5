#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "divkit/cli.hpp"
#include "divkit/util.hpp"
#include "helpers.hpp"

using namespace divkit;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string fixture(const std::string& dir) {
  std::mt19937_64 rng(61);
  auto d = testing::dataset(testing::random_samples(rng, 30, 2, 5, testing::small_vocab(), 3, 8));
  for (std::size_t i = 20; i < 30; ++i) d.samples[i].split = Split::test;
  const auto path = dir + "/d.json";
  std::ofstream(path) << serialize_dataset(d);
  return path;
}

}  // namespace

TEST_CASE("reports do not depend on the worker count") {
  const auto dir = testing::temp_dir("cli_jobs");
  const auto ds = fixture(dir);
  for (std::vector<std::string> cmd : {std::vector<std::string>{"loo", "--dataset", ds, "--iterations", "40", "--metric",
                                                                "bleu4,rouge_l,cider", "--semantic-mask", "--refcounts", "1,2",
                                                                "--variance-bins", "2", "--vocab-mask", "0.9"},
                                       std::vector<std::string>{"stats", "--dataset", ds},
                                       std::vector<std::string>{"semantic", "--dataset", ds}}) {
    auto one = cmd, eight = cmd;
    one.insert(one.end(), {"--seed", "5", "--jobs", "1"});
    eight.insert(eight.end(), {"--seed", "5", "--jobs", "8"});
    const auto a = cli(one), b = cli(eight);
    CHECK(a.code == 0);
    CHECK(a.out == b.out);
    CHECK(!a.out.empty());
  }
  set_jobs(0);
}

TEST_CASE("report envelope") {
  const auto dir = testing::temp_dir("cli_report");
  const auto ds = fixture(dir);
  const auto r = cli({"stats", "--dataset", ds, "--seed", "3"});
  REQUIRE(r.code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["schema_version"] == kReportSchemaVersion);
  CHECK(j["tool_version"] == kToolVersion);
  CHECK(j["command"] == "stats");
  CHECK(j["seed"] == 3);
  CHECK(j["dataset"]["samples"] == 30);
  CHECK(j["results"].contains("evs"));
  CHECK(!j.contains("timing"));
  CHECK(nlohmann::json::parse(cli({"stats", "--dataset", ds, "--timing"}).out).contains("timing"));

  const auto test_only = nlohmann::json::parse(cli({"stats", "--dataset", ds, "--split", "test"}).out);
  CHECK(test_only["dataset"]["samples"] == 10);
}

TEST_CASE("report floats are canonical") {
  CHECK(dump_canonical(nlohmann::json{{"x", 0.1234567891}, {"y", -0.0}}) == "{\n  \"x\": 0.123457,\n  \"y\": 0.0\n}\n");
  CHECK(canonicalize(std::nan("")).is_null());
}

TEST_CASE("coreset writes a CSV curve and reuses its cache") {
  const auto dir = testing::temp_dir("cli_coreset");
  const auto ds = fixture(dir);
  const auto cache = dir + "/cache";
  const std::vector<std::string> args = {"coreset", "--dataset", ds, "--thresholds", "0.2,0.5", "--cache-dir", cache};
  const auto r = cli(args);
  REQUIRE(r.code == 0);
  std::istringstream lines(r.out);
  std::vector<std::string> rows;
  for (std::string l; std::getline(lines, l);) rows.push_back(l);
  REQUIRE(rows.size() == 3);
  CHECK(rows[0] == "threshold,count,coverage_pct");
  CHECK(rows[1].rfind("0.2,", 0) == 0);

  // corrupt every cached matrix: still succeeds, with the recovery exit code
  for (const auto& e : std::filesystem::directory_iterator(cache))
    if (e.path().extension() == ".bin") std::ofstream(e.path(), std::ios::binary) << "garbage";
  const auto again = cli(args);
  CHECK(again.code == exit_code::cache_recovered);
  CHECK(again.out == r.out);
  CHECK(again.err.find("corrupt") != std::string::npos);
  CHECK(cli(args).code == 0);

  const auto json_form = cli({"coreset", "--dataset", ds, "--thresholds", "0.2", "--cache-dir", cache, "--format", "json"});
  CHECK(nlohmann::json::parse(json_form.out)["command"] == "coreset");
}

TEST_CASE("cache directory from the environment") {
  const auto dir = testing::temp_dir("cli_env");
  const auto ds = fixture(dir);
  ::setenv("DIVKIT_CACHE_DIR", (dir + "/envcache").c_str(), 1);
  CHECK(cli({"coreset", "--dataset", ds, "--thresholds", "0.3"}).code == 0);
  ::unsetenv("DIVKIT_CACHE_DIR");
  CHECK(std::filesystem::exists(dir + "/envcache"));
  CHECK(!std::filesystem::is_empty(dir + "/envcache"));
}

TEST_CASE("tokenize prints one line per reference") {
  const auto dir = testing::temp_dir("cli_tok");
  std::ofstream(dir + "/d.json") << R"({"samples":[{"id":"v1","split":"train","references":["A man isn't here.","Dogs"]}]})";
  const auto r = cli({"tokenize", "--dataset", dir + "/d.json"});
  CHECK(r.code == 0);
  CHECK(r.out == "v1\t0\ta man is n't here .\nv1\t1\tdogs\n");
}

TEST_CASE("output file, concepts and splits") {
  const auto dir = testing::temp_dir("cli_misc");
  const auto ds = fixture(dir);
  std::ofstream(dir + "/l.json") << R"({"name":"pets","labels":["dog","ball"]})";
  const auto c = cli({"concepts", "--dataset", ds, "--labels", dir + "/l.json", "--coreset", "--out", dir + "/c.json"});
  REQUIRE(c.code == 0);
  const auto j = nlohmann::json::parse(read_file(dir + "/c.json"));
  CHECK(j["results"]["overlap"]["percent"].get<double>() > 0);
  CHECK(j["results"].contains("concept_coreset"));

  const auto s = cli({"splits", "--dataset", ds, "--axis", "caption_length", "--bins", "3"});
  REQUIRE(s.code == 0);
  CHECK(nlohmann::json::parse(s.out)["bins"].size() == 3);
}

TEST_CASE("exit codes") {
  CHECK(cli({"stats", "--dataset", "/no/such/file.json"}).code == exit_code::input_error);
  CHECK(cli({"stats", "--bogus"}).code == exit_code::usage);
  CHECK(cli({"frobnicate"}).code == exit_code::usage);
  CHECK(cli({}).code == exit_code::usage);
  CHECK(cli({"--version"}).out.find(kToolVersion) != std::string::npos);
  const auto dir = testing::temp_dir("cli_exit");
  std::ofstream(dir + "/bad.json") << R"({"samples":[{"id":"x","split":"train","references":[]}]})";
  const auto r = cli({"loo", "--dataset", dir + "/bad.json"});
  CHECK(r.code == exit_code::input_error);
  CHECK(r.err.find("'x'") != std::string::npos);
}
