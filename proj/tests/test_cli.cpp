#include <gtest/gtest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hermix/hermix.hpp"
#include "models.hpp"

namespace fs = std::filesystem;
using namespace hermix;

namespace {

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("hermix_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    write("model.json", model_to_json_text(models::uniform_pair(0.0, 6.0)));
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  void write(const std::string& name, const std::string& text) const { write_file_atomic(path(name), text); }

  std::string read(const std::string& name) const { return read_file(path(name)); }

  /// Runs the tool in the test directory; stdout goes to `stdout.txt`.
  int run(const std::string& args) const {
    const std::string cmd = "cd '" + dir_.string() + "' && '" HERMIX_CLI_PATH "' --quiet " + args +
                            " > stdout.txt 2> stderr.txt";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  }

  fs::path dir_;
};

std::size_t lines(const std::string& s) { return std::count(s.begin(), s.end(), '\n'); }

}  // namespace

TEST_F(Cli, SampleWritesCsvAndManifest) {
  ASSERT_EQ(run("--seed 5 sample --model model.json --n 100 --out s.csv"), 0);
  EXPECT_EQ(lines(read("s.csv")), 101u);
  const Json m = Json::parse(read("s.csv.manifest.json"));
  EXPECT_EQ(m["command"], "sample");
  EXPECT_EQ(m["seed"], 5);
  EXPECT_EQ(m["output_digests"]["s.csv"], sha256_hex(read("s.csv")));
  EXPECT_EQ(m["input_digests"]["model.json"], sha256_hex(read("model.json")));
}

TEST_F(Cli, SampleIsReproducible) {
  ASSERT_EQ(run("sample --model model.json --n 500 --out a.csv"), 0);
  ASSERT_EQ(run("sample --model model.json --n 500 --out b.csv"), 0);
  EXPECT_EQ(read("a.csv"), read("b.csv"));
  ASSERT_EQ(run("--seed 2 sample --model model.json --n 500 --out c.csv"), 0);
  EXPECT_NE(read("a.csv"), read("c.csv"));
}

TEST_F(Cli, SampleSchemaViolation) {
  auto bad = models::uniform_pair(0.0, 6.0);
  bad.w2 = 0.4;
  write("bad.json", model_to_json_text(bad));
  EXPECT_EQ(run("sample --model bad.json --n 10 --out s.csv"), 2);
  EXPECT_NE(read("stderr.txt").find("weights must sum to 1"), std::string::npos);
  EXPECT_FALSE(fs::exists(path("s.csv")));
}

TEST_F(Cli, MissingInputIsIoError) {
  EXPECT_EQ(run("sample --model nowhere.json --n 10 --out s.csv"), 1);
}

TEST_F(Cli, BadArgumentsExitTwo) {
  EXPECT_EQ(run("sample --model model.json --n 0 --out s.csv"), 2);
  EXPECT_EQ(run("sample --model model.json --out s.csv"), 2);
  EXPECT_EQ(run("frobnicate"), 2);
}

TEST_F(Cli, EstimateWithGivenIntervals) {
  ASSERT_EQ(run("sample --model model.json --n 20000 --out s.csv"), 0);
  ASSERT_EQ(run("estimate --samples s.csv --intervals=-0.5,0.5\\;5.5,6.5 --ell 4 --out e.json"), 0);
  const Json e = Json::parse(read("e.json"));
  EXPECT_EQ(e["ell"], 4);
  EXPECT_EQ(e["lambda_hat"].size(), 8u);
  EXPECT_EQ(e["intervals"][1][0], 5.5);
  ASSERT_EQ(run("estimate --samples s.csv --intervals=-0.5,0.5\\;5.5,6.5 --ell 4 --out e2.json"), 0);
  EXPECT_EQ(read("e.json"), read("e2.json"));
  ASSERT_EQ(run("estimate --samples s.csv --intervals=-0.5,0.5\\;5.5,6.5 --epsilon 0.1 --mode kde --out k.json"), 0);
  EXPECT_EQ(Json::parse(read("k.json"))["ell"], 5);
}

TEST_F(Cli, EstimateErrors) {
  ASSERT_EQ(run("sample --model model.json --n 2000 --out s.csv"), 0);
  EXPECT_EQ(run("estimate --samples s.csv --intervals=-0.5,0.5\\;0.4,1.5 --ell 4 --out e.json"), 2);
  EXPECT_EQ(run("estimate --samples s.csv --intervals=garbage --ell 4 --out e.json"), 2);
  EXPECT_EQ(run("estimate --samples s.csv --intervals=-0.5,0.5\\;5.5,6.5 --ell 4 --epsilon 0.1 --out e.json"), 2);
  EXPECT_FALSE(fs::exists(path("e.json")));
}

TEST_F(Cli, EstimateAutoIntervals) {
  write("far.json", model_to_json_text(models::point_masses(0.0, 30.0)));
  ASSERT_EQ(run("sample --model far.json --n 100000 --out s.csv"), 0);
  ASSERT_EQ(run("estimate --samples s.csv --intervals auto --s-min 0.25 --ell 4 --out e.json"), 0);
  const Json e = Json::parse(read("e.json"));
  ASSERT_TRUE(e.contains("interval_search"));
  EXPECT_LE(e["intervals"][0][0].get<double>(), 0.0);
  EXPECT_GE(e["intervals"][1][1].get<double>(), 30.0);
  ASSERT_EQ(run("find-intervals --samples s.csv --s-min 0.25 --out i.json"), 0);
  EXPECT_EQ(Json::parse(read("i.json"))["i1"], e["interval_search"]["i1"]);
}

TEST_F(Cli, AutoIntervalsFailOnSingleCluster) {
  auto one = models::point_masses(0.0, 6.0);
  one.comp2 = {0.6, 1.6, MixingDensity::point_mass(0.6)};
  write("one.json", model_to_json_text(one));
  ASSERT_EQ(run("sample --model one.json --n 100000 --out s.csv"), 0);
  EXPECT_EQ(run("estimate --samples s.csv --intervals auto --out e.json"), 3);
  EXPECT_EQ(run("find-intervals --samples s.csv --out i.json"), 3);
}

TEST_F(Cli, SingularSystemExitFour) {
  ASSERT_EQ(run("sample --model model.json --n 2000 --out s.csv"), 0);
  // centers 0.2 apart at order 40 and 64 bits: the Gram matrix is numerically singular
  EXPECT_EQ(run("--precision-bits 64 estimate --samples s.csv --intervals=-0.1,0.1\\;0.15,0.25 --ell 40 --out e.json"),
            4);
  EXPECT_NE(read("stderr.txt").find("precision"), std::string::npos);
}

TEST_F(Cli, EvalPrintsTwoErrors) {
  ASSERT_EQ(run("sample --model model.json --n 50000 --out s.csv"), 0);
  ASSERT_EQ(run("estimate --samples s.csv --intervals=-0.5,0.5\\;5.5,6.5 --ell 6 --out e.json"), 0);
  ASSERT_EQ(run("eval --truth model.json --estimate e.json --out v.json"), 0);
  std::istringstream out(read("stdout.txt"));
  double a = -1, b = -1;
  out >> a >> b;
  EXPECT_GE(a, 0.0);
  EXPECT_GE(b, 0.0);
  EXPECT_LT(std::max(a, b), 0.2);
  const Json v = Json::parse(read("v.json"));
  EXPECT_EQ(v["best_ordering"], "direct");
  EXPECT_EQ(v["swapped"].size(), 2u);
  ASSERT_EQ(run("eval --truth model.json --estimate e.json --out v2.json"), 0);
  EXPECT_EQ(read("v.json"), read("v2.json"));
}

TEST_F(Cli, RatesCsv) {
  ASSERT_EQ(run("rates --deltas 0.5,0.25,0.2 --out r.csv"), 0);
  const std::string csv = read("r.csv");
  EXPECT_EQ(lines(csv), 4u);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "delta,m,beta,c_plus,c_minus,balance_error,l2_total,l2_comp,l1_total,l1_comp");
  ASSERT_EQ(run("rates --deltas 0.5,0.25,0.2 --out r2.csv"), 0);
  EXPECT_EQ(csv, read("r2.csv"));
  EXPECT_EQ(Json::parse(read("r.csv.manifest.json"))["extra"]["l1_rounding_bound"].size(), 3u);
  EXPECT_EQ(run("rates --deltas 0.3 --out r3.csv"), 2);
}

TEST_F(Cli, HardInstance) {
  ASSERT_EQ(run("hard-instance --delta 0.2 --out h.json"), 0);
  const Json h = Json::parse(read("h.json"));
  EXPECT_EQ(h["m"], 5);
  EXPECT_NO_THROW(parse_model(h["f"].dump()));
  EXPECT_NO_THROW(parse_model(h["f_prime"].dump()));
  ASSERT_EQ(run("hard-instance --delta 0.2 --out h2.json"), 0);
  EXPECT_EQ(read("h.json"), read("h2.json"));
}

TEST_F(Cli, Distinguish) {
  ASSERT_EQ(run("--seed 7 distinguish --delta 0.25 --n 1000 --trials 500 --out d.json"), 0);
  const double rate = std::stod(read("stdout.txt"));
  EXPECT_GE(rate, 0.0);
  EXPECT_LE(rate, 1.0);
  EXPECT_EQ(Json::parse(read("d.json"))["success_rate"].get<double>(), rate);
  ASSERT_EQ(run("--seed 7 distinguish --delta 0.25 --n 1000 --trials 500 --out d2.json"), 0);
  EXPECT_EQ(read("d.json"), read("d2.json"));
}

TEST_F(Cli, ThreadCountDoesNotChangeOutputs) {
  ASSERT_EQ(run("sample --model model.json --n 30000 --out s.csv"), 0);
  ASSERT_EQ(run("estimate --samples s.csv --intervals=-0.5,0.5\\;5.5,6.5 --ell 5 --out e1.json"), 0);
  setenv("HERMIX_THREADS", "3", 1);
  ASSERT_EQ(run("sample --model model.json --n 30000 --out t.csv"), 0);
  ASSERT_EQ(run("estimate --samples s.csv --intervals=-0.5,0.5\\;5.5,6.5 --ell 5 --out e3.json"), 0);
  unsetenv("HERMIX_THREADS");
  EXPECT_EQ(read("s.csv"), read("t.csv"));
  EXPECT_EQ(read("e1.json"), read("e3.json"));
}

TEST_F(Cli, InputsAreNotModified) {
  const std::string before = read("model.json");
  ASSERT_EQ(run("sample --model model.json --n 100 --out s.csv"), 0);
  const std::string samples = read("s.csv");
  ASSERT_EQ(run("estimate --samples s.csv --intervals=-0.5,0.5\\;5.5,6.5 --ell 3 --out e.json"), 0);
  EXPECT_EQ(read("model.json"), before);
  EXPECT_EQ(read("s.csv"), samples);
}
