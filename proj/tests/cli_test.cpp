#include "commands.hpp"

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "cvmcov/harness.hpp"

namespace cvmcov::cli {
namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

CommonOptions opts(std::size_t capacity, std::uint64_t seed, bool pretokenized = true) {
  CommonOptions o;
  o.capacity = capacity;
  o.seed = seed;
  o.pretokenized = pretokenized;
  return o;
}

template <typename Fn>
Outcome call(Fn&& fn, const CommonOptions& o, const std::string& input) {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = fn(o, in, out, err, nullptr);
  return {code, out.str(), err.str()};
}

Outcome oracle(const CommonOptions& o, const std::string& input) {
  std::istringstream in(input);
  std::ostringstream out, err;
  const int code = run_oracle(o, in, out, err);
  return {code, out.str(), err.str()};
}

bool has_line(const std::string& text, const std::string& line) {
  return ("\n" + text).find("\n" + line + "\n") != std::string::npos;
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("cvmcov_cli_test_" + name);
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

TEST(Estimate, HandCheckableNoHalvingPath) {
  const auto r = call(run_estimate, opts(10, 1), "a\nb\na\n");
  EXPECT_EQ(r.code, kOk);
  EXPECT_TRUE(has_line(r.out, "singletons: 1"));
  EXPECT_TRUE(has_line(r.out, "realized_size: 3"));
  EXPECT_TRUE(has_line(r.out, "level: 0"));
  EXPECT_TRUE(has_line(r.out, "observed: 3"));
  EXPECT_TRUE(has_line(r.out, "estimate: 0.6666666667"));
  EXPECT_TRUE(has_line(r.out, "seed: 1"));
  EXPECT_TRUE(has_line(r.out, "rng: xoshiro256**/splitmix64"));
}

TEST(Estimate, EmptyInputIsEmptySample) {
  EXPECT_EQ(call(run_estimate, opts(10, 1), "").code, kEmptySample);
  auto capacity_policy = opts(10, 1);
  capacity_policy.denominator = DenominatorPolicy::Capacity;
  const auto r = call(run_estimate, capacity_policy, "");
  EXPECT_EQ(r.code, kOk);
  EXPECT_TRUE(has_line(r.out, "estimate: 1"));
}

TEST(Estimate, RetentionFailureExitsTwo) {
  for (std::uint64_t seed = 0; seed < 64; ++seed) {
    const auto r = call(run_estimate, opts(1, seed), "a\n");
    if (r.code == kOk) continue;
    EXPECT_EQ(r.code, kRetentionFailure);
    EXPECT_NE(r.err.find("⊥"), std::string::npos);
    EXPECT_NE(r.err.find("--capacity"), std::string::npos);
    EXPECT_TRUE(r.out.empty());
    return;
  }
  FAIL() << "capacity 1 never hit a retention failure";
}

TEST(Estimate, EncodingErrorExitsOne) {
  const auto r = call(run_estimate, opts(10, 1, false), "fine \xFF bad");
  EXPECT_EQ(r.code, kIoOrConfig);
  EXPECT_NE(r.err.find("byte offset 5"), std::string::npos);
}

TEST(Estimate, MissingFileExitsOne) {
  auto o = opts(10, 1);
  o.input = "/nonexistent/cvmcov/input.txt";
  std::istringstream in;
  std::ostringstream out, err;
  EXPECT_EQ(run_estimate(o, in, out, err), kIoOrConfig);
}

TEST(Estimate, GeneratedSeedGoesToStderr) {
  auto o = opts(10, 0);
  o.seed.reset();
  const auto r = call(run_estimate, o, "x\ny\n");
  EXPECT_EQ(r.code, kOk);
  EXPECT_NE(r.err.find("(generated)"), std::string::npos);
  EXPECT_EQ(r.out.find("(generated)"), std::string::npos);
}

TEST(Estimate, TextModeEchoesPolicy) {
  auto o = opts(50, 3, false);
  o.normalization.lowercase = false;
  const auto r = call(run_estimate, o, "A a A");
  EXPECT_TRUE(has_line(r.out, "normalization: lowercase=off strip_punctuation=on unicode_nfc=on"));
  EXPECT_TRUE(has_line(r.out, "singletons: 1"));
}

TEST(Estimate, DeterministicStdout) {
  std::string input;
  for (int i = 0; i < 5000; ++i) input += "w" + std::to_string(i % 300) + "\n";
  EXPECT_EQ(call(run_estimate, opts(64, 8), input).out, call(run_estimate, opts(64, 8), input).out);
}

TEST(Estimate, PeakBufferBoundedByCapacity) {
  std::string input;
  for (int i = 0; i < 100000; ++i) input += "t" + std::to_string(i % 5000) + " ";
  std::istringstream in(input);
  std::ostringstream out, err;
  RunStats stats;
  ASSERT_EQ(run_estimate(opts(100, 2, false), in, out, err, &stats), kOk);
  EXPECT_EQ(stats.observed, 100000u);
  EXPECT_LE(stats.peak_buffer, 100u);
}

TEST(Distinct, Examples) {
  auto r = call(run_distinct, opts(10, 1), "a\nb\nc\nd\ne\n");
  EXPECT_EQ(r.code, kOk);
  EXPECT_TRUE(has_line(r.out, "distinct_estimate: 5"));
  r = call(run_distinct, opts(10, 1, false), "a a a a");
  EXPECT_TRUE(has_line(r.out, "distinct_estimate: 1"));
}

TEST(Distinct, EstimateIsMultipleOfPowerOfTwo) {
  std::string input;
  for (int i = 0; i < 1000; ++i) input += "label" + std::to_string(i) + "\n";
  const auto r = call(run_distinct, opts(64, 12), input);
  ASSERT_EQ(r.code, kOk);
  auto value_of = [&](const std::string& key) {
    const auto pos = r.out.find(key + ": ");
    return std::stod(r.out.substr(pos + key.size() + 2));
  };
  const double level = value_of("level");
  const double size = value_of("buffer_size");
  EXPECT_GE(level, 1);
  EXPECT_GT(value_of("distinct_estimate"), 0);
  EXPECT_EQ(value_of("distinct_estimate"), size * std::pow(2.0, level));
}

TEST(Oracle, WholeStreamSampleHasFullCoverage) {
  const auto r = oracle(opts(100, 4, false), "a b a c b a");
  EXPECT_EQ(r.code, kOk);
  EXPECT_TRUE(has_line(r.out, "true_coverage: 1"));
  EXPECT_TRUE(has_line(r.out, "covered: 6"));
  EXPECT_TRUE(has_line(r.out, "stream_length: 6"));
  // s = 1 (c), r = 6
  EXPECT_TRUE(has_line(r.out, "estimate: 0.8333333333"));
  EXPECT_TRUE(has_line(r.out, "difference: -0.1666666667"));
}

TEST(Oracle, ReadsFileTwice) {
  const auto path = temp_path("oracle.txt");
  {
    std::ofstream f(path);
    for (int i = 0; i < 3000; ++i) f << "v" << (i * 31 % 211) << ' ';
  }
  auto o = opts(50, 6, false);
  o.input = path.string();
  const auto r = oracle(o, "");
  std::filesystem::remove(path);
  ASSERT_EQ(r.code, kOk) << r.err;
  EXPECT_TRUE(has_line(r.out, "stream_length: 3000"));
  EXPECT_TRUE(has_line(r.out, "observed: 3000"));
}

TEST(Oracle, EmptyStreamIsAnError) {
  EXPECT_EQ(oracle(opts(5, 1), "").code, kEmptySample);
  auto o = opts(5, 1);
  o.denominator = DenominatorPolicy::Capacity;
  EXPECT_EQ(oracle(o, "").code, kIoOrConfig);
}

class Simulate : public ::testing::Test {
 protected:
  void SetUp() override {
    corpus_ = temp_path("corpus.txt");
    std::ofstream f(corpus_);
    for (int i = 0; i < 100; ++i) f << "w" << (i * i % 17) << (i % 10 == 9 ? "\n" : " ");
  }
  void TearDown() override {
    std::filesystem::remove(corpus_);
    std::filesystem::remove(temp_path("rows.csv"));
    std::filesystem::remove(temp_path("rows2.csv"));
    std::filesystem::remove(temp_path("plot.svg"));
  }

  SimulateOptions base() const {
    SimulateOptions s;
    s.common.input = corpus_.string();
    s.common.seed = 21;
    s.sizes = {10};
    s.reps = 1;
    s.csv_path = temp_path("rows.csv").string();
    return s;
  }

  std::filesystem::path corpus_;
};

TEST_F(Simulate, OneRepOneSizeGivesOneRowAndNullSd) {
  std::ostringstream out, err;
  ASSERT_EQ(run_simulate(base(), out, err), kOk) << err.str();
  const auto csv = slurp(temp_path("rows.csv"));
  std::istringstream in(csv);
  EXPECT_EQ(parse_csv(in).size(), 1u);
  EXPECT_NE(out.str().find("null"), std::string::npos);
  EXPECT_TRUE(has_line(out.str(), "corpus_length: 100"));
}

TEST_F(Simulate, RerunIsByteIdentical) {
  auto s = base();
  s.sizes = {5, 10, 20};
  s.reps = 30;
  s.plot_path = temp_path("plot.svg").string();
  std::ostringstream out1, out2, err;
  ASSERT_EQ(run_simulate(s, out1, err), kOk) << err.str();
  const auto first = slurp(temp_path("rows.csv"));
  s.csv_path = temp_path("rows2.csv").string();
  s.threads = 3;
  ASSERT_EQ(run_simulate(s, out2, err), kOk);
  EXPECT_EQ(first, slurp(temp_path("rows2.csv")));
  EXPECT_EQ(out1.str(), out2.str());
  EXPECT_NE(slurp(temp_path("plot.svg")).find("class=\"error-bar\""), std::string::npos);
}

TEST_F(Simulate, InvalidSizesRejectedBeforeReadingInput) {
  auto s = base();
  s.sizes = {50, 10};
  s.common.input = "/nonexistent/corpus";
  std::ostringstream out, err;
  EXPECT_EQ(run_simulate(s, out, err), kIoOrConfig);
  EXPECT_NE(err.str().find("strictly increasing"), std::string::npos);
}

// Process-level checks against the built executable.
Outcome run_binary(const std::string& args, const std::string& stdin_text = "") {
  const auto in_path = temp_path("stdin.txt");
  const auto out_path = temp_path("stdout.txt");
  const auto err_path = temp_path("stderr.txt");
  {
    std::ofstream f(in_path, std::ios::binary);
    f << stdin_text;
  }
  const std::string cmd = std::string(CVMCOV_BINARY) + " " + args + " < " + in_path.string() +
                          " > " + out_path.string() + " 2> " + err_path.string();
  const int status = std::system(cmd.c_str());
  Outcome o{WEXITSTATUS(status), slurp(out_path), slurp(err_path)};
  std::filesystem::remove(in_path);
  std::filesystem::remove(out_path);
  std::filesystem::remove(err_path);
  return o;
}

TEST(Binary, ExitCodes) {
  EXPECT_EQ(run_binary("--help").code, 0);
  EXPECT_EQ(run_binary("estimate").code, kIoOrConfig);  // --capacity missing
  EXPECT_EQ(run_binary("estimate --capacity 0").code, kIoOrConfig);
  EXPECT_EQ(run_binary("estimate --capacity 5 --denominator median").code, kIoOrConfig);
  EXPECT_EQ(run_binary("bogus").code, kIoOrConfig);
  EXPECT_EQ(run_binary("estimate --capacity 5 --seed 1 --pretokenized", "").code, kEmptySample);
  const auto ok = run_binary("estimate --capacity 10 --seed 1 --pretokenized", "a\nb\na\n");
  EXPECT_EQ(ok.code, kOk);
  EXPECT_TRUE(has_line(ok.out, "estimate: 0.6666666667"));
}

TEST(Binary, OracleSpillsStdin) {
  const auto r = run_binary("oracle --capacity 100 --seed 3", "a b a c b a");
  EXPECT_EQ(r.code, kOk) << r.err;
  EXPECT_TRUE(has_line(r.out, "true_coverage: 1"));
}

TEST(Binary, IdenticalFlagsIdenticalStdout) {
  std::string input;
  for (int i = 0; i < 20000; ++i) input += "k" + std::to_string(i % 997) + " ";
  for (const char* cmd : {"estimate", "distinct", "oracle"}) {
    const std::string args = std::string(cmd) + " --capacity 128 --seed 77";
    const auto a = run_binary(args, input);
    const auto b = run_binary(args, input);
    EXPECT_EQ(a.code, kOk) << cmd;
    EXPECT_EQ(a.out, b.out) << cmd;
  }
}

TEST(Binary, SimulateConfigFileAndFlagOverride) {
  const auto corpus = temp_path("sim_corpus.txt");
  const auto config = temp_path("sim.cfg");
  const auto csv = temp_path("sim.csv");
  {
    std::ofstream f(corpus);
    for (int i = 0; i < 400; ++i) f << "c" << (i * 7 % 53) << ' ';
    std::ofstream g(config);
    g << "sizes=8,16\nreps=3\nseed=5\ninput=" << corpus.string() << "\n";
  }
  const auto r = run_binary("simulate --config " + config.string() + " --reps 2 --csv " +
                            csv.string());
  EXPECT_EQ(r.code, kOk) << r.err;
  std::istringstream in(slurp(csv));
  const auto rows = parse_csv(in);
  EXPECT_EQ(rows.size(), 4u);  // 2 sizes x 2 reps (flag overrides reps=3)
  EXPECT_TRUE(has_line(r.out, "seed: 5"));
  EXPECT_TRUE(r.err.empty());
  std::filesystem::remove(corpus);
  std::filesystem::remove(config);
  std::filesystem::remove(csv);
}

}  // namespace
}  // namespace cvmcov::cli
