#include "commands.hpp"

#include <unistd.h>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>

#include "CLI11.hpp"
#include "cvmcov/distinct.hpp"
#include "cvmcov/harness.hpp"
#include "cvmcov/rng.hpp"
#include "cvmcov/sampler.hpp"

namespace cvmcov::cli {
namespace {

InputFormat format_of(const CommonOptions& opts) {
  return opts.pretokenized ? InputFormat::Pretokenized : InputFormat::Text;
}

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed, std::ostream& err) {
  if (seed) return *seed;
  std::random_device rd;
  const std::uint64_t generated = (static_cast<std::uint64_t>(rd()) << 32) | rd();
  err << "seed: " << generated << " (generated)\n";
  return generated;
}

void print_config(std::ostream& out, std::string_view command, const CommonOptions& opts,
                  std::uint64_t seed) {
  out << "command: " << command << '\n'
      << "input: " << opts.input << '\n'
      << "format: " << to_string(format_of(opts)) << '\n'
      << "normalization: " << opts.normalization.describe() << '\n'
      << "rng: " << kRngAlgorithm << '\n'
      << "seed: " << seed << '\n'
      << "capacity: " << opts.capacity << '\n';
}

/// Runs `body(stream)` on stdin or the named file.
template <typename Body>
void with_input(const std::string& path, std::istream& stdin_stream, Body&& body) {
  if (path == "-") {
    body(stdin_stream);
    return;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open input '" + path + "'");
  body(in);
}

void report_retention_failure(std::ostream& err, const RetentionFailure& e) {
  err << "error: retention failure (⊥): the halving at stream index " << e.stream_index()
      << " kept all " << e.capacity() << " entries, so the buffer is still full.\n"
      << "hint: rerun with a larger --capacity or a different --seed\n";
}

/// Converts library exceptions into exit codes.
template <typename Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const RetentionFailure& e) {
    report_retention_failure(err, e);
    return kRetentionFailure;
  } catch (const EmptySample& e) {
    err << "error: " << e.what() << '\n';
    return kEmptySample;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kIoOrConfig;
  }
}

void check_capacity(const CommonOptions& opts) {
  if (opts.capacity == 0) throw std::invalid_argument("--capacity must be at least 1");
}

class TempFile {
 public:
  TempFile() {
    auto pattern = (std::filesystem::temp_directory_path() / "cvmcov-oracle-XXXXXX").string();
    const int fd = ::mkstemp(pattern.data());
    if (fd < 0) throw std::runtime_error("cannot create temporary spill file");
    ::close(fd);
    path_ = pattern;
  }
  ~TempFile() {
    std::error_code ec;
    std::filesystem::remove(path_, ec);
  }
  TempFile(const TempFile&) = delete;
  TempFile& operator=(const TempFile&) = delete;

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace

int run_estimate(const CommonOptions& opts, std::istream& stdin_stream, std::ostream& out,
                 std::ostream& err, RunStats* stats) {
  return guarded(err, [&] {
    check_capacity(opts);
    const std::uint64_t seed = resolve_seed(opts.seed, err);
    CoverageSampler sampler({opts.capacity, seed});
    with_input(opts.input, stdin_stream, [&](std::istream& in) {
      read_tokens(in, format_of(opts), opts.normalization,
                  [&](StreamToken t) { sampler.observe(std::move(t)); });
    });
    if (stats) *stats = RunStats{sampler.observed(), sampler.peak_size()};
    const auto sample = std::move(sampler).finalize();
    const auto estimate = estimate_coverage(sample, opts.denominator);

    print_config(out, "estimate", opts, seed);
    out << "denominator: " << to_string(opts.denominator) << '\n'
        << "observed: " << sample.observed << '\n'
        << "level: " << sample.level << '\n'
        << "inclusion_probability: " << sample.inclusion_probability().to_string() << '\n'
        << "realized_size: " << sample.realized_size << '\n'
        << "singletons: " << estimate.singletons << '\n'
        << "coverage_denominator: " << estimate.denominator << '\n'
        << "estimate: " << format_number(estimate.estimate) << '\n';
    return kOk;
  });
}

int run_distinct(const CommonOptions& opts, std::istream& stdin_stream, std::ostream& out,
                 std::ostream& err, RunStats* stats) {
  return guarded(err, [&] {
    check_capacity(opts);
    const std::uint64_t seed = resolve_seed(opts.seed, err);
    DistinctCounter counter(opts.capacity, seed);
    std::size_t peak = 0;
    with_input(opts.input, stdin_stream, [&](std::istream& in) {
      read_tokens(in, format_of(opts), opts.normalization, [&](StreamToken t) {
        counter.observe(t);
        peak = std::max(peak, counter.size());
      });
    });
    if (stats) *stats = RunStats{counter.observed(), peak};

    print_config(out, "distinct", opts, seed);
    out << "observed: " << counter.observed() << '\n'
        << "level: " << counter.level() << '\n'
        << "buffer_size: " << counter.size() << '\n'
        << "distinct_estimate: " << format_number(counter.estimate()) << '\n';
    return kOk;
  });
}

int run_oracle(const CommonOptions& opts, std::istream& stdin_stream, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    check_capacity(opts);
    const std::uint64_t seed = resolve_seed(opts.seed, err);

    std::optional<TempFile> spill;
    std::string path = opts.input;
    if (path == "-") {
      spill.emplace();
      std::ofstream copy(spill->path(), std::ios::binary);
      // Inserting an empty streambuf sets failbit, so skip it.
      if (stdin_stream.peek() != std::char_traits<char>::eof()) copy << stdin_stream.rdbuf();
      copy.flush();
      if (!copy) throw std::runtime_error("cannot spill stdin to a temporary file");
      path = spill->path();
    }

    CoverageSampler sampler({opts.capacity, seed});
    with_input(path, stdin_stream, [&](std::istream& in) {
      read_tokens(in, format_of(opts), opts.normalization,
                  [&](StreamToken t) { sampler.observe(std::move(t)); });
    });
    const auto sample = std::move(sampler).finalize();
    const auto estimate = estimate_coverage(sample, opts.denominator);

    CoverageScanner<StreamToken> scanner(sample);
    with_input(path, stdin_stream, [&](std::istream& in) {
      read_tokens(in, format_of(opts), opts.normalization,
                  [&](StreamToken t) { scanner.scan(t); });
    });
    const auto truth = scanner.result();

    print_config(out, "oracle", opts, seed);
    out << "denominator: " << to_string(opts.denominator) << '\n'
        << "observed: " << sample.observed << '\n'
        << "level: " << sample.level << '\n'
        << "realized_size: " << sample.realized_size << '\n'
        << "singletons: " << estimate.singletons << '\n'
        << "estimate: " << format_number(estimate.estimate) << '\n'
        << "covered: " << truth.covered_count << '\n'
        << "stream_length: " << truth.stream_length << '\n'
        << "true_coverage: " << format_number(truth.value) << '\n'
        << "difference: " << format_number(estimate.estimate - truth.value) << '\n';
    return kOk;
  });
}

int run_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    ExperimentConfig config;
    config.buffer_sizes = opts.sizes;
    config.replications = opts.reps;
    config.denominator = opts.common.denominator;
    config.normalization = opts.common.normalization;
    config.format = format_of(opts.common);
    config.corpus_source = opts.common.input;
    config.threads = opts.threads;
    config.validate();
    config.base_seed = resolve_seed(opts.common.seed, err);

    const auto tokens = load_tokens(config.corpus_source, config.format, config.normalization);
    const Corpus corpus(tokens);
    const auto rows = run_experiment(config, corpus);
    const auto summary = summarize(rows);

    auto write_file = [](const std::string& path, auto&& writer) {
      std::ofstream file(path, std::ios::binary);
      if (!file) throw std::runtime_error("cannot open '" + path + "' for writing");
      writer(file);
      if (!file) throw std::runtime_error("write to '" + path + "' failed");
    };
    if (!opts.csv_path.empty())
      write_file(opts.csv_path, [&](std::ostream& f) { emit_csv(rows, f); });
    if (!opts.summary_csv_path.empty())
      write_file(opts.summary_csv_path, [&](std::ostream& f) { emit_summary_csv(summary, f); });
    if (!opts.plot_path.empty())
      write_file(opts.plot_path, [&](std::ostream& f) { emit_plot(summary, opts.plot_kind, f); });

    out << "command: simulate\n"
        << "input: " << config.corpus_source << '\n'
        << "format: " << to_string(config.format) << '\n'
        << "normalization: " << config.normalization.describe() << '\n'
        << "rng: " << kRngAlgorithm << '\n'
        << "seed: " << config.base_seed << '\n'
        << "denominator: " << to_string(config.denominator) << '\n'
        << "replications: " << config.replications << '\n'
        << "corpus_length: " << corpus.length() << '\n'
        << "corpus_distinct: " << corpus.distinct() << '\n';
    print_summary_table(summary, out);
    return kOk;
  });
}

int run(int argc, char** argv) {
  CLI::App app{"Streaming sample coverage estimation with a modified CVM sampler"};
  app.require_subcommand(1);

  CommonOptions common;
  SimulateOptions sim;
  std::string denominator = "realized";
  std::string plot_kind = "error_bars";
  std::string sizes;
  std::string config_path;
  bool no_lowercase = false;
  bool keep_punctuation = false;
  bool no_nfc = false;

  auto add_common = [&](CLI::App* cmd, bool needs_capacity) {
    cmd->add_option("-i,--input", common.input, "Input file, or - for stdin")->capture_default_str();
    cmd->add_flag("--pretokenized", common.pretokenized, "Input is one label per line");
    cmd->add_option("--seed", common.seed, "RNG seed (generated and printed to stderr if omitted)");
    if (needs_capacity)
      cmd->add_option("-n,--capacity", common.capacity, "Buffer size n")
          ->required()
          ->check(CLI::PositiveNumber);
    cmd->add_option("--denominator", denominator, "Coverage denominator: realized or capacity")
        ->check(CLI::IsMember({"realized", "capacity"}))
        ->capture_default_str();
    cmd->add_flag("--no-lowercase", no_lowercase, "Keep letter case");
    cmd->add_flag("--keep-punctuation", keep_punctuation, "Keep leading/trailing punctuation");
    cmd->add_flag("--no-nfc", no_nfc, "Skip Unicode NFC normalization");
  };

  auto* estimate = app.add_subcommand("estimate", "Single-pass coverage estimate (bounded memory)");
  add_common(estimate, true);
  auto* distinct = app.add_subcommand("distinct", "CVM distinct-element estimate (bounded memory)");
  add_common(distinct, true);
  auto* oracle = app.add_subcommand(
      "oracle", "Estimate plus exact true coverage. NOT streaming: reads the input twice");
  add_common(oracle, true);
  auto* simulate = app.add_subcommand("simulate", "Monte-Carlo experiment over buffer sizes");
  common.input = CVMCOV_DEFAULT_CORPUS;
  add_common(simulate, false);
  common.input = "-";
  simulate->add_option("--config", config_path, "Flat key=value config file (flags override)");
  simulate->add_option("--sizes", sizes, "Comma-separated, strictly increasing buffer sizes");
  simulate->add_option("--reps", sim.reps, "Replications per buffer size")->check(CLI::PositiveNumber);
  simulate->add_option("--csv", sim.csv_path, "Per-replication CSV output");
  simulate->add_option("--summary-csv", sim.summary_csv_path, "Per-size summary CSV output");
  simulate->add_option("--plot", sim.plot_path, "SVG chart output");
  simulate->add_option("--plot-kind", plot_kind, "scatter or error_bars")
      ->check(CLI::IsMember({"scatter", "error_bars"}))
      ->capture_default_str();
  simulate->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kIoOrConfig;
  }

  common.denominator = parse_denominator_policy(denominator);
  common.normalization = NormalizationPolicy{!no_lowercase, !keep_punctuation, !no_nfc};

  if (*estimate) return run_estimate(common, std::cin, std::cout, std::cerr);
  if (*distinct) return run_distinct(common, std::cin, std::cout, std::cerr);
  if (*oracle) return run_oracle(common, std::cin, std::cout, std::cerr);

  return guarded(std::cerr, [&] {
    if (simulate->get_option("--input")->count() == 0) common.input = CVMCOV_DEFAULT_CORPUS;
    sim.common = common;
    sim.sizes = {100, 250, 500, 1000, 2000};
    auto flag_set = [&](const char* name) { return simulate->get_option(name)->count() > 0; };
    if (flag_set("--sizes")) sim.sizes = parse_size_list(sizes);

    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config '" + config_path + "'");
      std::vector<std::string> keys;
      const auto file = parse_config(in, {}, &keys);
      auto from_file = [&](const char* key, const char* flag) {
        return std::find(keys.begin(), keys.end(), key) != keys.end() && !flag_set(flag);
      };
      if (from_file("sizes", "--sizes")) sim.sizes = file.buffer_sizes;
      if (from_file("reps", "--reps")) sim.reps = file.replications;
      if (from_file("seed", "--seed")) sim.common.seed = file.base_seed;
      if (from_file("denominator", "--denominator")) sim.common.denominator = file.denominator;
      if (from_file("input", "--input")) sim.common.input = file.corpus_source;
      if (from_file("pretokenized", "--pretokenized"))
        sim.common.pretokenized = file.format == InputFormat::Pretokenized;
      if (from_file("lowercase", "--no-lowercase"))
        sim.common.normalization.lowercase = file.normalization.lowercase;
      if (from_file("strip_punctuation", "--keep-punctuation"))
        sim.common.normalization.strip_punctuation = file.normalization.strip_punctuation;
      if (from_file("unicode_nfc", "--no-nfc"))
        sim.common.normalization.unicode_nfc = file.normalization.unicode_nfc;
      if (from_file("threads", "--threads")) sim.threads = file.threads;
    }
    sim.plot_kind = parse_plot_kind(plot_kind);
    return run_simulate(sim, std::cout, std::cerr);
  });
}

}  // namespace cvmcov::cli
