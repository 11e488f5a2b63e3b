#pragma once

// Subcommand implementations behind the cvmcov executable. They take their
// streams explicitly so tests can drive them without spawning a process.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "cvmcov/coverage.hpp"
#include "cvmcov/ingestion.hpp"
#include "cvmcov/plot.hpp"

namespace cvmcov::cli {

enum ExitCode : int {
  kOk = 0,
  kIoOrConfig = 1,
  kRetentionFailure = 2,
  kEmptySample = 3,
};

struct CommonOptions {
  std::string input = "-";
  bool pretokenized = false;
  std::optional<std::uint64_t> seed;
  std::size_t capacity = 0;
  DenominatorPolicy denominator = DenominatorPolicy::RealizedSize;
  NormalizationPolicy normalization;
};

struct SimulateOptions {
  CommonOptions common;
  std::vector<std::size_t> sizes;
  std::size_t reps = 1000;
  std::string csv_path;
  std::string summary_csv_path;
  std::string plot_path;
  PlotKind plot_kind = PlotKind::ErrorBars;
  unsigned threads = 0;
};

/// Filled by run_estimate / run_distinct for instrumentation.
struct RunStats {
  std::uint64_t observed = 0;
  std::size_t peak_buffer = 0;
};

int run_estimate(const CommonOptions& opts, std::istream& stdin_stream, std::ostream& out,
                 std::ostream& err, RunStats* stats = nullptr);
int run_distinct(const CommonOptions& opts, std::istream& stdin_stream, std::ostream& out,
                 std::ostream& err, RunStats* stats = nullptr);
/// Two passes over the input; stdin is spilled to a temporary file first.
int run_oracle(const CommonOptions& opts, std::istream& stdin_stream, std::ostream& out,
               std::ostream& err);
int run_simulate(const SimulateOptions& opts, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches. Returns the process exit code.
int run(int argc, char** argv);

}  // namespace cvmcov::cli
