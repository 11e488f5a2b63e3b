#pragma once

// Monte-Carlo experiment: for every buffer size, R seeded replications of
// sample -> Good estimate -> exact true coverage.
//
// Replication j of size index i uses derive_seed(base_seed, i, j), so the
// rows do not depend on scheduling and a parallel run matches a serial one
// byte for byte.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "cvmcov/coverage.hpp"
#include "cvmcov/ingestion.hpp"
#include "cvmcov/token.hpp"

namespace cvmcov {

struct ExperimentConfig {
  std::vector<std::size_t> buffer_sizes;
  std::size_t replications = 1;
  std::uint64_t base_seed = 0;
  DenominatorPolicy denominator = DenominatorPolicy::RealizedSize;
  NormalizationPolicy normalization;
  InputFormat format = InputFormat::Text;
  std::string corpus_source;
  /// Worker threads; 0 means std::thread::hardware_concurrency().
  unsigned threads = 0;

  /// Throws std::invalid_argument on an empty or non-increasing size list,
  /// a zero size, or zero replications.
  void validate() const;
};

/// Reads a flat key=value file ('#' starts a comment) over `defaults`.
/// Keys: sizes, reps, seed, denominator, lowercase, strip_punctuation,
/// unicode_nfc, input, pretokenized, threads. Keys found are appended to
/// `keys_seen` when it is non-null.
ExperimentConfig parse_config(std::istream& in, ExperimentConfig defaults = {},
                              std::vector<std::string>* keys_seen = nullptr);

std::vector<std::size_t> parse_size_list(std::string_view text);

struct ExperimentRow {
  std::size_t buffer_size = 0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  /// NaN when the replication produced no estimate.
  double estimate = 0.0;
  double true_coverage = 0.0;
  double difference = 0.0;
  bool retention_failure = false;

  bool has_estimate() const noexcept { return estimate == estimate; }
};

struct SummaryRow {
  std::size_t buffer_size = 0;
  std::size_t replications = 0;
  /// Replications without an estimate (retention failure or empty sample).
  std::size_t failures = 0;
  std::optional<double> mean_difference;
  std::optional<double> sd_difference;
  std::optional<double> mean_abs_difference;
  std::optional<double> mean_estimate;
  std::optional<double> sd_estimate;
  std::optional<double> mean_true_coverage;
};

/// Corpus interned to dense ids, read once and shared by all replications.
class Corpus {
 public:
  explicit Corpus(std::span<const StreamToken> tokens);

  std::size_t length() const noexcept { return ids_.size(); }
  std::size_t distinct() const noexcept { return labels_.size(); }
  std::span<const std::uint32_t> ids() const noexcept { return ids_; }
  std::uint64_t frequency(std::uint32_t id) const { return frequencies_.at(id); }
  const std::string& label(std::uint32_t id) const { return labels_.at(id); }

 private:
  std::vector<std::uint32_t> ids_;
  std::vector<std::string> labels_;
  std::vector<std::uint64_t> frequencies_;
};

/// Exact true coverage of a sample of ids: the summed stream frequency of
/// every distinct id present, over the corpus length.
TrueCoverage true_coverage(const Corpus& corpus, std::span<const std::uint32_t> sample_ids);

ExperimentRow run_replication(const Corpus& corpus, std::size_t size_index,
                              std::size_t replication, const ExperimentConfig& config);

/// Exactly |buffer_sizes| * R rows, ordered by (size index, replication).
std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config, const Corpus& corpus);

/// One row per buffer size in order of first appearance. Sample standard
/// deviations use divisor (k - 1) over the k successful replications and
/// are null when k < 2.
std::vector<SummaryRow> summarize(std::span<const ExperimentRow> rows);

/// Spearman rank correlation with average ranks for ties.
double spearman_correlation(std::span<const double> x, std::span<const double> y);

/// Ten significant digits, "%.10g".
std::string format_number(double value);

inline constexpr std::string_view kRowCsvHeader =
    "buffer_size,replication,seed,estimate,true_coverage,difference,retention_failure";
inline constexpr std::string_view kSummaryCsvHeader =
    "buffer_size,replications,failures,mean_estimate,mean_true_coverage,mean_difference,"
    "sd_difference,mean_abs_difference,sd_estimate";

void emit_csv(std::span<const ExperimentRow> rows, std::ostream& out);
void emit_summary_csv(std::span<const SummaryRow> summary, std::ostream& out);
std::vector<ExperimentRow> parse_csv(std::istream& in);

/// Fixed-width text table of the summary.
void print_summary_table(std::span<const SummaryRow> summary, std::ostream& out);

}  // namespace cvmcov
