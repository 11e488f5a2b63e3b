#include "cvmcov/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "cvmcov/rng.hpp"
#include "cvmcov/sampler.hpp"

namespace cvmcov {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

template <typename Int>
Int parse_integer(std::string_view text, std::string_view what) {
  text = trim(text);
  Int value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
    throw std::invalid_argument("invalid " + std::string(what) + ": '" + std::string(text) + "'");
  return value;
}

bool parse_bool(std::string_view text, std::string_view key) {
  text = trim(text);
  if (text == "on" || text == "true" || text == "1" || text == "yes") return true;
  if (text == "off" || text == "false" || text == "0" || text == "no") return false;
  throw std::invalid_argument("invalid boolean for " + std::string(key) + ": '" +
                              std::string(text) + "'");
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (text.empty()) return std::numeric_limits<double>::quiet_NaN();
  // strtod rather than from_chars: libstdc++ 11 lacks floating from_chars
  // on some targets.
  const std::string copy(text);
  char* end = nullptr;
  const double value = std::strtod(copy.c_str(), &end);
  if (end != copy.c_str() + copy.size())
    throw std::invalid_argument("invalid number in CSV: '" + copy + "'");
  return value;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    fields.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return fields;
}

std::string optional_number(const std::optional<double>& v) {
  return v ? format_number(*v) : std::string();
}

struct Moments {
  double mean = 0.0;
  std::optional<double> sd;
};

Moments moments(const std::vector<double>& values) {
  Moments m;
  for (double v : values) m.mean += v;
  m.mean /= static_cast<double>(values.size());
  if (values.size() >= 2) {
    double ss = 0.0;
    for (double v : values) ss += (v - m.mean) * (v - m.mean);
    m.sd = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return m;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

}  // namespace

void ExperimentConfig::validate() const {
  if (buffer_sizes.empty()) throw std::invalid_argument("at least one buffer size is required");
  for (std::size_t i = 0; i < buffer_sizes.size(); ++i) {
    if (buffer_sizes[i] == 0) throw std::invalid_argument("buffer sizes must be positive");
    if (i > 0 && buffer_sizes[i] <= buffer_sizes[i - 1])
      throw std::invalid_argument("buffer sizes must be strictly increasing");
  }
  if (replications == 0) throw std::invalid_argument("replications must be positive");
}

std::vector<std::size_t> parse_size_list(std::string_view text) {
  std::vector<std::size_t> sizes;
  for (auto field : split(text, ',')) sizes.push_back(parse_integer<std::size_t>(field, "size"));
  return sizes;
}

ExperimentConfig parse_config(std::istream& in, ExperimentConfig config,
                              std::vector<std::string>* keys_seen) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view = line;
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key=value");
    const auto key = trim(view.substr(0, eq));
    const auto value = trim(view.substr(eq + 1));
    if (keys_seen) keys_seen->emplace_back(key);
    if (key == "sizes") {
      config.buffer_sizes = parse_size_list(value);
    } else if (key == "reps") {
      config.replications = parse_integer<std::size_t>(value, "reps");
    } else if (key == "seed") {
      config.base_seed = parse_integer<std::uint64_t>(value, "seed");
    } else if (key == "denominator") {
      config.denominator = parse_denominator_policy(value);
    } else if (key == "lowercase") {
      config.normalization.lowercase = parse_bool(value, key);
    } else if (key == "strip_punctuation") {
      config.normalization.strip_punctuation = parse_bool(value, key);
    } else if (key == "unicode_nfc") {
      config.normalization.unicode_nfc = parse_bool(value, key);
    } else if (key == "input") {
      config.corpus_source = std::string(value);
    } else if (key == "pretokenized") {
      config.format = parse_bool(value, key) ? InputFormat::Pretokenized : InputFormat::Text;
    } else if (key == "threads") {
      config.threads = parse_integer<unsigned>(value, "threads");
    } else {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": unknown key '" +
                                  std::string(key) + "'");
    }
  }
  return config;
}

Corpus::Corpus(std::span<const StreamToken> tokens) {
  if (tokens.size() > std::numeric_limits<std::uint32_t>::max())
    throw std::length_error("corpus too large for 32-bit ids");
  std::unordered_map<std::string_view, std::uint32_t> index;
  ids_.reserve(tokens.size());
  for (const auto& token : tokens) {
    auto [it, inserted] =
        index.try_emplace(token.label(), static_cast<std::uint32_t>(labels_.size()));
    if (inserted) {
      labels_.push_back(token.label());
      frequencies_.push_back(0);
    }
    ++frequencies_[it->second];
    ids_.push_back(it->second);
  }
}

TrueCoverage true_coverage(const Corpus& corpus, std::span<const std::uint32_t> sample_ids) {
  if (corpus.length() == 0) throw std::invalid_argument("true coverage needs a non-empty stream");
  std::vector<std::uint32_t> present(sample_ids.begin(), sample_ids.end());
  std::sort(present.begin(), present.end());
  present.erase(std::unique(present.begin(), present.end()), present.end());
  std::uint64_t covered = 0;
  for (auto id : present) covered += corpus.frequency(id);
  return TrueCoverage{covered, corpus.length(),
                      static_cast<double>(covered) / static_cast<double>(corpus.length())};
}

ExperimentRow run_replication(const Corpus& corpus, std::size_t size_index,
                              std::size_t replication, const ExperimentConfig& config) {
  ExperimentRow row;
  row.buffer_size = config.buffer_sizes.at(size_index);
  row.replication = replication;
  row.seed = derive_seed(config.base_seed, size_index, replication);
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();

  BasicCoverageSampler<std::uint32_t> sampler({row.buffer_size, row.seed});
  try {
    for (auto id : corpus.ids()) sampler.observe(id);
  } catch (const RetentionFailure&) {
    row.retention_failure = true;
    row.estimate = row.true_coverage = row.difference = nan;
    return row;
  }
  const auto sample = std::move(sampler).finalize();
  try {
    row.estimate = estimate_coverage(sample, config.denominator).estimate;
  } catch (const EmptySample&) {
    row.estimate = row.true_coverage = row.difference = nan;
    return row;
  }
  row.true_coverage = true_coverage(corpus, sample.tokens).value;
  row.difference = row.estimate - row.true_coverage;
  return row;
}

std::vector<ExperimentRow> run_experiment(const ExperimentConfig& config, const Corpus& corpus) {
  config.validate();
  if (corpus.length() == 0) throw std::invalid_argument("corpus is empty");
  const std::size_t reps = config.replications;
  const std::size_t total = config.buffer_sizes.size() * reps;
  std::vector<ExperimentRow> rows(total);

  unsigned workers = config.threads ? config.threads : std::thread::hardware_concurrency();
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(total)));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t task = next++; task < total; task = next++) {
      rows[task] = run_replication(corpus, task / reps, task % reps, config);
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (unsigned i = 0; i < workers; ++i) pool.emplace_back(work);
  }
  return rows;
}

std::vector<SummaryRow> summarize(std::span<const ExperimentRow> rows) {
  if (rows.empty()) throw std::invalid_argument("cannot summarize an empty row set");
  std::vector<std::size_t> order;
  std::unordered_map<std::size_t, std::vector<const ExperimentRow*>> groups;
  for (const auto& row : rows) {
    auto [it, inserted] = groups.try_emplace(row.buffer_size);
    if (inserted) order.push_back(row.buffer_size);
    it->second.push_back(&row);
  }

  std::vector<SummaryRow> summary;
  for (auto size : order) {
    const auto& group = groups[size];
    SummaryRow s;
    s.buffer_size = size;
    s.replications = group.size();
    std::vector<double> diffs, abs_diffs, estimates, truths;
    for (const auto* row : group) {
      if (row->retention_failure || !row->has_estimate()) {
        ++s.failures;
        continue;
      }
      diffs.push_back(row->difference);
      abs_diffs.push_back(std::fabs(row->difference));
      estimates.push_back(row->estimate);
      truths.push_back(row->true_coverage);
    }
    if (!diffs.empty()) {
      const auto d = moments(diffs);
      const auto e = moments(estimates);
      s.mean_difference = d.mean;
      s.sd_difference = d.sd;
      s.mean_abs_difference = moments(abs_diffs).mean;
      s.mean_estimate = e.mean;
      s.sd_estimate = e.sd;
      s.mean_true_coverage = moments(truths).mean;
    }
    summary.push_back(s);
  }
  return summary;
}

double spearman_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2)
    throw std::invalid_argument("spearman correlation needs two equal-length series of size >= 2");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) mx += rx[i], my += ry[i];
  mx /= n, my /= n;
  double sxy = 0, sxx = 0, syy = 0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  if (sxx == 0 || syy == 0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

std::string format_number(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", value);
  return buf;
}

void emit_csv(std::span<const ExperimentRow> rows, std::ostream& out) {
  out << kRowCsvHeader << "\r\n";
  for (const auto& r : rows) {
    out << r.buffer_size << ',' << r.replication << ',' << r.seed << ',';
    if (r.has_estimate()) {
      out << format_number(r.estimate) << ',' << format_number(r.true_coverage) << ','
          << format_number(r.difference);
    } else {
      out << ",,";
    }
    out << ',' << (r.retention_failure ? "true" : "false") << "\r\n";
  }
}

void emit_summary_csv(std::span<const SummaryRow> summary, std::ostream& out) {
  out << kSummaryCsvHeader << "\r\n";
  for (const auto& s : summary) {
    out << s.buffer_size << ',' << s.replications << ',' << s.failures << ','
        << optional_number(s.mean_estimate) << ',' << optional_number(s.mean_true_coverage) << ','
        << optional_number(s.mean_difference) << ',' << optional_number(s.sd_difference) << ','
        << optional_number(s.mean_abs_difference) << ',' << optional_number(s.sd_estimate)
        << "\r\n";
  }
}

std::vector<ExperimentRow> parse_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::invalid_argument("CSV is missing its header");
  if (trim(line) != kRowCsvHeader) throw std::invalid_argument("unexpected CSV header");
  std::vector<ExperimentRow> rows;
  while (std::getline(in, line)) {
    const auto view = trim(line);
    if (view.empty()) continue;
    const auto f = split(view, ',');
    if (f.size() != 7) throw std::invalid_argument("CSV row has " + std::to_string(f.size()) +
                                                   " fields, expected 7");
    ExperimentRow r;
    r.buffer_size = parse_integer<std::size_t>(f[0], "buffer_size");
    r.replication = parse_integer<std::size_t>(f[1], "replication");
    r.seed = parse_integer<std::uint64_t>(f[2], "seed");
    r.estimate = parse_double(f[3]);
    r.true_coverage = parse_double(f[4]);
    r.difference = parse_double(f[5]);
    r.retention_failure = parse_bool(f[6], "retention_failure");
    rows.push_back(r);
  }
  return rows;
}

void print_summary_table(std::span<const SummaryRow> summary, std::ostream& out) {
  auto cell = [](const std::optional<double>& v) {
    return v ? format_number(std::round(*v * 1e6) / 1e6) : std::string("null");
  };
  out << std::left << std::setw(12) << "buffer_size" << std::setw(7) << "reps" << std::setw(10)
      << "failures" << std::setw(14) << "mean_est" << std::setw(14) << "mean_true"
      << std::setw(14) << "mean_diff" << std::setw(14) << "sd_diff" << "mean_abs_diff\n";
  for (const auto& s : summary) {
    out << std::left << std::setw(12) << s.buffer_size << std::setw(7) << s.replications
        << std::setw(10) << s.failures << std::setw(14) << cell(s.mean_estimate) << std::setw(14)
        << cell(s.mean_true_coverage) << std::setw(14) << cell(s.mean_difference)
        << std::setw(14) << cell(s.sd_difference) << cell(s.mean_abs_difference) << '\n';
  }
}

}  // namespace cvmcov
