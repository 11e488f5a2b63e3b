#pragma once

// Test-only reference computations. Nothing here calls into the sampler or
// coverage code it is used to check.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <tuple>
#include <vector>

namespace cvmcov::testing {

/// (realized_size, level, failed) for one run of the coverage sampler.
struct MicroOutcome {
  std::size_t size = 0;
  std::uint64_t level = 0;
  bool failed = false;

  friend auto operator<=>(const MicroOutcome&, const MicroOutcome&) = default;
};

/// Exact outcome distribution of the coverage sampler on any stream of
/// `length` elements, by walking the full tree of coin flips: the admission
/// branch with weight 2^-level, then every one of the 2^size keep/drop
/// patterns of a halving with weight 2^-size.
inline std::map<MicroOutcome, double> enumerate_outcomes(std::size_t capacity,
                                                         std::size_t length) {
  std::map<MicroOutcome, double> dist;
  auto walk = [&](auto&& self, std::size_t i, std::size_t size, std::uint64_t level,
                  double weight) -> void {
    if (i == length) {
      dist[{size, level, false}] += weight;
      return;
    }
    const double admit = std::ldexp(1.0, -static_cast<int>(level));
    const std::pair<std::size_t, double> branches[] = {{size + 1, admit}, {size, 1.0 - admit}};
    for (const auto& [next_size, w] : branches) {
      if (w == 0.0) continue;
      if (next_size < capacity) {
        self(self, i + 1, next_size, level, weight * w);
        continue;
      }
      const double pattern_weight = std::ldexp(1.0, -static_cast<int>(next_size));
      for (std::uint64_t pattern = 0; pattern < (std::uint64_t{1} << next_size); ++pattern) {
        const auto kept = static_cast<std::size_t>(std::popcount(pattern));
        if (kept == capacity) {
          dist[{capacity, level + 1, true}] += weight * w * pattern_weight;
        } else {
          self(self, i + 1, kept, level + 1, weight * w * pattern_weight);
        }
      }
    }
  };
  walk(walk, 0, 0, 0, 1.0);
  return dist;
}

/// Every string of length 0..max_length over `alphabet`.
inline std::vector<std::vector<std::string>> all_streams(const std::vector<std::string>& alphabet,
                                                         std::size_t max_length) {
  std::vector<std::vector<std::string>> out{{}};
  std::vector<std::vector<std::string>> frontier{{}};
  for (std::size_t len = 1; len <= max_length; ++len) {
    std::vector<std::vector<std::string>> next;
    for (const auto& prefix : frontier) {
      for (const auto& symbol : alphabet) {
        auto s = prefix;
        s.push_back(symbol);
        next.push_back(s);
      }
    }
    out.insert(out.end(), next.begin(), next.end());
    frontier = std::move(next);
  }
  return out;
}

/// Positions of `stream` whose label equals some entry of `sample`, by
/// linear search.
inline std::size_t brute_force_covered(const std::vector<std::string>& stream,
                                       const std::vector<std::string>& sample) {
  std::size_t covered = 0;
  for (const auto& label : stream) {
    bool found = false;
    for (const auto& s : sample) found = found || (s == label);
    covered += found;
  }
  return covered;
}

/// Labels appearing exactly once, by pairwise comparison.
inline std::size_t brute_force_singletons(const std::vector<std::string>& sample) {
  std::size_t s = 0;
  for (std::size_t i = 0; i < sample.size(); ++i) {
    std::size_t count = 0;
    for (const auto& other : sample) count += (other == sample[i]);
    s += (count == 1);
  }
  return s;
}

inline double binomial_se(double p, double trials) { return std::sqrt(p * (1.0 - p) / trials); }

}  // namespace cvmcov::testing
