#include "cvmcov/coverage.hpp"

#include <string>

namespace cvmcov {

std::string_view to_string(DenominatorPolicy policy) noexcept {
  switch (policy) {
    case DenominatorPolicy::RealizedSize: return "realized";
    case DenominatorPolicy::Capacity: return "capacity";
  }
  return "unknown";
}

DenominatorPolicy parse_denominator_policy(std::string_view text) {
  if (text == "realized") return DenominatorPolicy::RealizedSize;
  if (text == "capacity") return DenominatorPolicy::Capacity;
  throw std::invalid_argument("unknown denominator policy '" + std::string(text) +
                              "' (expected realized or capacity)");
}

CoverageEstimate make_coverage_estimate(std::uint64_t singletons, std::uint64_t realized_size,
                                        std::uint64_t capacity, DenominatorPolicy policy) {
  const std::uint64_t denominator =
      policy == DenominatorPolicy::RealizedSize ? realized_size : capacity;
  if (denominator == 0) throw EmptySample();
  if (singletons > denominator)
    throw std::invalid_argument("singleton count exceeds the coverage denominator");
  return CoverageEstimate{
      singletons, denominator,
      1.0 - static_cast<double>(singletons) / static_cast<double>(denominator), policy};
}

}  // namespace cvmcov
