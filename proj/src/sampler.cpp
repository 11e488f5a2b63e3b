#include "cvmcov/sampler.hpp"

#include <cmath>
#include <limits>

namespace cvmcov {

double DyadicProbability::to_double() const noexcept {
  if (exponent > static_cast<std::uint64_t>(std::numeric_limits<int>::max())) return 0.0;
  return std::ldexp(1.0, -static_cast<int>(exponent));
}

std::string DyadicProbability::to_string() const {
  if (exponent == 0) return "1";
  if (exponent == 1) return "1/2";
  return "1/2^" + std::to_string(exponent);
}

RetentionFailure::RetentionFailure(std::uint64_t stream_index, std::size_t capacity,
                                   std::uint64_t level)
    : std::runtime_error("retention failure: halving at stream index " +
                         std::to_string(stream_index) + " kept all " +
                         std::to_string(capacity) + " entries"),
      stream_index_(stream_index),
      capacity_(capacity),
      level_(level) {}

void validate(const SamplerConfig& config) {
  if (config.capacity == 0) throw std::invalid_argument("sampler capacity must be at least 1");
}

}  // namespace cvmcov
