#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cvmcov {

/// One stream element: an opaque class label compared by exact bytes.
class StreamToken {
 public:
  explicit StreamToken(std::string label) : label_(std::move(label)) {
    if (label_.empty()) throw std::invalid_argument("StreamToken: empty label");
  }
  explicit StreamToken(std::string_view label) : StreamToken(std::string(label)) {}
  explicit StreamToken(const char* label) : StreamToken(std::string(label)) {}

  const std::string& label() const noexcept { return label_; }

  friend bool operator==(const StreamToken&, const StreamToken&) = default;
  friend auto operator<=>(const StreamToken&, const StreamToken&) = default;

 private:
  std::string label_;
};

}  // namespace cvmcov

template <>
struct std::hash<cvmcov::StreamToken> {
  std::size_t operator()(const cvmcov::StreamToken& t) const noexcept {
    return std::hash<std::string>{}(t.label());
  }
};
