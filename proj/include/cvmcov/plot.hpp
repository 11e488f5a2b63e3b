#pragma once

// Self-contained SVG charts of an experiment summary.

#include <iosfwd>
#include <span>
#include <string_view>

#include "cvmcov/harness.hpp"

namespace cvmcov {

enum class PlotKind {
  Scatter,    // mean estimate and mean true coverage per buffer size
  ErrorBars,  // mean difference with +/- 1 sample sd per buffer size
};

PlotKind parse_plot_kind(std::string_view text);
std::string_view to_string(PlotKind kind) noexcept;

/// Buffer sizes go on a categorical x axis. Throws std::invalid_argument on
/// an empty summary.
void emit_plot(std::span<const SummaryRow> summary, PlotKind kind, std::ostream& out);

}  // namespace cvmcov
