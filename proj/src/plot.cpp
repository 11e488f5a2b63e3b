#include "cvmcov/plot.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <string>
#include <vector>

namespace cvmcov {
namespace {

constexpr double kWidth = 720;
constexpr double kHeight = 440;
constexpr double kLeft = 80;
constexpr double kRight = 30;
constexpr double kTop = 50;
constexpr double kBottom = 60;

struct Frame {
  double lo;
  double hi;
  std::size_t categories;

  double x(std::size_t i) const {
    const double span = kWidth - kLeft - kRight;
    return kLeft + span * (static_cast<double>(i) + 0.5) / static_cast<double>(categories);
  }
  double y(double v) const {
    const double span = kHeight - kTop - kBottom;
    return kTop + span * (hi - v) / (hi - lo);
  }
};

Frame make_frame(const std::vector<double>& values, std::size_t categories) {
  double lo = 0.0, hi = 0.0;
  if (!values.empty()) {
    lo = *std::min_element(values.begin(), values.end());
    hi = *std::max_element(values.begin(), values.end());
  }
  const double pad = hi > lo ? (hi - lo) * 0.1 : 0.01;
  return Frame{lo - pad, hi + pad, categories};
}

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", std::fabs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

void axes(std::ostream& out, const Frame& f, std::span<const SummaryRow> summary,
          std::string_view title, std::string_view y_label) {
  const double x0 = kLeft, x1 = kWidth - kRight;
  const double y0 = kHeight - kBottom, y1 = kTop;
  out << "<title>" << title << "</title>\n";
  out << "<text x=\"" << num(kWidth / 2) << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">"
      << title << "</text>\n";
  out << "<line class=\"axis\" x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x1)
      << "\" y2=\"" << num(y0) << "\" stroke=\"black\"/>\n";
  out << "<line class=\"axis\" x1=\"" << num(x0) << "\" y1=\"" << num(y0) << "\" x2=\"" << num(x0)
      << "\" y2=\"" << num(y1) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 5; ++t) {
    const double v = f.lo + (f.hi - f.lo) * t / 5.0;
    out << "<line x1=\"" << num(x0 - 5) << "\" y1=\"" << num(f.y(v)) << "\" x2=\"" << num(x0)
        << "\" y2=\"" << num(f.y(v)) << "\" stroke=\"black\"/>"
        << "<text x=\"" << num(x0 - 8) << "\" y=\"" << num(f.y(v) + 4)
        << "\" text-anchor=\"end\" font-size=\"11\">" << tick_label(v) << "</text>\n";
  }
  for (std::size_t i = 0; i < summary.size(); ++i) {
    out << "<text x=\"" << num(f.x(i)) << "\" y=\"" << num(y0 + 18)
        << "\" text-anchor=\"middle\" font-size=\"11\">" << summary[i].buffer_size
        << "</text>\n";
  }
  out << "<text x=\"" << num((x0 + x1) / 2) << "\" y=\"" << num(kHeight - 16)
      << "\" text-anchor=\"middle\" font-size=\"13\">buffer size n</text>\n";
  out << "<text x=\"18\" y=\"" << num((y0 + y1) / 2) << "\" text-anchor=\"middle\" font-size=\"13\" "
      << "transform=\"rotate(-90 18 " << num((y0 + y1) / 2) << ")\">" << y_label << "</text>\n";
}

void scatter(std::ostream& out, std::span<const SummaryRow> summary) {
  std::vector<double> values;
  for (const auto& s : summary) {
    if (s.mean_estimate) values.push_back(*s.mean_estimate);
    if (s.mean_true_coverage) values.push_back(*s.mean_true_coverage);
  }
  const Frame f = make_frame(values, summary.size());
  axes(out, f, summary, "True vs. estimated coverage by buffer size", "coverage");
  for (std::size_t i = 0; i < summary.size(); ++i) {
    const auto& s = summary[i];
    if (s.mean_true_coverage) {
      out << "<rect class=\"true-coverage\" x=\"" << num(f.x(i) - 12) << "\" y=\""
          << num(f.y(*s.mean_true_coverage) - 4) << "\" width=\"8\" height=\"8\" fill=\"#d62728\"/>\n";
    }
    if (s.mean_estimate) {
      out << "<circle class=\"estimate\" cx=\"" << num(f.x(i) + 8) << "\" cy=\""
          << num(f.y(*s.mean_estimate)) << "\" r=\"4.5\" fill=\"#1f77b4\"/>\n";
    }
  }
  const double lx = kWidth - kRight - 150;
  out << "<rect x=\"" << num(lx) << "\" y=\"38\" width=\"8\" height=\"8\" fill=\"#d62728\"/>"
      << "<text x=\"" << num(lx + 14) << "\" y=\"46\" font-size=\"11\">mean true coverage</text>\n";
  out << "<circle cx=\"" << num(lx + 4) << "\" cy=\"58\" r=\"4.5\" fill=\"#1f77b4\"/>"
      << "<text x=\"" << num(lx + 14) << "\" y=\"62\" font-size=\"11\">mean estimate</text>\n";
}

void error_bars(std::ostream& out, std::span<const SummaryRow> summary) {
  std::vector<double> values{0.0};
  for (const auto& s : summary) {
    if (!s.mean_difference) continue;
    const double sd = s.sd_difference.value_or(0.0);
    values.push_back(*s.mean_difference - sd);
    values.push_back(*s.mean_difference + sd);
  }
  const Frame f = make_frame(values, summary.size());
  axes(out, f, summary, "Estimated minus true coverage (error bars: ±1 sample standard deviation)",
       "estimate − true coverage");
  out << "<line class=\"zero\" x1=\"" << num(kLeft) << "\" y1=\"" << num(f.y(0)) << "\" x2=\""
      << num(kWidth - kRight) << "\" y2=\"" << num(f.y(0))
      << "\" stroke=\"#888\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t i = 0; i < summary.size(); ++i) {
    const auto& s = summary[i];
    if (!s.mean_difference) continue;
    const double sd = s.sd_difference.value_or(0.0);
    const double x = f.x(i);
    const double top = f.y(*s.mean_difference + sd);
    const double bottom = f.y(*s.mean_difference - sd);
    out << "<g class=\"error-bar\" stroke=\"#1f77b4\">"
        << "<line x1=\"" << num(x) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x) << "\" y2=\""
        << num(bottom) << "\"/>"
        << "<line x1=\"" << num(x - 6) << "\" y1=\"" << num(top) << "\" x2=\"" << num(x + 6)
        << "\" y2=\"" << num(top) << "\"/>"
        << "<line x1=\"" << num(x - 6) << "\" y1=\"" << num(bottom) << "\" x2=\"" << num(x + 6)
        << "\" y2=\"" << num(bottom) << "\"/>"
        << "<circle cx=\"" << num(x) << "\" cy=\"" << num(f.y(*s.mean_difference))
        << "\" r=\"4\" fill=\"#1f77b4\"/></g>\n";
  }
}

}  // namespace

PlotKind parse_plot_kind(std::string_view text) {
  if (text == "scatter") return PlotKind::Scatter;
  if (text == "error_bars") return PlotKind::ErrorBars;
  throw std::invalid_argument("unknown plot kind '" + std::string(text) +
                              "' (expected scatter or error_bars)");
}

std::string_view to_string(PlotKind kind) noexcept {
  return kind == PlotKind::Scatter ? "scatter" : "error_bars";
}

void emit_plot(std::span<const SummaryRow> summary, PlotKind kind, std::ostream& out) {
  if (summary.empty()) throw std::invalid_argument("cannot plot an empty summary");
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
      << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight
      << "\" font-family=\"sans-serif\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  if (kind == PlotKind::Scatter) {
    scatter(out, summary);
  } else {
    error_bars(out, summary);
  }
  out << "</svg>\n";
}

}  // namespace cvmcov
