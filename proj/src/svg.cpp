#include "agglomer/svg.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "agglomer/csv.hpp"

namespace agglomer::svg {

namespace {

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string num(double v) { return csv::format_double(std::round(v * 100.0) / 100.0); }

}  // namespace

void heatmap(std::ostream& out, const SpecializationMatrix& m, const std::vector<std::string>& row_labels,
             const std::vector<std::string>& col_labels, const NestedOrder& order) {
  constexpr double cell = 10.0;
  constexpr double margin = 80.0;
  const double width = margin + cell * static_cast<double>(order.activities.size()) + 10.0;
  const double height = margin + cell * static_cast<double>(order.regions.size()) + 10.0;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
      << "\" font-family=\"sans-serif\" font-size=\"7\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (std::size_t b = 0; b < order.activities.size(); ++b) {
    const double x = margin + cell * (static_cast<double>(b) + 0.7);
    out << "<text transform=\"translate(" << num(x) << "," << num(margin - 4) << ") rotate(-60)\">"
        << escape(col_labels[static_cast<std::size_t>(order.activities[b])]) << "</text>\n";
  }
  for (std::size_t a = 0; a < order.regions.size(); ++a) {
    const int i = order.regions[a];
    const double y = margin + cell * static_cast<double>(a);
    out << "<text x=\"" << num(margin - 4) << "\" y=\"" << num(y + cell * 0.8) << "\" text-anchor=\"end\">"
        << escape(row_labels[static_cast<std::size_t>(i)]) << "</text>\n";
    for (std::size_t b = 0; b < order.activities.size(); ++b) {
      const int k = order.activities[b];
      const bool on = m.cells(i, k) != 0;
      out << "<rect x=\"" << num(margin + cell * static_cast<double>(b)) << "\" y=\"" << num(y) << "\" width=\"" << num(cell)
          << "\" height=\"" << num(cell) << "\" fill=\"" << (on ? "#1f3b73" : "#f2f2f2") << "\" stroke=\"white\" stroke-width=\"0.5\"/>\n";
    }
  }
  out << "</svg>\n";
}

void network(std::ostream& out, const Eigen::MatrixXd& phi, const std::vector<std::string>& labels,
             const std::vector<double>& node_counts, double min_weight) {
  constexpr double size = 600.0;
  constexpr double radius = 230.0;
  const auto n = phi.rows();
  const double center = size / 2.0;
  const double largest = node_counts.empty() ? 1.0 : std::max(1.0, *std::max_element(node_counts.begin(), node_counts.end()));
  std::vector<double> xs(static_cast<std::size_t>(n)), ys(static_cast<std::size_t>(n));
  for (Eigen::Index k = 0; k < n; ++k) {
    const double angle = 2.0 * M_PI * static_cast<double>(k) / static_cast<double>(std::max<Eigen::Index>(n, 1));
    xs[static_cast<std::size_t>(k)] = center + radius * std::cos(angle);
    ys[static_cast<std::size_t>(k)] = center + radius * std::sin(angle);
  }
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(size) << "\" height=\"" << num(size)
      << "\" font-family=\"sans-serif\" font-size=\"8\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  for (Eigen::Index a = 0; a < n; ++a) {
    for (Eigen::Index b = a + 1; b < n; ++b) {
      const double w = phi(a, b);
      if (!(w > min_weight)) continue;
      out << "<line x1=\"" << num(xs[a]) << "\" y1=\"" << num(ys[a]) << "\" x2=\"" << num(xs[b]) << "\" y2=\"" << num(ys[b])
          << "\" stroke=\"#888\" stroke-opacity=\"" << num(std::min(1.0, w)) << "\" stroke-width=\"" << num(0.5 + 2.0 * w) << "\"/>\n";
    }
  }
  for (Eigen::Index k = 0; k < n; ++k) {
    const double count = static_cast<std::size_t>(k) < node_counts.size() ? node_counts[static_cast<std::size_t>(k)] : 0.0;
    const double r = 3.0 + 12.0 * std::sqrt(count / largest);
    out << "<circle cx=\"" << num(xs[k]) << "\" cy=\"" << num(ys[k]) << "\" r=\"" << num(r)
        << "\" fill=\"#c0392b\" fill-opacity=\"0.8\"/>\n";
    out << "<text x=\"" << num(xs[k] + r + 2) << "\" y=\"" << num(ys[k] + 3) << "\">" << escape(labels[static_cast<std::size_t>(k)])
        << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace agglomer::svg
