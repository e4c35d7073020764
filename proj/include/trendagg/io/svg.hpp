#pragma once

// Minimal static SVG: an MDS scatter colored by cluster and a stack of
// per-cluster line charts. Coordinates are printed with fixed precision so the
// output is stable across runs.

#include "trendagg/core.hpp"

#include <algorithm>
#include <cstdio>
#include <string>
#include <vector>

namespace trendagg::io {

inline constexpr const char* kGeneratorVersion = "trendagg 0.1.0";

namespace svg {

inline const char* color(std::size_t k) {
  static constexpr const char* palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e",
                                             "#e6ab02", "#a6761d", "#666666", "#1f78b4", "#b2df8a"};
  return palette[k % (sizeof palette / sizeof palette[0])];
}

inline std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

inline std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

inline std::string open(double w, double h) {
  return "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n<!-- generator: " + std::string(kGeneratorVersion) +
         " -->\n<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(w) + "\" height=\"" + num(h) +
         "\" font-family=\"sans-serif\" font-size=\"11\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
}

/// Maps [lo, hi] onto [a, b]; a degenerate range maps to the midpoint.
struct Scale {
  double lo, hi, a, b;
  double operator()(double v) const { return hi > lo ? a + (v - lo) / (hi - lo) * (b - a) : 0.5 * (a + b); }
};

inline std::string axes(double x0, double y0, double x1, double y1) {
  return "<line x1=\"" + num(x0) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x1) + "\" y2=\"" + num(y1) +
         "\" stroke=\"black\"/>\n<line x1=\"" + num(x0) + "\" y1=\"" + num(y0) + "\" x2=\"" + num(x0) +
         "\" y2=\"" + num(y1) + "\" stroke=\"black\"/>\n";
}

inline std::string text(double x, double y, const std::string& s, const char* anchor = "start") {
  return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor + "\">" + escape(s) + "</text>\n";
}

}  // namespace svg

/// 2-D scatter of `coords` (n x 2) with labels and a cluster legend.
inline std::string scatter_svg(const Eigen::MatrixXd& coords, const ItemList& labels,
                               const std::vector<std::size_t>& cluster, std::size_t k, const std::string& title) {
  const double W = 640, H = 520, L = 50, R = 130, Tp = 40, B = 40;
  std::string s = svg::open(W, H);
  s += svg::text(W / 2, 22, title, "middle");
  s += svg::axes(L, Tp, W - R, H - B);
  const svg::Scale sx{coords.col(0).minCoeff(), coords.col(0).maxCoeff(), L + 10, W - R - 10};
  const svg::Scale sy{coords.col(1).minCoeff(), coords.col(1).maxCoeff(), H - B - 10, Tp + 10};
  for (Eigen::Index i = 0; i < coords.rows(); ++i) {
    const double x = sx(coords(i, 0)), y = sy(coords(i, 1));
    s += "<circle cx=\"" + svg::num(x) + "\" cy=\"" + svg::num(y) + "\" r=\"4\" fill=\"" +
         svg::color(cluster[static_cast<std::size_t>(i)]) + "\"/>\n";
    s += svg::text(x + 6, y - 4, labels[static_cast<std::size_t>(i)]);
  }
  for (std::size_t c = 0; c < k; ++c) {
    const double y = Tp + 10 + 18 * static_cast<double>(c);
    s += "<rect x=\"" + svg::num(W - R + 15) + "\" y=\"" + svg::num(y - 9) + "\" width=\"10\" height=\"10\" fill=\"" +
         svg::color(c) + "\"/>\n";
    s += svg::text(W - R + 30, y, "cluster " + std::to_string(c + 1));
  }
  return s + "</svg>\n";
}

/// One panel per cluster with its member series (rows of `series`) as polylines.
inline std::string cluster_lines_svg(const Eigen::MatrixXd& series, const ItemList& labels,
                                     const std::vector<std::size_t>& cluster, std::size_t k,
                                     const std::vector<std::string>& time_labels, const std::string& title) {
  const double W = 720, panel_h = 180, L = 60, R = 20, Tp = 40, gap = 30;
  const double H = Tp + static_cast<double>(k) * (panel_h + gap);
  std::string s = svg::open(W, H);
  s += svg::text(W / 2, 22, title, "middle");
  const Eigen::Index T = series.cols();
  for (std::size_t c = 0; c < k; ++c) {
    const double top = Tp + static_cast<double>(c) * (panel_h + gap);
    const double bottom = top + panel_h;
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    std::size_t members = 0;
    for (Eigen::Index i = 0; i < series.rows(); ++i) {
      if (cluster[static_cast<std::size_t>(i)] != c) continue;
      ++members;
      for (Eigen::Index t = 0; t < T; ++t) {
        if (std::isnan(series(i, t))) continue;
        lo = std::min(lo, series(i, t));
        hi = std::max(hi, series(i, t));
      }
    }
    s += svg::axes(L, top, W - R, bottom);
    s += svg::text(L + 5, top + 12, "cluster " + std::to_string(c + 1) + " (" + std::to_string(members) + ")");
    if (members == 0 || !(lo <= hi)) continue;
    s += svg::text(L - 4, top + 4, svg::num(hi), "end");
    s += svg::text(L - 4, bottom, svg::num(lo), "end");
    if (!time_labels.empty()) {
      s += svg::text(L, bottom + 14, time_labels.front());
      s += svg::text(W - R, bottom + 14, time_labels.back(), "end");
    }
    const svg::Scale sx{0, static_cast<double>(std::max<Eigen::Index>(T - 1, 1)), L, W - R};
    const svg::Scale sy{lo, hi, bottom - 5, top + 18};
    for (Eigen::Index i = 0; i < series.rows(); ++i) {
      if (cluster[static_cast<std::size_t>(i)] != c) continue;
      std::string pts;
      for (Eigen::Index t = 0; t < T; ++t) {
        if (std::isnan(series(i, t))) continue;
        if (!pts.empty()) pts += ' ';
        pts += svg::num(sx(static_cast<double>(t))) + "," + svg::num(sy(series(i, t)));
      }
      s += "<polyline fill=\"none\" stroke=\"" + std::string(svg::color(c)) + "\" stroke-width=\"1\" points=\"" + pts +
           "\"><title>" + svg::escape(labels[static_cast<std::size_t>(i)]) + "</title></polyline>\n";
    }
  }
  return s + "</svg>\n";
}

}  // namespace trendagg::io
