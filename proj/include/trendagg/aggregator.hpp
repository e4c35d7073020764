#pragma once

// Chains independently-normalized pairwise searches into one index.
//
// Items are sorted by SumRatio (descending) and rated one after another
// against a base item using the median, over comparators, of the ratio of
// their comparator ratios. The base starts at the top item and moves to the
// preceding item at sorted positions NC+1, 2NC+1, ...

#include "trendagg/core.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace trendagg {

class ChainBroken : public Error {
 public:
  using Error::Error;
};

struct AggregatorConfig {
  /// Number of items rated against one base before the base is moved.
  int nc = 30;

  void validate() const {
    if (nc < 2) throw InvalidInput("aggregator: NC must be >= 2");
  }
};

/// r = S+ / S- elementwise (NaN where S- == 0) with the row summaries.
struct RatioMatrix {
  Eigen::MatrixXd r;
  Eigen::VectorXd sum_plus;
  Eigen::VectorXd sum_ratio;
};

/// Which comparator's series is rescaled into the stitched panel.
enum class AnchorRule {
  /// Comparator with the largest S-[i, j].
  kLargestComparatorSum,
  /// Comparator with the largest S+[i, j] (highest item scores).
  kLargestItemSum,
};

inline SummedComparisonMatrices sum_tensor(const ComparisonTensor& tensor) {
  const std::size_t n = tensor.n_items(), m = tensor.n_comparators(), T = tensor.n_periods();
  SummedComparisonMatrices s{Eigen::MatrixXd::Zero(n, m), Eigen::MatrixXd::Zero(n, m)};
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t t = 0; t < T; ++t) {
        if (tensor.missing(i, j, t)) continue;
        s.s_plus(i, j) += tensor.p_plus(i, j, t);
        s.s_minus(i, j) += tensor.p_minus(i, j, t);
      }
    }
  }
  return s;
}

inline RatioMatrix ratio_matrix(const SummedComparisonMatrices& s) {
  if (s.s_plus.rows() != s.s_minus.rows() || s.s_plus.cols() != s.s_minus.cols()) {
    throw InvalidInput("S+ and S- have different shapes");
  }
  const Eigen::Index n = s.s_plus.rows(), m = s.s_plus.cols();
  RatioMatrix out{Eigen::MatrixXd(n, m), s.s_plus.rowwise().sum(), Eigen::VectorXd(n)};
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      out.r(i, j) = s.s_minus(i, j) > 0 ? s.s_plus(i, j) / s.s_minus(i, j) : kMissing;
    }
    const double minus = s.s_minus.row(i).sum();
    out.sum_ratio[i] = minus > 0 ? out.sum_plus[i] / minus : kMissing;
  }
  return out;
}

/// Median; even-length input averages the two central values. Reorders `values`.
inline double median(std::vector<double>& values) {
  if (values.empty()) throw InvalidInput("median of an empty list");
  const auto mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower =
      *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

/// Quotients r[i, j] / r[base, j] usable for chaining item i onto its base.
inline std::vector<double> comparison_quotients(const Eigen::MatrixXd& r, Eigen::Index item,
                                                Eigen::Index base) {
  std::vector<double> q;
  for (Eigen::Index j = 0; j < r.cols(); ++j) {
    const double a = r(item, j), b = r(base, j);
    if (is_missing(a) || is_missing(b) || b == 0) continue;
    const double v = a / b;
    if (std::isfinite(v) && v > 0) q.push_back(v);
  }
  return q;
}

/// The combination algorithm. `items` labels the rows of `s` for diagnostics
/// and is copied into the result (defaults to "row<k>").
inline AggregateIndex aggregate(const SummedComparisonMatrices& s, const AggregatorConfig& config,
                                ItemList items = {}) {
  config.validate();
  const RatioMatrix ratios = ratio_matrix(s);
  const Eigen::Index n = s.s_plus.rows();
  if (n < 1 || s.s_plus.cols() < 1) throw InvalidInput("aggregate: empty comparison matrices");
  if (items.empty()) {
    for (Eigen::Index i = 0; i < n; ++i) items.push_back("row" + std::to_string(i));
  }
  if (static_cast<Eigen::Index>(items.size()) != n) {
    throw InvalidInput("aggregate: item labels do not match matrix rows");
  }

  std::string unusable;
  for (Eigen::Index i = 0; i < n; ++i) {
    bool any = false;
    for (Eigen::Index j = 0; j < s.s_plus.cols(); ++j) {
      any |= !is_missing(ratios.r(i, j)) && ratios.r(i, j) > 0;
    }
    if (!any) unusable += (unusable.empty() ? "" : ", ") + items[i];
  }
  if (!unusable.empty()) {
    throw InvalidInput("aggregate: items without any usable comparison: " + unusable);
  }

  std::vector<std::size_t> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return ratios.sum_ratio[static_cast<Eigen::Index>(a)] > ratios.sum_ratio[static_cast<Eigen::Index>(b)];
  });

  AggregateIndex out;
  out.items = std::move(items);
  out.ag_ratings = Eigen::VectorXd::Zero(n);
  out.multipliers = Eigen::VectorXd::Zero(n);
  out.scale_multipliers = Eigen::VectorXd::Zero(n);
  out.sort_order = order;
  out.base_of.assign(static_cast<std::size_t>(n), order[0]);
  out.sum_plus = ratios.sum_plus;

  const auto top = static_cast<Eigen::Index>(order[0]);
  out.ag_ratings[top] = 1000.0;
  out.multipliers[top] = 1.0;
  out.scale_multipliers[top] = 1.0;

  std::size_t base_pos = 0;
  for (std::size_t pos = 1; pos < order.size(); ++pos) {
    // 1-based row counter: move the base to the previous row when mod(row, NC) == 1.
    if ((pos + 1) % static_cast<std::size_t>(config.nc) == 1) base_pos = pos - 1;
    const auto i = static_cast<Eigen::Index>(order[pos]);
    const auto b = static_cast<Eigen::Index>(order[base_pos]);
    auto quotients = comparison_quotients(ratios.r, i, b);
    if (quotients.empty()) {
      throw ChainBroken("aggregate: item '" + out.items[i] +
                        "' has no valid comparison quotient against base '" + out.items[b] + "'");
    }
    out.ag_ratings[i] = out.ag_ratings[b] * median(quotients);
    out.multipliers[i] =
        (out.ag_ratings[i] * ratios.sum_plus[b]) / (out.ag_ratings[b] * ratios.sum_plus[i]);
    out.scale_multipliers[i] = out.multipliers[i] * out.scale_multipliers[b];
    out.base_of[static_cast<std::size_t>(i)] = order[base_pos];
  }
  return out;
}

inline AggregateIndex aggregate(const ComparisonTensor& tensor, const AggregatorConfig& config) {
  return aggregate(sum_tensor(tensor), config, tensor.items());
}

/// Anchor comparator per item under `rule`; ties go to the lowest comparator index.
inline std::vector<std::size_t> anchor_comparators(const SummedComparisonMatrices& s,
                                                   AnchorRule rule) {
  const Eigen::Index n = s.s_plus.rows(), m = s.s_plus.cols();
  std::vector<std::size_t> anchors(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index best = -1;
    double best_key = -1;
    for (Eigen::Index j = 0; j < m; ++j) {
      if (!(s.s_plus(i, j) > 0 && s.s_minus(i, j) > 0)) continue;
      const double key = rule == AnchorRule::kLargestComparatorSum ? s.s_minus(i, j) : s.s_plus(i, j);
      if (key > best_key) {
        best_key = key;
        best = j;
      }
    }
    if (best < 0) throw InvalidInput("stitch: item row " + std::to_string(i) + " has no usable anchor");
    anchors[static_cast<std::size_t>(i)] = static_cast<std::size_t>(best);
  }
  return anchors;
}

/// Rescales each item's anchor series onto the common scale of the top item:
///   values[i, t] = scale_multiplier[i] * SumPlus[i] * p+[i, j*, t] / S+[i, j*].
/// SumPlus[i] / S+[i, j*] lifts the single anchor series to the all-comparator
/// sum that the multipliers are defined on. Masked anchor cells stay missing.
inline StitchedPanel stitch(const ComparisonTensor& tensor, const AggregateIndex& index,
                            AnchorRule rule = AnchorRule::kLargestItemSum) {
  if (index.items != tensor.items()) {
    throw InvalidInput("stitch: index was not computed from this tensor's items");
  }
  const auto s = sum_tensor(tensor);
  const auto anchors = anchor_comparators(s, rule);
  const std::size_t n = tensor.n_items(), T = tensor.n_periods();
  Eigen::MatrixXd values(n, T);
  for (std::size_t i = 0; i < n; ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const std::size_t j = anchors[i];
    const double factor =
        index.scale_multipliers[ii] * index.sum_plus[ii] / s.s_plus(ii, static_cast<Eigen::Index>(j));
    for (std::size_t t = 0; t < T; ++t) {
      values(ii, static_cast<Eigen::Index>(t)) =
          tensor.missing(i, j, t) ? kMissing : factor * tensor.p_plus(i, j, t);
    }
  }
  return {tensor.items(), tensor.axis(), std::move(values)};
}

}  // namespace trendagg
