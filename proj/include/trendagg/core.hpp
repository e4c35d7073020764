#pragma once

// Shared data model: monthly time axes, latent and stitched panels, pairwise
// comparison tensors and the aggregate index.

#include <Eigen/Dense>

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace trendagg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when an input violates a documented precondition.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

using ItemList = std::vector<std::string>;

inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double v) { return std::isnan(v); }

// ---------------------------------------------------------------------------
// Period / TimeAxis
// ---------------------------------------------------------------------------

/// A calendar month, serialized as ISO "YYYY-MM".
struct Period {
  int year = 1970;
  int month = 1;

  static Period parse(std::string_view text) {
    if (text.size() != 7 || text[4] != '-') {
      throw InvalidInput("period '" + std::string(text) + "' is not YYYY-MM");
    }
    auto digits = [&](std::size_t from, std::size_t len) {
      int v = 0;
      for (std::size_t i = from; i < from + len; ++i) {
        if (text[i] < '0' || text[i] > '9') {
          throw InvalidInput("period '" + std::string(text) + "' is not YYYY-MM");
        }
        v = v * 10 + (text[i] - '0');
      }
      return v;
    };
    Period p{digits(0, 4), digits(5, 2)};
    if (p.month < 1 || p.month > 12) {
      throw InvalidInput("period '" + std::string(text) + "' has month out of range");
    }
    return p;
  }

  std::string str() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
  }

  int ordinal() const { return year * 12 + (month - 1); }

  Period next() const { return month == 12 ? Period{year + 1, 1} : Period{year, month + 1}; }

  friend bool operator==(const Period&, const Period&) = default;
  friend auto operator<=>(const Period& a, const Period& b) { return a.ordinal() <=> b.ordinal(); }
};

/// Consecutive monthly periods, T >= 2.
class TimeAxis {
 public:
  explicit TimeAxis(std::vector<Period> periods) : periods_(std::move(periods)) {
    if (periods_.size() < 2) throw InvalidInput("time axis needs at least 2 periods");
    for (std::size_t t = 1; t < periods_.size(); ++t) {
      if (periods_[t].ordinal() != periods_[t - 1].ordinal() + 1) {
        throw InvalidInput("time axis is not consecutive monthly at " + periods_[t].str());
      }
    }
  }

  static TimeAxis monthly(Period start, std::size_t count) {
    std::vector<Period> ps;
    ps.reserve(count);
    for (std::size_t t = 0; t < count; ++t) {
      ps.push_back(start);
      start = start.next();
    }
    return TimeAxis(std::move(ps));
  }

  std::size_t size() const { return periods_.size(); }
  const Period& operator[](std::size_t t) const { return periods_[t]; }
  const std::vector<Period>& periods() const { return periods_; }
  const Period& front() const { return periods_.front(); }
  const Period& back() const { return periods_.back(); }

  /// Index of `p`, or -1 when outside the axis.
  std::ptrdiff_t index_of(const Period& p) const {
    const auto off = static_cast<std::ptrdiff_t>(p.ordinal()) - front().ordinal();
    return (off >= 0 && off < static_cast<std::ptrdiff_t>(size())) ? off : -1;
  }

  friend bool operator==(const TimeAxis&, const TimeAxis&) = default;

 private:
  std::vector<Period> periods_;
};

namespace detail {

inline void require_unique(const ItemList& ids, const char* what) {
  std::set<std::string> seen;
  for (const auto& id : ids) {
    if (id.empty()) throw InvalidInput(std::string(what) + " identifier is empty");
    if (!seen.insert(id).second) {
      throw InvalidInput(std::string("duplicate ") + what + " identifier '" + id + "'");
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Panels
// ---------------------------------------------------------------------------

/// Ground-truth search volume per item (rows) and period (columns).
class LatentVolumePanel {
 public:
  LatentVolumePanel(ItemList items, TimeAxis axis, Eigen::MatrixXd volumes)
      : items_(std::move(items)), axis_(std::move(axis)), volumes_(std::move(volumes)) {
    detail::require_unique(items_, "item");
    if (volumes_.rows() != static_cast<Eigen::Index>(items_.size()) ||
        volumes_.cols() != static_cast<Eigen::Index>(axis_.size())) {
      throw InvalidInput("latent panel dimensions do not match items x periods");
    }
    for (Eigen::Index i = 0; i < volumes_.rows(); ++i) {
      bool any_positive = false;
      for (Eigen::Index t = 0; t < volumes_.cols(); ++t) {
        const double v = volumes_(i, t);
        if (!std::isfinite(v) || v < 0) {
          throw InvalidInput("latent volume for '" + items_[i] + "' is negative or not finite");
        }
        any_positive |= v > 0;
      }
      if (!any_positive) throw InvalidInput("latent volume for '" + items_[i] + "' is all zero");
    }
  }

  const ItemList& items() const { return items_; }
  const TimeAxis& axis() const { return axis_; }
  const Eigen::MatrixXd& volumes() const { return volumes_; }
  std::size_t n_items() const { return items_.size(); }
  std::size_t n_periods() const { return axis_.size(); }

  Eigen::VectorXd totals() const { return volumes_.rowwise().sum(); }

 private:
  ItemList items_;
  TimeAxis axis_;
  Eigen::MatrixXd volumes_;
};

/// Per-item series on one common scale. NaN marks a missing cell.
class StitchedPanel {
 public:
  StitchedPanel(ItemList items, TimeAxis axis, Eigen::MatrixXd values)
      : items_(std::move(items)), axis_(std::move(axis)), values_(std::move(values)) {
    detail::require_unique(items_, "item");
    if (values_.rows() != static_cast<Eigen::Index>(items_.size()) ||
        values_.cols() != static_cast<Eigen::Index>(axis_.size())) {
      throw InvalidInput("panel dimensions do not match items x periods");
    }
    for (Eigen::Index i = 0; i < values_.rows(); ++i) {
      for (Eigen::Index t = 0; t < values_.cols(); ++t) {
        const double v = values_(i, t);
        if (!is_missing(v) && (!std::isfinite(v) || v < 0)) {
          throw InvalidInput("panel value for '" + items_[i] + "' at " + axis_[t].str() +
                             " is negative or not finite");
        }
      }
    }
  }

  const ItemList& items() const { return items_; }
  const TimeAxis& axis() const { return axis_; }
  const Eigen::MatrixXd& values() const { return values_; }
  std::size_t n_items() const { return items_.size(); }
  std::size_t n_periods() const { return axis_.size(); }

  bool has_missing() const { return values_.hasNaN(); }

 private:
  ItemList items_;
  TimeAxis axis_;
  Eigen::MatrixXd values_;
};

// ---------------------------------------------------------------------------
// Comparison tensor
// ---------------------------------------------------------------------------

/// Quantized pairwise search results. For every (item i, comparator j, period
/// t): p_plus is the score of item i and p_minus the score of comparator j in
/// the i-vs-j search. Values are stored as given; `validate_tensor` checks
/// range and normalization.
class ComparisonTensor {
 public:
  ComparisonTensor(ItemList items, ItemList comparators, TimeAxis axis, std::vector<int> p_plus,
                   std::vector<int> p_minus, std::vector<std::uint8_t> missing)
      : items_(std::move(items)),
        comparators_(std::move(comparators)),
        axis_(std::move(axis)),
        p_plus_(std::move(p_plus)),
        p_minus_(std::move(p_minus)),
        missing_(std::move(missing)) {
    detail::require_unique(items_, "item");
    detail::require_unique(comparators_, "comparator");
    if (items_.empty() || comparators_.empty()) {
      throw InvalidInput("comparison tensor needs at least one item and one comparator");
    }
    const std::size_t cells = items_.size() * comparators_.size() * axis_.size();
    if (p_plus_.size() != cells || p_minus_.size() != cells || missing_.size() != cells) {
      throw InvalidInput("comparison tensor storage does not match items x comparators x periods");
    }
    for (const auto& i : items_) {
      for (const auto& j : comparators_) {
        if (i == j) throw InvalidInput("identity pair: '" + i + "' compared with itself");
      }
    }
  }

  const ItemList& items() const { return items_; }
  const ItemList& comparators() const { return comparators_; }
  const TimeAxis& axis() const { return axis_; }
  std::size_t n_items() const { return items_.size(); }
  std::size_t n_comparators() const { return comparators_.size(); }
  std::size_t n_periods() const { return axis_.size(); }

  std::size_t index(std::size_t i, std::size_t j, std::size_t t) const {
    return (i * comparators_.size() + j) * axis_.size() + t;
  }
  int p_plus(std::size_t i, std::size_t j, std::size_t t) const { return p_plus_[index(i, j, t)]; }
  int p_minus(std::size_t i, std::size_t j, std::size_t t) const { return p_minus_[index(i, j, t)]; }
  bool missing(std::size_t i, std::size_t j, std::size_t t) const {
    return missing_[index(i, j, t)] != 0;
  }

  const std::vector<int>& p_plus_data() const { return p_plus_; }
  const std::vector<int>& p_minus_data() const { return p_minus_; }
  const std::vector<std::uint8_t>& missing_data() const { return missing_; }

 private:
  ItemList items_;
  ItemList comparators_;
  TimeAxis axis_;
  std::vector<int> p_plus_;
  std::vector<int> p_minus_;
  std::vector<std::uint8_t> missing_;
};

/// S+ and S- (n x m): pairwise scores summed over periods, skipping masked cells.
struct SummedComparisonMatrices {
  Eigen::MatrixXd s_plus;
  Eigen::MatrixXd s_minus;
};

/// Outputs of the combination algorithm, in original item order.
struct AggregateIndex {
  ItemList items;
  /// Overall popularity index, 1000 for the highest-volume item.
  Eigen::VectorXd ag_ratings;
  /// Per-item rescale factor relative to the item's chain base.
  Eigen::VectorXd multipliers;
  /// Multipliers composed along the base chain, i.e. relative to the top item.
  Eigen::VectorXd scale_multipliers;
  /// sort_order[r] = original index of the item at sorted rank r.
  std::vector<std::size_t> sort_order;
  /// base_of[i] = original index of the base item item i was rated against.
  std::vector<std::size_t> base_of;
  /// SumPlus per item (row sums of S+), kept for stitching.
  Eigen::VectorXd sum_plus;

  /// Rank (0-based) of each item in the descending SumRatio sort.
  std::vector<std::size_t> sort_rank() const {
    std::vector<std::size_t> rank(sort_order.size());
    for (std::size_t r = 0; r < sort_order.size(); ++r) rank[sort_order[r]] = r;
    return rank;
  }
};

// ---------------------------------------------------------------------------
// Validation
// ---------------------------------------------------------------------------

enum class Rule { kOutOfRange, kMaxNot100 };

inline const char* rule_name(Rule r) {
  switch (r) {
    case Rule::kOutOfRange: return "value_out_of_range";
    case Rule::kMaxNot100: return "pair_max_not_100";
  }
  return "unknown";
}

struct Violation {
  std::size_t item;
  std::size_t comparator;
  /// Period index; for pair-level rules this is the period of the pair maximum.
  std::size_t period;
  Rule rule;
  std::string message;
};

/// Checks every ComparisonTensor invariant. Empty result iff all hold.
inline std::vector<Violation> validate_tensor(const ComparisonTensor& tensor) {
  std::vector<Violation> report;
  const std::size_t n = tensor.n_items(), m = tensor.n_comparators(), T = tensor.n_periods();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) {
      bool complete = true;
      int pair_max = -1;
      std::size_t argmax = 0;
      for (std::size_t t = 0; t < T; ++t) {
        if (tensor.missing(i, j, t)) {
          complete = false;
          continue;
        }
        for (int v : {tensor.p_plus(i, j, t), tensor.p_minus(i, j, t)}) {
          if (v < 0 || v > 100) {
            report.push_back({i, j, t, Rule::kOutOfRange,
                              "value " + std::to_string(v) + " outside [0, 100] for (" +
                                  tensor.items()[i] + ", " + tensor.comparators()[j] + ", " +
                                  tensor.axis()[t].str() + ")"});
          }
          if (v > pair_max) {
            pair_max = v;
            argmax = t;
          }
        }
      }
      // A maximum above 100 is already reported by the range rule.
      if (complete && pair_max < 100) {
        report.push_back({i, j, argmax, Rule::kMaxNot100,
                          "pair (" + tensor.items()[i] + ", " + tensor.comparators()[j] +
                              ") has maximum " + std::to_string(pair_max) + ", expected 100"});
      }
    }
  }
  return report;
}

}  // namespace trendagg
