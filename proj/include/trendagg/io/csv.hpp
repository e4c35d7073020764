#pragma once

// Long-form CSV readers and writers. Every file starts with a schema comment
//   # trendagg-csv v<major>.<minor> <kind>
// followed by a header row. Readers reject other major versions and kinds.

#include "trendagg/core.hpp"
#include "trendagg/nowcast/evaluate.hpp"
#include "trendagg/tsanalysis/series.hpp"

#include <charconv>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <vector>

namespace trendagg::io {

inline constexpr int kSchemaMajor = 1;
inline constexpr int kSchemaMinor = 0;

/// Malformed input file; the message carries the path and line number.
class CsvError : public Error {
 public:
  CsvError(const std::string& path, std::size_t line, const std::string& what)
      : Error(path + ":" + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Shortest representation that parses back to the same double; "" for NaN.
inline std::string format_real(double v) {
  if (std::isnan(v)) return {};
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return {buf, res.ptr};
}

inline std::string quote_field(std::string_view s) {
  if (s.find_first_of(",\"\n\r") == std::string_view::npos) return std::string(s);
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

struct CsvTable {
  std::string path;
  std::string kind;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  /// Source line of each row (1-based).
  std::vector<std::size_t> lines;

  std::size_t column(std::string_view name) const {
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (header[c] == name) return c;
    }
    throw CsvError(path, 2, "missing column '" + std::string(name) + "'");
  }
  [[noreturn]] void fail(std::size_t row, const std::string& what) const { throw CsvError(path, lines[row], what); }

  double real(std::size_t row, std::size_t col) const {
    const std::string& s = rows[row][col];
    if (s.empty()) return kMissing;
    double v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      fail(row, "column '" + header[col] + "': '" + s + "' is not a number");
    }
    return v;
  }
  std::optional<long long> integer(std::size_t row, std::size_t col) const {
    const std::string& s = rows[row][col];
    if (s.empty()) return std::nullopt;
    long long v = 0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      fail(row, "column '" + header[col] + "': '" + s + "' is not an integer");
    }
    return v;
  }
  Period period(std::size_t row, std::size_t col) const {
    try {
      return Period::parse(rows[row][col]);
    } catch (const InvalidInput& e) {
      fail(row, e.what());
    }
  }
};

namespace detail {

inline std::vector<std::string> split_record(std::string_view line, const std::string& path, std::size_t lineno) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false, was_quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char c = line[k];
    if (quoted) {
      if (c == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          field += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
      was_quoted = false;
    } else if (c == '"' && field.empty() && !was_quoted) {
      quoted = was_quoted = true;
    } else {
      field += c;
    }
  }
  if (quoted) throw CsvError(path, lineno, "unterminated quoted field");
  out.push_back(std::move(field));
  return out;
}

}  // namespace detail

inline CsvTable parse_table(std::istream& in, const std::string& path, std::string_view kind,
                            const std::vector<std::string>& required) {
  CsvTable t;
  t.path = path;
  std::string line;
  std::size_t lineno = 0;
  auto next = [&]() {
    if (!std::getline(in, line)) return false;
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return true;
  };

  if (!next()) throw CsvError(path, 1, "empty file");
  {
    std::istringstream head(line);
    std::string hash, tag, version;
    head >> hash >> tag >> version >> t.kind;
    if (hash != "#" || tag != "trendagg-csv" || version.size() < 2 || version[0] != 'v') {
      throw CsvError(path, 1, "missing '# trendagg-csv v<version> <kind>' schema line");
    }
    int major = -1;
    const auto res = std::from_chars(version.data() + 1, version.data() + version.size(), major);
    if (res.ec != std::errc{}) throw CsvError(path, 1, "unreadable schema version '" + version + "'");
    if (major != kSchemaMajor) {
      throw CsvError(path, 1, "unsupported schema major version " + std::to_string(major));
    }
    if (t.kind != kind) throw CsvError(path, 1, "expected a '" + std::string(kind) + "' file, found '" + t.kind + "'");
  }
  if (!next()) throw CsvError(path, 2, "missing header row");
  t.header = detail::split_record(line, path, lineno);
  for (const auto& name : required) t.column(name);

  while (next()) {
    if (line.empty()) continue;
    auto fields = detail::split_record(line, path, lineno);
    if (fields.size() != t.header.size()) {
      throw CsvError(path, lineno, "expected " + std::to_string(t.header.size()) + " fields, found " +
                                       std::to_string(fields.size()));
    }
    t.rows.push_back(std::move(fields));
    t.lines.push_back(lineno);
  }
  return t;
}

inline CsvTable read_table(const std::filesystem::path& path, std::string_view kind,
                           const std::vector<std::string>& required) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  return parse_table(in, path.string(), kind, required);
}

/// Writes to a sibling temporary file, then renames it over `path`.
inline void write_atomic(const std::filesystem::path& path, const std::string& content) {
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw Error("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

/// Builds the text of a table; fields are quoted only when needed.
class CsvWriter {
 public:
  CsvWriter(std::string_view kind, const std::vector<std::string>& header) {
    text_ = "# trendagg-csv v" + std::to_string(kSchemaMajor) + "." + std::to_string(kSchemaMinor) + " " +
            std::string(kind) + "\n";
    row(header);
  }
  void row(const std::vector<std::string>& fields) {
    for (std::size_t c = 0; c < fields.size(); ++c) {
      if (c) text_ += ',';
      text_ += quote_field(fields[c]);
    }
    text_ += '\n';
  }
  const std::string& str() const { return text_; }
  void save(const std::filesystem::path& path) const { write_atomic(path, text_); }

 private:
  std::string text_;
};

namespace detail {

/// Labels in first-appearance order with their positions.
struct LabelIndex {
  ItemList labels;
  std::unordered_map<std::string, std::size_t> pos;
  std::size_t add(const std::string& s) {
    auto [it, inserted] = pos.emplace(s, labels.size());
    if (inserted) labels.push_back(s);
    return it->second;
  }
};

/// Consecutive monthly axis spanning the periods seen in the file.
inline TimeAxis axis_from(const CsvTable& t, std::size_t col) {
  if (t.rows.empty()) throw CsvError(t.path, 2, "no data rows");
  Period lo = t.period(0, col), hi = lo;
  for (std::size_t r = 1; r < t.rows.size(); ++r) {
    const Period p = t.period(r, col);
    if (p < lo) lo = p;
    if (hi < p) hi = p;
  }
  const auto count = static_cast<std::size_t>(hi.ordinal() - lo.ordinal() + 1);
  if (count < 2) throw CsvError(t.path, t.lines[0], "need at least two periods");
  return TimeAxis::monthly(lo, count);
}

inline std::size_t period_slot(const CsvTable& t, std::size_t row, std::size_t col, const TimeAxis& axis) {
  return static_cast<std::size_t>(t.period(row, col).ordinal() - axis.front().ordinal());
}

/// item,period,value table into an n x T matrix (absent cells NaN).
inline std::pair<ItemList, Eigen::MatrixXd> read_long_panel(const CsvTable& t, const TimeAxis& axis) {
  const std::size_t ci = t.column("item"), cp = t.column("period"), cv = t.column("value");
  LabelIndex items;
  for (std::size_t r = 0; r < t.rows.size(); ++r) items.add(t.rows[r][ci]);
  Eigen::MatrixXd m = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(items.labels.size()),
                                                static_cast<Eigen::Index>(axis.size()), kMissing);
  std::vector<bool> seen(items.labels.size() * axis.size(), false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t i = items.pos.at(t.rows[r][ci]);
    const std::size_t s = period_slot(t, r, cp, axis);
    if (seen[i * axis.size() + s]) t.fail(r, "duplicate row for " + t.rows[r][ci] + " " + t.rows[r][cp]);
    seen[i * axis.size() + s] = true;
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(s)) = t.real(r, cv);
  }
  return {std::move(items.labels), std::move(m)};
}

inline std::string write_long_panel(std::string_view kind, const ItemList& items, const TimeAxis& axis,
                                    const Eigen::MatrixXd& m) {
  CsvWriter w(kind, {"item", "period", "value"});
  for (std::size_t i = 0; i < items.size(); ++i) {
    for (std::size_t t = 0; t < axis.size(); ++t) {
      w.row({items[i], axis[t].str(), format_real(m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(t)))});
    }
  }
  return w.str();
}

template <class F>
auto wrap_invalid(const CsvTable& t, F&& make) {
  try {
    return make();
  } catch (const CsvError&) {
    throw;
  } catch (const InvalidInput& e) {
    throw CsvError(t.path, t.lines.empty() ? 2 : t.lines.front(), e.what());
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Comparison tensor: item,comparator,period,p_plus,p_minus (empty = missing;
// absent rows are missing too)
// ---------------------------------------------------------------------------

inline std::string tensor_csv(const ComparisonTensor& x) {
  CsvWriter w("tensor", {"item", "comparator", "period", "p_plus", "p_minus"});
  for (std::size_t i = 0; i < x.n_items(); ++i) {
    for (std::size_t j = 0; j < x.n_comparators(); ++j) {
      for (std::size_t t = 0; t < x.n_periods(); ++t) {
        const bool miss = x.missing(i, j, t);
        w.row({x.items()[i], x.comparators()[j], x.axis()[t].str(), miss ? "" : std::to_string(x.p_plus(i, j, t)),
               miss ? "" : std::to_string(x.p_minus(i, j, t))});
      }
    }
  }
  return w.str();
}

inline ComparisonTensor parse_tensor(const CsvTable& t) {
  const std::size_t ci = t.column("item"), cj = t.column("comparator"), cp = t.column("period"),
                    cplus = t.column("p_plus"), cminus = t.column("p_minus");
  const TimeAxis axis = detail::axis_from(t, cp);
  detail::LabelIndex items, comps;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    items.add(t.rows[r][ci]);
    comps.add(t.rows[r][cj]);
  }
  const std::size_t n = items.labels.size(), m = comps.labels.size(), T = axis.size();
  std::vector<int> plus(n * m * T, 0), minus(n * m * T, 0);
  std::vector<std::uint8_t> missing(n * m * T, 1);
  std::vector<bool> seen(n * m * T, false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t k = (items.pos.at(t.rows[r][ci]) * m + comps.pos.at(t.rows[r][cj])) * T +
                          detail::period_slot(t, r, cp, axis);
    if (seen[k]) t.fail(r, "duplicate row for (" + t.rows[r][ci] + ", " + t.rows[r][cj] + ", " + t.rows[r][cp] + ")");
    seen[k] = true;
    const auto a = t.integer(r, cplus), b = t.integer(r, cminus);
    if (a.has_value() != b.has_value()) t.fail(r, "p_plus and p_minus must both be present or both empty");
    if (!a) continue;
    if (*a < INT32_MIN || *a > INT32_MAX || *b < INT32_MIN || *b > INT32_MAX) t.fail(r, "score out of int range");
    plus[k] = static_cast<int>(*a);
    minus[k] = static_cast<int>(*b);
    missing[k] = 0;
  }
  return detail::wrap_invalid(t, [&] {
    return ComparisonTensor(items.labels, comps.labels, axis, std::move(plus), std::move(minus), std::move(missing));
  });
}

inline void write_tensor(const std::filesystem::path& p, const ComparisonTensor& x) { write_atomic(p, tensor_csv(x)); }
inline ComparisonTensor read_tensor(const std::filesystem::path& p) {
  return parse_tensor(read_table(p, "tensor", {"item", "comparator", "period", "p_plus", "p_minus"}));
}

// ---------------------------------------------------------------------------
// Panels: item,period,value
// ---------------------------------------------------------------------------

inline std::string latent_csv(const LatentVolumePanel& p) {
  return detail::write_long_panel("latent", p.items(), p.axis(), p.volumes());
}
inline LatentVolumePanel parse_latent(const CsvTable& t) {
  const TimeAxis axis = detail::axis_from(t, t.column("period"));
  auto [items, m] = detail::read_long_panel(t, axis);
  if (m.hasNaN()) throw CsvError(t.path, t.lines.front(), "latent panel has missing cells");
  return detail::wrap_invalid(t, [&] { return LatentVolumePanel(items, axis, m); });
}
inline void write_latent(const std::filesystem::path& p, const LatentVolumePanel& x) { write_atomic(p, latent_csv(x)); }
inline LatentVolumePanel read_latent(const std::filesystem::path& p) {
  return parse_latent(read_table(p, "latent", {"item", "period", "value"}));
}

inline std::string panel_csv(const StitchedPanel& p) {
  return detail::write_long_panel("panel", p.items(), p.axis(), p.values());
}
inline StitchedPanel parse_panel(const CsvTable& t) {
  const TimeAxis axis = detail::axis_from(t, t.column("period"));
  auto [items, m] = detail::read_long_panel(t, axis);
  return detail::wrap_invalid(t, [&] { return StitchedPanel(items, axis, m); });
}
inline void write_panel(const std::filesystem::path& p, const StitchedPanel& x) { write_atomic(p, panel_csv(x)); }
/// Reads a stitched panel; a latent-panel file is accepted as well.
inline StitchedPanel read_panel(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error("cannot open " + p.string());
  std::string first;
  std::getline(in, first);
  const bool latent = first.find(" latent") != std::string::npos;
  return parse_panel(read_table(p, latent ? "latent" : "panel", {"item", "period", "value"}));
}

// ---------------------------------------------------------------------------
// Target series: period,value
// ---------------------------------------------------------------------------

inline std::string target_csv(const nowcast::TargetSeries& s) {
  CsvWriter w("target", {"period", "value"});
  for (std::size_t t = 0; t < s.axis.size(); ++t) w.row({s.axis[t].str(), format_real(s.values[static_cast<Eigen::Index>(t)])});
  return w.str();
}
inline nowcast::TargetSeries parse_target(const CsvTable& t, std::string name, bool seasonal) {
  const std::size_t cp = t.column("period"), cv = t.column("value");
  const TimeAxis axis = detail::axis_from(t, cp);
  Eigen::VectorXd v = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(axis.size()), kMissing);
  std::vector<bool> seen(axis.size(), false);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const std::size_t s = detail::period_slot(t, r, cp, axis);
    if (seen[s]) t.fail(r, "duplicate period " + t.rows[r][cp]);
    seen[s] = true;
    v[static_cast<Eigen::Index>(s)] = t.real(r, cv);
  }
  return detail::wrap_invalid(t, [&] { return nowcast::TargetSeries(std::move(name), axis, v, seasonal); });
}
inline void write_target(const std::filesystem::path& p, const nowcast::TargetSeries& s) { write_atomic(p, target_csv(s)); }
/// The series is named after the file stem.
inline nowcast::TargetSeries read_target(const std::filesystem::path& p, bool seasonal = false) {
  return parse_target(read_table(p, "target", {"period", "value"}), p.stem().string(), seasonal);
}

// ---------------------------------------------------------------------------
// Aggregate index: item,ag_rating,multiplier,sort_rank plus the chain fields
// needed to rebuild the full record (scale_multiplier, base, sum_plus)
// ---------------------------------------------------------------------------

inline std::string index_csv(const AggregateIndex& x) {
  CsvWriter w("index", {"item", "ag_rating", "multiplier", "sort_rank", "scale_multiplier", "base", "sum_plus"});
  const auto rank = x.sort_rank();
  for (std::size_t i = 0; i < x.items.size(); ++i) {
    const auto ii = static_cast<Eigen::Index>(i);
    w.row({x.items[i], format_real(x.ag_ratings[ii]), format_real(x.multipliers[ii]), std::to_string(rank[i]),
           format_real(x.scale_multipliers[ii]), x.items[x.base_of[i]], format_real(x.sum_plus[ii])});
  }
  return w.str();
}

inline AggregateIndex parse_index(const CsvTable& t) {
  const std::size_t ci = t.column("item"), ca = t.column("ag_rating"), cm = t.column("multiplier"),
                    cr = t.column("sort_rank"), cs = t.column("scale_multiplier"), cb = t.column("base"),
                    cu = t.column("sum_plus");
  const std::size_t n = t.rows.size();
  if (n == 0) throw CsvError(t.path, 2, "no data rows");
  AggregateIndex x;
  x.ag_ratings.resize(static_cast<Eigen::Index>(n));
  x.multipliers.resize(static_cast<Eigen::Index>(n));
  x.scale_multipliers.resize(static_cast<Eigen::Index>(n));
  x.sum_plus.resize(static_cast<Eigen::Index>(n));
  x.sort_order.assign(n, n);
  x.base_of.assign(n, n);
  detail::LabelIndex items;
  for (std::size_t r = 0; r < n; ++r) {
    if (items.add(t.rows[r][ci]) != r) t.fail(r, "duplicate item " + t.rows[r][ci]);
  }
  for (std::size_t r = 0; r < n; ++r) {
    const auto rr = static_cast<Eigen::Index>(r);
    x.ag_ratings[rr] = t.real(r, ca);
    x.multipliers[rr] = t.real(r, cm);
    x.scale_multipliers[rr] = t.real(r, cs);
    x.sum_plus[rr] = t.real(r, cu);
    const auto rank = t.integer(r, cr);
    if (!rank || *rank < 0 || static_cast<std::size_t>(*rank) >= n || x.sort_order[static_cast<std::size_t>(*rank)] != n) {
      t.fail(r, "sort_rank must be a distinct integer in [0, n)");
    }
    x.sort_order[static_cast<std::size_t>(*rank)] = r;
    const auto base = items.pos.find(t.rows[r][cb]);
    if (base == items.pos.end()) t.fail(r, "base '" + t.rows[r][cb] + "' is not an item");
    x.base_of[r] = base->second;
  }
  x.items = std::move(items.labels);
  return x;
}

inline void write_index(const std::filesystem::path& p, const AggregateIndex& x) { write_atomic(p, index_csv(x)); }
inline AggregateIndex read_index(const std::filesystem::path& p) {
  return parse_index(read_table(p, "index", {"item", "ag_rating", "multiplier", "sort_rank"}));
}

// ---------------------------------------------------------------------------
// Distance matrix: a,b,distance over the upper triangle in label order
// ---------------------------------------------------------------------------

inline std::string distances_csv(const ts::DistanceMatrix& d) {
  CsvWriter w("distances", {"a", "b", "distance"});
  for (std::size_t i = 0; i < d.size(); ++i) {
    for (std::size_t j = i + 1; j < d.size(); ++j) {
      w.row({d.labels()[i], d.labels()[j], format_real(d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)))});
    }
  }
  return w.str();
}

inline ts::DistanceMatrix parse_distances(const CsvTable& t) {
  const std::size_t ca = t.column("a"), cb = t.column("b"), cd = t.column("distance");
  detail::LabelIndex labels;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    labels.add(t.rows[r][ca]);
    labels.add(t.rows[r][cb]);
  }
  const auto n = static_cast<Eigen::Index>(labels.labels.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXi seen = Eigen::MatrixXi::Zero(n, n);
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const auto i = static_cast<Eigen::Index>(labels.pos.at(t.rows[r][ca]));
    const auto j = static_cast<Eigen::Index>(labels.pos.at(t.rows[r][cb]));
    if (i == j) t.fail(r, "self distance for " + t.rows[r][ca]);
    if (seen(i, j)) t.fail(r, "duplicate pair");
    seen(i, j) = seen(j, i) = 1;
    m(i, j) = m(j, i) = t.real(r, cd);
  }
  if (seen.sum() != n * (n - 1)) throw CsvError(t.path, t.lines.empty() ? 2 : t.lines.back(), "distance pairs are incomplete");
  return detail::wrap_invalid(t, [&] { return ts::DistanceMatrix(labels.labels, m); });
}

inline void write_distances(const std::filesystem::path& p, const ts::DistanceMatrix& d) {
  write_atomic(p, distances_csv(d));
}
inline ts::DistanceMatrix read_distances(const std::filesystem::path& p) {
  return parse_distances(read_table(p, "distances", {"a", "b", "distance"}));
}

}  // namespace trendagg::io
