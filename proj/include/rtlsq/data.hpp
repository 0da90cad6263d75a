#ifndef RTLSQ_DATA_HPP
#define RTLSQ_DATA_HPP

// Labeled feature tables shared by every classifier, plus the min-max
// normalization contract and the stratified train/test split.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <string>
#include <vector>

#include "rtlsq/error.hpp"
#include "rtlsq/rng.hpp"

namespace rtlsq {

inline constexpr int kClassCount = 3;
inline const std::vector<std::string> kClassNames{"Normal", "DoS", "Spoof"};

struct LabeledSet {
  std::vector<std::vector<double>> rows;
  std::vector<int> labels;

  std::size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }
  std::size_t width() const { return rows.empty() ? 0 : rows.front().size(); }

  void validate(int class_count = kClassCount) const {
    if (rows.size() != labels.size()) throw DataError("feature rows and labels differ in length");
    for (const auto& r : rows)
      if (r.size() != width()) throw DataError("feature rows have inconsistent widths");
    for (int y : labels)
      if (y < 0 || y >= class_count) throw DataError("label out of range: " + std::to_string(y));
  }

  LabeledSet subset(const std::vector<std::size_t>& idx) const {
    LabeledSet out;
    out.rows.reserve(idx.size());
    out.labels.reserve(idx.size());
    for (std::size_t i : idx) {
      out.rows.push_back(rows[i]);
      out.labels.push_back(labels[i]);
    }
    return out;
  }
};

// Collapses every attack class onto label 1.
inline LabeledSet binary_collapse(LabeledSet s) {
  for (int& y : s.labels) y = y == 0 ? 0 : 1;
  return s;
}

struct Split {
  LabeledSet train;
  LabeledSet test;
};

// Per class: seeded shuffle, first round(fraction * n) go to train.
inline Split stratified_split(const LabeledSet& data, double train_fraction, std::uint64_t seed) {
  require(train_fraction > 0.0 && train_fraction < 1.0, "train fraction must be in (0, 1)");
  data.validate(std::numeric_limits<int>::max());
  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < data.size(); ++i) by_class[data.labels[i]].push_back(i);
  Rng rng = substream(seed, "split");
  std::vector<std::size_t> train_idx, test_idx;
  for (auto& [label, idx] : by_class) {
    shuffle(idx, rng);
    auto n_train = static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(idx.size())));
    train_idx.insert(train_idx.end(), idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
    test_idx.insert(test_idx.end(), idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
  }
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(test_idx.begin(), test_idx.end());
  return {data.subset(train_idx), data.subset(test_idx)};
}

/// Min-max scaling fitted on training rows only. Constant columns map to 0;
/// values outside the fitted range are clipped to [0, 1].
struct MinMaxScaler {
  std::vector<double> lo;
  std::vector<double> hi;

  static MinMaxScaler fit(const LabeledSet& train) {
    if (train.empty()) throw DataError("cannot fit a scaler on an empty table");
    MinMaxScaler s;
    s.lo.assign(train.width(), std::numeric_limits<double>::infinity());
    s.hi.assign(train.width(), -std::numeric_limits<double>::infinity());
    for (const auto& r : train.rows)
      for (std::size_t c = 0; c < r.size(); ++c) {
        s.lo[c] = std::min(s.lo[c], r[c]);
        s.hi[c] = std::max(s.hi[c], r[c]);
      }
    return s;
  }

  std::vector<double> transform(const std::vector<double>& row) const {
    require(row.size() == lo.size(), "scaler width mismatch");
    std::vector<double> out(row.size());
    for (std::size_t c = 0; c < row.size(); ++c) {
      double span = hi[c] - lo[c];
      out[c] = span > 0.0 ? std::clamp((row[c] - lo[c]) / span, 0.0, 1.0) : 0.0;
    }
    return out;
  }

  LabeledSet transform(const LabeledSet& data) const {
    LabeledSet out{{}, data.labels};
    out.rows.reserve(data.size());
    for (const auto& r : data.rows) out.rows.push_back(transform(r));
    return out;
  }
};

}  // namespace rtlsq

#endif  // RTLSQ_DATA_HPP
