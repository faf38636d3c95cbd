#pragma once

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "nsopt/errors.hpp"

namespace nsopt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Tuple of dense blocks (x_1, ..., x_N), the primal iterate.
struct BlockVector {
  std::vector<Vector> blocks;

  BlockVector() = default;
  explicit BlockVector(std::vector<Vector> b) : blocks(std::move(b)) {}

  int num_blocks() const { return static_cast<int>(blocks.size()); }
  Eigen::Index dim(int i) const { return blocks[static_cast<size_t>(i)].size(); }

  Eigen::Index total_dim() const {
    Eigen::Index n = 0;
    for (const auto& b : blocks) n += b.size();
    return n;
  }

  Vector& operator[](int i) { return blocks[static_cast<size_t>(i)]; }
  const Vector& operator[](int i) const { return blocks[static_cast<size_t>(i)]; }

  bool all_finite() const {
    for (const auto& b : blocks)
      if (!b.allFinite()) return false;
    return true;
  }

  Vector flatten() const {
    Vector out(total_dim());
    Eigen::Index off = 0;
    for (const auto& b : blocks) {
      out.segment(off, b.size()) = b;
      off += b.size();
    }
    return out;
  }

  static BlockVector from_flat(const Vector& v, const std::vector<Eigen::Index>& dims) {
    Eigen::Index total = 0;
    for (auto d : dims) total += d;
    if (total != v.size()) throw DimensionError("from_flat: size mismatch");
    BlockVector out;
    Eigen::Index off = 0;
    for (auto d : dims) {
      out.blocks.push_back(v.segment(off, d));
      off += d;
    }
    return out;
  }
};

/// sum_i ||a_i - b_i||^2
inline double squared_distance(const BlockVector& a, const BlockVector& b) {
  if (a.num_blocks() != b.num_blocks()) throw DimensionError("squared_distance: block count");
  double s = 0.0;
  for (int i = 0; i < a.num_blocks(); ++i) s += (a[i] - b[i]).squaredNorm();
  return s;
}

}  // namespace nsopt
