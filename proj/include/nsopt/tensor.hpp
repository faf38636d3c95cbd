#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>

#include <Eigen/Dense>

#include "nsopt/block_vector.hpp"
#include "nsopt/errors.hpp"

namespace nsopt {

/// Dense third-order tensor, mode-1-major: entry (i1, i2, i3) lives at
/// linear index i1 + I1 (i2 + I2 i3).
class Tensor3 {
 public:
  Tensor3() : dims_{0, 0, 0} {}
  Tensor3(Eigen::Index i1, Eigen::Index i2, Eigen::Index i3) : dims_{i1, i2, i3} {
    if (i1 <= 0 || i2 <= 0 || i3 <= 0) throw InvalidParameter("Tensor3: dims must be positive");
    data_ = Vector::Zero(i1 * i2 * i3);
  }

  Eigen::Index dim(int k) const { return dims_[static_cast<size_t>(k)]; }
  Eigen::Index size() const { return data_.size(); }

  double& at(Eigen::Index i1, Eigen::Index i2, Eigen::Index i3) {
    return data_[i1 + dims_[0] * (i2 + dims_[1] * i3)];
  }
  double at(Eigen::Index i1, Eigen::Index i2, Eigen::Index i3) const {
    return data_[i1 + dims_[0] * (i2 + dims_[1] * i3)];
  }

  Vector& vec() { return data_; }
  const Vector& vec() const { return data_; }

  double norm() const { return data_.norm(); }
  double squaredNorm() const { return data_.squaredNorm(); }
  bool all_finite() const { return data_.allFinite(); }
  bool same_dims(const Tensor3& o) const {
    return dims_[0] == o.dims_[0] && dims_[1] == o.dims_[1] && dims_[2] == o.dims_[2];
  }

  Tensor3& operator+=(const Tensor3& o) {
    check(o);
    data_ += o.data_;
    return *this;
  }
  Tensor3& operator-=(const Tensor3& o) {
    check(o);
    data_ -= o.data_;
    return *this;
  }
  Tensor3& operator*=(double s) {
    data_ *= s;
    return *this;
  }
  friend Tensor3 operator+(Tensor3 a, const Tensor3& b) { return a += b; }
  friend Tensor3 operator-(Tensor3 a, const Tensor3& b) { return a -= b; }
  friend Tensor3 operator*(double s, Tensor3 a) { return a *= s; }

 private:
  void check(const Tensor3& o) const {
    if (!same_dims(o)) throw DimensionError("Tensor3: dim mismatch");
  }
  std::array<Eigen::Index, 3> dims_;
  Vector data_;
};

/// Mode-n unfolding: mode 1 gives I1 x (I2 I3) with column j = i2 + I2 i3,
/// mode 2 gives I2 x (I1 I3) with column j = i1 + I1 i3, mode 3 gives
/// I3 x (I1 I2) with column j = i1 + I1 i2.
inline Matrix mode_unfold(const Tensor3& t, int mode) {
  const Eigen::Index I1 = t.dim(0), I2 = t.dim(1), I3 = t.dim(2);
  Matrix m;
  switch (mode) {
    case 1:
      m.resize(I1, I2 * I3);
      for (Eigen::Index i3 = 0; i3 < I3; ++i3)
        for (Eigen::Index i2 = 0; i2 < I2; ++i2)
          for (Eigen::Index i1 = 0; i1 < I1; ++i1) m(i1, i2 + I2 * i3) = t.at(i1, i2, i3);
      return m;
    case 2:
      m.resize(I2, I1 * I3);
      for (Eigen::Index i3 = 0; i3 < I3; ++i3)
        for (Eigen::Index i2 = 0; i2 < I2; ++i2)
          for (Eigen::Index i1 = 0; i1 < I1; ++i1) m(i2, i1 + I1 * i3) = t.at(i1, i2, i3);
      return m;
    case 3:
      m.resize(I3, I1 * I2);
      for (Eigen::Index i3 = 0; i3 < I3; ++i3)
        for (Eigen::Index i2 = 0; i2 < I2; ++i2)
          for (Eigen::Index i1 = 0; i1 < I1; ++i1) m(i3, i1 + I1 * i2) = t.at(i1, i2, i3);
      return m;
    default:
      throw InvalidParameter("mode_unfold: mode must be 1, 2 or 3");
  }
}

inline Tensor3 mode_fold(const Matrix& m, int mode, Eigen::Index I1, Eigen::Index I2,
                         Eigen::Index I3) {
  Tensor3 t(I1, I2, I3);
  switch (mode) {
    case 1:
      if (m.rows() != I1 || m.cols() != I2 * I3) throw DimensionError("mode_fold: shape");
      for (Eigen::Index i3 = 0; i3 < I3; ++i3)
        for (Eigen::Index i2 = 0; i2 < I2; ++i2)
          for (Eigen::Index i1 = 0; i1 < I1; ++i1) t.at(i1, i2, i3) = m(i1, i2 + I2 * i3);
      return t;
    case 2:
      if (m.rows() != I2 || m.cols() != I1 * I3) throw DimensionError("mode_fold: shape");
      for (Eigen::Index i3 = 0; i3 < I3; ++i3)
        for (Eigen::Index i2 = 0; i2 < I2; ++i2)
          for (Eigen::Index i1 = 0; i1 < I1; ++i1) t.at(i1, i2, i3) = m(i2, i1 + I1 * i3);
      return t;
    case 3:
      if (m.rows() != I3 || m.cols() != I1 * I2) throw DimensionError("mode_fold: shape");
      for (Eigen::Index i3 = 0; i3 < I3; ++i3)
        for (Eigen::Index i2 = 0; i2 < I2; ++i2)
          for (Eigen::Index i1 = 0; i1 < I1; ++i1) t.at(i1, i2, i3) = m(i3, i1 + I1 * i2);
      return t;
    default:
      throw InvalidParameter("mode_fold: mode must be 1, 2 or 3");
  }
}

/// Columnwise Kronecker product: column r is kron(X[:,r], Y[:,r]) with
/// kron(x, y)[i q + j] = x_i y_j, matching the unfolding's row order.
inline Matrix khatri_rao(const Matrix& X, const Matrix& Y) {
  if (X.cols() != Y.cols()) throw DimensionError("khatri_rao: column count mismatch");
  Matrix out(X.rows() * Y.rows(), X.cols());
  for (Eigen::Index r = 0; r < X.cols(); ++r)
    for (Eigen::Index i = 0; i < X.rows(); ++i)
      for (Eigen::Index j = 0; j < Y.rows(); ++j)
        out(i * Y.rows() + j, r) = X(i, r) * Y(j, r);
  return out;
}

/// Reconstruct sum_r A[:,r] x B[:,r] x C[:,r] through the mode-1 identity
/// Z_(1) = A (C kr B)^T.
inline Tensor3 cp_reconstruct(const Matrix& A, const Matrix& B, const Matrix& C) {
  if (A.cols() != B.cols() || A.cols() != C.cols())
    throw DimensionError("cp_reconstruct: factor rank mismatch");
  const Matrix Z1 = A * khatri_rao(C, B).transpose();
  return mode_fold(Z1, 1, A.rows(), B.rows(), C.rows());
}

inline void save_tensor(const Tensor3& t, const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidParameter("save_tensor: cannot open " + path);
  const std::uint64_t dims[3] = {static_cast<std::uint64_t>(t.dim(0)),
                                 static_cast<std::uint64_t>(t.dim(1)),
                                 static_cast<std::uint64_t>(t.dim(2))};
  f.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  f.write(reinterpret_cast<const char*>(t.vec().data()),
          static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(t.size())));
  if (!f) throw AssumptionViolation("save_tensor: write failed");
}

inline Tensor3 load_tensor(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw InvalidParameter("load_tensor: cannot open " + path);
  std::uint64_t dims[3];
  f.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!f) throw InvalidParameter("load_tensor: truncated header");
  Tensor3 t(static_cast<Eigen::Index>(dims[0]), static_cast<Eigen::Index>(dims[1]),
            static_cast<Eigen::Index>(dims[2]));
  f.read(reinterpret_cast<char*>(t.vec().data()),
         static_cast<std::streamsize>(sizeof(double) * static_cast<size_t>(t.size())));
  if (!f) throw InvalidParameter("load_tensor: truncated payload");
  if (!t.all_finite()) throw InvalidParameter("load_tensor: non-finite entries");
  return t;
}

}  // namespace nsopt
