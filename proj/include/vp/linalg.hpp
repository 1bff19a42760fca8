#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "vp/error.hpp"

namespace vp {

using Complex = std::complex<double>;

namespace detail {
inline bool is_finite(double v) { return std::isfinite(v); }
inline bool is_finite(const Complex& v) {
  return std::isfinite(v.real()) && std::isfinite(v.imag());
}
}  // namespace detail

/// Dense row-major matrix. Shape is fixed at construction; entries are
/// required to be finite whenever the matrix is built from external data.
template <typename T>
class Matrix {
 public:
  Matrix() = default;

  Matrix(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {
    if (rows == 0 || cols == 0) {
      throw Error(ErrorKind::InvalidArgument, "matrix dimensions must be positive");
    }
  }

  Matrix(std::size_t rows, std::size_t cols, std::vector<T> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (rows == 0 || cols == 0 || data_.size() != rows * cols) {
      throw Error(ErrorKind::InvalidArgument, "matrix data does not match shape");
    }
    for (const auto& v : data_) {
      if (!detail::is_finite(v)) {
        throw Error(ErrorKind::InvalidArgument, "matrix entries must be finite");
      }
    }
  }

  Matrix(std::initializer_list<std::initializer_list<T>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    if (rows_ == 0 || cols_ == 0) {
      throw Error(ErrorKind::InvalidArgument, "matrix dimensions must be positive");
    }
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) {
        throw Error(ErrorKind::InvalidArgument, "ragged matrix initializer");
      }
      for (const auto& v : r) {
        if (!detail::is_finite(v)) {
          throw Error(ErrorKind::InvalidArgument, "matrix entries must be finite");
        }
        data_.push_back(v);
      }
    }
  }

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = T{1};
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return data_.empty(); }

  T& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<T> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
  std::span<const T> row(std::size_t i) const { return {data_.data() + i * cols_, cols_}; }

  std::span<const T> values() const noexcept { return data_; }

  bool operator==(const Matrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<T> data_;
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<Complex>;
using RealVector = std::vector<double>;

template <typename T>
Matrix<T> transpose(const Matrix<T>& m) {
  Matrix<T> out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = m(i, j);
  return out;
}

/// Conjugate transpose.
ComplexMatrix adjoint(const ComplexMatrix& m);

template <typename T>
Matrix<T> operator*(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.cols() != b.rows()) {
    throw Error(ErrorKind::LengthMismatch, "matrix product shape mismatch");
  }
  Matrix<T> out(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const T aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) out(i, j) += aik * b(k, j);
    }
  return out;
}

template <typename T>
Matrix<T> operator+(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::LengthMismatch, "matrix sum shape mismatch");
  }
  Matrix<T> out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) += b(i, j);
  return out;
}

template <typename T>
Matrix<T> operator-(const Matrix<T>& a, const Matrix<T>& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::LengthMismatch, "matrix difference shape mismatch");
  }
  Matrix<T> out = a;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) out(i, j) -= b(i, j);
  return out;
}

template <typename T>
Matrix<T> operator*(T scalar, const Matrix<T>& m) {
  Matrix<T> out = m;
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) *= scalar;
  return out;
}

RealVector operator*(const RealMatrix& m, std::span<const double> v);

double squared_norm(std::span<const double> v);

struct QrFactors {
  RealMatrix q;  ///< rows x cols, orthonormal columns
  RealMatrix r;  ///< cols x cols, upper triangular, nonnegative diagonal
};

/// Thin Householder QR of a tall matrix. Throws RankDeficient when a
/// diagonal entry of R falls to 1e-12 or below.
QrFactors qr_decompose(const RealMatrix& m);

/// L = (R^-1)^T for an upper triangular R, by back substitution.
RealMatrix lower_from_r_inverse(const RealMatrix& r);

/// M^T (M M^T + alpha I)^-1. With alpha == 0 the matrix must be square and
/// the plain inverse is returned.
RealMatrix pseudo_inverse(const RealMatrix& m, double regularization);

/// Inverse of a square matrix by Gauss-Jordan with partial pivoting.
RealMatrix inverse(const RealMatrix& m);

/// Singular values in descending order (one-sided Jacobi).
std::vector<double> singular_values(const RealMatrix& m);

double frobenius_norm_sq(const RealMatrix& m);
double frobenius_norm_sq(const ComplexMatrix& m);

}  // namespace vp
