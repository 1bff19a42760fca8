#include "vp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace vp {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::Singular: return "Singular";
    case ErrorKind::ConvergenceFailure: return "ConvergenceFailure";
    case ErrorKind::DegenerateChannel: return "DegenerateChannel";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::SearchSpaceTooLarge: return "SearchSpaceTooLarge";
    case ErrorKind::CountersDisabled: return "CountersDisabled";
    case ErrorKind::Overflow: return "Overflow";
    case ErrorKind::InapplicableExpansion: return "InapplicableExpansion";
    case ErrorKind::ConfigInvalid: return "ConfigInvalid";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

namespace {

constexpr double kRankTolerance = 1e-12;
constexpr double kPivotTolerance = 1e-14;
constexpr int kMaxJacobiSweeps = 80;

double max_abs(const RealMatrix& m) {
  double out = 0.0;
  for (double v : m.values()) out = std::max(out, std::abs(v));
  return out;
}

}  // namespace

ComplexMatrix adjoint(const ComplexMatrix& m) {
  ComplexMatrix out(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) out(j, i) = std::conj(m(i, j));
  return out;
}

RealVector operator*(const RealMatrix& m, std::span<const double> v) {
  if (m.cols() != v.size()) {
    throw Error(ErrorKind::LengthMismatch, "matrix-vector shape mismatch");
  }
  RealVector out(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) {
    double acc = 0.0;
    auto row = m.row(i);
    for (std::size_t j = 0; j < v.size(); ++j) acc += row[j] * v[j];
    out[i] = acc;
  }
  return out;
}

double squared_norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return acc;
}

QrFactors qr_decompose(const RealMatrix& m) {
  const std::size_t rows = m.rows();
  const std::size_t cols = m.cols();
  if (rows < cols) {
    throw Error(ErrorKind::InvalidArgument, "qr_decompose needs rows >= cols");
  }

  RealMatrix a = m;
  // Householder vectors, v_k lives in entries k..rows-1.
  std::vector<RealVector> reflectors(cols, RealVector(rows, 0.0));

  for (std::size_t k = 0; k < cols; ++k) {
    double norm_x = 0.0;
    for (std::size_t i = k; i < rows; ++i) norm_x += a(i, k) * a(i, k);
    norm_x = std::sqrt(norm_x);

    RealVector& v = reflectors[k];
    if (norm_x == 0.0) continue;  // column already zero; caught by rank check

    const double alpha = a(k, k) > 0.0 ? -norm_x : norm_x;
    for (std::size_t i = k; i < rows; ++i) v[i] = a(i, k);
    v[k] -= alpha;
    const double v_norm_sq = squared_norm(std::span<const double>(v).subspan(k));
    if (v_norm_sq == 0.0) continue;

    for (std::size_t j = k; j < cols; ++j) {
      double dot = 0.0;
      for (std::size_t i = k; i < rows; ++i) dot += v[i] * a(i, j);
      const double f = 2.0 * dot / v_norm_sq;
      for (std::size_t i = k; i < rows; ++i) a(i, j) -= f * v[i];
    }
    for (std::size_t i = k; i < rows; ++i) v[i] /= std::sqrt(v_norm_sq);
  }

  // Thin Q: apply reflectors in reverse to the first `cols` identity columns.
  RealMatrix q(rows, cols);
  for (std::size_t j = 0; j < cols; ++j) q(j, j) = 1.0;
  for (std::size_t kk = cols; kk-- > 0;) {
    const RealVector& v = reflectors[kk];
    for (std::size_t j = 0; j < cols; ++j) {
      double dot = 0.0;
      for (std::size_t i = kk; i < rows; ++i) dot += v[i] * q(i, j);
      if (dot == 0.0) continue;
      for (std::size_t i = kk; i < rows; ++i) q(i, j) -= 2.0 * dot * v[i];
    }
  }

  RealMatrix r(cols, cols);
  for (std::size_t i = 0; i < cols; ++i)
    for (std::size_t j = i; j < cols; ++j) r(i, j) = a(i, j);

  // Sign convention: nonnegative diagonal of R.
  for (std::size_t k = 0; k < cols; ++k) {
    if (r(k, k) < 0.0) {
      for (std::size_t j = k; j < cols; ++j) r(k, j) = -r(k, j);
      for (std::size_t i = 0; i < rows; ++i) q(i, k) = -q(i, k);
    }
    if (r(k, k) <= kRankTolerance) {
      throw Error(ErrorKind::RankDeficient, "R diagonal entry at or below 1e-12");
    }
  }
  return {std::move(q), std::move(r)};
}

RealMatrix lower_from_r_inverse(const RealMatrix& r) {
  const std::size_t n = r.rows();
  if (r.cols() != n) throw Error(ErrorKind::InvalidArgument, "R must be square");
  for (std::size_t i = 0; i < n; ++i) {
    if (std::abs(r(i, i)) <= kRankTolerance) {
      throw Error(ErrorKind::RankDeficient, "R diagonal entry at or below 1e-12");
    }
  }
  // Column j of R^-1 solves R x = e_j; it is row j of L.
  RealMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    for (std::size_t ii = j + 1; ii-- > 0;) {
      double acc = (ii == j) ? 1.0 : 0.0;
      for (std::size_t k = ii + 1; k <= j; ++k) acc -= r(ii, k) * l(j, k);
      l(j, ii) = acc / r(ii, ii);
    }
  }
  return l;
}

RealMatrix inverse(const RealMatrix& m) {
  const std::size_t n = m.rows();
  if (m.cols() != n) throw Error(ErrorKind::InvalidArgument, "inverse of non-square matrix");
  const double scale = std::max(max_abs(m), 1.0);

  RealMatrix a = m;
  RealMatrix inv = RealMatrix::identity(n);
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t i = col + 1; i < n; ++i)
      if (std::abs(a(i, col)) > std::abs(a(pivot, col))) pivot = i;
    if (std::abs(a(pivot, col)) < kPivotTolerance * scale) {
      throw Error(ErrorKind::Singular, "pivot below 1e-14");
    }
    if (pivot != col) {
      for (std::size_t j = 0; j < n; ++j) {
        std::swap(a(pivot, j), a(col, j));
        std::swap(inv(pivot, j), inv(col, j));
      }
    }
    const double p = a(col, col);
    for (std::size_t j = 0; j < n; ++j) {
      a(col, j) /= p;
      inv(col, j) /= p;
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (i == col) continue;
      const double f = a(i, col);
      if (f == 0.0) continue;
      for (std::size_t j = 0; j < n; ++j) {
        a(i, j) -= f * a(col, j);
        inv(i, j) -= f * inv(col, j);
      }
    }
  }
  return inv;
}

RealMatrix pseudo_inverse(const RealMatrix& m, double regularization) {
  if (regularization < 0.0) {
    throw Error(ErrorKind::InvalidArgument, "regularization must be nonnegative");
  }
  if (regularization == 0.0) {
    if (m.rows() != m.cols()) {
      throw Error(ErrorKind::Singular, "unregularized pseudo-inverse needs a square matrix");
    }
    return inverse(m);
  }
  const RealMatrix mt = transpose(m);
  RealMatrix gram = m * mt;
  for (std::size_t i = 0; i < gram.rows(); ++i) gram(i, i) += regularization;
  return mt * inverse(gram);
}

std::vector<double> singular_values(const RealMatrix& m) {
  // Work on the orientation with at least as many rows as columns.
  RealMatrix u = m.rows() >= m.cols() ? m : transpose(m);
  const std::size_t rows = u.rows();
  const std::size_t cols = u.cols();
  constexpr double eps = 1e-15;

  bool converged = false;
  for (int sweep = 0; sweep < kMaxJacobiSweeps && !converged; ++sweep) {
    converged = true;
    for (std::size_t p = 0; p + 1 < cols; ++p) {
      for (std::size_t q = p + 1; q < cols; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < rows; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (gamma == 0.0 || std::abs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < rows; ++i) {
          const double up = u(i, p);
          const double uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
      }
    }
  }
  if (!converged) {
    throw Error(ErrorKind::ConvergenceFailure, "one-sided Jacobi exceeded sweep cap");
  }

  std::vector<double> sigma(cols);
  for (std::size_t j = 0; j < cols; ++j) {
    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) acc += u(i, j) * u(i, j);
    sigma[j] = std::sqrt(acc);
  }
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return sigma;
}

double frobenius_norm_sq(const RealMatrix& m) {
  double acc = 0.0;
  for (double v : m.values()) acc += v * v;
  return acc;
}

double frobenius_norm_sq(const ComplexMatrix& m) {
  double acc = 0.0;
  for (const Complex& v : m.values()) acc += std::norm(v);
  return acc;
}

}  // namespace vp
