#include "vp/complexity.hpp"

#include <numeric>

namespace vp {

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_mul_overflow(a, b, &out)) throw Error(ErrorKind::Overflow, "node count overflow");
  return out;
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  std::uint64_t out;
  if (__builtin_add_overflow(a, b, &out)) throw Error(ErrorKind::Overflow, "node count overflow");
  return out;
}

void require_kt(std::size_t k, std::size_t t) {
  if (k < 1) throw Error(ErrorKind::InvalidArgument, "K must be >= 1");
  if (t < 1) throw Error(ErrorKind::InvalidArgument, "T must be >= 1");
}

}  // namespace

const char* to_string(EncoderKind kind) noexcept {
  switch (kind) {
    case EncoderKind::LZF: return "lzf";
    case EncoderKind::LMMSE: return "lmmse";
    case EncoderKind::THP: return "thp";
    case EncoderKind::Exhaustive: return "exhaustive";
    case EncoderKind::Sphere: return "se";
    case EncoderKind::QRDM: return "qrdm";
    case EncoderKind::FSE: return "fse";
  }
  return "unknown";
}

Rational Rational::make(std::uint64_t num, std::uint64_t den) {
  if (den == 0) throw Error(ErrorKind::InvalidArgument, "zero denominator");
  const std::uint64_t g = std::gcd(num, den);
  return g == 0 ? Rational{0, 1} : Rational{num / g, den / g};
}

Rational operator+(const Rational& a, const Rational& b) {
  const std::uint64_t g = std::gcd(a.den, b.den);
  const std::uint64_t lhs = checked_mul(a.num, b.den / g);
  const std::uint64_t rhs = checked_mul(b.num, a.den / g);
  return Rational::make(checked_add(lhs, rhs), checked_mul(a.den, b.den / g));
}

std::uint64_t se_worst_case_nodes(std::size_t k, std::size_t t) {
  require_kt(k, t);
  if (t < 2) throw Error(ErrorKind::InvalidArgument, "worst-case SE count needs T >= 2");
  std::uint64_t power = 1;
  std::uint64_t total = 0;
  for (std::size_t i = 1; i <= k; ++i) {
    power = checked_mul(power, t);
    total = checked_add(total, power);
  }
  return total;
}

std::uint64_t qrdme_nodes(std::size_t k, std::size_t t) {
  require_kt(k, t);
  return checked_add(t, checked_mul(k - 1, checked_mul(t, t)));
}

std::uint64_t fse_nodes(std::size_t k, std::size_t t, std::size_t p) {
  require_kt(k, t);
  if (p < 1 || p > k) throw Error(ErrorKind::InvalidArgument, "FSE depth must satisfy 1 <= p <= K");
  std::uint64_t power = 1;
  std::uint64_t total = 0;
  for (std::size_t i = 1; i <= p; ++i) {
    power = checked_mul(power, t);
    total = checked_add(total, power);
  }
  return checked_add(total, checked_mul(k - p, power));
}

Rational rho(std::size_t k, std::size_t t) {
  return Rational::make(fse_nodes(k, t, 1), qrdme_nodes(k, t));
}

ArithmeticTotals arithmetic_totals(std::size_t k, std::size_t t, std::size_t d, std::size_t n_f) {
  require_kt(k, t);
  if (d < 1) throw Error(ErrorKind::InvalidArgument, "D must be >= 1");
  if (n_f < 1) throw Error(ErrorKind::InvalidArgument, "N_f must be >= 1");
  ArithmeticTotals out;
  // (D T K (K + 1) + 2T - 2) / (2 N_f)
  const std::uint64_t table_mults =
      checked_add(checked_mul(checked_mul(d, t), checked_mul(k, k + 1)), 2 * t - 2);
  out.precompute_mults = Rational::make(table_mults, checked_mul(2, n_f));
  out.precompute_adds = Rational::make(checked_mul(t - 1, d), n_f);
  out.tree_search_mults = Rational::make(checked_mul(k, t), 1);
  // T^2 K (K - 1) / 2 + T - 1; K (K - 1) is even.
  out.tree_search_adds = Rational::make(
      checked_add(checked_mul(checked_mul(t, t), k * (k - 1) / 2), t - 1), 1);
  out.mults = out.precompute_mults + out.tree_search_mults;
  out.adds = out.precompute_adds + out.tree_search_adds;
  return out;
}

CsiBound csi_error_bound(const RealMatrix& h, const RealMatrix& b) {
  if (h.rows() != h.cols() || b.rows() != h.rows() || b.cols() != h.cols()) {
    throw Error(ErrorKind::InvalidArgument, "H and B must be square and equal-sized");
  }
  RealMatrix h_inv;
  try {
    h_inv = inverse(h);
  } catch (const Error& e) {
    throw Error(ErrorKind::RankDeficient, e.what());
  }

  const std::vector<double> sigma_h = singular_values(h);
  double inv_sum = 0.0;
  for (double s : sigma_h) {
    if (s <= 1e-12) throw Error(ErrorKind::RankDeficient, "H has a vanishing singular value");
    inv_sum += 1.0 / (s * s);
  }
  double b_sum = 0.0;
  for (double s : singular_values(b)) b_sum += s * s;

  CsiBound out;
  out.bound = inv_sum * inv_sum * b_sum;
  out.actual = frobenius_norm_sq(h_inv * b * h_inv);
  return out;
}

NeumannCheck neumann_first_order_check(const RealMatrix& h, const RealMatrix& b,
                                       std::size_t order_cap) {
  if (h.rows() != h.cols() || b.rows() != h.rows() || b.cols() != h.cols()) {
    throw Error(ErrorKind::InvalidArgument, "H and B must be square and equal-sized");
  }
  const RealMatrix h_inv = inverse(h);
  const RealMatrix g = h_inv * b;

  NeumannCheck out;
  out.spectral_radius_bound = singular_values(g).front();
  if (!(out.spectral_radius_bound < 1.0)) {
    throw Error(ErrorKind::InapplicableExpansion, "||H^-1 B||_2 >= 1");
  }

  const RealMatrix exact = inverse(h + b);
  const RealMatrix first_order = h_inv - g * h_inv;
  out.residual = std::sqrt(frobenius_norm_sq(exact - first_order));

  // Truncated series sum_{i=0}^{cap} (-G)^i H^-1.
  RealMatrix term = h_inv;
  RealMatrix series = h_inv;
  for (std::size_t i = 1; i <= order_cap; ++i) {
    term = -1.0 * (g * term);
    series = series + term;
  }
  out.series_residual = std::sqrt(frobenius_norm_sq(exact - series));
  return out;
}

}  // namespace vp
