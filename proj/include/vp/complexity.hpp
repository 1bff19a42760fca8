#pragma once

#include <cstddef>
#include <cstdint>
#include <string>

#include "vp/linalg.hpp"

namespace vp {

/// Reduced non-negative fraction.
struct Rational {
  std::uint64_t num = 0;
  std::uint64_t den = 1;

  static Rational make(std::uint64_t num, std::uint64_t den);
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  bool operator==(const Rational&) const = default;
};

Rational operator+(const Rational& a, const Rational& b);

enum class EncoderKind { LZF, LMMSE, THP, Exhaustive, Sphere, QRDM, FSE };

const char* to_string(EncoderKind kind) noexcept;

struct ComplexityProfile {
  EncoderKind encoder_kind = EncoderKind::FSE;
  std::size_t k = 0;
  std::size_t t = 0;
  std::size_t p = 0;
  std::size_t m = 0;
  std::uint64_t nodes = 0;
  double mults = 0.0;
  double adds = 0.0;
};

/// sum_{i=1}^K T^i, the sphere encoder's worst case. Throws Overflow.
std::uint64_t se_worst_case_nodes(std::size_t k, std::size_t t);

/// T + (K - 1) T^2.
std::uint64_t qrdme_nodes(std::size_t k, std::size_t t);

/// sum_{i=1}^p T^i + (K - p) T^p; KT for p = 1.
std::uint64_t fse_nodes(std::size_t k, std::size_t t, std::size_t p);

/// fse_nodes(K, T, 1) / qrdme_nodes(K, T).
Rational rho(std::size_t k, std::size_t t);

struct ArithmeticTotals {
  Rational precompute_mults;
  Rational precompute_adds;
  Rational tree_search_mults;
  Rational tree_search_adds;
  Rational mults;
  Rational adds;
};

/// Closed-form per-transmission mult/add counts of FSE-p1 with both
/// complexity-reduction techniques, pre-computation amortised over N_f.
ArithmeticTotals arithmetic_totals(std::size_t k, std::size_t t, std::size_t d, std::size_t n_f);

struct CsiBound {
  double bound = 0.0;   ///< (sum 1/sigma_i(H)^2)^2 * sum sigma_i(B)^2
  double actual = 0.0;  ///< ||H^-1 B H^-1||_F^2
};

CsiBound csi_error_bound(const RealMatrix& h, const RealMatrix& b);

struct NeumannCheck {
  /// ||(H + B)^-1 - (H^-1 - H^-1 B H^-1)||_F
  double residual = 0.0;
  /// ||(H + B)^-1 - sum_{i=0}^{order_cap} (-H^-1 B)^i H^-1||_F
  double series_residual = 0.0;
  /// Largest singular value of H^-1 B.
  double spectral_radius_bound = 0.0;
};

/// Requires ||H^-1 B||_2 < 1, otherwise InapplicableExpansion.
NeumannCheck neumann_first_order_check(const RealMatrix& h, const RealMatrix& b,
                                       std::size_t order_cap = 8);

}  // namespace vp
