#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vp/linalg.hpp"

namespace vp {

using BitVector = std::vector<std::uint8_t>;

/// Per-real-dimension PAM alphabet; complex square QAM is its Cartesian square.
struct Constellation {
  std::vector<double> real_points;  ///< ascending
  double delta = 0.0;
  double c_max_abs = 0.0;
  std::size_t bits_per_real_dim = 0;

  /// Unnormalized QPSK: levels {-1, +1} per real dimension.
  static Constellation qpsk();
  /// Uniform PAM with `levels` points (a power of two) spaced by `spacing`.
  static Constellation pam(std::size_t levels, double spacing = 2.0);

  std::size_t size() const noexcept { return real_points.size(); }
  /// Index of an exact level value, or size() if absent.
  std::size_t index_of(double level) const noexcept;
  /// Mean energy per complex symbol (two real dimensions).
  double complex_symbol_energy() const;
};

/// Symmetric integer candidate set {-a, ..., a}, T = 2a + 1 elements.
struct PerturbSet {
  int a = 0;
  std::vector<int> values;
  std::size_t t_count = 1;

  static PerturbSet from_half_width(int a);
  /// T must be odd.
  static PerturbSet from_count(std::size_t t);
};

/// 2 (|c|_max + delta / 2).
double tau(const Constellation& c);

/// Gray-mapped levels, bits_per_real_dim bits per real entry, MSB first.
RealVector map_bits(std::span<const std::uint8_t> bits, const Constellation& c);

/// Maps every entry into [-tau/2, tau/2) by integer multiples of tau.
RealVector modulo_reduce(std::span<const double> y, double tau);
double modulo_reduce(double y, double tau);

/// Nearest-level hard decision (ties to the lower level), then inverse Gray map.
BitVector demap(std::span<const double> s_hat, const Constellation& c);

}  // namespace vp
