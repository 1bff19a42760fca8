#include "vp/modem.hpp"

#include <cmath>

namespace vp {

namespace {

std::size_t gray_decode(std::size_t g) {
  std::size_t b = g;
  for (std::size_t shift = 1; (g >> shift) != 0; ++shift) b ^= g >> shift;
  return b;
}

std::size_t gray_encode(std::size_t b) { return b ^ (b >> 1); }

}  // namespace

Constellation Constellation::qpsk() { return pam(2, 2.0); }

Constellation Constellation::pam(std::size_t levels, double spacing) {
  if (levels < 2 || (levels & (levels - 1)) != 0) {
    throw Error(ErrorKind::InvalidArgument, "PAM size must be a power of two >= 2");
  }
  if (!(spacing > 0.0)) throw Error(ErrorKind::InvalidArgument, "PAM spacing must be positive");
  Constellation c;
  c.delta = spacing;
  for (std::size_t i = 0; i < levels; ++i) {
    const double offset = static_cast<double>(i) - static_cast<double>(levels - 1) / 2.0;
    c.real_points.push_back(offset * spacing);
  }
  c.c_max_abs = std::abs(c.real_points.back());
  std::size_t bits = 0;
  while ((std::size_t{1} << bits) < levels) ++bits;
  c.bits_per_real_dim = bits;
  return c;
}

std::size_t Constellation::index_of(double level) const noexcept {
  for (std::size_t d = 0; d < real_points.size(); ++d)
    if (real_points[d] == level) return d;
  return real_points.size();
}

double Constellation::complex_symbol_energy() const {
  double acc = 0.0;
  for (double p : real_points) acc += p * p;
  return 2.0 * acc / static_cast<double>(real_points.size());
}

PerturbSet PerturbSet::from_half_width(int a) {
  if (a < 0) throw Error(ErrorKind::InvalidArgument, "perturbation half-width must be >= 0");
  PerturbSet set;
  set.a = a;
  for (int v = -a; v <= a; ++v) set.values.push_back(v);
  set.t_count = set.values.size();
  return set;
}

PerturbSet PerturbSet::from_count(std::size_t t) {
  if (t % 2 == 0) throw Error(ErrorKind::InvalidArgument, "perturbation set size T must be odd");
  return from_half_width(static_cast<int>(t / 2));
}

double tau(const Constellation& c) { return 2.0 * (c.c_max_abs + c.delta / 2.0); }

RealVector map_bits(std::span<const std::uint8_t> bits, const Constellation& c) {
  const std::size_t b = c.bits_per_real_dim;
  if (b == 0 || bits.size() % b != 0) {
    throw Error(ErrorKind::LengthMismatch, "bit count not a multiple of bits per dimension");
  }
  RealVector s(bits.size() / b);
  for (std::size_t k = 0; k < s.size(); ++k) {
    std::size_t word = 0;
    for (std::size_t i = 0; i < b; ++i) word = (word << 1) | (bits[k * b + i] & 1u);
    s[k] = c.real_points[gray_decode(word)];
  }
  return s;
}

double modulo_reduce(double y, double tau) {
  double r = y - tau * std::floor((y + tau / 2.0) / tau);
  // Rounding can land exactly on an edge; enforce the half-open interval.
  if (r >= tau / 2.0) r -= tau;
  if (r < -tau / 2.0) r += tau;
  return r;
}

RealVector modulo_reduce(std::span<const double> y, double tau) {
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");
  RealVector out(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) out[i] = modulo_reduce(y[i], tau);
  return out;
}

BitVector demap(std::span<const double> s_hat, const Constellation& c) {
  const std::size_t b = c.bits_per_real_dim;
  BitVector bits(s_hat.size() * b);
  for (std::size_t k = 0; k < s_hat.size(); ++k) {
    std::size_t best = 0;
    double best_dist = std::abs(s_hat[k] - c.real_points[0]);
    for (std::size_t d = 1; d < c.real_points.size(); ++d) {
      const double dist = std::abs(s_hat[k] - c.real_points[d]);
      if (dist < best_dist) {
        best = d;
        best_dist = dist;
      }
    }
    const std::size_t word = gray_encode(best);
    for (std::size_t i = 0; i < b; ++i) bits[k * b + i] = (word >> (b - 1 - i)) & 1u;
  }
  return bits;
}

}  // namespace vp
