#include "vp/channel.hpp"

#include <cmath>
#include <limits>

namespace vp {

ChannelRealization draw_channel(std::size_t n, RngStream& rng) {
  if (n == 0) throw Error(ErrorKind::InvalidArgument, "channel needs at least one user");
  const double scale = std::sqrt(0.5);
  ComplexMatrix h(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      const double re = rng.normal() * scale;
      const double im = rng.normal() * scale;
      h(i, j) = Complex(re, im);
    }
  RealMatrix real = real_decompose(h);
  return {std::move(h), std::move(real), n};
}

RealMatrix real_decompose(const ComplexMatrix& h) {
  const std::size_t r = h.rows();
  const std::size_t c = h.cols();
  RealMatrix out(2 * r, 2 * c);
  for (std::size_t i = 0; i < r; ++i)
    for (std::size_t j = 0; j < c; ++j) {
      const Complex v = h(i, j);
      out(i, j) = v.real();
      out(i, c + j) = -v.imag();
      out(r + i, j) = v.imag();
      out(r + i, c + j) = v.real();
    }
  return out;
}

ImperfectCsi inject_csi_error(const RealMatrix& h, double zeta_db, RngStream& rng) {
  if (std::isnan(zeta_db) || zeta_db == -std::numeric_limits<double>::infinity()) {
    throw Error(ErrorKind::InvalidArgument, "zeta must be finite or +inf");
  }
  if (zeta_db == std::numeric_limits<double>::infinity()) {
    return {h, {RealMatrix(h.rows(), h.cols()), zeta_db}};
  }
  const double h_power = frobenius_norm_sq(h);
  if (h_power == 0.0) throw Error(ErrorKind::DegenerateChannel, "||H||_F = 0");

  RealMatrix b(h.rows(), h.cols());
  const bool complex_layout = h.rows() % 2 == 0 && h.cols() % 2 == 0;
  if (complex_layout) {
    ComplexMatrix bc(h.rows() / 2, h.cols() / 2);
    for (std::size_t i = 0; i < bc.rows(); ++i)
      for (std::size_t j = 0; j < bc.cols(); ++j) {
        const double re = rng.normal();
        const double im = rng.normal();
        bc(i, j) = Complex(re, im);
      }
    b = real_decompose(bc);
  } else {
    for (std::size_t i = 0; i < b.rows(); ++i)
      for (std::size_t j = 0; j < b.cols(); ++j) b(i, j) = rng.normal();
  }

  const double b_power = frobenius_norm_sq(b);
  if (b_power == 0.0) throw Error(ErrorKind::DegenerateChannel, "error draw vanished");
  const double target = h_power / std::pow(10.0, zeta_db / 10.0);
  b = std::sqrt(target / b_power) * b;
  RealMatrix h_hat = h + b;
  return {std::move(h_hat), {std::move(b), zeta_db}};
}

RealVector add_noise(std::span<const double> y, double sigma_n_sq, RngStream& rng) {
  if (sigma_n_sq < 0.0) throw Error(ErrorKind::InvalidArgument, "noise variance must be >= 0");
  RealVector out(y.begin(), y.end());
  if (sigma_n_sq == 0.0) return out;
  const double sd = std::sqrt(sigma_n_sq / 2.0);
  for (double& v : out) v += sd * rng.normal();
  return out;
}

}  // namespace vp
