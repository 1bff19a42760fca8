#pragma once

#include <cstddef>
#include <span>

#include "vp/linalg.hpp"
#include "vp/rng.hpp"

namespace vp {

/// One flat-fading draw: N x N complex channel and its K = 2N real image.
struct ChannelRealization {
  ComplexMatrix h_complex;
  RealMatrix h_real;
  std::size_t n_users = 0;

  std::size_t real_dim() const noexcept { return 2 * n_users; }
};

/// Transmitter-side estimation error B, scaled to the requested quality.
struct CsiError {
  RealMatrix b;
  double zeta_db = 0.0;
};

struct ImperfectCsi {
  RealMatrix h_hat;
  CsiError error;
};

/// I.i.d. CN(0, 1) entries.
ChannelRealization draw_channel(std::size_t n, RngStream& rng);

/// Block layout [[Re H, -Im H], [Im H, Re H]]; user u maps to real rows u and N + u.
RealMatrix real_decompose(const ComplexMatrix& h);

/// Returns H + B with ||H||_F^2 / ||B||_F^2 = 10^(zeta/10) exactly. B is the
/// real image of an i.i.d. complex Gaussian matrix when K is even, i.i.d.
/// real Gaussian otherwise. zeta = +inf means perfect CSI (B = 0).
ImperfectCsi inject_csi_error(const RealMatrix& h, double zeta_db, RngStream& rng);

/// Adds zero-mean Gaussian noise of variance sigma_n_sq / 2 per real entry.
RealVector add_noise(std::span<const double> y, double sigma_n_sq, RngStream& rng);

}  // namespace vp
