#include <cmath>

#include "vp/encoders.hpp"

namespace vp {

namespace {

// Expected-power normalisation: gamma = Tr(P P^T) / P_T for unit-energy
// real dimensions, so E||P s||^2 / gamma = P_T.
LinearResult normalise(const RealMatrix& precoder, std::span<const double> s, double p_total) {
  if (!(p_total > 0.0)) throw Error(ErrorKind::InvalidArgument, "P_T must be positive");
  LinearResult out;
  out.gamma = frobenius_norm_sq(precoder) / p_total;
  out.x = precoder * s;
  const double scale = 1.0 / std::sqrt(out.gamma);
  for (double& v : out.x) v *= scale;
  return out;
}

}  // namespace

LinearResult encode_lzf(const RealMatrix& h, std::span<const double> s, double p_total) {
  if (h.rows() != h.cols()) throw Error(ErrorKind::InvalidArgument, "channel must be square");
  RealMatrix p;
  try {
    p = inverse(h);
  } catch (const Error& e) {
    throw Error(ErrorKind::RankDeficient, e.what());
  }
  return normalise(p, s, p_total);
}

LinearResult encode_lmmse(const RealMatrix& h, std::span<const double> s, double sigma_n_sq,
                          double p_total) {
  if (sigma_n_sq < 0.0) throw Error(ErrorKind::InvalidArgument, "noise variance must be >= 0");
  if (!(p_total > 0.0)) throw Error(ErrorKind::InvalidArgument, "P_T must be positive");
  const double alpha = static_cast<double>(h.rows()) * sigma_n_sq / p_total;
  if (alpha == 0.0) return encode_lzf(h, s, p_total);
  return normalise(pseudo_inverse(h, alpha), s, p_total);
}

}  // namespace vp
