#include <cmath>

#include "vp/encoders.hpp"

namespace vp {

const char* to_string(Criterion c) noexcept { return c == Criterion::ZF ? "ZF" : "MMSE"; }

PerturbationProblem build_problem(const RealMatrix& h_at_tx, RealVector s, double tau,
                                  const PerturbSet& set, Criterion criterion,
                                  double sigma_n_sq, double p_total) {
  const std::size_t k = h_at_tx.rows();
  if (h_at_tx.cols() != k) throw Error(ErrorKind::InvalidArgument, "channel must be square");
  if (s.size() != k) throw Error(ErrorKind::LengthMismatch, "data vector length != K");
  if (sigma_n_sq < 0.0) throw Error(ErrorKind::InvalidArgument, "noise variance must be >= 0");
  if (!(p_total > 0.0)) throw Error(ErrorKind::InvalidArgument, "P_T must be positive");
  if (!(tau > 0.0)) throw Error(ErrorKind::InvalidArgument, "tau must be positive");

  PerturbationProblem prob;
  prob.s = std::move(s);
  prob.tau = tau;
  prob.set = set;
  prob.criterion = criterion;
  prob.p_total = p_total;

  const double alpha = static_cast<double>(k) * sigma_n_sq / p_total;
  if (criterion == Criterion::ZF || alpha == 0.0) {
    const QrFactors qr = qr_decompose(transpose(h_at_tx));
    prob.l = lower_from_r_inverse(qr.r);
    prob.precode_matrix = inverse(h_at_tx);
    prob.alpha = 0.0;
    prob.power_scale = 1.0;
    return prob;
  }

  RealMatrix extended(2 * k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) extended(i, j) = h_at_tx(j, i);
  const double root_alpha = std::sqrt(alpha);
  for (std::size_t i = 0; i < k; ++i) extended(k + i, i) = root_alpha;

  const QrFactors qr = qr_decompose(extended);
  // L = Q2^T; Q2 = sqrt(alpha) R^-1 is upper triangular up to roundoff.
  prob.l = RealMatrix(k, k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j <= i; ++j) prob.l(i, j) = qr.q(k + j, i);
  prob.precode_matrix = pseudo_inverse(h_at_tx, alpha);
  prob.alpha = alpha;
  prob.power_scale = 1.0 / alpha;
  return prob;
}

}  // namespace vp
