#include "vp/encoders.hpp"

namespace vp {

PrecomputeTable::PrecomputeTable(const RealMatrix& l, const Constellation& c,
                                 const PerturbSet& set)
    : k_dim_(l.rows()),
      d_count_(c.size()),
      t_count_(set.t_count),
      constellation_(c) {
  if (l.cols() != k_dim_) throw Error(ErrorKind::InvalidArgument, "L must be square");
  const double tau_value = tau(c);

  // tau * t_k for t_k != 0 (T - 1 mults), then level + tau t_k (D (T - 1) adds).
  std::vector<double> offsets(t_count_, 0.0);
  for (std::size_t k = 0; k < t_count_; ++k) {
    if (set.values[k] == 0) continue;
    offsets[k] = tau_value * set.values[k];
    ++build_counts_.real_mults;
  }
  std::vector<double> perturbed(d_count_ * t_count_);
  for (std::size_t d = 0; d < d_count_; ++d)
    for (std::size_t k = 0; k < t_count_; ++k) {
      if (set.values[k] == 0) {
        perturbed[d * t_count_ + k] = c.real_points[d];
      } else {
        perturbed[d * t_count_ + k] = c.real_points[d] + offsets[k];
        ++build_counts_.real_adds;
      }
    }

  entries_.resize(k_dim_ * (k_dim_ + 1) / 2 * d_count_ * t_count_);
  std::size_t idx = 0;
  for (std::size_t i = 0; i < k_dim_; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      for (std::size_t v = 0; v < d_count_ * t_count_; ++v) entries_[idx++] = l(i, j) * perturbed[v];
  build_counts_.real_mults += entries_.size();
}

PrecomputeTable build_precompute_table(const RealMatrix& l, const Constellation& c,
                                       const PerturbSet& set) {
  return PrecomputeTable(l, c, set);
}

}  // namespace vp
