#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vp/linalg.hpp"
#include "vp/modem.hpp"

namespace vp {

enum class Criterion { ZF, MMSE };

const char* to_string(Criterion c) noexcept;

/// One vector-perturbation encoding instance.
///
/// The search minimises ||L (s + tau t)||^2 over t in A^K, with L lower
/// triangular. Level i of the search tree fixes t_i and adds the squared
/// increment (row i of L applied to the perturbed prefix) to the metric.
struct PerturbationProblem {
  RealMatrix l;               ///< K x K lower triangular, positive diagonal
  RealMatrix precode_matrix;  ///< P: H^-1 (ZF) or H^T (H H^T + alpha I)^-1 (MMSE)
  RealVector s;
  double tau = 0.0;
  PerturbSet set;
  Criterion criterion = Criterion::ZF;
  double alpha = 0.0;        ///< regularization actually used (0 under ZF)
  double p_total = 1.0;
  /// Factor mapping a search metric to (s+tau t)^T (H H^T + alpha I)^-1 (s+tau t).
  /// 1 under ZF, 1/alpha under MMSE where L = Q2^T.
  double power_scale = 1.0;

  std::size_t dim() const noexcept { return l.rows(); }
};

/// Tallies for one encoder run. Zeroed at search start, monotone during it.
struct OpCounter {
  std::uint64_t nodes_visited = 0;
  std::uint64_t real_mults = 0;
  std::uint64_t real_adds = 0;
  std::uint64_t comparisons = 0;

  bool operator==(const OpCounter&) const = default;
};

struct EncoderResult {
  std::vector<int> t;
  double metric = 0.0;  ///< accumulated squared metric of the chosen leaf
  RealVector x;         ///< P (s + tau t) / sqrt(gamma)
  double gamma = 1.0;   ///< ||P (s + tau t)||^2 / P_T
  OpCounter counts;     ///< tree-search phase
  bool counters_enabled = true;
  /// Build cost of the pre-computation table, when one was used.
  std::optional<OpCounter> precompute_counts;
  /// Accumulated metrics of every candidate alive at the last level.
  std::vector<double> leaf_metrics;
};

struct LinearResult {
  RealVector x;
  double gamma = 1.0;
};

/// Lookup table of L_{i,j} (level_d + tau t_k) for the lower triangle of L.
/// U = K (K + 1) / 2 row pairs, D levels, T perturbation values.
class PrecomputeTable {
 public:
  PrecomputeTable(const RealMatrix& l, const Constellation& c, const PerturbSet& set);

  double at(std::size_t i, std::size_t j, std::size_t d, std::size_t k) const {
    return entries_[((i * (i + 1) / 2 + j) * d_count_ + d) * t_count_ + k];
  }

  std::size_t dim() const noexcept { return k_dim_; }
  std::size_t level_count() const noexcept { return d_count_; }
  std::size_t t_count() const noexcept { return t_count_; }
  std::size_t size() const noexcept { return entries_.size(); }
  const Constellation& constellation() const noexcept { return constellation_; }
  /// Real multiplications and additions spent building the table.
  const OpCounter& build_counts() const noexcept { return build_counts_; }

 private:
  std::size_t k_dim_;
  std::size_t d_count_;
  std::size_t t_count_;
  Constellation constellation_;
  std::vector<double> entries_;
  OpCounter build_counts_;
};

PrecomputeTable build_precompute_table(const RealMatrix& l, const Constellation& c,
                                       const PerturbSet& set);

/// ZF: L = (R^-1)^T from the QR of H^T, P = H^-1.
/// MMSE: QR of [H^T; sqrt(alpha) I] with alpha = K sigma_n^2 / P_T, L = Q2^T,
/// P = H^T (H H^T + alpha I)^-1. MMSE with alpha == 0 degenerates to ZF.
PerturbationProblem build_problem(const RealMatrix& h_at_tx, RealVector s, double tau,
                                  const PerturbSet& set, Criterion criterion,
                                  double sigma_n_sq, double p_total);

LinearResult encode_lzf(const RealMatrix& h, std::span<const double> s, double p_total);
LinearResult encode_lmmse(const RealMatrix& h, std::span<const double> s, double sigma_n_sq,
                          double p_total);

struct SearchFlags {
  bool compare_before_square = false;
  bool count_ops = true;
};

/// Successive (DFE) perturbation: one branch, best child per level.
EncoderResult encode_thp(const PerturbationProblem& prob, const SearchFlags& flags = {});

/// Brute force over A^K, lexicographically smallest t on ties.
EncoderResult encode_exhaustive(const PerturbationProblem& prob, const SearchFlags& flags = {});

enum class RadiusPolicy {
  DfePoint,  ///< start from the DFE leaf's metric
  Infinite,
};

/// Depth-first Schnorr-Euchner enumeration with a shrinking radius.
EncoderResult encode_sphere(const PerturbationProblem& prob,
                            RadiusPolicy policy = RadiusPolicy::DfePoint,
                            const SearchFlags& flags = {});

/// Breadth-first search keeping the m_breadth best partial metrics per level.
EncoderResult encode_qrdm(const PerturbationProblem& prob, std::size_t m_breadth,
                          const SearchFlags& flags = {});

/// Full expansion over the first p levels, then a single DFE child per branch.
/// Pass a table to read branch terms from it instead of multiplying.
EncoderResult encode_fse(const PerturbationProblem& prob, std::size_t p,
                         const SearchFlags& flags = {},
                         const PrecomputeTable* table = nullptr);

/// ||L (s + tau t)||^2 computed from scratch, row by row.
double perturbation_metric(const PerturbationProblem& prob, std::span<const int> t);

enum class CountPhase { Precompute, TreeSearch };

struct ArithmeticCount {
  double mults = 0.0;
  double adds = 0.0;
};

/// Instrumented tallies of a run. The pre-computation phase is amortised over
/// n_f transmissions sharing the channel.
ArithmeticCount count_arithmetic(const EncoderResult& run, CountPhase phase,
                                 std::size_t n_f = 1);

}  // namespace vp
