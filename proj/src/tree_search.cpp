#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "vp/encoders.hpp"

namespace vp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Computes branch increments for row i of L:
//   inc(t) = sum_{j<i} L_ij (s_j + tau t_j) + L_ii (s_i + tau t)
// either by multiplying or by reading the pre-computation table. Both paths
// form every product and sum in the same order, so results are bit-identical.
class Evaluator {
 public:
  Evaluator(const PerturbationProblem& prob, const SearchFlags& flags,
            const PrecomputeTable* table, OpCounter& counts)
      : prob_(prob),
        k_(prob.dim()),
        t_count_(prob.set.t_count),
        table_(table),
        counting_(flags.count_ops),
        counts_(counts) {
    if (k_ == 0 || prob.l.cols() != k_ || prob.s.size() != k_) {
      throw Error(ErrorKind::InvalidArgument, "malformed perturbation problem");
    }
    if (t_count_ == 0 || prob.set.values.size() != t_count_) {
      throw Error(ErrorKind::InvalidArgument, "malformed perturbation set");
    }
    if (table_ != nullptr) {
      if (table_->dim() != k_ || table_->t_count() != t_count_) {
        throw Error(ErrorKind::InvalidArgument, "pre-computation table does not match problem");
      }
      level_index_.resize(k_);
      for (std::size_t i = 0; i < k_; ++i) {
        level_index_[i] = table_->constellation().index_of(prob.s[i]);
        if (level_index_[i] == table_->level_count()) {
          throw Error(ErrorKind::InvalidArgument, "data symbol is not a constellation level");
        }
      }
    } else {
      // s_i + tau t_k for every level and candidate.
      perturbed_.resize(k_ * t_count_);
      for (std::size_t i = 0; i < k_; ++i)
        for (std::size_t k = 0; k < t_count_; ++k)
          perturbed_[i * t_count_ + k] = prob.s[i] + prob.tau * prob.set.values[k];
      tally_mults(k_ * t_count_);
      tally_adds(k_ * t_count_);
    }
  }

  std::size_t dim() const noexcept { return k_; }
  std::size_t t_count() const noexcept { return t_count_; }
  int value(std::size_t k) const noexcept { return prob_.set.values[k]; }

  /// Interference from an already-fixed prefix, given its candidate indices.
  double partial(std::size_t i, const std::uint16_t* kidx) {
    if (i == 0) return 0.0;
    double acc;
    if (table_ != nullptr) {
      acc = table_->at(i, 0, level_index_[0], kidx[0]);
      for (std::size_t j = 1; j < i; ++j) acc += table_->at(i, j, level_index_[j], kidx[j]);
    } else {
      acc = prob_.l(i, 0) * perturbed_[kidx[0]];
      for (std::size_t j = 1; j < i; ++j) acc += prob_.l(i, j) * perturbed_[j * t_count_ + kidx[j]];
      tally_mults(i);
    }
    tally_adds(i - 1);
    return acc;
  }

  double increment(std::size_t i, double partial_sum, std::size_t k) {
    double diag;
    if (table_ != nullptr) {
      diag = table_->at(i, i, level_index_[i], k);
    } else {
      diag = prob_.l(i, i) * perturbed_[i * t_count_ + k];
      tally_mults(1);
    }
    if (i == 0) return diag;
    tally_adds(1);
    return partial_sum + diag;
  }

  double square(double v) {
    tally_mults(1);
    return v * v;
  }

  double accumulate(std::size_t i, double metric, double sq) {
    if (i > 0) tally_adds(1);
    return metric + sq;
  }

  void visit(std::uint64_t n) {
    if (counting_) counts_.nodes_visited += n;
  }
  void compare(std::uint64_t n) {
    if (counting_) counts_.comparisons += n;
  }

 private:
  void tally_mults(std::uint64_t n) {
    if (counting_) counts_.real_mults += n;
  }
  void tally_adds(std::uint64_t n) {
    if (counting_) counts_.real_adds += n;
  }

  const PerturbationProblem& prob_;
  std::size_t k_;
  std::size_t t_count_;
  const PrecomputeTable* table_;
  bool counting_;
  OpCounter& counts_;
  std::vector<double> perturbed_;
  std::vector<std::size_t> level_index_;
};

// Flat storage of the branches alive at one level.
struct Frontier {
  std::size_t k = 0;
  std::vector<std::uint16_t> kidx;  // branch-major, k entries each
  std::vector<double> metric;

  std::size_t size() const noexcept { return metric.size(); }
  const std::uint16_t* path(std::size_t b) const { return kidx.data() + b * k; }

  void push(const Frontier& parent, std::size_t b, std::size_t level, std::size_t cand, double m) {
    const std::size_t base = kidx.size();
    kidx.resize(base + k, 0);
    if (level > 0) std::copy_n(parent.path(b), level, kidx.begin() + static_cast<std::ptrdiff_t>(base));
    kidx[base + level] = static_cast<std::uint16_t>(cand);
    metric.push_back(m);
  }
};

enum class Expansion { Full, Single };

struct LevelPolicy {
  std::size_t full_levels = 0;  // levels expanded to all T children
  std::size_t beam = 0;         // 0: keep everything, else keep this many best
};

void fill_transmit(const PerturbationProblem& prob, EncoderResult& out) {
  RealVector perturbed(prob.dim());
  for (std::size_t i = 0; i < perturbed.size(); ++i) perturbed[i] = prob.s[i] + prob.tau * out.t[i];
  out.x = prob.precode_matrix * perturbed;
  const double power = squared_norm(out.x);
  out.gamma = power / prob.p_total;
  if (out.gamma > 0.0) {
    const double scale = 1.0 / std::sqrt(out.gamma);
    for (double& v : out.x) v *= scale;
  }
}

EncoderResult make_result(const PerturbationProblem& prob, const Evaluator& ev,
                          const std::uint16_t* kidx, double metric, const SearchFlags& flags,
                          OpCounter counts) {
  EncoderResult out;
  out.t.resize(prob.dim());
  for (std::size_t i = 0; i < prob.dim(); ++i) out.t[i] = ev.value(kidx[i]);
  out.metric = metric;
  out.counts = counts;
  out.counters_enabled = flags.count_ops;
  fill_transmit(prob, out);
  return out;
}

EncoderResult breadth_search(const PerturbationProblem& prob, const LevelPolicy& policy,
                             const SearchFlags& flags, const PrecomputeTable* table) {
  OpCounter counts;
  Evaluator ev(prob, flags, table, counts);
  const std::size_t k_dim = ev.dim();
  const std::size_t t_count = ev.t_count();

  Frontier cur;
  cur.k = k_dim;
  cur.metric.push_back(0.0);
  cur.kidx.assign(k_dim, 0);

  std::vector<double> incs(t_count);
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < k_dim; ++i) {
    const Expansion mode = i < policy.full_levels ? Expansion::Full : Expansion::Single;
    Frontier next;
    next.k = k_dim;
    next.metric.reserve(mode == Expansion::Full ? cur.size() * t_count : cur.size());

    for (std::size_t b = 0; b < cur.size(); ++b) {
      const double part = ev.partial(i, cur.path(b));
      if (mode == Expansion::Full) {
        ev.visit(t_count);
        for (std::size_t k = 0; k < t_count; ++k) {
          const double inc = ev.increment(i, part, k);
          next.push(cur, b, i, k, ev.accumulate(i, cur.metric[b], ev.square(inc)));
        }
        continue;
      }

      // Single (DFE) expansion: keep only the locally best child.
      ev.visit(1);
      for (std::size_t k = 0; k < t_count; ++k) incs[k] = ev.increment(i, part, k);
      std::size_t best = 0;
      double best_sq;
      if (flags.compare_before_square) {
        double best_abs = std::abs(incs[0]);
        for (std::size_t k = 1; k < t_count; ++k) {
          const double a = std::abs(incs[k]);
          if (a < best_abs) {
            best_abs = a;
            best = k;
          }
        }
        best_sq = ev.square(incs[best]);
      } else {
        std::vector<double>& sq = incs;
        for (std::size_t k = 0; k < t_count; ++k) sq[k] = ev.square(incs[k]);
        best_sq = sq[0];
        for (std::size_t k = 1; k < t_count; ++k) {
          if (sq[k] < best_sq) {
            best_sq = sq[k];
            best = k;
          }
        }
      }
      ev.compare(t_count - 1);
      next.push(cur, b, i, best, ev.accumulate(i, cur.metric[b], best_sq));
    }

    if (policy.beam != 0 && next.size() > policy.beam) {
      order.resize(next.size());
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::uint64_t comparisons = 0;
      // Children are created in (parent order, t ascending) order, so the
      // index is the tie-break.
      auto less = [&](std::size_t a, std::size_t b) {
        ++comparisons;
        if (next.metric[a] != next.metric[b]) return next.metric[a] < next.metric[b];
        return a < b;
      };
      std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(policy.beam),
                        order.end(), less);
      ev.compare(comparisons);
      Frontier kept;
      kept.k = k_dim;
      for (std::size_t r = 0; r < policy.beam; ++r) {
        const std::size_t src = order[r];
        kept.kidx.insert(kept.kidx.end(), next.path(src), next.path(src) + k_dim);
        kept.metric.push_back(next.metric[src]);
      }
      next = std::move(kept);
    }
    cur = std::move(next);
  }

  std::size_t best = 0;
  for (std::size_t b = 1; b < cur.size(); ++b)
    if (cur.metric[b] < cur.metric[best]) best = b;
  ev.compare(cur.size() - 1);

  EncoderResult out = make_result(prob, ev, cur.path(best), cur.metric[best], flags, counts);
  out.leaf_metrics = cur.metric;
  return out;
}

bool lex_less(const std::uint16_t* a, const std::uint16_t* b, std::size_t n) {
  // Candidate indices are ordered like the integer values they stand for.
  return std::lexicographical_compare(a, a + n, b, b + n);
}

// Depth-first enumeration shared by the sphere encoder and the oracle.
class DepthFirst {
 public:
  DepthFirst(Evaluator& ev, bool prune) : ev_(ev), prune_(prune) {
    path_.assign(ev.dim(), 0);
    best_path_.assign(ev.dim(), 0);
  }

  void seed(const std::vector<std::uint16_t>& path, double metric) {
    best_path_ = path;
    best_metric_ = metric;
  }

  void run() { descend(0, 0.0); }

  const std::vector<std::uint16_t>& best_path() const { return best_path_; }
  double best_metric() const { return best_metric_; }

 private:
  void descend(std::size_t i, double metric) {
    const std::size_t t_count = ev_.t_count();
    const std::size_t k_dim = ev_.dim();
    const double part = ev_.partial(i, path_.data());
    ev_.visit(t_count);

    std::vector<double> child(t_count);
    for (std::size_t k = 0; k < t_count; ++k) {
      child[k] = ev_.accumulate(i, metric, ev_.square(ev_.increment(i, part, k)));
    }
    std::vector<std::size_t> order(t_count);
    std::iota(order.begin(), order.end(), std::size_t{0});
    if (prune_) {
      // Schnorr-Euchner order: nearest child first, t ascending on ties.
      std::uint64_t comparisons = 0;
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        ++comparisons;
        return child[a] < child[b];
      });
      ev_.compare(comparisons);
    }

    for (std::size_t k : order) {
      const double m = child[k];
      if (prune_) {
        ev_.compare(1);
        if (m > best_metric_) break;
      }
      path_[i] = static_cast<std::uint16_t>(k);
      if (i + 1 == k_dim) {
        ev_.compare(1);
        if (m < best_metric_ ||
            (m == best_metric_ && lex_less(path_.data(), best_path_.data(), k_dim))) {
          best_metric_ = m;
          best_path_ = path_;
        }
      } else {
        descend(i + 1, m);
      }
    }
  }

  Evaluator& ev_;
  bool prune_;
  std::vector<std::uint16_t> path_;
  std::vector<std::uint16_t> best_path_;
  double best_metric_ = kInf;
};

}  // namespace

EncoderResult encode_thp(const PerturbationProblem& prob, const SearchFlags& flags) {
  return breadth_search(prob, LevelPolicy{0, 0}, flags, nullptr);
}

EncoderResult encode_fse(const PerturbationProblem& prob, std::size_t p, const SearchFlags& flags,
                         const PrecomputeTable* table) {
  if (p < 1 || p > prob.dim()) {
    throw Error(ErrorKind::InvalidArgument, "FSE full-expansion depth must satisfy 1 <= p <= K");
  }
  EncoderResult out = breadth_search(prob, LevelPolicy{p, 0}, flags, table);
  if (table != nullptr) out.precompute_counts = table->build_counts();
  return out;
}

EncoderResult encode_qrdm(const PerturbationProblem& prob, std::size_t m_breadth,
                          const SearchFlags& flags) {
  if (m_breadth < 1) throw Error(ErrorKind::InvalidArgument, "QRD-M breadth must be >= 1");
  return breadth_search(prob, LevelPolicy{prob.dim(), m_breadth}, flags, nullptr);
}

EncoderResult encode_exhaustive(const PerturbationProblem& prob, const SearchFlags& flags) {
  const double space = std::pow(static_cast<double>(prob.set.t_count), static_cast<double>(prob.dim()));
  if (space > 1e7) {
    throw Error(ErrorKind::SearchSpaceTooLarge, "T^K exceeds 1e7 candidates");
  }
  OpCounter counts;
  Evaluator ev(prob, flags, nullptr, counts);
  DepthFirst search(ev, false);
  search.run();
  EncoderResult out =
      make_result(prob, ev, search.best_path().data(), search.best_metric(), flags, counts);
  out.leaf_metrics = {out.metric};
  return out;
}

EncoderResult encode_sphere(const PerturbationProblem& prob, RadiusPolicy policy,
                            const SearchFlags& flags) {
  OpCounter counts;
  Evaluator ev(prob, flags, nullptr, counts);
  DepthFirst search(ev, true);
  if (policy == RadiusPolicy::DfePoint) {
    // The DFE leaf is the first leaf of the Schnorr-Euchner descent, so its
    // nodes are charged there rather than here.
    SearchFlags quiet = flags;
    quiet.count_ops = false;
    const EncoderResult dfe = encode_thp(prob, quiet);
    std::vector<std::uint16_t> path(prob.dim());
    for (std::size_t i = 0; i < path.size(); ++i)
      path[i] = static_cast<std::uint16_t>(dfe.t[i] + prob.set.a);
    search.seed(path, dfe.metric);
  }
  search.run();
  EncoderResult out =
      make_result(prob, ev, search.best_path().data(), search.best_metric(), flags, counts);
  out.leaf_metrics = {out.metric};
  return out;
}

double perturbation_metric(const PerturbationProblem& prob, std::span<const int> t) {
  if (t.size() != prob.dim()) throw Error(ErrorKind::LengthMismatch, "t length != K");
  double metric = 0.0;
  for (std::size_t i = 0; i < prob.dim(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j <= i; ++j) row += prob.l(i, j) * (prob.s[j] + prob.tau * t[j]);
    metric += row * row;
  }
  return metric;
}

ArithmeticCount count_arithmetic(const EncoderResult& run, CountPhase phase, std::size_t n_f) {
  if (!run.counters_enabled) throw Error(ErrorKind::CountersDisabled, "run had counting off");
  if (n_f == 0) throw Error(ErrorKind::InvalidArgument, "N_f must be >= 1");
  if (phase == CountPhase::TreeSearch) {
    return {static_cast<double>(run.counts.real_mults), static_cast<double>(run.counts.real_adds)};
  }
  if (!run.precompute_counts) {
    throw Error(ErrorKind::CountersDisabled, "run did not use a pre-computation table");
  }
  const double nf = static_cast<double>(n_f);
  return {static_cast<double>(run.precompute_counts->real_mults) / nf,
          static_cast<double>(run.precompute_counts->real_adds) / nf};
}

}  // namespace vp
