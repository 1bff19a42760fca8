#pragma once
// Test-only utilities: seeded inputs and reference computations written
// independently of the library's search code.
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "vp/channel.hpp"
#include "vp/encoders.hpp"
#include "vp/linalg.hpp"
#include "vp/modem.hpp"
#include "vp/rng.hpp"

namespace vptest {

inline vp::RealMatrix gaussian_matrix(std::size_t rows, std::size_t cols, std::mt19937_64& eng) {
  std::normal_distribution<double> nd;
  vp::RealMatrix m(rows, cols);
  for (std::size_t i = 0; i < rows; ++i)
    for (std::size_t j = 0; j < cols; ++j) m(i, j) = nd(eng);
  return m;
}

inline vp::RealVector qpsk_vector(std::size_t k, std::mt19937_64& eng) {
  vp::RealVector s(k);
  for (auto& v : s) v = (eng() >> 63) ? 1.0 : -1.0;
  return s;
}

inline double max_abs_diff(const vp::RealMatrix& a, const vp::RealMatrix& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < a.cols(); ++j) d = std::max(d, std::abs(a(i, j) - b(i, j)));
  return d;
}

inline double frob(const vp::RealMatrix& m) {
  double acc = 0.0;
  for (double v : m.values()) acc += v * v;
  return std::sqrt(acc);
}

/// Seeded random search instance built through the real channel path.
inline vp::PerturbationProblem random_problem(std::size_t k, std::size_t t, std::uint64_t seed,
                                              vp::Criterion crit = vp::Criterion::MMSE,
                                              double sigma_n_sq = 0.1) {
  vp::RngStream rng(seed);
  const auto ch = vp::draw_channel(k / 2, rng);
  std::mt19937_64 eng(seed ^ 0x5bd1e995u);
  return vp::build_problem(ch.h_real, qpsk_vector(k, eng), 4.0, vp::PerturbSet::from_count(t),
                           crit, sigma_n_sq, static_cast<double>(k));
}

/// ||L (s + tau t)||^2 by a plain double loop over the full matrix.
inline double reference_metric(const vp::PerturbationProblem& prob, const std::vector<int>& t) {
  const std::size_t k = prob.l.rows();
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < k; ++j) row += prob.l(i, j) * (prob.s[j] + prob.tau * t[j]);
    acc += row * row;
  }
  return acc;
}

struct OracleAnswer {
  std::vector<int> t;
  double metric = std::numeric_limits<double>::infinity();
};

/// Odometer enumeration of A^K in lexicographic order; first strict minimum wins,
/// which is the lexicographically smallest t among exact ties.
inline OracleAnswer brute_force(const vp::PerturbationProblem& prob) {
  const std::size_t k = prob.l.rows();
  const int a = prob.set.a;
  std::vector<int> t(k, -a);
  OracleAnswer best;
  for (;;) {
    // The library accumulates level by level; mirror that summation order so
    // near-ties compare identically.
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      double inc = 0.0;
      for (std::size_t j = 0; j < i; ++j) inc += prob.l(i, j) * (prob.s[j] + prob.tau * t[j]);
      inc += prob.l(i, i) * (prob.s[i] + prob.tau * t[i]);
      acc += inc * inc;
    }
    if (acc < best.metric) {
      best.metric = acc;
      best.t = t;
    }
    std::size_t pos = k;
    while (pos > 0 && t[pos - 1] == a) t[--pos] = -a;
    if (pos == 0) break;
    ++t[pos - 1];
  }
  return best;
}

namespace detail {

struct Branch {
  std::vector<int> t;
  double metric = 0.0;
};

inline double level_increment(const vp::PerturbationProblem& prob, const std::vector<int>& prefix,
                              std::size_t i, int cand) {
  double inc = 0.0;
  for (std::size_t j = 0; j < i; ++j) inc += prob.l(i, j) * (prob.s[j] + prob.tau * prefix[j]);
  inc += prob.l(i, i) * (prob.s[i] + prob.tau * cand);
  return inc;
}

inline OracleAnswer best_of(const std::vector<Branch>& leaves) {
  OracleAnswer out;
  for (const auto& b : leaves) {
    if (b.metric < out.metric) {
      out.metric = b.metric;
      out.t = b.t;
    }
  }
  return out;
}

}  // namespace detail

/// Beam search kept as a plain list of branches. Children are created parent by
/// parent with t ascending; a stable sort by metric keeps creation order on ties.
inline OracleAnswer reference_qrdm(const vp::PerturbationProblem& prob, std::size_t m) {
  std::vector<detail::Branch> beam{detail::Branch{}};
  for (std::size_t i = 0; i < prob.l.rows(); ++i) {
    std::vector<detail::Branch> next;
    for (const auto& b : beam) {
      for (int v : prob.set.values) {
        const double inc = detail::level_increment(prob, b.t, i, v);
        detail::Branch c{b.t, b.metric + inc * inc};
        c.t.push_back(v);
        next.push_back(std::move(c));
      }
    }
    std::stable_sort(next.begin(), next.end(),
                     [](const auto& x, const auto& y) { return x.metric < y.metric; });
    if (next.size() > m) next.resize(m);
    beam = std::move(next);
  }
  return detail::best_of(beam);
}

/// Full tree over the first p levels, then the locally best child per branch.
inline OracleAnswer reference_fse(const vp::PerturbationProblem& prob, std::size_t p) {
  std::vector<detail::Branch> alive{detail::Branch{}};
  for (std::size_t i = 0; i < prob.l.rows(); ++i) {
    std::vector<detail::Branch> next;
    for (const auto& b : alive) {
      if (i < p) {
        for (int v : prob.set.values) {
          const double inc = detail::level_increment(prob, b.t, i, v);
          detail::Branch c{b.t, b.metric + inc * inc};
          c.t.push_back(v);
          next.push_back(std::move(c));
        }
      } else {
        double best = std::numeric_limits<double>::infinity();
        int best_v = 0;
        for (int v : prob.set.values) {
          const double inc = detail::level_increment(prob, b.t, i, v);
          if (inc * inc < best) {
            best = inc * inc;
            best_v = v;
          }
        }
        detail::Branch c{b.t, b.metric + best};
        c.t.push_back(best_v);
        next.push_back(std::move(c));
      }
    }
    alive = std::move(next);
  }
  return detail::best_of(alive);
}

}  // namespace vptest
