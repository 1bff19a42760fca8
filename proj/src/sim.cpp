#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

#include <spdlog/spdlog.h>

#include "vp/channel.hpp"
#include "vp/rng.hpp"
#include "vp/sim.hpp"

namespace vp {

namespace {

constexpr std::uint64_t kChannelStream = 1;
constexpr std::uint64_t kCsiStream = 2;
constexpr std::uint64_t kDataStream = 3;
constexpr std::uint64_t kNoiseStream = 4;
constexpr std::uint64_t kMetricStatsTag = 0x6d65747269637374ULL;

std::uint64_t point_seed(std::uint64_t master, double snr_db) {
  return derive_seed(master, {std::bit_cast<std::uint64_t>(snr_db)});
}

// Pooled running moments, kept in long double to tame cancellation.
struct Moments {
  long double sum = 0.0L;
  long double sum_sq = 0.0L;
  std::uint64_t n = 0;

  void add(double v) {
    sum += v;
    sum_sq += static_cast<long double>(v) * v;
    ++n;
  }
  double mean() const { return n ? static_cast<double>(sum / n) : 0.0; }
  double stddev() const {
    if (n == 0) return 0.0;
    const long double m = sum / n;
    const long double var = sum_sq / n - m * m;
    return var > 0.0L ? static_cast<double>(std::sqrt(var)) : 0.0;
  }
};

// Per-channel transmitter state: the search problem for non-linear precoders,
// the filter and its expected-power scaling for linear ones.
struct TransmitterState {
  PerturbationProblem problem;
  RealMatrix linear_filter;
  double linear_gamma = 1.0;
  std::optional<PrecomputeTable> table;
};

TransmitterState prepare(const SimConfig& cfg, const EncoderSpec& enc, const RealMatrix& h_tx,
                         double sigma2, const Constellation& qpsk) {
  const std::size_t k = h_tx.rows();
  const double p_total = cfg.total_power();
  TransmitterState st;
  // Built for every encoder so rank-deficient redraws stay encoder-independent.
  st.problem = build_problem(h_tx, RealVector(k, qpsk.real_points.front()), tau(qpsk),
                             PerturbSet::from_count(enc.is_linear() ? 1 : enc.t), cfg.criterion,
                             sigma2, p_total);
  if (enc.kind == EncoderKind::LZF) {
    st.linear_filter = inverse(h_tx);
  } else if (enc.kind == EncoderKind::LMMSE) {
    const double alpha = static_cast<double>(k) * sigma2 / p_total;
    st.linear_filter = alpha > 0.0 ? pseudo_inverse(h_tx, alpha) : inverse(h_tx);
  }
  if (enc.is_linear()) st.linear_gamma = frobenius_norm_sq(st.linear_filter) / p_total;
  if (enc.kind == EncoderKind::FSE && enc.use_precompute) {
    st.table.emplace(st.problem.l, qpsk, st.problem.set);
  }
  return st;
}

EncoderResult run_tree_encoder(const EncoderSpec& enc, const TransmitterState& st) {
  SearchFlags flags;
  flags.compare_before_square = enc.compare_before_square;
  switch (enc.kind) {
    case EncoderKind::THP: return encode_thp(st.problem, flags);
    case EncoderKind::Exhaustive: return encode_exhaustive(st.problem, flags);
    case EncoderKind::Sphere: return encode_sphere(st.problem, RadiusPolicy::DfePoint, flags);
    case EncoderKind::QRDM: return encode_qrdm(st.problem, enc.m, flags);
    case EncoderKind::FSE:
      return encode_fse(st.problem, enc.p, flags, st.table ? &*st.table : nullptr);
    default: break;
  }
  throw Error(ErrorKind::InvalidArgument, "not a tree-search encoder");
}

void check_exhaustive_size(const SimConfig& cfg, const EncoderSpec& enc) {
  if (enc.kind != EncoderKind::Exhaustive) return;
  const double space = std::pow(static_cast<double>(enc.t), static_cast<double>(cfg.real_dim()));
  if (space > 1e7) throw Error(ErrorKind::ConfigInvalid, "exhaustive search space exceeds 1e7");
}

// Draws channels until the transmitter can be built. Returns the true channel.
RealMatrix draw_usable_channel(const SimConfig& cfg, const EncoderSpec& enc, double sigma2,
                               const Constellation& qpsk, RngStream& chan_rng, RngStream& csi_rng,
                               TransmitterState& state, SimRow& row) {
  for (;;) {
    ChannelRealization ch = draw_channel(cfg.n_antennas, chan_rng);
    ++row.channel_draws;
    RealMatrix h_tx = ch.h_real;
    if (cfg.zeta_db) h_tx = inject_csi_error(ch.h_real, *cfg.zeta_db, csi_rng).h_hat;
    try {
      state = prepare(cfg, enc, h_tx, sigma2, qpsk);
      return std::move(ch.h_real);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::RankDeficient && e.kind() != ErrorKind::Singular) throw;
      ++row.redraws;
      spdlog::debug("redrawing rank-deficient channel ({})", e.what());
    }
  }
}

}  // namespace

double noise_variance(const SimConfig& cfg, double snr_db) {
  return cfg.total_power() / static_cast<double>(cfg.n_antennas) / std::pow(10.0, snr_db / 10.0);
}

double SimRow::receive_snr_db(const SimConfig& cfg) const {
  const double sigma2 = noise_variance(cfg, snr_db);
  const double es = Constellation::qpsk().complex_symbol_energy();
  if (avg_gamma <= 0.0 || sigma2 <= 0.0) return std::numeric_limits<double>::infinity();
  return 10.0 * std::log10(es / (avg_gamma * sigma2));
}

SimRow run_point(const SimConfig& cfg, const EncoderSpec& enc, double snr_db) {
  SimConfig single = cfg;
  single.encoders = {enc};
  single.snr_db_list = {snr_db};
  single.validate();
  check_exhaustive_size(cfg, enc);

  const auto start = std::chrono::steady_clock::now();
  const Constellation qpsk = Constellation::qpsk();
  const double tau_value = tau(qpsk);
  const double sigma2 = noise_variance(cfg, snr_db);
  const std::size_t k = cfg.real_dim();

  SimRow row;
  row.encoder = enc;
  row.k = k;
  row.criterion = cfg.criterion;
  row.snr_db = snr_db;
  row.zeta_db = cfg.zeta_db;
  row.seed = cfg.seed;

  const RngStream root(point_seed(cfg.seed, snr_db));
  RngStream chan_rng = root.child({kChannelStream});
  RngStream csi_rng = root.child({kCsiStream});
  RngStream data_rng = root.child({kDataStream});
  RngStream noise_rng = root.child({kNoiseStream});

  TransmitterState state;
  RealMatrix h_true;
  Moments metrics;
  long double nodes = 0.0L, mults = 0.0L, adds = 0.0L, gamma_sum = 0.0L;
  const std::size_t n_bits = k * qpsk.bits_per_real_dim;
  BitVector bits(n_bits);

  for (std::uint64_t v = 0; v < cfg.max_vectors; ++v) {
    if (v % cfg.n_f == 0) {
      h_true = draw_usable_channel(cfg, enc, sigma2, qpsk, chan_rng, csi_rng, state, row);
      if (state.table) {
        mults += state.table->build_counts().real_mults;
        adds += state.table->build_counts().real_adds;
      }
    }
    for (auto& b : bits) b = data_rng.bit() ? 1 : 0;
    RealVector s = map_bits(bits, qpsk);

    RealVector x;
    double gamma;
    if (enc.is_linear()) {
      x = state.linear_filter * s;
      gamma = state.linear_gamma;
      const double scale = 1.0 / std::sqrt(gamma);
      for (double& e : x) e *= scale;
    } else {
      state.problem.s = s;
      EncoderResult res = run_tree_encoder(enc, state);
      x = std::move(res.x);
      gamma = res.gamma;
      nodes += res.counts.nodes_visited;
      mults += res.counts.real_mults;
      adds += res.counts.real_adds;
      for (double m : res.leaf_metrics) metrics.add(m * state.problem.power_scale);
    }
    gamma_sum += gamma;

    RealVector y = add_noise(h_true * x, sigma2, noise_rng);
    const double rx_scale = std::sqrt(gamma);
    for (double& e : y) e *= rx_scale;
    if (!enc.is_linear()) y = modulo_reduce(y, tau_value);
    const BitVector decided = demap(y, qpsk);

    std::uint64_t errs = 0;
    for (std::size_t i = 0; i < n_bits; ++i) errs += decided[i] != bits[i];
    row.errors += errs;
    row.bits += n_bits;
    ++row.vectors;
    if (row.errors >= cfg.target_min_bit_errors) break;
  }

  const double nv = static_cast<double>(row.vectors);
  row.ber = row.bits ? static_cast<double>(row.errors) / static_cast<double>(row.bits) : 0.0;
  row.avg_nodes = static_cast<double>(nodes) / nv;
  row.avg_mults = static_cast<double>(mults) / nv;
  row.avg_adds = static_cast<double>(adds) / nv;
  row.avg_gamma = static_cast<double>(gamma_sum) / nv;
  row.metric_mean = metrics.mean();
  row.metric_std = metrics.stddev();
  row.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  spdlog::info("{} snr={} dB: {} errors / {} bits, ber={:.3e} ({:.1f} s)", enc.label(), snr_db,
               row.errors, row.bits, row.ber, row.wall_time_s);
  return row;
}

SimReport sweep_in_order(const SimConfig& cfg, const std::vector<std::size_t>& order,
                         std::size_t threads) {
  cfg.validate();
  const std::size_t n_snr = cfg.snr_db_list.size();
  const std::size_t n_points = cfg.encoders.size() * n_snr;
  {
    std::vector<std::size_t> sorted = order;
    std::sort(sorted.begin(), sorted.end());
    std::vector<std::size_t> expect(n_points);
    std::iota(expect.begin(), expect.end(), std::size_t{0});
    if (sorted != expect) throw Error(ErrorKind::InvalidArgument, "order is not a permutation");
  }
  for (const EncoderSpec& e : cfg.encoders) check_exhaustive_size(cfg, e);

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, std::max<std::size_t>(n_points, 1));

  SimReport report;
  report.config = cfg;
  report.rows.resize(n_points);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t slot = next.fetch_add(1);
      if (slot >= n_points) return;
      const std::size_t idx = order[slot];
      try {
        report.rows[idx] = run_point(cfg, cfg.encoders[idx / n_snr], cfg.snr_db_list[idx % n_snr]);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(n_points);
        return;
      }
    }
  };

  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return report;
}

SimReport sweep(const SimConfig& cfg, std::size_t threads) {
  std::vector<std::size_t> order(cfg.encoders.size() * cfg.snr_db_list.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  return sweep_in_order(cfg, order, threads);
}

MetricStats retained_metric_stats(const SimConfig& cfg, const EncoderSpec& enc,
                                  std::uint64_t n_realizations, double snr_db) {
  if (enc.is_linear()) {
    throw Error(ErrorKind::ConfigInvalid, "retained-metric statistics need a tree encoder");
  }
  if (enc.kind == EncoderKind::FSE && (enc.p < 1 || enc.p > cfg.real_dim())) {
    throw Error(ErrorKind::ConfigInvalid, "p must satisfy 1 <= p <= K");
  }
  if (enc.t % 2 == 0) throw Error(ErrorKind::ConfigInvalid, "T must be odd");
  const Constellation qpsk = Constellation::qpsk();
  const double sigma2 = noise_variance(cfg, snr_db);
  const RngStream root(derive_seed(cfg.seed, {kMetricStatsTag, std::bit_cast<std::uint64_t>(snr_db)}));
  RngStream chan_rng = root.child({kChannelStream});
  RngStream data_rng = root.child({kDataStream});

  Moments pooled;
  long double within = 0.0L;
  const std::size_t n_bits = cfg.real_dim() * qpsk.bits_per_real_dim;
  BitVector bits(n_bits);
  for (std::uint64_t r = 0; r < n_realizations; ++r) {
    TransmitterState state;
    for (;;) {
      ChannelRealization ch = draw_channel(cfg.n_antennas, chan_rng);
      try {
        state = prepare(cfg, enc, ch.h_real, sigma2, qpsk);
        break;
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::RankDeficient && e.kind() != ErrorKind::Singular) throw;
      }
    }
    for (auto& b : bits) b = data_rng.bit() ? 1 : 0;
    state.problem.s = map_bits(bits, qpsk);
    const EncoderResult res = run_tree_encoder(enc, state);
    Moments local;
    for (double m : res.leaf_metrics) {
      const double scaled = m * state.problem.power_scale;
      pooled.add(scaled);
      local.add(scaled);
    }
    within += local.stddev();
  }
  MetricStats out;
  out.mean = pooled.mean();
  out.std = pooled.stddev();
  out.mean_within_std = n_realizations ? static_cast<double>(within / n_realizations) : 0.0;
  out.leaves = pooled.n;
  return out;
}

std::optional<double> interpolate_crossing(const std::vector<double>& snr_db,
                                           const std::vector<double>& ber, double target) {
  if (snr_db.size() != ber.size()) throw Error(ErrorKind::LengthMismatch, "snr/ber length mismatch");
  for (std::size_t i = 0; i + 1 < ber.size(); ++i) {
    const double hi = ber[i];
    const double lo = ber[i + 1];
    if (hi >= target && lo < target && lo > 0.0) {
      const double f = (std::log10(hi) - std::log10(target)) / (std::log10(hi) - std::log10(lo));
      return snr_db[i] + f * (snr_db[i + 1] - snr_db[i]);
    }
  }
  return std::nullopt;
}

}  // namespace vp
