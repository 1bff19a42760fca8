#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "vp/complexity.hpp"
#include "vp/encoders.hpp"

namespace vp {

/// One precoder under test.
struct EncoderSpec {
  EncoderKind kind = EncoderKind::FSE;
  std::size_t t = 9;  ///< perturbation set size (0 for linear precoders)
  std::size_t p = 0;  ///< FSE full-expansion depth
  std::size_t m = 0;  ///< QRD-M breadth
  bool use_precompute = false;
  bool compare_before_square = false;

  bool is_linear() const noexcept {
    return kind == EncoderKind::LZF || kind == EncoderKind::LMMSE;
  }
  /// e.g. "fse-p2-T3", "qrdm-M9-T9", "lzf".
  std::string label() const;
  bool operator==(const EncoderSpec&) const = default;
};

/// Parses "kind[:key=value,...]" with keys T, p, M, precompute, cbs.
/// Missing T defaults to 3 for FSE with p >= 2 and to 9 otherwise; M to T.
EncoderSpec parse_encoder_spec(std::string_view text);

struct SimConfig {
  std::size_t n_antennas = 2;
  std::vector<EncoderSpec> encoders;
  std::vector<double> snr_db_list;
  std::uint64_t target_min_bit_errors = 500;
  std::uint64_t max_vectors = 20'000'000;
  std::uint64_t seed = 1;
  std::optional<double> zeta_db;  ///< unset: perfect CSI
  std::size_t n_f = 1;            ///< vectors per channel realization
  Criterion criterion = Criterion::MMSE;
  double p_total = 0.0;           ///< <= 0 selects K

  std::size_t real_dim() const noexcept { return 2 * n_antennas; }
  double total_power() const noexcept {
    return p_total > 0.0 ? p_total : static_cast<double>(real_dim());
  }
  /// Throws ConfigInvalid.
  void validate() const;
};

/// Complex-dimension noise variance for a nominal SNR:
/// sigma_n^2 = (P_T / N) / 10^(snr/10). With the default P_T = 2N this is
/// E(ss*) / SNR for unnormalised QPSK.
double noise_variance(const SimConfig& cfg, double snr_db);

struct SimRow {
  EncoderSpec encoder;
  std::size_t k = 0;
  Criterion criterion = Criterion::MMSE;
  double snr_db = 0.0;
  std::optional<double> zeta_db;
  std::uint64_t bits = 0;
  std::uint64_t errors = 0;
  double ber = 0.0;
  double avg_nodes = 0.0;
  double avg_mults = 0.0;
  double avg_adds = 0.0;
  double metric_mean = 0.0;
  double metric_std = 0.0;
  std::uint64_t seed = 0;
  // Not part of the CSV schema.
  std::uint64_t vectors = 0;
  std::uint64_t channel_draws = 0;
  std::uint64_t redraws = 0;
  double avg_gamma = 0.0;
  double wall_time_s = 0.0;

  /// E(ss*) / (mean gamma * sigma_n^2), the receive SNR in dB.
  double receive_snr_db(const SimConfig& cfg) const;
};

struct SimReport {
  SimConfig config;
  std::vector<SimRow> rows;
};

/// Monte Carlo BER at one SNR. Random streams are keyed by (seed, snr_db) only,
/// so every encoder at the same SNR sees the same channels, data and noise.
SimRow run_point(const SimConfig& cfg, const EncoderSpec& encoder, double snr_db);

/// All (encoder, snr) points, encoder-major. threads = 0 picks the hardware
/// concurrency. The report does not depend on the thread count or schedule.
SimReport sweep(const SimConfig& cfg, std::size_t threads = 1);

/// Same as sweep but executes points in the given permutation of point indices.
SimReport sweep_in_order(const SimConfig& cfg, const std::vector<std::size_t>& order,
                         std::size_t threads = 1);

struct MetricStats {
  double mean = 0.0;              ///< over all retained leaves of all realizations
  double std = 0.0;               ///< population standard deviation, same pool
  double mean_within_std = 0.0;   ///< average per-realization spread
  std::uint64_t leaves = 0;
};

/// Statistics of the accumulated metrics of every candidate retained at the
/// last level, in transmit-power units (s+tau t)^T (H H^T + alpha I)^-1 (s+tau t).
/// Noise enters only through alpha, set from snr_db.
MetricStats retained_metric_stats(const SimConfig& cfg, const EncoderSpec& encoder,
                                  std::uint64_t n_realizations, double snr_db);

enum class ReportFormat { Csv, Json };

std::string report_csv(const SimReport& report);
std::string report_json(const SimReport& report);
SimReport report_from_json(const std::string& text);
/// Throws IoError.
void emit_report(const SimReport& report, ReportFormat format, const std::filesystem::path& path);

/// Reads a JSON config object; throws ConfigInvalid / IoError.
SimConfig load_config(const std::filesystem::path& path);
SimConfig config_from_json_text(const std::string& text);
std::string config_to_json_text(const SimConfig& cfg);

/// Target-BER crossing by log-linear interpolation between bracketing points.
/// Returns nullopt if the curve never crosses the target.
std::optional<double> interpolate_crossing(const std::vector<double>& snr_db,
                                           const std::vector<double>& ber, double target);

}  // namespace vp
