// vpsim: command-line front end for the vector-perturbation precoding library.
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

#include "vp/channel.hpp"
#include "vp/complexity.hpp"
#include "vp/encoders.hpp"
#include "vp/rng.hpp"
#include "vp/sim.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitIo = 4;

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out_path;
  std::string format = "csv";
  std::size_t threads = 1;
  bool quiet = false;
};

struct Overrides {
  std::optional<std::size_t> antennas;
  std::vector<std::string> encoders;
  std::vector<double> snr;
  std::optional<double> zeta;
  std::optional<std::string> criterion;
  std::optional<std::uint64_t> min_errors;
  std::optional<std::uint64_t> max_vectors;
  std::optional<std::size_t> n_f;
  std::optional<double> p_total;
};

void setup_logging(bool quiet) {
  auto logger = spdlog::stderr_logger_mt("vpsim");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%H:%M:%S] [%l] %v");
  spdlog::level::level_enum level = spdlog::level::warn;
  if (const char* env = std::getenv("LP_LOG")) level = spdlog::level::from_str(env);
  if (quiet) level = spdlog::level::err;
  spdlog::set_level(level);
}

void add_overrides(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--antennas", o.antennas, "Users N (= transmit antennas); K = 2N");
  cmd->add_option("--encoder,--encoders", o.encoders,
                  "Encoder spec(s), e.g. fse:T=3,p=2 qrdm:T=9 thp lzf");
  cmd->add_option("--snr", o.snr, "SNR point(s) in dB")->delimiter(',');
  cmd->add_option("--zeta", o.zeta, "CSI quality zeta in dB (omit for perfect CSI)");
  cmd->add_option("--criterion", o.criterion, "ZF or MMSE");
  cmd->add_option("--min-errors", o.min_errors, "Stop a point after this many bit errors");
  cmd->add_option("--max-vectors", o.max_vectors, "Cap on transmitted vectors per point");
  cmd->add_option("--nf", o.n_f, "Vectors per channel realization");
  cmd->add_option("--p-total", o.p_total, "Total transmit power (default K)");
}

vp::SimConfig resolve_config(const GlobalOptions& g, const Overrides& o) {
  vp::SimConfig cfg;
  if (!g.config_path.empty()) cfg = vp::load_config(g.config_path);
  if (g.seed) cfg.seed = *g.seed;
  if (o.antennas) cfg.n_antennas = *o.antennas;
  if (!o.encoders.empty()) {
    cfg.encoders.clear();
    for (const auto& e : o.encoders) cfg.encoders.push_back(vp::parse_encoder_spec(e));
  }
  if (!o.snr.empty()) cfg.snr_db_list = o.snr;
  if (o.zeta) cfg.zeta_db = *o.zeta;
  if (o.criterion) {
    if (*o.criterion == "ZF" || *o.criterion == "zf") {
      cfg.criterion = vp::Criterion::ZF;
    } else if (*o.criterion == "MMSE" || *o.criterion == "mmse") {
      cfg.criterion = vp::Criterion::MMSE;
    } else {
      throw vp::Error(vp::ErrorKind::ConfigInvalid, "criterion must be ZF or MMSE");
    }
  }
  if (o.min_errors) cfg.target_min_bit_errors = *o.min_errors;
  if (o.max_vectors) cfg.max_vectors = *o.max_vectors;
  if (o.n_f) cfg.n_f = *o.n_f;
  if (o.p_total) cfg.p_total = *o.p_total;
  cfg.validate();
  return cfg;
}

vp::ReportFormat parse_format(const std::string& f) {
  if (f == "csv") return vp::ReportFormat::Csv;
  if (f == "json") return vp::ReportFormat::Json;
  throw vp::Error(vp::ErrorKind::ConfigInvalid, "format must be csv or json");
}

void write_text(const GlobalOptions& g, const std::string& text) {
  if (g.out_path.empty()) {
    std::cout << text;
    std::cout.flush();
    if (!std::cout) throw vp::Error(vp::ErrorKind::IoError, "write to stdout failed");
    return;
  }
  std::ofstream out(g.out_path, std::ios::binary | std::ios::trunc);
  if (!out) throw vp::Error(vp::ErrorKind::IoError, "cannot open " + g.out_path);
  out << text;
  if (!out) throw vp::Error(vp::ErrorKind::IoError, "write failed for " + g.out_path);
}

int emit(const GlobalOptions& g, const vp::SimReport& report) {
  const vp::ReportFormat fmt = parse_format(g.format);
  if (g.out_path.empty()) {
    write_text(g, fmt == vp::ReportFormat::Csv ? vp::report_csv(report) : vp::report_json(report));
  } else {
    vp::emit_report(report, fmt, g.out_path);
  }
  std::uint64_t draws = 0, redraws = 0;
  for (const auto& r : report.rows) {
    draws += r.channel_draws;
    redraws += r.redraws;
  }
  if (draws > 0 && static_cast<double>(redraws) > 0.01 * static_cast<double>(draws)) {
    spdlog::error("rank-deficient channel redraws {} of {} exceed 1%", redraws, draws);
    return kExitNumerical;
  }
  return kExitOk;
}

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// Instrumented node count on one seeded MMSE problem.
std::uint64_t measured_nodes(std::size_t n, std::size_t t, vp::EncoderKind kind, std::size_t p,
                             std::uint64_t seed) {
  vp::RngStream rng(seed);
  const auto ch = vp::draw_channel(n, rng);
  const auto qpsk = vp::Constellation::qpsk();
  vp::RealVector s(2 * n);
  for (auto& v : s) v = rng.bit() ? 1.0 : -1.0;
  const auto prob = vp::build_problem(ch.h_real, s, vp::tau(qpsk), vp::PerturbSet::from_count(t),
                                      vp::Criterion::MMSE, 0.1, static_cast<double>(2 * n));
  if (kind == vp::EncoderKind::QRDM) return vp::encode_qrdm(prob, t).counts.nodes_visited;
  return vp::encode_fse(prob, p).counts.nodes_visited;
}

int run_complexity(const GlobalOptions& g, const std::vector<std::size_t>& ks,
                   const std::vector<std::size_t>& ts, const std::vector<std::size_t>& ps) {
  std::ostringstream out;
  out << "K,T,p,se_worst_case,qrdme,fse,rho_num,rho_den,rho\n";
  for (std::size_t k : ks)
    for (std::size_t t : ts)
      for (std::size_t p : ps) {
        if (p > k) continue;
        std::string se;
        try {
          se = std::to_string(vp::se_worst_case_nodes(k, t));
        } catch (const vp::Error&) {
          se = "overflow";
        }
        const auto r = vp::rho(k, t);
        out << k << ',' << t << ',' << p << ',' << se << ',' << vp::qrdme_nodes(k, t) << ','
            << vp::fse_nodes(k, t, p) << ',' << r.num << ',' << r.den << ',' << fmt17(r.value())
            << '\n';
      }

  out << "\nsystem,qrdme_T9_formula,qrdme_T9_measured,fse_p1_T9_formula,fse_p1_T9_measured,"
         "fse_p2_T3_formula,fse_p2_T3_measured\n";
  const std::uint64_t seed = g.seed.value_or(1);
  for (std::size_t n : {4u, 8u}) {
    const std::size_t k = 2 * n;
    out << n << 'x' << n << ',' << vp::qrdme_nodes(k, 9) << ','
        << measured_nodes(n, 9, vp::EncoderKind::QRDM, 0, seed) << ',' << vp::fse_nodes(k, 9, 1)
        << ',' << measured_nodes(n, 9, vp::EncoderKind::FSE, 1, seed) << ','
        << vp::fse_nodes(k, 3, 2) << ',' << measured_nodes(n, 3, vp::EncoderKind::FSE, 2, seed)
        << '\n';
  }
  write_text(g, out.str());
  return kExitOk;
}

int run_csi_bound(const GlobalOptions& g, std::size_t pairs, const std::vector<std::size_t>& dims,
                  double zeta) {
  std::ostringstream out;
  out << "n,pairs,violations,max_actual_over_bound,inapplicable_at_zeta,min_shrink_at_zeta,"
         "min_shrink_from_quarter\n";
  bool ok = true;
  for (std::size_t n : dims) {
    if (n % 2 != 0) throw vp::Error(vp::ErrorKind::ConfigInvalid, "csi-bound sizes must be even");
    vp::RngStream rng(vp::derive_seed(g.seed.value_or(1), {n}));
    std::size_t violations = 0, inapplicable = 0;
    double worst_ratio = 0.0;
    double shrink_native = std::numeric_limits<double>::infinity();
    double shrink_quarter = std::numeric_limits<double>::infinity();
    auto halvings = [](const vp::RealMatrix& h, vp::RealMatrix b) {
      double worst = std::numeric_limits<double>::infinity();
      double prev = vp::neumann_first_order_check(h, b).residual;
      for (int i = 0; i < 4; ++i) {
        b = 0.5 * b;
        const double cur = vp::neumann_first_order_check(h, b).residual;
        worst = std::min(worst, prev / cur);
        prev = cur;
      }
      return worst;
    };
    for (std::size_t i = 0; i < pairs; ++i) {
      const auto ch = vp::draw_channel(n / 2, rng);
      const vp::RealMatrix& h = ch.h_real;
      const auto csi = vp::inject_csi_error(h, zeta, rng);
      const auto bound = vp::csi_error_bound(h, csi.error.b);
      if (bound.actual > bound.bound) ++violations;
      worst_ratio = std::max(worst_ratio, bound.actual / bound.bound);

      const double x = vp::singular_values(vp::inverse(h) * csi.error.b).front();
      if (x < 1.0) {
        shrink_native = std::min(shrink_native, halvings(h, csi.error.b));
      } else {
        ++inapplicable;
      }
      // Same direction, started at ||H^-1 B||_2 = 1/4.
      const double q = halvings(h, (0.25 / x) * csi.error.b);
      shrink_quarter = std::min(shrink_quarter, q);
    }
    ok = ok && violations == 0 && shrink_quarter >= 3.5;
    out << n << ',' << pairs << ',' << violations << ',' << fmt17(worst_ratio) << ','
        << inapplicable << ',' << fmt17(shrink_native) << ',' << fmt17(shrink_quarter) << '\n';
  }
  write_text(g, out.str());
  return ok ? kExitOk : kExitNumerical;
}

int run_metric_stats(const GlobalOptions& g, const std::vector<std::size_t>& antennas,
                     const std::vector<std::string>& encoders, std::uint64_t realizations,
                     double snr_db, const std::string& criterion) {
  std::ostringstream out;
  out << "system,encoder,realizations,snr_db,mean,std,mean_within_std\n";
  for (std::size_t n : antennas) {
    vp::SimConfig cfg;
    cfg.n_antennas = n;
    cfg.seed = g.seed.value_or(1);
    cfg.criterion = (criterion == "ZF" || criterion == "zf") ? vp::Criterion::ZF : vp::Criterion::MMSE;
    for (const auto& e : encoders) {
      const vp::EncoderSpec spec = vp::parse_encoder_spec(e);
      const auto stats = vp::retained_metric_stats(cfg, spec, realizations, snr_db);
      out << n << 'x' << n << ',' << spec.label() << ',' << realizations << ',' << fmt17(snr_db)
          << ',' << fmt17(stats.mean) << ',' << fmt17(stats.std) << ','
          << fmt17(stats.mean_within_std) << '\n';
    }
  }
  write_text(g, out.str());
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vector-perturbation precoding simulator (THP, SE, QRD-M, FSE)"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON config file mirroring SimConfig");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out_path, "Output file (default: standard output)");
  app.add_option("--format", g.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  app.add_option("--threads", g.threads, "Worker threads, 0 = auto");
  app.add_flag("--quiet", g.quiet, "Only log errors");

  Overrides sim_o;
  auto* simulate = app.add_subcommand("simulate", "One encoder at one SNR");
  add_overrides(simulate, sim_o);

  Overrides sweep_o;
  auto* sweep_cmd = app.add_subcommand("sweep", "Every configured encoder at every SNR");
  add_overrides(sweep_cmd, sweep_o);

  std::vector<std::size_t> ks{8, 16}, ts{3, 5, 7, 9}, ps{1, 2};
  auto* complexity = app.add_subcommand("complexity", "Closed-form node counts and instrumented reference counts");
  complexity->add_option("--K", ks, "Real dimensions")->delimiter(',');
  complexity->add_option("--T", ts, "Perturbation set sizes")->delimiter(',');
  complexity->add_option("--p", ps, "FSE full-expansion depths")->delimiter(',');

  std::size_t pairs = 1000;
  std::vector<std::size_t> dims{4, 8};
  double zeta = 25.0;
  auto* csi = app.add_subcommand("csi-bound", "Imperfect-CSI error bound property sweep");
  csi->add_option("--pairs", pairs, "Random (H, B) pairs per size");
  csi->add_option("--n", dims, "Matrix sizes")->delimiter(',');
  csi->add_option("--zeta", zeta, "CSI quality of B in dB");

  std::vector<std::size_t> stat_antennas{4, 8};
  std::vector<std::string> stat_encoders{"fse:T=9,p=1", "fse:T=3,p=2"};
  std::uint64_t realizations = 100000;
  double stat_snr = 12.0;
  std::string stat_criterion = "MMSE";
  auto* stats = app.add_subcommand("metric-stats", "Retained-candidate metric statistics");
  stats->add_option("--antennas", stat_antennas, "System sizes N")->delimiter(',');
  stats->add_option("--encoder,--encoders", stat_encoders, "Tree encoders");
  stats->add_option("--realizations", realizations, "Channel realizations");
  stats->add_option("--snr", stat_snr, "SNR in dB setting the MMSE regularization");
  stats->add_option("--criterion", stat_criterion, "ZF or MMSE");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  setup_logging(g.quiet);
  try {
    if (*simulate) {
      vp::SimConfig cfg = resolve_config(g, sim_o);
      if (cfg.encoders.size() != 1 || cfg.snr_db_list.size() != 1) {
        throw vp::Error(vp::ErrorKind::ConfigInvalid, "simulate takes exactly one encoder and one SNR");
      }
      vp::SimReport report;
      report.config = cfg;
      report.rows.push_back(vp::run_point(cfg, cfg.encoders.front(), cfg.snr_db_list.front()));
      return emit(g, report);
    }
    if (*sweep_cmd) {
      const vp::SimConfig cfg = resolve_config(g, sweep_o);
      return emit(g, vp::sweep(cfg, g.threads));
    }
    if (*complexity) return run_complexity(g, ks, ts, ps);
    if (*csi) return run_csi_bound(g, pairs, dims, zeta);
    if (*stats) {
      return run_metric_stats(g, stat_antennas, stat_encoders, realizations, stat_snr,
                              stat_criterion);
    }
  } catch (const vp::Error& e) {
    spdlog::error("{}", e.what());
    switch (e.kind()) {
      case vp::ErrorKind::ConfigInvalid:
      case vp::ErrorKind::InvalidArgument:
      case vp::ErrorKind::SearchSpaceTooLarge:
        return kExitConfig;
      case vp::ErrorKind::IoError:
        return kExitIo;
      default:
        return kExitNumerical;
    }
  }
  return kExitOk;
}
