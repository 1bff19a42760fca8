#include <functional>
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

#include "vp/error.hpp"
#include "vp/sim.hpp"

using vp::EncoderKind;
using vp::EncoderSpec;
using vp::SimConfig;

namespace {

SimConfig small_config() {
  SimConfig cfg;
  cfg.n_antennas = 2;
  cfg.encoders = {vp::parse_encoder_spec("thp"), vp::parse_encoder_spec("fse:p=1,T=3"),
                  vp::parse_encoder_spec("lzf")};
  cfg.snr_db_list = {4.0, 8.0};
  cfg.target_min_bit_errors = 50;
  cfg.max_vectors = 3000;
  cfg.seed = 123;
  return cfg;
}

std::size_t line_count(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

vp::ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const vp::Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return vp::ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("encoder spec parsing") {
  const auto f2 = vp::parse_encoder_spec("fse:p=2");
  CHECK(f2.kind == EncoderKind::FSE);
  CHECK(f2.p == 2);
  CHECK(f2.t == 3);
  CHECK(f2.label() == "fse-p2-T3");
  const auto f1 = vp::parse_encoder_spec("fse");
  CHECK(f1.p == 1);
  CHECK(f1.t == 9);
  const auto q = vp::parse_encoder_spec("qrdm");
  CHECK(q.t == 9);
  CHECK(q.m == 9);
  CHECK(q.label() == "qrdm-M9-T9");
  const auto pre = vp::parse_encoder_spec("fse:T=5,p=1,precompute=1,cbs=1");
  CHECK(pre.use_precompute);
  CHECK(pre.compare_before_square);
  CHECK(vp::parse_encoder_spec("lzf").is_linear());
  CHECK(vp::parse_encoder_spec("lmmse").t == 0);
  CHECK(vp::parse_encoder_spec("se").kind == EncoderKind::Sphere);
  CHECK(kind_of([] { vp::parse_encoder_spec("bogus"); }) == vp::ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { vp::parse_encoder_spec("fse:q=3"); }) == vp::ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { vp::parse_encoder_spec("fse:T=x"); }) == vp::ErrorKind::ConfigInvalid);
}

TEST_CASE("config validation") {
  SimConfig ok = small_config();
  CHECK_NOTHROW(ok.validate());
  auto broken = [&](auto&& mutate) {
    SimConfig c = small_config();
    mutate(c);
    return kind_of([&] { c.validate(); });
  };
  CHECK(broken([](SimConfig& c) { c.snr_db_list.clear(); }) == vp::ErrorKind::ConfigInvalid);
  CHECK(broken([](SimConfig& c) { c.snr_db_list = {5.0, 1.0}; }) == vp::ErrorKind::ConfigInvalid);
  CHECK(broken([](SimConfig& c) { c.max_vectors = 0; }) == vp::ErrorKind::ConfigInvalid);
  CHECK(broken([](SimConfig& c) { c.encoders[1].t = 4; }) == vp::ErrorKind::ConfigInvalid);
  CHECK(broken([](SimConfig& c) { c.encoders[1].t = 1; }) == vp::ErrorKind::ConfigInvalid);
  CHECK(broken([](SimConfig& c) { c.encoders[1].p = 9; }) == vp::ErrorKind::ConfigInvalid);
  CHECK(broken([](SimConfig& c) { c.encoders.clear(); }) == vp::ErrorKind::ConfigInvalid);
  CHECK(broken([](SimConfig& c) { c.n_antennas = 0; }) == vp::ErrorKind::ConfigInvalid);
  CHECK(broken([](SimConfig& c) { c.n_f = 0; }) == vp::ErrorKind::ConfigInvalid);
}

TEST_CASE("noise variance convention") {
  SimConfig cfg = small_config();
  CHECK(cfg.total_power() == 4.0);
  CHECK(vp::noise_variance(cfg, 0.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(vp::noise_variance(cfg, 10.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(vp::noise_variance(cfg, std::numeric_limits<double>::infinity()) == 0.0);
}

TEST_CASE("noiseless perfect-CSI transmission is error free") {
  SimConfig cfg;
  cfg.n_antennas = 2;
  cfg.snr_db_list = {std::numeric_limits<double>::infinity()};
  cfg.max_vectors = 2000;
  for (const char* e : {"thp", "se:T=3", "qrdm:T=5", "fse:p=1", "fse:p=2", "lzf", "lmmse",
                        "exhaustive:T=3"}) {
    for (auto crit : {vp::Criterion::ZF, vp::Criterion::MMSE}) {
      cfg.criterion = crit;
      const auto row = vp::run_point(cfg, vp::parse_encoder_spec(e), cfg.snr_db_list[0]);
      CHECK(row.bits == 2000u * 4u);
      CHECK(row.errors == 0);
      CHECK(row.ber == 0.0);
    }
  }
}

TEST_CASE("run_point is deterministic and self-consistent") {
  SimConfig cfg = small_config();
  const auto enc = cfg.encoders[1];
  const auto a = vp::run_point(cfg, enc, 6.0);
  const auto b = vp::run_point(cfg, enc, 6.0);
  CHECK(a.bits == b.bits);
  CHECK(a.errors == b.errors);
  CHECK(a.avg_nodes == b.avg_nodes);
  CHECK(a.metric_mean == b.metric_mean);
  CHECK(a.ber == static_cast<double>(a.errors) / static_cast<double>(a.bits));
  CHECK(a.avg_nodes == static_cast<double>(vp::fse_nodes(4, 3, 1)));
  CHECK(a.errors >= cfg.target_min_bit_errors);
  CHECK(a.seed == cfg.seed);
  CHECK(a.k == 4);
}

TEST_CASE("channel coherence reuses each draw for n_f vectors") {
  SimConfig cfg = small_config();
  cfg.n_f = 10;
  cfg.target_min_bit_errors = 1u << 30;
  cfg.max_vectors = 1000;
  const auto row = vp::run_point(cfg, cfg.encoders[0], 6.0);
  CHECK(row.vectors == 1000);
  CHECK(row.channel_draws - row.redraws == 100);
}

TEST_CASE("linear ZF is worse than FSE at 20 dB") {
  SimConfig cfg;
  cfg.n_antennas = 4;
  cfg.target_min_bit_errors = 200;
  cfg.max_vectors = 200000;
  const auto lzf = vp::run_point(cfg, vp::parse_encoder_spec("lzf"), 20.0);
  const auto fse = vp::run_point(cfg, vp::parse_encoder_spec("fse:p=1"), 20.0);
  CHECK(lzf.ber > fse.ber);
}

TEST_CASE("imperfect CSI hurts a tree encoder") {
  SimConfig cfg = small_config();
  cfg.target_min_bit_errors = 1u << 30;
  cfg.max_vectors = 20000;
  const auto perfect = vp::run_point(cfg, cfg.encoders[1], 15.0);
  cfg.zeta_db = 10.0;
  const auto noisy = vp::run_point(cfg, cfg.encoders[1], 15.0);
  CHECK(noisy.ber > perfect.ber);
}

TEST_CASE("sweep shape and schedule independence") {
  SimConfig cfg = small_config();
  const auto one = vp::sweep(cfg, 1);
  CHECK(one.rows.size() == cfg.encoders.size() * cfg.snr_db_list.size());
  for (std::size_t e = 0; e < cfg.encoders.size(); ++e)
    for (std::size_t s = 0; s < cfg.snr_db_list.size(); ++s) {
      const auto& row = one.rows[e * cfg.snr_db_list.size() + s];
      CHECK(row.encoder == cfg.encoders[e]);
      CHECK(row.snr_db == cfg.snr_db_list[s]);
    }
  const std::string csv = vp::report_csv(one);
  CHECK(vp::report_csv(vp::sweep(cfg, 3)) == csv);
  std::vector<std::size_t> order(one.rows.size());
  std::iota(order.begin(), order.end(), 0);
  std::reverse(order.begin(), order.end());
  std::swap(order[1], order[4]);
  CHECK(vp::report_csv(vp::sweep_in_order(cfg, order, 1)) == csv);
  CHECK(vp::report_csv(vp::sweep_in_order(cfg, order, 2)) == csv);

  SimConfig single = cfg;
  single.encoders = {cfg.encoders[0]};
  single.snr_db_list = {8.0};
  const auto s1 = vp::sweep(single, 1);
  REQUIRE(s1.rows.size() == 1);
  const auto direct = vp::run_point(single, single.encoders[0], 8.0);
  CHECK(s1.rows[0].errors == direct.errors);
  CHECK(s1.rows[0].bits == direct.bits);
}

TEST_CASE("encoders at the same SNR share channels, data and noise") {
  SimConfig cfg = small_config();
  cfg.target_min_bit_errors = 1u << 30;
  cfg.max_vectors = 500;
  // FSE with p = K is exhaustive, so both searches pick identical vectors.
  const auto a = vp::run_point(cfg, vp::parse_encoder_spec("fse:p=4,T=3"), 5.0);
  const auto b = vp::run_point(cfg, vp::parse_encoder_spec("exhaustive:T=3"), 5.0);
  CHECK(a.errors == b.errors);
  CHECK(a.avg_gamma == b.avg_gamma);
}

TEST_CASE("retained metric statistics") {
  SimConfig cfg;
  cfg.n_antennas = 2;
  EncoderSpec dfe;
  dfe.kind = EncoderKind::FSE;
  dfe.t = 1;
  dfe.p = 1;
  const auto one_leaf = vp::retained_metric_stats(cfg, dfe, 500, 12.0);
  CHECK(one_leaf.leaves == 500);
  CHECK(one_leaf.std > 0.0);
  CHECK(one_leaf.mean_within_std == 0.0);

  const auto p1 = vp::retained_metric_stats(cfg, vp::parse_encoder_spec("fse:p=1,T=9"), 500, 12.0);
  CHECK(p1.leaves == 500u * 9u);
  const auto again = vp::retained_metric_stats(cfg, vp::parse_encoder_spec("fse:p=1,T=9"), 500, 12.0);
  CHECK(p1.mean == again.mean);
  CHECK(p1.std == again.std);
  CHECK(kind_of([&] { vp::retained_metric_stats(cfg, vp::parse_encoder_spec("lzf"), 5, 12.0); }) ==
        vp::ErrorKind::ConfigInvalid);
}

TEST_CASE("csv report") {
  vp::SimReport empty;
  const std::string header =
      "encoder,K,T,p,M,criterion,snr_db,zeta_db,bits,errors,ber,avg_nodes,avg_mults,avg_adds,"
      "metric_mean,metric_std,seed\n";
  CHECK(vp::report_csv(empty) == header);
  const auto rep = vp::sweep(small_config(), 1);
  const std::string csv = vp::report_csv(rep);
  CHECK(csv.rfind(header, 0) == 0);
  CHECK(line_count(csv) == rep.rows.size() + 1);
}

TEST_CASE("json report round trip") {
  SimConfig cfg = small_config();
  cfg.zeta_db = 25.0;
  const auto rep = vp::sweep(cfg, 1);
  const auto back = vp::report_from_json(vp::report_json(rep));
  REQUIRE(back.rows.size() == rep.rows.size());
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto& a = rep.rows[i];
    const auto& b = back.rows[i];
    CHECK(a.encoder == b.encoder);
    CHECK(a.k == b.k);
    CHECK(a.criterion == b.criterion);
    CHECK(a.snr_db == b.snr_db);
    CHECK(a.zeta_db == b.zeta_db);
    CHECK(a.bits == b.bits);
    CHECK(a.errors == b.errors);
    CHECK(a.ber == b.ber);
    CHECK(a.avg_nodes == b.avg_nodes);
    CHECK(a.avg_mults == b.avg_mults);
    CHECK(a.avg_adds == b.avg_adds);
    CHECK(a.metric_mean == b.metric_mean);
    CHECK(a.metric_std == b.metric_std);
    CHECK(a.seed == b.seed);
    CHECK(a.vectors == b.vectors);
    CHECK(a.channel_draws == b.channel_draws);
    CHECK(a.redraws == b.redraws);
    CHECK(a.avg_gamma == b.avg_gamma);
    CHECK(a.wall_time_s == b.wall_time_s);
  }
  CHECK(vp::report_csv(back) == vp::report_csv(rep));
  CHECK(vp::config_to_json_text(back.config) == vp::config_to_json_text(cfg));
}

TEST_CASE("emit_report writes files and reports io failures") {
  const auto rep = vp::sweep(small_config(), 1);
  const auto dir = std::filesystem::temp_directory_path() / "vp_test_emit";
  std::filesystem::create_directories(dir);
  const auto path = dir / "r.csv";
  vp::emit_report(rep, vp::ReportFormat::Csv, path);
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  CHECK(ss.str() == vp::report_csv(rep));
  vp::emit_report(rep, vp::ReportFormat::Json, dir / "r.json");
  CHECK(std::filesystem::file_size(dir / "r.json") > 0);
  std::filesystem::remove_all(dir);
  CHECK(kind_of([&] { vp::emit_report(rep, vp::ReportFormat::Csv, "/nonexistent/dir/x.csv"); }) ==
        vp::ErrorKind::IoError);
}

TEST_CASE("json config") {
  const auto cfg = vp::config_from_json_text(R"({
    "n_antennas": 4,
    "encoders": ["thp", "fse:p=2", "qrdm:T=9"],
    "snr_db": [10, 12, 14],
    "target_min_bit_errors": 300,
    "max_vectors": 1000,
    "seed": 77,
    "zeta_db": 25,
    "n_f": 2,
    "criterion": "ZF"
  })");
  CHECK(cfg.n_antennas == 4);
  CHECK(cfg.encoders.size() == 3);
  CHECK(cfg.encoders[1].t == 3);
  CHECK(cfg.snr_db_list == std::vector<double>{10, 12, 14});
  CHECK(cfg.target_min_bit_errors == 300);
  CHECK(cfg.seed == 77);
  CHECK(cfg.zeta_db == 25.0);
  CHECK(cfg.n_f == 2);
  CHECK(cfg.criterion == vp::Criterion::ZF);
  const auto again = vp::config_from_json_text(vp::config_to_json_text(cfg));
  CHECK(vp::config_to_json_text(again) == vp::config_to_json_text(cfg));
  CHECK(kind_of([] { vp::config_from_json_text(R"({"n_antenas": 4})"); }) ==
        vp::ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { vp::config_from_json_text("{not json"); }) == vp::ErrorKind::ConfigInvalid);
  CHECK(kind_of([] { vp::load_config("/nonexistent/cfg.json"); }) == vp::ErrorKind::IoError);
}

TEST_CASE("crossing interpolation") {
  const std::vector<double> snr{0, 5, 10};
  const std::vector<double> ber{1e-2, 1e-3, 1e-5};
  CHECK(vp::interpolate_crossing(snr, ber, 1e-3).value() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(vp::interpolate_crossing(snr, ber, 1e-4).value() == doctest::Approx(7.5).epsilon(1e-12));
  CHECK(vp::interpolate_crossing(snr, ber, std::sqrt(1e-2 * 1e-3)).value() ==
        doctest::Approx(2.5).epsilon(1e-12));
  CHECK_FALSE(vp::interpolate_crossing(snr, ber, 1e-7).has_value());
}
