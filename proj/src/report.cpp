#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "json_real.hpp"
#include "vp/sim.hpp"

namespace vp {

namespace {

using nlohmann::json;

constexpr const char* kCsvHeader =
    "encoder,K,T,p,M,criterion,snr_db,zeta_db,bits,errors,ber,avg_nodes,avg_mults,avg_adds,"
    "metric_mean,metric_std,seed";

std::string real17(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string zeta_text(const std::optional<double>& z) { return z ? real17(*z) : "inf"; }

json row_to_json(const SimRow& r) {
  json j;
  j["encoder"] = to_string(r.encoder.kind);
  j["label"] = r.encoder.label();
  j["K"] = r.k;
  j["T"] = r.encoder.t;
  j["p"] = r.encoder.p;
  j["M"] = r.encoder.m;
  j["precompute"] = r.encoder.use_precompute;
  j["cbs"] = r.encoder.compare_before_square;
  j["criterion"] = to_string(r.criterion);
  j["snr_db"] = detail::real_to_json(r.snr_db);
  j["zeta_db"] = r.zeta_db ? json(*r.zeta_db) : json(nullptr);
  j["bits"] = r.bits;
  j["errors"] = r.errors;
  j["ber"] = r.ber;
  j["avg_nodes"] = r.avg_nodes;
  j["avg_mults"] = r.avg_mults;
  j["avg_adds"] = r.avg_adds;
  j["metric_mean"] = r.metric_mean;
  j["metric_std"] = r.metric_std;
  j["seed"] = r.seed;
  j["vectors"] = r.vectors;
  j["channel_draws"] = r.channel_draws;
  j["redraws"] = r.redraws;
  j["avg_gamma"] = r.avg_gamma;
  j["wall_time_s"] = r.wall_time_s;
  return j;
}

SimRow row_from_json(const json& j) {
  SimRow r;
  std::string enc = j.at("encoder").get<std::string>();
  EncoderSpec spec = parse_encoder_spec(enc);
  spec.t = j.at("T").get<std::size_t>();
  spec.p = j.at("p").get<std::size_t>();
  spec.m = j.at("M").get<std::size_t>();
  spec.use_precompute = j.value("precompute", false);
  spec.compare_before_square = j.value("cbs", false);
  r.encoder = spec;
  r.k = j.at("K").get<std::size_t>();
  r.criterion = j.at("criterion").get<std::string>() == "ZF" ? Criterion::ZF : Criterion::MMSE;
  r.snr_db = detail::real_from_json(j.at("snr_db"));
  if (!j.at("zeta_db").is_null()) r.zeta_db = j.at("zeta_db").get<double>();
  r.bits = j.at("bits").get<std::uint64_t>();
  r.errors = j.at("errors").get<std::uint64_t>();
  r.ber = j.at("ber").get<double>();
  r.avg_nodes = j.at("avg_nodes").get<double>();
  r.avg_mults = j.at("avg_mults").get<double>();
  r.avg_adds = j.at("avg_adds").get<double>();
  r.metric_mean = j.at("metric_mean").get<double>();
  r.metric_std = j.at("metric_std").get<double>();
  r.seed = j.at("seed").get<std::uint64_t>();
  r.vectors = j.value("vectors", std::uint64_t{0});
  r.channel_draws = j.value("channel_draws", std::uint64_t{0});
  r.redraws = j.value("redraws", std::uint64_t{0});
  r.avg_gamma = j.value("avg_gamma", 0.0);
  r.wall_time_s = j.value("wall_time_s", 0.0);
  return r;
}

}  // namespace

std::string report_csv(const SimReport& report) {
  std::string out = kCsvHeader;
  out += '\n';
  for (const SimRow& r : report.rows) {
    out += std::string(to_string(r.encoder.kind)) + ',' + std::to_string(r.k) + ',' +
           std::to_string(r.encoder.t) + ',' + std::to_string(r.encoder.p) + ',' +
           std::to_string(r.encoder.m) + ',' + to_string(r.criterion) + ',' + real17(r.snr_db) +
           ',' + zeta_text(r.zeta_db) + ',' + std::to_string(r.bits) + ',' +
           std::to_string(r.errors) + ',' + real17(r.ber) + ',' + real17(r.avg_nodes) + ',' +
           real17(r.avg_mults) + ',' + real17(r.avg_adds) + ',' + real17(r.metric_mean) + ',' +
           real17(r.metric_std) + ',' + std::to_string(r.seed) + '\n';
  }
  return out;
}

std::string report_json(const SimReport& report) {
  json j;
  j["config"] = json::parse(config_to_json_text(report.config));
  j["rows"] = json::array();
  for (const SimRow& r : report.rows) j["rows"].push_back(row_to_json(r));
  // Doubles are written in shortest round-trip form, so parsing is bit-exact.
  return j.dump(2);
}

SimReport report_from_json(const std::string& text) {
  try {
    const json j = json::parse(text);
    SimReport report;
    report.config = config_from_json_text(j.at("config").dump());
    for (const json& r : j.at("rows")) report.rows.push_back(row_from_json(r));
    return report;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("report parse error: ") + e.what());
  }
}

void emit_report(const SimReport& report, ReportFormat format, const std::filesystem::path& path) {
  const std::string text = format == ReportFormat::Csv ? report_csv(report) : report_json(report);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoError, "cannot open " + path.string() + " for writing");
  out << text;
  out.flush();
  if (!out) throw Error(ErrorKind::IoError, "write failed for " + path.string());
}

}  // namespace vp
