#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "json_real.hpp"
#include "vp/sim.hpp"

namespace vp {

namespace {

using nlohmann::json;

EncoderKind parse_kind(std::string_view name) {
  if (name == "lzf") return EncoderKind::LZF;
  if (name == "lmmse") return EncoderKind::LMMSE;
  if (name == "thp") return EncoderKind::THP;
  if (name == "exhaustive") return EncoderKind::Exhaustive;
  if (name == "se" || name == "sphere") return EncoderKind::Sphere;
  if (name == "qrdm") return EncoderKind::QRDM;
  if (name == "fse") return EncoderKind::FSE;
  throw Error(ErrorKind::ConfigInvalid, "unknown encoder '" + std::string(name) + "'");
}

std::size_t parse_count(std::string_view key, std::string_view value) {
  std::size_t out = 0;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(std::string(value), &used);
    if (used != value.size()) throw std::invalid_argument("trailing");
    out = static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigInvalid,
                "bad value '" + std::string(value) + "' for " + std::string(key));
  }
  return out;
}

Criterion parse_criterion(const std::string& s) {
  if (s == "ZF" || s == "zf") return Criterion::ZF;
  if (s == "MMSE" || s == "mmse") return Criterion::MMSE;
  throw Error(ErrorKind::ConfigInvalid, "criterion must be ZF or MMSE");
}

}  // namespace

std::string EncoderSpec::label() const {
  std::string out = to_string(kind);
  if (is_linear()) return out;
  if (kind == EncoderKind::FSE) out += "-p" + std::to_string(p);
  if (kind == EncoderKind::QRDM) out += "-M" + std::to_string(m);
  out += "-T" + std::to_string(t);
  if (use_precompute) out += "-pre";
  if (compare_before_square) out += "-cbs";
  return out;
}

EncoderSpec parse_encoder_spec(std::string_view text) {
  const std::size_t colon = text.find(':');
  EncoderSpec spec;
  spec.kind = parse_kind(text.substr(0, colon));
  bool have_t = false;
  bool have_m = false;
  bool have_p = false;
  if (colon != std::string_view::npos) {
    std::string_view rest = text.substr(colon + 1);
    while (!rest.empty()) {
      const std::size_t comma = rest.find(',');
      const std::string_view item = rest.substr(0, comma);
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
      const std::size_t eq = item.find('=');
      if (eq == std::string_view::npos) {
        throw Error(ErrorKind::ConfigInvalid, "expected key=value in '" + std::string(item) + "'");
      }
      const std::string_view key = item.substr(0, eq);
      const std::string_view value = item.substr(eq + 1);
      if (key == "T") {
        spec.t = parse_count(key, value);
        have_t = true;
      } else if (key == "p") {
        spec.p = parse_count(key, value);
        have_p = true;
      } else if (key == "M") {
        spec.m = parse_count(key, value);
        have_m = true;
      } else if (key == "precompute") {
        spec.use_precompute = parse_count(key, value) != 0;
      } else if (key == "cbs") {
        spec.compare_before_square = parse_count(key, value) != 0;
      } else {
        throw Error(ErrorKind::ConfigInvalid, "unknown encoder key '" + std::string(key) + "'");
      }
    }
  }
  if (spec.is_linear()) {
    spec.t = 0;
    return spec;
  }
  if (spec.kind == EncoderKind::FSE && !have_p) spec.p = 1;
  if (!have_t) spec.t = (spec.kind == EncoderKind::FSE && spec.p >= 2) ? 3 : 9;
  if (spec.kind == EncoderKind::QRDM && !have_m) spec.m = spec.t;
  return spec;
}

void SimConfig::validate() const {
  auto fail = [](const std::string& msg) { throw Error(ErrorKind::ConfigInvalid, msg); };
  if (n_antennas < 1) fail("n_antennas must be >= 1");
  if (encoders.empty()) fail("at least one encoder is required");
  if (snr_db_list.empty()) fail("snr list must be nonempty");
  for (std::size_t i = 0; i < snr_db_list.size(); ++i) {
    if (std::isnan(snr_db_list[i]) || snr_db_list[i] == -std::numeric_limits<double>::infinity()) {
      fail("snr values must be numbers or +inf");
    }
    if (i > 0 && !(snr_db_list[i] > snr_db_list[i - 1])) fail("snr list must be ascending");
  }
  if (max_vectors < 1) fail("max_vectors must be >= 1");
  if (n_f < 1) fail("n_f must be >= 1");
  if (zeta_db && std::isnan(*zeta_db)) fail("zeta_db must be a number");
  if (p_total < 0.0 || !std::isfinite(p_total)) fail("p_total must be >= 0");
  for (const EncoderSpec& e : encoders) {
    if (e.is_linear()) continue;
    if (e.t < 3 || e.t % 2 == 0) fail(e.label() + ": T must be odd and >= 3");
    if (e.t > 255) fail(e.label() + ": T too large");
    if (e.kind == EncoderKind::FSE && (e.p < 1 || e.p > real_dim())) {
      fail(e.label() + ": p must satisfy 1 <= p <= K");
    }
    if (e.kind == EncoderKind::QRDM && e.m < 1) fail(e.label() + ": M must be >= 1");
    if (e.use_precompute && e.kind != EncoderKind::FSE) {
      fail(e.label() + ": pre-computation applies to FSE only");
    }
  }
}

SimConfig config_from_json_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorKind::ConfigInvalid, "config must be a JSON object");

  SimConfig cfg;
  try {
    for (auto it = j.begin(); it != j.end(); ++it) {
      const std::string& key = it.key();
      const json& v = it.value();
      if (key == "n_antennas") {
        cfg.n_antennas = v.get<std::size_t>();
      } else if (key == "encoders") {
        for (const json& e : v) cfg.encoders.push_back(parse_encoder_spec(e.get<std::string>()));
      } else if (key == "snr_db") {
        cfg.snr_db_list.clear();
        for (const json& x : v) cfg.snr_db_list.push_back(detail::real_from_json(x));
      } else if (key == "target_min_bit_errors") {
        cfg.target_min_bit_errors = v.get<std::uint64_t>();
      } else if (key == "max_vectors") {
        cfg.max_vectors = v.get<std::uint64_t>();
      } else if (key == "seed") {
        cfg.seed = v.get<std::uint64_t>();
      } else if (key == "zeta_db") {
        if (v.is_null() || (v.is_string() && v.get<std::string>() == "inf")) {
          cfg.zeta_db.reset();
        } else {
          cfg.zeta_db = v.get<double>();
        }
      } else if (key == "n_f") {
        cfg.n_f = v.get<std::size_t>();
      } else if (key == "criterion") {
        cfg.criterion = parse_criterion(v.get<std::string>());
      } else if (key == "p_total") {
        cfg.p_total = v.get<double>();
      } else {
        throw Error(ErrorKind::ConfigInvalid, "unknown config key '" + key + "'");
      }
    }
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ConfigInvalid, std::string("config type error: ") + e.what());
  }
  return cfg;
}

std::string config_to_json_text(const SimConfig& cfg) {
  json j;
  j["n_antennas"] = cfg.n_antennas;
  j["encoders"] = json::array();
  for (const EncoderSpec& e : cfg.encoders) {
    std::string s = to_string(e.kind);
    if (!e.is_linear()) {
      s += ":T=" + std::to_string(e.t);
      if (e.kind == EncoderKind::FSE) s += ",p=" + std::to_string(e.p);
      if (e.kind == EncoderKind::QRDM) s += ",M=" + std::to_string(e.m);
      if (e.use_precompute) s += ",precompute=1";
      if (e.compare_before_square) s += ",cbs=1";
    }
    j["encoders"].push_back(s);
  }
  j["snr_db"] = json::array();
  for (double x : cfg.snr_db_list) j["snr_db"].push_back(detail::real_to_json(x));
  j["target_min_bit_errors"] = cfg.target_min_bit_errors;
  j["max_vectors"] = cfg.max_vectors;
  j["seed"] = cfg.seed;
  j["zeta_db"] = cfg.zeta_db ? json(*cfg.zeta_db) : json(nullptr);
  j["n_f"] = cfg.n_f;
  j["criterion"] = to_string(cfg.criterion);
  j["p_total"] = cfg.p_total;
  return j.dump(2);
}

SimConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::IoError, "cannot open config " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return config_from_json_text(buf.str());
}

}  // namespace vp
