#pragma once

// File formats: model JSON, samples CSV, estimate and interval JSON, the rate
// table CSV, and run manifests. Writes go through a temp file and rename.

#include <openssl/evp.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "hermix/errors.hpp"
#include "hermix/estimator.hpp"
#include "hermix/intervals.hpp"
#include "hermix/lowerbound.hpp"
#include "hermix/mixture.hpp"

namespace hermix {

using Json = nlohmann::ordered_json;

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path + ": " + std::strerror(errno));
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) fail(ErrorCode::Io, "read failed: " + path);
  return ss.str();
}

/// Writes via `path.tmp` then renames, so readers never see a partial file.
inline void write_file_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) fail(ErrorCode::Io, "cannot create " + tmp + ": " + std::strerror(errno));
    out << content;
    out.flush();
    if (!out) fail(ErrorCode::Io, "write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    fail(ErrorCode::Io, "cannot rename onto " + path);
  }
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), md, &len, EVP_sha256(), nullptr) != 1)
    fail(ErrorCode::Io, "SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

// ---- model JSON ----

namespace detail {

inline void require_keys(const Json& j, std::set<std::string> keys, const std::string& where) {
  if (!j.is_object()) fail(ErrorCode::SchemaViolation, where + " must be an object");
  for (const auto& [k, v] : j.items())
    if (!keys.erase(k)) fail(ErrorCode::SchemaViolation, where + " has unexpected key \"" + k + "\"");
  if (!keys.empty()) fail(ErrorCode::SchemaViolation, where + " is missing key \"" + *keys.begin() + "\"");
}

inline std::vector<double> numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) fail(ErrorCode::SchemaViolation, where + " must be an array of numbers");
  std::vector<double> out;
  for (const auto& v : j) {
    if (!v.is_number()) fail(ErrorCode::SchemaViolation, where + " must contain only numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

inline IntervalGaussian parse_component(const Json& j, const std::string& where) {
  require_keys(j, {"interval", "mixing"}, where);
  const auto iv = numbers(j["interval"], where + ".interval");
  if (iv.size() != 2) fail(ErrorCode::SchemaViolation, where + ".interval must have two entries");
  const Json& mx = j["mixing"];
  if (!mx.is_object() || !mx.contains("type") || !mx["type"].is_string())
    fail(ErrorCode::SchemaViolation, where + ".mixing needs a string \"type\"");
  const std::string type = mx["type"].get<std::string>();
  IntervalGaussian c;
  c.lo = iv[0];
  c.hi = iv[1];
  if (type == "atoms") {
    require_keys(mx, {"type", "locations", "masses"}, where + ".mixing");
    const auto loc = numbers(mx["locations"], where + ".mixing.locations");
    const auto mass = numbers(mx["masses"], where + ".mixing.masses");
    if (loc.size() != mass.size())
      fail(ErrorCode::SchemaViolation, where + ".mixing locations and masses differ in length");
    std::vector<Atom> atoms;
    for (std::size_t k = 0; k < loc.size(); ++k) atoms.push_back({loc[k], mass[k]});
    c.nu = MixingDensity::atoms(std::move(atoms));
  } else if (type == "piecewise") {
    require_keys(mx, {"type", "pieces"}, where + ".mixing");
    if (!mx["pieces"].is_array()) fail(ErrorCode::SchemaViolation, where + ".mixing.pieces must be an array");
    std::vector<Piece> pieces;
    for (const auto& p : mx["pieces"]) {
      const auto v = numbers(p, where + ".mixing.pieces[]");
      if (v.size() != 3) fail(ErrorCode::SchemaViolation, where + ".mixing.pieces entries are [lo,hi,density]");
      pieces.push_back({v[0], v[1], v[2]});
    }
    c.nu = MixingDensity::piecewise(std::move(pieces));
  } else {
    fail(ErrorCode::SchemaViolation, where + ".mixing.type must be \"atoms\" or \"piecewise\"");
  }
  return c;
}

}  // namespace detail

/// Parses and validates a model; every failure is a SchemaViolation.
inline TwoComponentMixture parse_model(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const std::exception& e) {
    fail(ErrorCode::SchemaViolation, std::string("model is not valid JSON: ") + e.what());
  }
  detail::require_keys(j, {"weights", "components"}, "model");
  const auto w = detail::numbers(j["weights"], "weights");
  if (w.size() != 2) fail(ErrorCode::SchemaViolation, "weights must have two entries");
  if (!j["components"].is_array() || j["components"].size() != 2)
    fail(ErrorCode::SchemaViolation, "components must be an array of two entries");
  TwoComponentMixture m;
  m.w1 = w[0];
  m.w2 = w[1];
  m.comp1 = detail::parse_component(j["components"][0], "components[0]");
  m.comp2 = detail::parse_component(j["components"][1], "components[1]");
  m.validate();
  return m;
}

inline TwoComponentMixture load_model(const std::string& path) { return parse_model(read_file(path)); }

// ---- samples CSV ----

inline std::string samples_to_csv(std::span<const double> values) {
  std::string out = "x\n";
  out.reserve(values.size() * 24 + 2);
  for (double v : values) {
    out += format_double(v);
    out += '\n';
  }
  return out;
}

inline std::vector<double> parse_samples_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) fail(ErrorCode::SchemaViolation, "samples file is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "x") fail(ErrorCode::SchemaViolation, "samples CSV header must be \"x\"");
  std::vector<double> out;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    char* end = nullptr;
    const double v = std::strtod(line.c_str(), &end);
    if (end == line.c_str() || *end != '\0' || !std::isfinite(v))
      fail(ErrorCode::SchemaViolation, "samples CSV line " + std::to_string(lineno) + " is not a finite number");
    out.push_back(v);
  }
  return out;
}

// ---- estimate / intervals JSON ----

inline Json number_list(std::span<const double> v) {
  Json a = Json::array();
  for (double x : v) a.push_back(x);
  return a;
}

/// Doubles are emitted by nlohmann's shortest round-trip form, which is lossless.
inline Json estimate_to_json(const ComponentEstimate& est, double dx = 0.01) {
  Json j;
  j["ell"] = est.ell;
  j["centers"] = {est.centers[0], est.centers[1]};
  Json lam = Json::array();
  Json lam_exact = Json::array();
  for (const auto& v : est.lambda_hat) {
    lam.push_back(v.to_double());
    lam_exact.push_back(v.to_string());
  }
  j["lambda_hat"] = lam;
  j["lambda_hat_decimal"] = lam_exact;
  j["precision_bits"] = est.lambda_hat.empty() ? 256u : est.lambda_hat[0].precision();
  j["w_hat"] = {est.w_hat[0], est.w_hat[1]};
  const double x0 = std::min(est.centers[0], est.centers[1]) - 8.0;
  const double x1 = std::max(est.centers[0], est.centers[1]) + 8.0;
  const auto count = static_cast<std::size_t>(std::llround((x1 - x0) / dx)) + 1;
  std::vector<double> f1(count), f2(count);
  for (std::size_t k = 0; k < count; ++k) {
    const double x = x0 + dx * static_cast<double>(k);
    f1[k] = est.f_hat(0, x);
    f2[k] = est.f_hat(1, x);
  }
  j["pdf_grid"] = {{"x0", x0}, {"dx", dx}, {"f1", number_list(f1)}, {"f2", number_list(f2)}};
  return j;
}

/// Rebuilds the estimate from lambda_hat (decimal strings when present).
inline ComponentEstimate estimate_from_json(const Json& j) {
  try {
    const unsigned ell = j.at("ell").get<unsigned>();
    const double r1 = j.at("centers").at(0).get<double>();
    const double r2 = j.at("centers").at(1).get<double>();
    const unsigned bits = j.value("precision_bits", 256u);
    if (bits < 53 || bits > 1u << 20) fail(ErrorCode::SchemaViolation, "estimate JSON: bad precision_bits");
    BigVector lam;
    if (j.contains("lambda_hat_decimal")) {
      for (const auto& s : j["lambda_hat_decimal"]) lam.push_back(BigReal::from_string(s.get<std::string>(), bits));
    } else {
      for (const auto& v : j.at("lambda_hat")) lam.emplace_back(v.get<double>(), bits);
    }
    return finalize(lam, r1, r2, ell);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::SchemaViolation, std::string("estimate JSON: ") + e.what());
  }
}

inline Json intervals_to_json(const IntervalPair& p) {
  Json j;
  j["i1"] = {p.i1.lo, p.i1.hi};
  j["i2"] = {p.i2.lo, p.i2.hi};
  j["scale_index"] = p.j_star;
  j["t"] = p.t;
  j["q_points"] = number_list(p.grid_points);
  return j;
}

inline std::string dump(const Json& j) { return j.dump(2) + "\n"; }

// ---- hard instance / rates ----

inline std::string hard_instance_to_json(const HardInstance& h) {
  Json j;
  j["delta"] = h.delta;
  j["m"] = h.m;
  j["precision_bits"] = h.bits;
  Json a = Json::array();
  for (const auto& v : h.alpha) a.push_back(v.to_string(40));
  j["alpha"] = a;
  j["c_plus"] = h.c_plus.to_string(40);
  j["c_minus"] = h.c_minus.to_string(40);
  j["balance_weight"] = h.balance_weight.to_string(40);
  j["f"] = Json::parse(model_to_json_text(h.f));
  j["f_prime"] = Json::parse(model_to_json_text(h.f_prime));
  return dump(j);
}

inline std::string rates_to_csv(const std::vector<RateRow>& rows) {
  std::string out = "delta,m,beta,c_plus,c_minus,balance_error,l2_total,l2_comp,l1_total,l1_comp\n";
  for (const auto& r : rows) {
    out += format_double(r.delta) + "," + std::to_string(r.m) + "," + format_double(r.beta) + "," +
           format_double(r.c_plus) + "," + format_double(r.c_minus) + "," + format_double(r.balance_error) + "," +
           format_double(r.l2_total) + "," + format_double(r.l2_comp) + "," + format_double(r.l1_total) + "," +
           format_double(r.l1_comp) + "\n";
  }
  return out;
}

// ---- manifest ----

struct RunManifest {
  std::string command;
  std::vector<std::pair<std::string, std::string>> args;
  std::uint64_t seed = 0;
  std::string tool_version;
  std::vector<std::pair<std::string, std::string>> input_digests;   // path, sha256
  std::vector<std::pair<std::string, std::string>> output_digests;  // path, sha256
  Json extra = Json::object();

  std::string to_json() const {
    Json j;
    j["command"] = command;
    Json a = Json::object();
    for (const auto& [k, v] : args) a[k] = v;
    j["args"] = a;
    j["seed"] = seed;
    j["tool_version"] = tool_version;
    Json in = Json::object();
    for (const auto& [k, v] : input_digests) in[k] = v;
    j["input_digests"] = in;
    Json out = Json::object();
    for (const auto& [k, v] : output_digests) out[k] = v;
    j["output_digests"] = out;
    if (!extra.empty()) j["extra"] = extra;
    return dump(j);
  }
};

}  // namespace hermix
