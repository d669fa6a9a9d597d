#include "heterovol/params_io.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

#include "heterovol/error.hpp"

namespace heterovol {

namespace {

using nlohmann::json;

const std::set<std::string>& full_keys() {
  static const std::set<std::string> k{"mu",       "tau_Y",    "tau_Z",  "y_inf",
                                       "z_inf",    "y0",       "z0",     "sigma2_Y",
                                       "sigma2_Z", "rho_XY",   "rho_XZ", "rho_YZ",
                                       "t0"};
  return k;
}

double number(const json& doc, const std::string& key) {
  const auto it = doc.find(key);
  if (it == doc.end()) {
    throw Error(ErrorCode::ParseError, "missing field '" + key + "'");
  }
  if (!it->is_number()) {
    throw Error(ErrorCode::ParseError, "field '" + key + "' is not a number");
  }
  return it->get<double>();
}

void reject_unknown(const json& doc, const std::set<std::string>& allowed) {
  for (const auto& item : doc.items()) {
    if (allowed.count(item.key()) == 0) {
      throw Error(ErrorCode::ParseError, "unknown field '" + item.key() + "'");
    }
  }
}

ReducedParams parse_reduced(const json& doc) {
  const auto& names = ReducedParams::names();
  reject_unknown(doc, std::set<std::string>(names.begin(), names.end()));
  std::array<double, ReducedParams::kSize> v{};
  for (std::size_t i = 0; i < v.size(); ++i) {
    v[i] = number(doc, names[i]);
  }
  return validate(ReducedParams::from_array(v));
}

FullParams parse_full(const json& doc) {
  reject_unknown(doc, full_keys());
  FullParams p;
  p.mu = number(doc, "mu");
  p.tau_Y = number(doc, "tau_Y");
  p.tau_Z = number(doc, "tau_Z");
  p.y_inf = number(doc, "y_inf");
  p.z_inf = number(doc, "z_inf");
  p.y0 = number(doc, "y0");
  p.z0 = number(doc, "z0");
  p.sigma2_Y = number(doc, "sigma2_Y");
  p.sigma2_Z = number(doc, "sigma2_Z");
  p.rho_XY = number(doc, "rho_XY");
  p.rho_XZ = number(doc, "rho_XZ");
  p.rho_YZ = number(doc, "rho_YZ");
  if (const auto it = doc.find("t0"); it != doc.end() && !it->is_null()) {
    p.t0 = number(doc, "t0");
  }
  return validate(p);
}

}  // namespace

AnyParams parse_params(const std::string& json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  if (!doc.is_object()) {
    throw Error(ErrorCode::ParseError, "parameter document must be a JSON object");
  }
  if (doc.contains("nu")) {
    return parse_reduced(doc);
  }
  return parse_full(doc);
}

AnyParams load_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_params(ss.str());
}

FullParams load_full_params(const std::filesystem::path& path) {
  const AnyParams any = load_params(path);
  if (const auto* r = std::get_if<ReducedParams>(&any)) {
    return expand(*r);
  }
  return std::get<FullParams>(any);
}

std::string to_json(const FullParams& p) {
  json doc = {{"mu", p.mu},           {"tau_Y", p.tau_Y},       {"tau_Z", p.tau_Z},
              {"y_inf", p.y_inf},     {"z_inf", p.z_inf},       {"y0", p.y0},
              {"z0", p.z0},           {"sigma2_Y", p.sigma2_Y}, {"sigma2_Z", p.sigma2_Z},
              {"rho_XY", p.rho_XY},   {"rho_XZ", p.rho_XZ},     {"rho_YZ", p.rho_YZ}};
  doc["t0"] = p.t0 ? json(*p.t0) : json(nullptr);
  return doc.dump(2);
}

std::string to_json(const ReducedParams& p) {
  json doc = json::object();
  const auto values = p.to_array();
  const auto& names = ReducedParams::names();
  for (std::size_t i = 0; i < values.size(); ++i) {
    doc[names[i]] = values[i];
  }
  return doc.dump(2);
}

}  // namespace heterovol
