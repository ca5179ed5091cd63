#include "niform/lti/model_library.hpp"

#include <fstream>
#include "json.hpp"
#include <sstream>

#include "niform/error.hpp"

namespace niform::lti {

using nlohmann::json;

std::string to_string(Vehicle v) { return v == Vehicle::uav ? "UAV" : "UGV"; }

Vehicle vehicle_from_string(const std::string& s) {
  if (s == "UAV" || s == "uav") return Vehicle::uav;
  if (s == "UGV" || s == "ugv") return Vehicle::ugv;
  throw Error("unknown vehicle kind '" + s + "'");
}

ModelLibrary::ModelLibrary(std::vector<ModelEntry> models, std::vector<Pairing> pairings)
    : models_(std::move(models)), pairings_(std::move(pairings)) {}

ModelLibrary ModelLibrary::builtin() {
  auto entry = [](std::string name, Vehicle v, std::string ch, poly::Coeffs num,
                  poly::Coeffs den) {
    return ModelEntry{name, v, ch, TransferFunction(std::move(num), std::move(den), name)};
  };
  std::vector<ModelEntry> m;
  m.push_back(entry("ugv_velx", Vehicle::ugv, "velx", {-0.043, 5.16, -1860.11, 54489.05},
                    {1, 86.155, 54490.53, 29510.63, 1481.6}));
  m.push_back(entry("ugv_vely", Vehicle::ugv, "vely", {-0.043, 4.24, -1494.74, 48347.83},
                    {1, 88.9, 54883.91, 49242.03, 1266.25}));
  m.push_back(entry("uav_velx", Vehicle::uav, "velx", {-0.0426, 6.76, -153.90, 33206.86},
                    {1, 86.15, 54490.53, 24730.20, 1161.87}));
  m.push_back(entry("uav_vely", Vehicle::uav, "vely", {-0.05, -0.52, -1144.04, 29990.15},
                    {1, 101.06, 52978.06, 23472.45, 2291.96}));
  m.push_back(entry("ugv_yaw_rate", Vehicle::ugv, "yaw_rate", {1.0}, {0.3, 1.0}));
  std::vector<Pairing> p{{"uav_velx", -0.7}, {"uav_vely", -0.7}, {"ugv_velx", -0.7},
                         {"ugv_vely", -0.7}, {"ugv_velx", -0.5}, {"ugv_vely", -0.5}};
  return ModelLibrary(std::move(m), std::move(p));
}

namespace {

poly::Coeffs coeffs(const json& j, const std::string& field) {
  if (!j.is_array() || j.empty()) throw ScenarioError(field, "expected a non-empty number array");
  poly::Coeffs out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw ScenarioError(field + "/" + std::to_string(i), "expected a number");
    out.push_back(j[i].get<double>());
  }
  return out;
}

}  // namespace

ModelLibrary ModelLibrary::parse(const std::string& json_text, const std::string& origin) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(origin, std::string("malformed JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("models") || !doc["models"].is_array())
    throw ScenarioError("/models", "missing model array");
  if (doc["models"].empty()) throw ScenarioError("/models", "model library is empty");

  std::vector<ModelEntry> models;
  for (std::size_t i = 0; i < doc["models"].size(); ++i) {
    const json& m = doc["models"][i];
    const std::string at = "/models/" + std::to_string(i);
    for (const char* key : {"name", "vehicle", "channel", "numerator", "denominator"})
      if (!m.contains(key)) throw ScenarioError(at + "/" + key, "required field missing");
    const std::string name = m["name"].get<std::string>();
    Vehicle v;
    try {
      v = vehicle_from_string(m["vehicle"].get<std::string>());
    } catch (const Error& e) {
      throw ScenarioError(at + "/vehicle", e.what());
    }
    models.push_back(ModelEntry{name, v, m["channel"].get<std::string>(),
                                TransferFunction(coeffs(m["numerator"], at + "/numerator"),
                                                 coeffs(m["denominator"], at + "/denominator"),
                                                 name)});
  }
  std::vector<Pairing> pairings;
  if (doc.contains("pairings")) {
    for (std::size_t i = 0; i < doc["pairings"].size(); ++i) {
      const json& p = doc["pairings"][i];
      const std::string at = "/pairings/" + std::to_string(i);
      if (!p.contains("plant") || !p.contains("controller_gain"))
        throw ScenarioError(at, "pairing needs plant and controller_gain");
      pairings.push_back({p["plant"].get<std::string>(), p["controller_gain"].get<double>()});
    }
  }
  ModelLibrary lib(std::move(models), std::move(pairings));
  for (std::size_t i = 0; i < lib.pairings_.size(); ++i)
    if (!lib.find(lib.pairings_[i].plant))
      throw ScenarioError("/pairings/" + std::to_string(i) + "/plant",
                          "unknown model '" + lib.pairings_[i].plant + "'");
  return lib;
}

ModelLibrary ModelLibrary::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ScenarioError(path.string(), "cannot open model library");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

const ModelEntry* ModelLibrary::find(const std::string& name) const {
  for (const auto& m : models_)
    if (m.name == name) return &m;
  return nullptr;
}

const ModelEntry& ModelLibrary::get(const std::string& name) const {
  if (const auto* m = find(name)) return *m;
  throw Error("model '" + name + "' not in library");
}

const ModelEntry& ModelLibrary::channel(Vehicle v, const std::string& ch) const {
  for (const auto& m : models_)
    if (m.vehicle == v && m.channel == ch) return m;
  throw Error("no " + to_string(v) + " model for channel '" + ch + "'");
}

}  // namespace niform::lti
