#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "niform/lti/transfer_function.hpp"

namespace niform::lti {

enum class Vehicle { ugv, uav };
std::string to_string(Vehicle v);
Vehicle vehicle_from_string(const std::string& s);

struct ModelEntry {
  std::string name;
  Vehicle vehicle;
  std::string channel;  // "velx", "vely", "yaw_rate"
  TransferFunction tf;
};

// A plant × constant-controller pairing that `verify` certifies.
struct Pairing {
  std::string plant;
  double controller_gain;
};

class ModelLibrary {
 public:
  ModelLibrary() = default;
  ModelLibrary(std::vector<ModelEntry> models, std::vector<Pairing> pairings);

  // Identified velocity-setpoint → position models plus the yaw-rate stand-in.
  static ModelLibrary builtin();
  static ModelLibrary load(const std::filesystem::path& path);
  static ModelLibrary parse(const std::string& json_text, const std::string& origin = "<string>");

  const std::vector<ModelEntry>& models() const { return models_; }
  const std::vector<Pairing>& pairings() const { return pairings_; }
  const ModelEntry* find(const std::string& name) const;
  const ModelEntry& get(const std::string& name) const;
  // Model for a vehicle/channel, e.g. (uav, "velx").
  const ModelEntry& channel(Vehicle v, const std::string& channel) const;

 private:
  std::vector<ModelEntry> models_;
  std::vector<Pairing> pairings_;
};

}  // namespace niform::lti
