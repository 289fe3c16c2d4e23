// SPDX-License-Identifier: Apache-2.0
#include "aircomp/scenario.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "aircomp/rng.hpp"
#include "json.hpp"

namespace aircomp {

using nlohmann::json;

int PhysParams::num_slots() const {
  if (delta <= 0.0) throw std::invalid_argument("slot duration must be positive");
  const double ratio = duration / delta;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > 1e-9 || rounded < 1.0)
    throw std::invalid_argument("mission duration is not an integer number of slots");
  return static_cast<int>(rounded);
}

int Scenario::num_devices() const {
  int k = 0;
  for (const auto& c : clusters) k += static_cast<int>(c.devices.size());
  return k;
}

int Scenario::device_offset(int l) const {
  int k = 0;
  for (int i = 0; i < l; ++i) k += static_cast<int>(clusters[i].devices.size());
  return k;
}

int Scenario::cluster_of_device(int k) const {
  for (int l = 0; l < num_clusters(); ++l) {
    k -= static_cast<int>(clusters[l].devices.size());
    if (k < 0) return l;
  }
  throw std::out_of_range("device index out of range");
}

const DeviceSpec& Scenario::device(int k) const {
  for (const auto& c : clusters) {
    if (k < static_cast<int>(c.devices.size())) return c.devices[k];
    k -= static_cast<int>(c.devices.size());
  }
  throw std::out_of_range("device index out of range");
}

double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }

std::vector<std::string> validate(const Scenario& s) {
  std::vector<std::string> out;
  const auto& p = s.phys;
  if (!(p.beta0 > 0.0)) out.push_back("phys.beta0 must be positive");
  if (!(p.gamma >= 2.0)) out.push_back("phys.gamma must be >= 2");
  if (!(p.sigma2 > 0.0)) out.push_back("phys.sigma2 must be positive");
  if (!(p.altitude > 0.0)) out.push_back("phys.H must be positive");
  if (!(p.vmax > 0.0)) out.push_back("phys.vmax must be positive");
  if (!(p.dmin >= 0.0)) out.push_back("phys.dmin must be nonnegative");
  if (!(p.delta > 0.0)) {
    out.push_back("phys.delta must be positive");
  } else {
    const double ratio = p.duration / p.delta;
    if (std::abs(ratio - std::round(ratio)) > 1e-9 || std::round(ratio) < 1.0)
      out.push_back("phys.T must be a positive integer multiple of phys.delta");
  }
  if (s.clusters.empty()) out.push_back("scenario must have at least one cluster");
  for (int l = 0; l < s.num_clusters(); ++l) {
    const auto& c = s.clusters[l];
    const std::string tag = "cluster " + std::to_string(l + 1);
    if (c.devices.empty()) out.push_back(tag + ": device list is empty");
    if (!(c.epsilon > 0.0 && c.epsilon < 1.0))
      out.push_back(tag + ": epsilon must lie in (0, 1)");
    for (std::size_t k = 0; k < c.devices.size(); ++k) {
      if (!(c.devices[k].power_budget > 0.0))
        out.push_back(tag + ", device " + std::to_string(k + 1) +
                      ": power budget must be positive");
    }
  }
  if (s.num_uavs < 1) out.push_back("num_uavs must be at least 1");
  if (s.num_uavs > s.num_clusters())
    out.push_back("num_uavs exceeds cluster count (M <= L required)");
  return out;
}

namespace {

const Eigen::Vector2d kPaperCenters[6] = {
    {100.0, 50.0}, {200.0, 200.0}, {-100.0, 100.0},
    {-400.0, 150.0}, {-200.0, -200.0}, {-250.0, -100.0}};

std::vector<DeviceSpec> draw_cluster_devices(Rng& rng, const Eigen::Vector2d& center,
                                             int count, double radius, double budget) {
  std::vector<DeviceSpec> devices(count);
  for (auto& d : devices) {
    // Area-uniform placement in the disc.
    const double r = radius * std::sqrt(rng.uniform());
    const double a = 2.0 * M_PI * rng.uniform();
    d.position = center + Eigen::Vector2d(r * std::cos(a), r * std::sin(a));
    d.power_budget = budget;
  }
  return devices;
}

Scenario generate_disc_scenario(double duration_s, int num_uavs, double budget,
                                std::uint64_t seed, int num_clusters,
                                int devices_per_cluster, double epsilon) {
  Scenario s;
  s.phys.beta0 = db_to_linear(-50.0);
  s.phys.gamma = 2.0;
  s.phys.sigma2 = dbm_to_watts(-80.0);
  s.phys.altitude = 100.0;
  s.phys.vmax = 30.0;
  s.phys.dmin = 100.0;
  s.phys.delta = 0.5;
  s.phys.duration = duration_s;
  s.phys.num_slots();  // rejects T not a multiple of delta
  s.num_uavs = num_uavs;
  s.rng_seed = seed;
  Rng rng(seed);
  for (int l = 0; l < num_clusters; ++l) {
    Cluster c;
    c.id = l + 1;
    c.epsilon = epsilon;
    c.devices = draw_cluster_devices(rng, kPaperCenters[l], devices_per_cluster,
                                     50.0, budget);
    s.clusters.push_back(std::move(c));
  }
  return s;
}

}  // namespace

Scenario generate_paper_scenario(double duration_s, int num_uavs,
                                 double power_budget_w, std::uint64_t seed) {
  return generate_disc_scenario(duration_s, num_uavs, power_budget_w, seed, 6, 20,
                                2e-3);
}

Scenario generate_desk_scenario(double duration_s, int num_uavs,
                                double power_budget_w, std::uint64_t seed) {
  return generate_disc_scenario(duration_s, num_uavs, power_budget_w, seed, 3, 5,
                                0.03);
}

namespace {

std::string normalize_minus(std::string v) {
  // Accept the typographic minus sign in suffixed strings.
  const std::string uminus = "\xe2\x88\x92";
  std::size_t pos;
  while ((pos = v.find(uminus)) != std::string::npos) v.replace(pos, uminus.size(), "-");
  return v;
}

double parse_magnitude(const json& v, const std::string& field) {
  if (v.is_number()) return v.get<double>();
  if (!v.is_string())
    throw std::runtime_error("field '" + field + "' must be a number or suffixed string");
  std::istringstream in(normalize_minus(v.get<std::string>()));
  double x = 0.0;
  std::string suffix;
  if (!(in >> x))
    throw std::runtime_error("field '" + field + "': cannot parse numeric value");
  in >> suffix;
  if (suffix == "dB") return db_to_linear(x);
  if (suffix == "dBm") return dbm_to_watts(x);
  if (suffix.empty() || suffix == "W") return x;
  throw std::runtime_error("field '" + field + "': unknown unit suffix '" + suffix + "'");
}

const json& require(const json& obj, const std::string& key, const std::string& ctx) {
  auto it = obj.find(key);
  if (it == obj.end())
    throw std::runtime_error("missing field '" + ctx + key + "'");
  return *it;
}

}  // namespace

Scenario scenario_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(std::string("scenario parse error: ") + e.what());
  }
  Scenario s;
  const json& phys = require(doc, "phys", "");
  s.phys.beta0 = parse_magnitude(require(phys, "beta0", "phys."), "phys.beta0");
  s.phys.gamma = require(phys, "gamma", "phys.").get<double>();
  s.phys.sigma2 = parse_magnitude(require(phys, "sigma2", "phys."), "phys.sigma2");
  s.phys.altitude = require(phys, "H", "phys.").get<double>();
  s.phys.vmax = require(phys, "vmax", "phys.").get<double>();
  s.phys.dmin = require(phys, "dmin", "phys.").get<double>();
  s.phys.delta = require(phys, "delta", "phys.").get<double>();
  s.phys.duration = require(phys, "T", "phys.").get<double>();
  const json& clusters = require(doc, "clusters", "");
  if (!clusters.is_array()) throw std::runtime_error("field 'clusters' must be an array");
  int l = 0;
  for (const auto& cj : clusters) {
    const std::string ctx = "clusters[" + std::to_string(l) + "].";
    Cluster c;
    c.id = cj.contains("id") ? cj["id"].get<int>() : l + 1;
    c.epsilon = require(cj, "epsilon", ctx).get<double>();
    for (const auto& dj : require(cj, "devices", ctx)) {
      DeviceSpec d;
      const auto& pos = require(dj, "position", ctx + "devices[].");
      if (!pos.is_array() || pos.size() != 2)
        throw std::runtime_error("field '" + ctx + "devices[].position' must be [x, y]");
      d.position = Eigen::Vector2d(pos[0].get<double>(), pos[1].get<double>());
      d.power_budget = require(dj, "power_budget", ctx + "devices[].").get<double>();
      c.devices.push_back(d);
    }
    s.clusters.push_back(std::move(c));
    ++l;
  }
  s.num_uavs = require(doc, "num_uavs", "").get<int>();
  s.rng_seed = require(doc, "rng_seed", "").get<std::uint64_t>();
  return s;
}

std::string scenario_to_json(const Scenario& s) {
  json doc;
  doc["phys"] = {{"beta0", s.phys.beta0},   {"gamma", s.phys.gamma},
                 {"sigma2", s.phys.sigma2}, {"H", s.phys.altitude},
                 {"vmax", s.phys.vmax},     {"dmin", s.phys.dmin},
                 {"delta", s.phys.delta},   {"T", s.phys.duration}};
  doc["clusters"] = json::array();
  for (const auto& c : s.clusters) {
    json cj;
    cj["id"] = c.id;
    cj["epsilon"] = c.epsilon;
    cj["devices"] = json::array();
    for (const auto& d : c.devices)
      cj["devices"].push_back(
          {{"position", {d.position.x(), d.position.y()}},
           {"power_budget", d.power_budget}});
    doc["clusters"].push_back(std::move(cj));
  }
  doc["num_uavs"] = s.num_uavs;
  doc["rng_seed"] = s.rng_seed;
  return doc.dump(2);
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open scenario file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return scenario_from_json(buf.str());
}

void save_scenario(const Scenario& s, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write scenario file: " + path);
  out << scenario_to_json(s) << '\n';
}

bool operator==(const PhysParams& a, const PhysParams& b) {
  return a.beta0 == b.beta0 && a.gamma == b.gamma && a.sigma2 == b.sigma2 &&
         a.altitude == b.altitude && a.vmax == b.vmax && a.dmin == b.dmin &&
         a.delta == b.delta && a.duration == b.duration;
}
bool operator==(const DeviceSpec& a, const DeviceSpec& b) {
  return a.position == b.position && a.power_budget == b.power_budget;
}
bool operator==(const Cluster& a, const Cluster& b) {
  return a.id == b.id && a.epsilon == b.epsilon && a.devices == b.devices;
}
bool operator==(const Scenario& a, const Scenario& b) {
  return a.phys == b.phys && a.clusters == b.clusters &&
         a.num_uavs == b.num_uavs && a.rng_seed == b.rng_seed;
}

}  // namespace aircomp
