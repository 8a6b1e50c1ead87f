#include "ralm/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>

#include "ralm/errors.hpp"

namespace ralm {

void Scenario::validate() const {
  cabin.validate();
  grid.validate();
  if (grid.bounds.x_min != cabin.x_min || grid.bounds.x_max != cabin.x_max ||
      grid.bounds.y_min != cabin.y_min || grid.bounds.y_max != cabin.y_max) {
    throw std::invalid_argument("grid bounds must equal the cabin bounds");
  }
  error_model.validate();
  conditions.validate();
  observation.validate();
  if (samples < 1) throw std::invalid_argument("samples must be >= 1");
  if (source != "uniform" && source != "boarding") {
    throw std::invalid_argument("source must be 'uniform' or 'boarding'");
  }
  if (anchors.empty()) throw std::invalid_argument("at least one anchor required");
  std::set<int> ids;
  for (const auto& a : anchors) {
    if (a.id < 0) throw std::invalid_argument("anchor ids must be non-negative");
    if (!ids.insert(a.id).second) {
      throw std::invalid_argument("duplicate anchor id " + std::to_string(a.id));
    }
    if (!cabin.contains(a.position)) {
      throw std::invalid_argument("anchor " + std::to_string(a.id) + " outside cabin bounds");
    }
  }
}

namespace {

using nlohmann::json;

double jnum(const json& j, const char* key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw DataError(std::string("scenario: '") + key + "' must be a number");
  return j.at(key).get<double>();
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (const auto& [key, value] : j.items()) {
    if (!allowed.count(key)) {
      throw DataError("scenario: unknown key '" + key + "' in " + where);
    }
  }
}

}  // namespace

Scenario scenario_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw DataError("scenario: top level must be an object");
  reject_unknown(j,
                 {"cabin", "anchors", "grid", "error_model", "conditions", "observation",
                  "samples", "seed", "source"},
                 "top level");
  Scenario s;
  if (j.contains("cabin")) {
    const json& c = j.at("cabin");
    reject_unknown(c, {"x_min", "x_max", "y_min", "y_max"}, "cabin");
    s.cabin.x_min = jnum(c, "x_min", 0.0);
    s.cabin.x_max = jnum(c, "x_max", 30.0);
    s.cabin.y_min = jnum(c, "y_min", 0.0);
    s.cabin.y_max = jnum(c, "y_max", 3.5);
  }
  if (j.contains("anchors")) {
    if (!j.at("anchors").is_array()) throw DataError("scenario: 'anchors' must be an array");
    s.anchors.clear();
    for (const json& a : j.at("anchors")) {
      reject_unknown(a, {"id", "x", "y"}, "anchor");
      if (!a.contains("id") || !a.contains("x") || !a.contains("y")) {
        throw DataError("scenario: each anchor needs id, x, y");
      }
      s.anchors.push_back({a.at("id").get<int>(), {a.at("x").get<double>(), a.at("y").get<double>()}});
    }
  } else {
    s.anchors = default_anchors(s.cabin);
  }
  s.grid.bounds = s.cabin;
  if (j.contains("grid")) {
    const json& g = j.at("grid");
    reject_unknown(g, {"rows", "cols"}, "grid");
    s.grid.rows = static_cast<int>(jnum(g, "rows", 62));
    s.grid.cols = static_cast<int>(jnum(g, "cols", 62));
  }
  if (j.contains("error_model")) {
    const json& e = j.at("error_model");
    reject_unknown(e, {"sigma_r_los", "sigma_theta_los", "nlos_mu", "nlos_sigma"}, "error_model");
    s.error_model.sigma_r_los = jnum(e, "sigma_r_los", s.error_model.sigma_r_los);
    s.error_model.sigma_theta_los = jnum(e, "sigma_theta_los", s.error_model.sigma_theta_los);
    s.error_model.nlos_mu = jnum(e, "nlos_mu", s.error_model.nlos_mu);
    s.error_model.nlos_sigma = jnum(e, "nlos_sigma", s.error_model.nlos_sigma);
  }
  if (j.contains("conditions")) {
    const json& c = j.at("conditions");
    reject_unknown(c, {"p_los", "p_nlos", "p_outlier", "p_failure"}, "conditions");
    s.conditions.p_los = jnum(c, "p_los", s.conditions.p_los);
    s.conditions.p_nlos = jnum(c, "p_nlos", s.conditions.p_nlos);
    s.conditions.p_outlier = jnum(c, "p_outlier", s.conditions.p_outlier);
    s.conditions.p_failure = jnum(c, "p_failure", s.conditions.p_failure);
  }
  if (j.contains("observation")) {
    const json& o = j.at("observation");
    reject_unknown(o, {"sigma_r", "sigma_theta"}, "observation");
    s.observation.sigma_r = jnum(o, "sigma_r", s.observation.sigma_r);
    s.observation.sigma_theta = jnum(o, "sigma_theta", s.observation.sigma_theta);
  }
  s.samples = static_cast<int>(jnum(j, "samples", s.samples));
  s.seed = static_cast<uint64_t>(jnum(j, "seed", static_cast<double>(s.seed)));
  if (j.contains("source")) s.source = j.at("source").get<std::string>();
  try {
    s.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("scenario: ") + e.what());
  }
  return s;
}

nlohmann::json scenario_to_json(const Scenario& s) {
  json anchors = json::array();
  for (const auto& a : s.anchors) {
    anchors.push_back({{"id", a.id}, {"x", a.position.x}, {"y", a.position.y}});
  }
  return json{
      {"cabin",
       {{"x_min", s.cabin.x_min}, {"x_max", s.cabin.x_max}, {"y_min", s.cabin.y_min}, {"y_max", s.cabin.y_max}}},
      {"anchors", anchors},
      {"grid", {{"rows", s.grid.rows}, {"cols", s.grid.cols}}},
      {"error_model",
       {{"sigma_r_los", s.error_model.sigma_r_los},
        {"sigma_theta_los", s.error_model.sigma_theta_los},
        {"nlos_mu", s.error_model.nlos_mu},
        {"nlos_sigma", s.error_model.nlos_sigma}}},
      {"conditions",
       {{"p_los", s.conditions.p_los},
        {"p_nlos", s.conditions.p_nlos},
        {"p_outlier", s.conditions.p_outlier},
        {"p_failure", s.conditions.p_failure}}},
      {"observation",
       {{"sigma_r", s.observation.sigma_r}, {"sigma_theta", s.observation.sigma_theta}}},
      {"samples", s.samples},
      {"seed", s.seed},
      {"source", s.source},
  };
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open scenario file: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw DataError("scenario parse error in " + path + ": " + e.what());
  }
  return scenario_from_json(j);
}

std::string scenario_digest(const Scenario& s) {
  const std::string dump = scenario_to_json(s).dump();
  uint64_t h = 0xcbf29ce484222325ull;  // FNV-1a 64
  for (unsigned char c : dump) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

SimulationResult simulate_scenario(const Scenario& s) {
  s.validate();

  std::vector<Anchor> anchors = s.anchors;
  std::sort(anchors.begin(), anchors.end(),
            [](const Anchor& a, const Anchor& b) { return a.id < b.id; });

  std::vector<TagState> states;
  if (s.source == "uniform") {
    states = sample_uniform_positions(s.cabin, s.samples, s.seed);
  } else {
    states = generate_boarding_walk(s.cabin, 148, 0.5, s.seed);
    if (static_cast<int>(states.size()) < s.samples) {
      throw DataError("boarding walk produced only " + std::to_string(states.size()) +
                      " states, scenario asks for " + std::to_string(s.samples));
    }
    states.resize(s.samples);
  }

  SimulationResult out;
  out.positions.reserve(states.size());
  out.measurements.reserve(states.size());
  for (size_t i = 0; i < states.size(); ++i) {
    out.positions.push_back(states[i].position);
    std::vector<Measurement> row;
    row.reserve(anchors.size());
    for (size_t k = 0; k < anchors.size(); ++k) {
      RngStream rng(s.seed, RngPurpose::kMeasurements,
                    (static_cast<uint64_t>(i) << 16) | k);
      row.push_back(simulate_measurement(states[i].position, anchors[k], s.conditions,
                                         s.error_model, rng));
    }
    out.measurements.push_back(std::move(row));
  }
  return out;
}

std::vector<SampleTensor> build_sample_tensors(const SimulationResult& sim,
                                               const Scenario& s) {
  const KnownTerms known = precompute_known_terms(s.grid, s.anchors);
  std::vector<SampleTensor> tensors;
  tensors.reserve(sim.positions.size());
  for (size_t i = 0; i < sim.positions.size(); ++i) {
    tensors.push_back(stack_sample(sim.measurements[i], known, s.observation, sim.positions[i]));
  }
  return tensors;
}

}  // namespace ralm
