#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ralm/channel.hpp"
#include "ralm/likelihood.hpp"
#include "ralm/trajectory.hpp"

namespace ralm {

// Single source of simulation truth: geometry, error models, grid, sample
// budget and the master seed. Everything downstream is a pure function of
// this plus the documented stream-derivation scheme.
struct Scenario {
  CabinSpec cabin;
  std::vector<Anchor> anchors = default_anchors();
  GridSpec grid{CabinSpec{}, 62, 62};
  ErrorModelParams error_model;
  ConditionModel conditions;
  ObservationSigmas observation;
  int samples = 500;
  uint64_t seed = 42;
  std::string source = "uniform";  // "uniform" | "boarding"

  void validate() const;
};

// JSON round-trip. Parsing validates against the documented schema and
// rejects unknown top-level keys.
Scenario scenario_from_json(const nlohmann::json& j);
nlohmann::json scenario_to_json(const Scenario& s);
Scenario load_scenario(const std::string& path);

// FNV-1a over the canonical JSON encoding; recorded in dataset headers so
// artifacts can be traced to their scenario.
std::string scenario_digest(const Scenario& s);

struct SimulationResult {
  std::vector<Point2D> positions;                     // one per sample
  std::vector<std::vector<Measurement>> measurements; // per sample, anchors ascending by id
};

// Generates positions from the configured source and one measurement per
// (sample, anchor). Measurement substreams are indexed
// (sample << 16) | anchor_ordinal, so generation order is irrelevant.
SimulationResult simulate_scenario(const Scenario& s);

// Builds the stacked network inputs for a simulation result.
std::vector<SampleTensor> build_sample_tensors(const SimulationResult& sim,
                                               const Scenario& s);

}  // namespace ralm
