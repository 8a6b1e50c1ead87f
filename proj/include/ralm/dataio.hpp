#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "ralm/eval.hpp"
#include "ralm/hpo.hpp"
#include "ralm/nn/resnet.hpp"
#include "ralm/optim.hpp"
#include "ralm/scenario.hpp"

namespace ralm::dataio {

// RALM container, version 1. Single self-describing binary file:
//
//   bytes 0..3    magic "RALM"
//   bytes 4..7    format version, u32 little-endian
//   bytes 8..15   header length, u64 little-endian
//   ...           header, UTF-8 JSON of exactly that length
//   ...           payload: concatenated raw little-endian float32 arrays
//
// The header carries {"arrays": [{name, shape, offset, nbytes}...],
// "meta": {...}} with offsets relative to the payload start. The reader
// verifies magic, version, offsets (in-bounds, non-overlapping) and that
// every nbytes equals the shape product times 4. Writes go through a
// temp-file-plus-rename so readers never observe partial files.
inline constexpr char kMagic[4] = {'R', 'A', 'L', 'M'};
inline constexpr uint32_t kFormatVersion = 1;

struct ArrayRecord {
  std::string name;
  std::vector<size_t> shape;
  std::vector<float> data;
};

struct Container {
  nlohmann::json meta;
  std::vector<ArrayRecord> arrays;

  const ArrayRecord& array(const std::string& name) const;
  bool has(const std::string& name) const;
};

void write_container(const Container& c, const std::string& path);
Container read_container(const std::string& path);

// --- measurements dataset -------------------------------------------------
// Arrays: positions [S,2]; ranges, angles, conditions [S,K]. Absent values
// are NaN; condition codes are 0 LOS, 1 NLOS, 2 Outlier, 3 Failure. The
// scenario is embedded in the header.

struct MeasurementsFile {
  Scenario scenario;
  std::vector<Point2D> positions;
  std::vector<std::vector<Measurement>> measurements;
};

void write_measurements(const SimulationResult& sim, const Scenario& s,
                        const std::string& path);
MeasurementsFile read_measurements(const std::string& path);

// --- stacked tensor dataset -------------------------------------------------
// Arrays: tensors [S,C,M,N]; targets [S,2]; valid [S,K,2]. The header
// records the channel-ordering convention, grid spec, observation sigmas,
// seed and scenario digest so consumers cannot misread the layout.

struct TensorDatasetFile {
  std::vector<SampleTensor> samples;
  nlohmann::json meta;
};

void write_tensor_dataset(const std::vector<SampleTensor>& samples,
                          const nlohmann::json& extra_meta, const std::string& path);
TensorDatasetFile read_tensor_dataset(const std::string& path);

// --- checkpoints -------------------------------------------------------------
// One array per model tensor (parameters and running stats, in visit
// order); the header embeds the model and train configs plus the step
// counter. Values cross the 32-bit file boundary, the documented precision
// limit of persisted models.

struct CheckpointFile {
  nn::ResNetConfig model_config;
  TrainConfig train_config;
  nn::ResNet::StateDict state;
  int64_t steps = 0;
  int best_epoch = -1;
  double best_val_loss = 0.0;
};

void write_checkpoint(const nn::ResNet::StateDict& state, const nn::ResNetConfig& model_cfg,
                      const TrainConfig& train_cfg, const TrainReport& report, int64_t steps,
                      const std::string& path);
CheckpointFile read_checkpoint(const std::string& path);

// Rebuilds a model from a checkpoint; shape mismatches (e.g. loading into
// different input_channels) surface as errors.
nn::ResNet restore_model(const CheckpointFile& ckpt);

nlohmann::json resnet_config_to_json(const nn::ResNetConfig& c);
nn::ResNetConfig resnet_config_from_json(const nlohmann::json& j);
nlohmann::json train_config_to_json(const TrainConfig& c);
TrainConfig train_config_from_json(const nlohmann::json& j);

// CSV emitters for the documented schemas:
//   loss curve   epoch,train_loss,val_loss,val_rmse_m
//   ecdf         error_m,fraction
//   histogram    bin_left,bin_right,count
//   trials       trial,optimizer,learning_rate,batch_size,dropout_rate,val_loss,val_rmse_m
void write_loss_csv(const TrainReport& report, const std::string& path);
void write_ecdf_csv(const std::vector<std::pair<double, double>>& steps,
                    const std::string& path);
void write_histogram_csv(const Histogram& h, const std::string& path);
void write_trials_csv(const std::vector<TrialRecord>& trials, const std::string& path);

}  // namespace ralm::dataio
