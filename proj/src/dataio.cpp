#include "ralm/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>

#include "ralm/errors.hpp"

namespace ralm::dataio {

using nlohmann::json;

const ArrayRecord& Container::array(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return a;
  }
  throw DataError("container has no array named '" + name + "'");
}

bool Container::has(const std::string& name) const {
  for (const auto& a : arrays) {
    if (a.name == name) return true;
  }
  return false;
}

namespace {

size_t shape_product(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

void put_u32(std::string& out, uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u64(std::string& out, uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

uint32_t get_u32(const char* p) {
  uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

uint64_t get_u64(const char* p) {
  uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<unsigned char>(p[i]);
  return v;
}

}  // namespace

void write_container(const Container& c, const std::string& path) {
  json arrays = json::array();
  size_t offset = 0;
  for (const auto& a : c.arrays) {
    const size_t nbytes = a.data.size() * sizeof(float);
    if (shape_product(a.shape) != a.data.size()) {
      throw std::invalid_argument("array '" + a.name + "' data does not match its shape");
    }
    arrays.push_back(
        {{"name", a.name}, {"shape", a.shape}, {"offset", offset}, {"nbytes", nbytes}});
    offset += nbytes;
  }
  const json header = {{"arrays", arrays}, {"meta", c.meta}};
  const std::string header_str = header.dump();

  std::string prefix;
  prefix.append(kMagic, 4);
  put_u32(prefix, kFormatVersion);
  put_u64(prefix, header_str.size());

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp);
    out.write(prefix.data(), static_cast<std::streamsize>(prefix.size()));
    out.write(header_str.data(), static_cast<std::streamsize>(header_str.size()));
    for (const auto& a : c.arrays) {
      out.write(reinterpret_cast<const char*>(a.data.data()),
                static_cast<std::streamsize>(a.data.size() * sizeof(float)));
    }
    if (!out) throw DataError("write failed: " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw DataError("cannot move " + tmp + " into place at " + path);
  }
}

Container read_container(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open: " + path);

  char fixed[16];
  if (!in.read(fixed, 16)) throw DataError("truncated container (missing fixed header): " + path);
  if (std::memcmp(fixed, kMagic, 4) != 0) {
    throw DataError("bad magic bytes '" + std::string(fixed, 4) + "' in " + path +
                    " (expected 'RALM')");
  }
  const uint32_t version = get_u32(fixed + 4);
  if (version != kFormatVersion) {
    throw DataError("unsupported container version " + std::to_string(version) + " in " + path);
  }
  const uint64_t header_len = get_u64(fixed + 8);

  std::string header_str(header_len, '\0');
  if (!in.read(header_str.data(), static_cast<std::streamsize>(header_len))) {
    throw DataError("truncated container (header cut short): " + path);
  }
  json header;
  try {
    header = json::parse(header_str);
  } catch (const json::exception& e) {
    throw DataError("container header is not valid JSON in " + path + ": " + e.what());
  }

  std::string payload((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  Container c;
  c.meta = header.value("meta", json::object());
  size_t expected_end = 0;
  for (const json& a : header.at("arrays")) {
    ArrayRecord rec;
    rec.name = a.at("name").get<std::string>();
    rec.shape = a.at("shape").get<std::vector<size_t>>();
    const size_t offset = a.at("offset").get<size_t>();
    const size_t nbytes = a.at("nbytes").get<size_t>();
    if (nbytes != shape_product(rec.shape) * sizeof(float)) {
      throw DataError("array '" + rec.name + "' declares nbytes inconsistent with its shape");
    }
    if (offset != expected_end) {
      throw DataError("array '" + rec.name + "' offset overlaps or leaves a gap");
    }
    if (offset + nbytes > payload.size()) {
      throw DataError("truncated payload: array '" + rec.name + "' extends past end of file");
    }
    rec.data.resize(nbytes / sizeof(float));
    std::memcpy(rec.data.data(), payload.data() + offset, nbytes);
    expected_end = offset + nbytes;
    c.arrays.push_back(std::move(rec));
  }
  if (expected_end != payload.size()) {
    throw DataError("payload has " + std::to_string(payload.size() - expected_end) +
                    " trailing bytes not covered by the header");
  }
  return c;
}

// --- measurements -----------------------------------------------------------

void write_measurements(const SimulationResult& sim, const Scenario& s,
                        const std::string& path) {
  const size_t S = sim.positions.size();
  const size_t K = s.anchors.size();
  const float nan = std::numeric_limits<float>::quiet_NaN();

  ArrayRecord positions{"positions", {S, 2}, {}};
  ArrayRecord ranges{"ranges", {S, K}, {}};
  ArrayRecord angles{"angles", {S, K}, {}};
  ArrayRecord conditions{"conditions", {S, K}, {}};
  positions.data.reserve(S * 2);
  ranges.data.reserve(S * K);
  angles.data.reserve(S * K);
  conditions.data.reserve(S * K);

  for (size_t i = 0; i < S; ++i) {
    positions.data.push_back(static_cast<float>(sim.positions[i].x));
    positions.data.push_back(static_cast<float>(sim.positions[i].y));
    if (sim.measurements[i].size() != K) {
      throw std::invalid_argument("measurement row size does not match anchor count");
    }
    for (const Measurement& m : sim.measurements[i]) {
      ranges.data.push_back(m.range ? static_cast<float>(*m.range) : nan);
      angles.data.push_back(m.angle ? static_cast<float>(*m.angle) : nan);
      conditions.data.push_back(static_cast<float>(static_cast<int>(m.condition)));
    }
  }

  Container c;
  c.meta = {{"kind", "measurements"},
            {"scenario", scenario_to_json(s)},
            {"scenario_digest", scenario_digest(s)},
            {"condition_codes", {{"LOS", 0}, {"NLOS", 1}, {"Outlier", 2}, {"Failure", 3}}}};
  c.arrays = {std::move(positions), std::move(ranges), std::move(angles),
              std::move(conditions)};
  write_container(c, path);
}

MeasurementsFile read_measurements(const std::string& path) {
  const Container c = read_container(path);
  if (c.meta.value("kind", "") != "measurements") {
    throw DataError(path + " is not a measurements dataset");
  }
  MeasurementsFile out;
  out.scenario = scenario_from_json(c.meta.at("scenario"));

  std::vector<Anchor> anchors = out.scenario.anchors;
  std::sort(anchors.begin(), anchors.end(),
            [](const Anchor& a, const Anchor& b) { return a.id < b.id; });

  const ArrayRecord& positions = c.array("positions");
  const ArrayRecord& ranges = c.array("ranges");
  const ArrayRecord& angles = c.array("angles");
  const ArrayRecord& conditions = c.array("conditions");
  const size_t S = positions.shape.at(0);
  const size_t K = ranges.shape.at(1);
  if (K != anchors.size()) {
    throw DataError("measurement arrays disagree with the scenario anchor count");
  }

  for (size_t i = 0; i < S; ++i) {
    out.positions.push_back({positions.data[i * 2], positions.data[i * 2 + 1]});
    std::vector<Measurement> row;
    for (size_t k = 0; k < K; ++k) {
      Measurement m;
      m.anchor_id = anchors[k].id;
      const float r = ranges.data[i * K + k];
      const float a = angles.data[i * K + k];
      m.condition = static_cast<ChannelCondition>(
          static_cast<int>(conditions.data[i * K + k]));
      if (!std::isnan(r)) m.range = static_cast<double>(r);
      if (!std::isnan(a)) m.angle = static_cast<double>(a);
      if ((m.condition == ChannelCondition::Failure) != (!m.range && !m.angle)) {
        throw DataError("corrupt measurements: failure flag disagrees with null values");
      }
      row.push_back(m);
    }
    out.measurements.push_back(std::move(row));
  }
  return out;
}

// --- tensor dataset -----------------------------------------------------------

void write_tensor_dataset(const std::vector<SampleTensor>& samples,
                          const nlohmann::json& extra_meta, const std::string& path) {
  if (samples.empty()) throw std::invalid_argument("refusing to write an empty tensor dataset");
  const size_t S = samples.size();
  const size_t C = samples.front().channels;
  const size_t M = samples.front().height;
  const size_t N = samples.front().width;
  const size_t K = samples.front().valid.size() / 2;

  ArrayRecord tensors{"tensors", {S, C, M, N}, {}};
  ArrayRecord targets{"targets", {S, 2}, {}};
  ArrayRecord valid{"valid", {S, K, 2}, {}};
  tensors.data.reserve(S * C * M * N);
  targets.data.reserve(S * 2);
  valid.data.reserve(S * K * 2);

  for (const SampleTensor& s : samples) {
    if (static_cast<size_t>(s.channels) != C || static_cast<size_t>(s.height) != M ||
        static_cast<size_t>(s.width) != N) {
      throw std::invalid_argument("inconsistent sample tensor shapes");
    }
    tensors.data.insert(tensors.data.end(), s.values.begin(), s.values.end());
    targets.data.push_back(static_cast<float>(s.target.x));
    targets.data.push_back(static_cast<float>(s.target.y));
    for (uint8_t v : s.valid) valid.data.push_back(static_cast<float>(v));
  }

  Container c;
  c.meta = extra_meta;
  c.meta["kind"] = "tensor_dataset";
  c.meta["channel_order"] = "per anchor ascending id: range map then angle map";
  c.arrays = {std::move(tensors), std::move(targets), std::move(valid)};
  write_container(c, path);
}

TensorDatasetFile read_tensor_dataset(const std::string& path) {
  const Container c = read_container(path);
  if (c.meta.value("kind", "") != "tensor_dataset") {
    throw DataError(path + " is not a tensor dataset");
  }
  const ArrayRecord& tensors = c.array("tensors");
  const ArrayRecord& targets = c.array("targets");
  const ArrayRecord& valid = c.array("valid");
  if (tensors.shape.size() != 4) throw DataError("tensors array must be rank 4");
  const size_t S = tensors.shape[0], C = tensors.shape[1], M = tensors.shape[2],
               N = tensors.shape[3];
  const size_t K = valid.shape.at(1);

  TensorDatasetFile out;
  out.meta = c.meta;
  const size_t per = C * M * N;
  for (size_t i = 0; i < S; ++i) {
    SampleTensor t;
    t.channels = static_cast<int>(C);
    t.height = static_cast<int>(M);
    t.width = static_cast<int>(N);
    t.values.assign(tensors.data.begin() + i * per, tensors.data.begin() + (i + 1) * per);
    t.target = {targets.data[i * 2], targets.data[i * 2 + 1]};
    t.valid.resize(K * 2);
    for (size_t j = 0; j < K * 2; ++j) {
      t.valid[j] = valid.data[i * K * 2 + j] != 0.0f ? 1 : 0;
    }
    out.samples.push_back(std::move(t));
  }
  return out;
}

// --- checkpoints -----------------------------------------------------------

json resnet_config_to_json(const nn::ResNetConfig& c) {
  return {{"input_channels", c.input_channels},
          {"input_height", c.input_height},
          {"input_width", c.input_width},
          {"stem_filters", c.stem_filters},
          {"block_strides", c.block_strides},
          {"block_channels", c.block_channels},
          {"dropout_rate", c.dropout_rate}};
}

nn::ResNetConfig resnet_config_from_json(const json& j) {
  nn::ResNetConfig c;
  c.input_channels = j.at("input_channels").get<int>();
  c.input_height = j.at("input_height").get<int>();
  c.input_width = j.at("input_width").get<int>();
  c.stem_filters = j.at("stem_filters").get<int>();
  c.block_strides = j.at("block_strides").get<std::vector<int>>();
  c.block_channels = j.at("block_channels").get<std::vector<int>>();
  c.dropout_rate = j.at("dropout_rate").get<double>();
  c.validate();
  return c;
}

json train_config_to_json(const TrainConfig& c) {
  return {{"optimizer", to_string(c.optimizer)},
          {"learning_rate", c.learning_rate},
          {"batch_size", c.batch_size},
          {"dropout_rate", c.dropout_rate},
          {"epochs", c.epochs},
          {"test_fraction", c.test_fraction},
          {"seed", c.seed}};
}

TrainConfig train_config_from_json(const json& j) {
  TrainConfig c;
  c.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  c.learning_rate = j.at("learning_rate").get<double>();
  c.batch_size = j.at("batch_size").get<int>();
  c.dropout_rate = j.value("dropout_rate", c.dropout_rate);
  c.epochs = j.value("epochs", c.epochs);
  c.test_fraction = j.value("test_fraction", c.test_fraction);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

void write_checkpoint(const nn::ResNet::StateDict& state, const nn::ResNetConfig& model_cfg,
                      const TrainConfig& train_cfg, const TrainReport& report, int64_t steps,
                      const std::string& path) {
  Container c;
  c.meta = {{"kind", "checkpoint"},
            {"model_config", resnet_config_to_json(model_cfg)},
            {"train_config", train_config_to_json(train_cfg)},
            {"steps", steps},
            {"best_epoch", report.best_epoch},
            {"best_val_loss", report.best_val_loss}};
  for (const auto& [name, tensor] : state) {
    ArrayRecord rec;
    rec.name = name;
    for (int d : tensor.shape()) rec.shape.push_back(static_cast<size_t>(d));
    rec.data.resize(tensor.numel());
    for (size_t i = 0; i < tensor.numel(); ++i) rec.data[i] = static_cast<float>(tensor[i]);
    c.arrays.push_back(std::move(rec));
  }
  write_container(c, path);
}

CheckpointFile read_checkpoint(const std::string& path) {
  const Container c = read_container(path);
  if (c.meta.value("kind", "") != "checkpoint") {
    throw DataError(path + " is not a checkpoint");
  }
  CheckpointFile out;
  out.model_config = resnet_config_from_json(c.meta.at("model_config"));
  out.train_config = train_config_from_json(c.meta.at("train_config"));
  out.steps = c.meta.value("steps", 0);
  out.best_epoch = c.meta.value("best_epoch", -1);
  out.best_val_loss = c.meta.value("best_val_loss", 0.0);
  for (const ArrayRecord& a : c.arrays) {
    std::vector<int> shape;
    for (size_t d : a.shape) shape.push_back(static_cast<int>(d));
    nn::Tensor t(shape);
    for (size_t i = 0; i < a.data.size(); ++i) t[i] = static_cast<double>(a.data[i]);
    out.state.emplace_back(a.name, std::move(t));
  }
  return out;
}

nn::ResNet restore_model(const CheckpointFile& ckpt) {
  nn::ResNet model(ckpt.model_config);
  try {
    model.load_state_dict(ckpt.state);
  } catch (const std::invalid_argument& e) {
    throw DataError(std::string("checkpoint does not fit the embedded model config: ") +
                    e.what());
  }
  model.train_steps = ckpt.steps;
  return model;
}

// --- CSV emitters -----------------------------------------------------------

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw DataError("cannot open for writing: " + path);
  out.precision(12);
  return out;
}

}  // namespace

void write_loss_csv(const TrainReport& report, const std::string& path) {
  auto out = open_csv(path);
  out << "epoch,train_loss,val_loss,val_rmse_m\n";
  for (size_t e = 0; e < report.train_loss.size(); ++e) {
    out << (e + 1) << "," << report.train_loss[e] << "," << report.val_loss[e] << ","
        << std::sqrt(report.val_loss[e]) << "\n";
  }
}

void write_ecdf_csv(const std::vector<std::pair<double, double>>& steps,
                    const std::string& path) {
  auto out = open_csv(path);
  out << "error_m,fraction\n";
  for (const auto& [v, f] : steps) out << v << "," << f << "\n";
}

void write_histogram_csv(const Histogram& h, const std::string& path) {
  auto out = open_csv(path);
  out << "bin_left,bin_right,count\n";
  for (size_t i = 0; i < h.counts.size(); ++i) {
    out << h.bin_left[i] << "," << h.bin_right[i] << "," << h.counts[i] << "\n";
  }
}

void write_trials_csv(const std::vector<TrialRecord>& trials, const std::string& path) {
  auto out = open_csv(path);
  out << "trial,optimizer,learning_rate,batch_size,dropout_rate,val_loss,val_rmse_m\n";
  for (const TrialRecord& t : trials) {
    out << t.trial << "," << to_string(t.config.optimizer) << "," << t.config.learning_rate
        << "," << t.config.batch_size << "," << t.config.dropout_rate << "," << t.val_loss
        << "," << t.val_rmse << "\n";
  }
}

}  // namespace ralm::dataio
