#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "ralm/dataio.hpp"
#include "ralm/errors.hpp"
#include "ralm/estimators.hpp"

namespace {

using nlohmann::json;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ralm::DataError("cannot open: " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw ralm::DataError("JSON parse error in " + path + ": " + e.what());
  }
}

// Model section of a train/search config; input dims always come from the
// dataset at hand.
ralm::nn::ResNetConfig model_config_from(const json& j, int channels, int height, int width) {
  ralm::nn::ResNetConfig cfg;
  if (j.contains("stem_filters")) cfg.stem_filters = j.at("stem_filters").get<int>();
  if (j.contains("block_strides")) cfg.block_strides = j.at("block_strides").get<std::vector<int>>();
  if (j.contains("block_channels"))
    cfg.block_channels = j.at("block_channels").get<std::vector<int>>();
  cfg.input_channels = channels;
  cfg.input_height = height;
  cfg.input_width = width;
  return cfg;
}

struct SimulateOpts {
  std::string scenario_path, out_path;
  std::optional<uint64_t> seed;
};

void run_simulate(const SimulateOpts& o) {
  ralm::Scenario scenario = ralm::load_scenario(o.scenario_path);
  if (o.seed) scenario.seed = *o.seed;
  const ralm::SimulationResult sim = ralm::simulate_scenario(scenario);
  ralm::dataio::write_measurements(sim, scenario, o.out_path);
  std::cout << "simulate: " << sim.positions.size() << " samples x " << scenario.anchors.size()
            << " anchors -> " << o.out_path << "\n";
}

struct GridmapsOpts {
  std::string in_path, out_path;
};

void run_gridmaps(const GridmapsOpts& o) {
  const ralm::dataio::MeasurementsFile mf = ralm::dataio::read_measurements(o.in_path);
  ralm::SimulationResult sim{mf.positions, mf.measurements};
  const std::vector<ralm::SampleTensor> tensors = ralm::build_sample_tensors(sim, mf.scenario);

  json meta = {{"grid",
                {{"rows", mf.scenario.grid.rows},
                 {"cols", mf.scenario.grid.cols},
                 {"x_min", mf.scenario.cabin.x_min},
                 {"x_max", mf.scenario.cabin.x_max},
                 {"y_min", mf.scenario.cabin.y_min},
                 {"y_max", mf.scenario.cabin.y_max}}},
               {"sigmas",
                {{"sigma_r", mf.scenario.observation.sigma_r},
                 {"sigma_theta", mf.scenario.observation.sigma_theta}}},
               {"seed", mf.scenario.seed},
               {"scenario_digest", ralm::scenario_digest(mf.scenario)}};
  ralm::dataio::write_tensor_dataset(tensors, meta, o.out_path);
  std::cout << "gridmaps: " << tensors.size() << " tensors of shape "
            << tensors.front().channels << "x" << tensors.front().height << "x"
            << tensors.front().width << " -> " << o.out_path << "\n";
}

struct TrainOpts {
  std::string data_path, config_path, out_path, report_path;
  std::optional<uint64_t> seed;
};

void run_train(const TrainOpts& o) {
  const ralm::dataio::TensorDatasetFile ds = ralm::dataio::read_tensor_dataset(o.data_path);
  const json cfg_json = load_json_file(o.config_path);
  ralm::TrainConfig cfg = ralm::dataio::train_config_from_json(cfg_json);
  if (o.seed) cfg.seed = *o.seed;

  const auto& first = ds.samples.front();
  ralm::nn::ResNetConfig mcfg = model_config_from(cfg_json.value("model", json::object()),
                                                  first.channels, first.height, first.width);
  mcfg.dropout_rate = cfg.dropout_rate;
  ralm::nn::ResNet model(mcfg, cfg.seed);

  auto writer = [&](const ralm::nn::ResNet::StateDict& state, const ralm::TrainReport& report,
                    int) {
    ralm::dataio::write_checkpoint(state, mcfg, cfg, report, model.train_steps, o.out_path);
  };
  ralm::TrainResult result = ralm::train(model, cfg, ds.samples, writer, &std::cout);
  result.report.checkpoint_path = o.out_path;
  ralm::dataio::write_loss_csv(result.report, o.report_path);
  std::cout << "train: best epoch " << result.report.best_epoch << " val_loss "
            << result.report.best_val_loss << " (rmse "
            << std::sqrt(result.report.best_val_loss) << " m) -> " << o.out_path << "\n";
}

struct SearchOpts {
  std::string data_path, out_path, model_path;
  int trials = 12;
  int epochs = 15;
  uint64_t seed = 0;
};

void run_search(const SearchOpts& o) {
  const ralm::dataio::TensorDatasetFile ds = ralm::dataio::read_tensor_dataset(o.data_path);
  const auto& first = ds.samples.front();
  const json model_json = o.model_path.empty() ? json::object() : load_json_file(o.model_path);

  auto runner = [&](const ralm::TrainConfig& cfg) {
    ralm::nn::ResNetConfig mcfg =
        model_config_from(model_json, first.channels, first.height, first.width);
    mcfg.dropout_rate = cfg.dropout_rate;
    ralm::nn::ResNet model(mcfg, cfg.seed);
    return ralm::train(model, cfg, ds.samples).report.best_val_loss;
  };

  const ralm::SearchResult result =
      ralm::random_search(ralm::SearchSpace{}, o.trials, o.epochs, o.seed, runner);
  ralm::dataio::write_trials_csv(result.trials, o.out_path);
  const ralm::TrialRecord& best = result.trials[result.best_trial - 1];
  std::cout << "search: best trial " << result.best_trial << " ("
            << ralm::to_string(best.config.optimizer) << ", lr " << best.config.learning_rate
            << ", batch " << best.config.batch_size << ", dropout "
            << best.config.dropout_rate << ") val_loss " << best.val_loss << " -> "
            << o.out_path << "\n";
}

struct EvaluateOpts {
  std::string checkpoint_path, data_path, metrics_path, ecdf_path;
};

void run_evaluate(const EvaluateOpts& o) {
  const ralm::dataio::CheckpointFile ckpt = ralm::dataio::read_checkpoint(o.checkpoint_path);
  ralm::nn::ResNet model = ralm::dataio::restore_model(ckpt);
  const ralm::dataio::TensorDatasetFile ds = ralm::dataio::read_tensor_dataset(o.data_path);

  std::vector<size_t> all(ds.samples.size());
  for (size_t i = 0; i < all.size(); ++i) all[i] = i;
  const std::vector<ralm::Point2D> pred = ralm::predict_positions(model, ds.samples, all);
  std::vector<ralm::Point2D> truth;
  truth.reserve(ds.samples.size());
  for (const auto& s : ds.samples) truth.push_back(s.target);

  const ralm::MetricsSummary m = ralm::metrics_summary(pred, truth);
  const auto steps = ralm::ecdf(ralm::euclidean_errors(pred, truth));

  std::ofstream metrics(o.metrics_path, std::ios::trunc);
  if (!metrics) throw ralm::DataError("cannot open for writing: " + o.metrics_path);
  metrics << json{{"samples", ds.samples.size()},
                  {"mse_m2", m.mse_m2},
                  {"rmse_m", m.rmse_m},
                  {"mean_m", m.mean_m},
                  {"median_m", m.median_m},
                  {"p95_m", m.p95_m}}
                 .dump(2)
          << "\n";
  ralm::dataio::write_ecdf_csv(steps, o.ecdf_path);
  std::cout << "evaluate: " << ds.samples.size() << " samples, median " << m.median_m
            << " m, p95 " << m.p95_m << " m\n";
}

struct LocateOpts {
  std::string in_path, out_path;
  std::string method = "argmax";
};

void run_locate(const LocateOpts& o) {
  if (o.method != "argmax" && o.method != "centroid") {
    throw CLI::ValidationError("--method must be argmax or centroid");
  }
  const ralm::dataio::MeasurementsFile mf = ralm::dataio::read_measurements(o.in_path);
  const ralm::KnownTerms known =
      ralm::precompute_known_terms(mf.scenario.grid, mf.scenario.anchors);

  std::ofstream out(o.out_path, std::ios::trunc);
  if (!out) throw ralm::DataError("cannot open for writing: " + o.out_path);
  out.precision(12);
  out << "sample,est_x,est_y,true_x,true_y,error_m\n";
  const double nan = std::numeric_limits<double>::quiet_NaN();
  size_t no_info = 0;
  for (size_t i = 0; i < mf.positions.size(); ++i) {
    double ex = nan, ey = nan, err = nan;
    try {
      const auto grids =
          ralm::measurement_grids(mf.measurements[i], known, mf.scenario.observation);
      const ralm::GridField fused = ralm::fuse_grids(grids);
      const ralm::Point2D est = o.method == "argmax"
                                    ? ralm::argmax_position(fused).position
                                    : ralm::weighted_centroid(fused);
      ex = est.x;
      ey = est.y;
      err = ralm::true_range(est, mf.positions[i]);
    } catch (const std::exception&) {
      ++no_info;  // every measurement failed or the field carried nothing
    }
    out << i << "," << ex << "," << ey << "," << mf.positions[i].x << ","
        << mf.positions[i].y << "," << err << "\n";
  }
  std::cout << "locate (" << o.method << "): " << mf.positions.size() << " samples";
  if (no_info > 0) std::cout << ", " << no_info << " without information (NaN rows)";
  std::cout << " -> " << o.out_path << "\n";
}

struct ResidualsOpts {
  std::string in_path, out_path;
  int bins = 50;
};

void run_residuals(const ResidualsOpts& o) {
  const ralm::dataio::MeasurementsFile mf = ralm::dataio::read_measurements(o.in_path);
  const ralm::ResidualHistograms h =
      ralm::residual_histograms(mf.measurements, mf.positions, mf.scenario.anchors, o.bins);

  // foo.csv -> foo_range.csv / foo_angle.csv
  std::string stem = o.out_path;
  const std::string ext = ".csv";
  if (stem.size() > ext.size() && stem.substr(stem.size() - ext.size()) == ext) {
    stem.resize(stem.size() - ext.size());
  }
  ralm::dataio::write_histogram_csv(h.range, stem + "_range.csv");
  ralm::dataio::write_histogram_csv(h.angle, stem + "_angle.csv");
  std::cout << "residuals: " << o.bins << " bins -> " << stem << "_range.csv, " << stem
            << "_angle.csv\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range/angle likelihood-map positioning pipeline"};
  app.require_subcommand(1);

  std::optional<uint64_t> global_seed;
  app.add_option("--seed", global_seed, "Override the scenario/config seed");

  SimulateOpts sim;
  auto* c_sim = app.add_subcommand("simulate", "Simulate positions and measurements");
  c_sim->add_option("--scenario", sim.scenario_path, "Scenario JSON")->required();
  c_sim->add_option("--out", sim.out_path, "Output measurements dataset")->required();
  c_sim->callback([&] {
    sim.seed = global_seed;
    run_simulate(sim);
  });

  GridmapsOpts gm;
  auto* c_gm = app.add_subcommand("gridmaps", "Build stacked likelihood tensors");
  c_gm->add_option("--in", gm.in_path, "Measurements dataset")->required();
  c_gm->add_option("--out", gm.out_path, "Output tensor dataset")->required();
  c_gm->callback([&] { run_gridmaps(gm); });

  TrainOpts tr;
  auto* c_tr = app.add_subcommand("train", "Train the regression network");
  c_tr->add_option("--data", tr.data_path, "Tensor dataset")->required();
  c_tr->add_option("--config", tr.config_path, "Train config JSON")->required();
  c_tr->add_option("--out", tr.out_path, "Output checkpoint")->required();
  c_tr->add_option("--report", tr.report_path, "Loss-curve CSV")->required();
  c_tr->callback([&] {
    tr.seed = global_seed;
    run_train(tr);
  });

  SearchOpts se;
  auto* c_se = app.add_subcommand("search", "Random hyperparameter search");
  c_se->add_option("--data", se.data_path, "Tensor dataset")->required();
  c_se->add_option("--trials", se.trials, "Number of trials")->capture_default_str();
  c_se->add_option("--epochs", se.epochs, "Epoch budget per trial")->capture_default_str();
  c_se->add_option("--seed", se.seed, "Search seed")->capture_default_str();
  c_se->add_option("--model", se.model_path, "Model config JSON (optional)");
  c_se->add_option("--out", se.out_path, "Trials CSV")->required();
  c_se->callback([&] {
    if (global_seed) se.seed = *global_seed;
    run_search(se);
  });

  EvaluateOpts ev;
  auto* c_ev = app.add_subcommand("evaluate", "Evaluate a checkpoint on a dataset");
  c_ev->add_option("--checkpoint", ev.checkpoint_path, "Checkpoint file")->required();
  c_ev->add_option("--data", ev.data_path, "Tensor dataset")->required();
  c_ev->add_option("--out-metrics", ev.metrics_path, "Metrics JSON")->required();
  c_ev->add_option("--out-ecdf", ev.ecdf_path, "ECDF CSV")->required();
  c_ev->callback([&] { run_evaluate(ev); });

  LocateOpts lo;
  auto* c_lo = app.add_subcommand("locate", "Classical grid estimates from measurements");
  c_lo->add_option("--in", lo.in_path, "Measurements dataset")->required();
  c_lo->add_option("--method", lo.method, "argmax|centroid")->capture_default_str();
  c_lo->add_option("--out", lo.out_path, "Positions CSV")->required();
  c_lo->callback([&] { run_locate(lo); });

  ResidualsOpts re;
  auto* c_re = app.add_subcommand("residuals", "Measurement residual histograms");
  c_re->add_option("--in", re.in_path, "Measurements dataset")->required();
  c_re->add_option("--bins", re.bins, "Histogram bins")->capture_default_str();
  c_re->add_option("--out", re.out_path, "Output CSV (suffixed _range/_angle)")->required();
  c_re->callback([&] { run_residuals(re); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const ralm::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ralm::NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
