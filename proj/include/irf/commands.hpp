#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irf/config.hpp"
#include "irf/engine.hpp"
#include "irf/tailstats.hpp"
#include "irf/theory.hpp"

namespace irf {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
};

// Loads the config and applies --seed / --out.
ExperimentConfig resolve_config(const GlobalOptions& opts);

// Tail index used for predictions: analysis.alpha, else the tail index of A (of B when A is constant).
double analysis_alpha(const ExperimentConfig& cfg, const MapFamily& family);

// Inputs read off the model (moments of the coefficients, closed-form moments of X where the
// moment identity applies, plug-in functionals when samples are given); explicit analysis
// inputs override them.
std::map<std::string, double> model_inputs(const ExperimentConfig& cfg, const std::vector<double>* samples);

struct SidedPrediction {
  Prediction prediction;
  Side side = Side::right;
};

// Predictions for analysis.regime. Missing inputs raise PreconditionError naming them.
std::vector<SidedPrediction> predictions_for(const ExperimentConfig& cfg, const std::vector<double>* samples);

// Samples from output.input or from a fresh simulation (method smoothed samples the chain).
SampleBatch obtain_samples(const ExperimentConfig& cfg, const MapFamily& family);

struct SideReport {
  Side side = Side::right;
  Prediction prediction;
  TailEstimate estimate;
  RatioCurve ratio;
  bool smoothed = false;
  std::ptrdiff_t last_reliable = -1;
  bool all_within = false;
  bool final_in_ci = false;
  double spread = 0.0;
  bool pass() const { return last_reliable >= 0 && all_within && final_in_ci; }
};

struct VerifyResult {
  std::vector<SideReport> sides;
  std::size_t n_samples = 0;
  bool pass() const;
};

// Estimated tail on the configured grid for one side; the grid is built from the samples.
TailEstimate estimate_tail(const ExperimentConfig& cfg, const MapFamily& family, const std::vector<double>& samples,
                           Side side, bool* smoothed = nullptr);

VerifyResult run_verify(const ExperimentConfig& cfg, const SampleBatch& batch);

// Report CSV: the tail columns plus predicted,rel_err,reliable,pass.
void write_verify_csv(std::ostream& os, const SideReport& r, double tolerance, double min_exceed);

struct DistCheckResult {
  struct Row {
    std::string check;
    std::string clause;
    bool pass = false;
    bool conclusive = true;
    std::string detail;
  };
  std::vector<Row> rows;
  bool pass() const;
};

DistCheckResult run_dist_check(const ExperimentConfig& cfg);

// Command entry points; each writes its files under output.dir and returns the exit code.
int cmd_predict(const ExperimentConfig& cfg, std::ostream& log);
int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log);
int cmd_estimate(const ExperimentConfig& cfg, std::ostream& log);
int cmd_verify(const ExperimentConfig& cfg, std::ostream& log);
int cmd_dist_check(const ExperimentConfig& cfg, std::ostream& log);

}  // namespace irf
