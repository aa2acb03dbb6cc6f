#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "irf/engine.hpp"
#include "irf/maps.hpp"

namespace irf {

struct ModelSection {
  MapKind kind = MapKind::affine;
  std::optional<TailModel> a;
  std::optional<TailModel> b;
  std::optional<TailModel> c;  // sqrt_log only
  Dependence dependence = Dependence::independent;
  double p_plus = 1.0;
  std::optional<double> c_b;
  std::optional<double> c_c;
  double lower_b = 0.0;  // pos_part_affine only

  bool operator==(const ModelSection&) const = default;
};

// `quantile(lo=0.99, hi_exceed=300, points=20)` or an explicit comma list.
struct TGridRule {
  bool from_quantiles = true;
  double lo = 0.99;
  double hi_exceed = 300.0;
  std::size_t points = 20;
  std::vector<double> values;

  bool operator==(const TGridRule&) const = default;
};

TGridRule parse_t_grid(const std::string& text);
std::string t_grid_to_string(const TGridRule& rule);

struct AnalysisSection {
  std::optional<double> alpha;  // defaults to the tail index of A
  TGridRule t_grid;
  // auto | grey | kevei | indep | affine | ifs | example
  std::string regime = "auto";
  // right | left | both
  std::string tail = "right";
  // auto | smoothed | ecdf
  std::string estimator = "auto";
  double tolerance = 0.2;
  double min_exceed = 300.0;
  // Explicit inputs for `predict`: mu, sigma, ea, ex, ex_plus, c_b, xi_plus, xi_minus, mu_plus, mu_minus.
  std::map<std::string, double> inputs;

  bool operator==(const AnalysisSection&) const = default;
};

struct OutputSection {
  std::string dir = ".";
  std::string prefix = "irftail";
  // Optional batch file to analyse instead of simulating.
  std::string input;

  bool operator==(const OutputSection&) const = default;
};

struct ExperimentConfig {
  ModelSection model;
  SimConfig sim;
  AnalysisSection analysis;
  OutputSection output;

  bool operator==(const ExperimentConfig& o) const;
};

// INI text with sections [model], [sim], [analysis], [output]. Unknown sections or keys,
// malformed values and values violating module preconditions raise ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string emit_config(const ExperimentConfig& cfg);

// Builds the map family described by the model section.
MapFamily build_family(const ModelSection& model);

}  // namespace irf
