#include "irf/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <ostream>

#include "irf/errors.hpp"

namespace irf {
namespace {

namespace fs = std::filesystem;

double mean_of(const TailModel& m) { return m.is_constant() ? m.support_low() : m.alpha_moment(1.0); }

bool nonnegative(const TailModel& m) { return m.support_low() >= 0; }

double need(const std::map<std::string, double>& in, const std::string& key, const std::string& regime) {
  const auto it = in.find(key);
  if (it == in.end()) throw PreconditionError("regime " + regime + " needs input '" + key + "'");
  return it->second;
}

std::string out_path(const ExperimentConfig& cfg, const std::string& suffix) {
  fs::create_directories(cfg.output.dir);
  return (fs::path(cfg.output.dir) / (cfg.output.prefix + suffix)).string();
}

// Writes the file and its `.cfg` config echo.
template <class F>
std::string write_with_sidecar(const ExperimentConfig& cfg, const std::string& suffix, F&& body) {
  const std::string path = out_path(cfg, suffix);
  {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot write '" + path + "'");
    body(os);
  }
  std::ofstream side(path + ".cfg", std::ios::binary);
  side << emit_config(cfg);
  return path;
}

std::string resolved_regime(const ExperimentConfig& cfg, const MapFamily& family) {
  if (cfg.analysis.regime != "auto") return cfg.analysis.regime;
  const CoeffLaw& c = family.coeff;
  if (family.kind != MapKind::affine) return "affine";
  if (c.marginal_a.is_constant()) return "grey";
  switch (c.dependence) {
    case Dependence::independent: return c.marginal_b.is_constant() ? "kevei" : "indep";
    case Dependence::equal: return "affine";
    case Dependence::signed_a: return "ifs";
  }
  return "affine";
}

bool wants(const ExperimentConfig& cfg, Side s) {
  const std::string& t = cfg.analysis.tail;
  return t == "both" || (s == Side::right ? t == "right" : t == "left");
}

Prediction make_prediction(Regime r, double constant, std::vector<std::pair<std::string, double>> inputs,
                           std::string reference) {
  Prediction p;
  p.regime = r;
  p.constant = constant;
  p.inputs = std::move(inputs);
  p.reference = std::move(reference);
  return p;
}

const char* kLeftRef = "P[A>t] (left tail)";

std::function<double(double)> reference_tail(const MapFamily& family, const Prediction& p) {
  if (p.regime == Regime::GreyBHeavy) {
    const TailModel b = family.coeff.marginal_b;
    return [b](double t) { return b.survival(t); };
  }
  const CoeffLaw c = family.coeff;
  return [c](double t) { return c.reference_survival(t); };
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

}  // namespace

ExperimentConfig resolve_config(const GlobalOptions& opts) {
  if (opts.config_path.empty()) throw ConfigError("--config is required");
  ExperimentConfig cfg = load_config(opts.config_path);
  if (opts.seed) cfg.sim.seed = *opts.seed;
  if (opts.out_dir) cfg.output.dir = *opts.out_dir;
  return cfg;
}

double analysis_alpha(const ExperimentConfig& cfg, const MapFamily& family) {
  if (cfg.analysis.alpha) return *cfg.analysis.alpha;
  const double a = family.alpha();
  if (std::isfinite(a)) return a;
  const double b = family.coeff.marginal_b.tail_index();
  if (std::isfinite(b)) return b;
  throw PreconditionError("no regularly varying coefficient; set analysis.alpha");
}

std::map<std::string, double> model_inputs(const ExperimentConfig& cfg, const std::vector<double>* samples) {
  std::map<std::string, double> in;
  if (cfg.model.a && cfg.model.b) {
    const MapFamily family = build_family(cfg.model);
    const CoeffLaw& c = family.coeff;
    const double alpha = analysis_alpha(cfg, family);
    in["alpha"] = alpha;
    in["mu_plus"] = c.mu_plus(alpha);
    in["mu_minus"] = c.mu_minus(alpha);
    in["ea"] = in["mu_plus"] + in["mu_minus"];
    in["c_b"] = c.c_b;
    if (!c.marginal_a.is_constant()) {
      in["mu"] = c.marginal_a.alpha_moment(1.0);
      in["sigma"] = c.marginal_a.alpha_moment(2.0);
    }

    if (samples && !samples->empty()) {
      in["ex_plus"] = plugin_moment(*samples, {MomentKind::pow_plus, alpha, nullptr}).mean;
      in["ex"] = in["ex_plus"];
      if (has_closed_form_f(family)) {
        in["xi_plus"] = plugin_moment(*samples, {MomentKind::f_plus, alpha, &family}).mean;
        in["xi_minus"] = plugin_moment(*samples, {MomentKind::f_minus, alpha, &family}).mean;
      }
    }

    // Moment identity for alpha = 2 affine maps; overrides the plug-in values where it applies.
    if (family.kind == MapKind::affine && alpha == 2.0) {
      const TailModel& w = c.marginal_a;
      const TailModel& b = c.marginal_b;
      double ea = 0, ea2 = w.alpha_moment(2.0), eb = mean_of(b), eb2 = b.alpha_moment(2.0), eab = 0;
      switch (c.dependence) {
        case Dependence::independent:
          ea = mean_of(w);
          eab = ea * eb;
          break;
        case Dependence::equal:
          ea = mean_of(w);
          eb = ea;
          eb2 = ea2;
          eab = ea2;
          break;
        case Dependence::signed_a:
          ea = (2.0 * c.p_plus - 1.0) * mean_of(w);
          eab = ea * eb;
          break;
      }
      if (std::isfinite(ea2) && ea2 < 1.0 && std::isfinite(eb2)) {
        const AffineMoments m = affine_moments(ea, ea2, eb, eb2, eab);
        in["ex_mean"] = m.ex;
        in["ex2"] = m.ex2;
        const bool x_nonneg = c.dependence != Dependence::signed_a && nonnegative(w) && nonnegative(b);
        if (x_nonneg) {
          in["ex"] = m.ex2;
          in["ex_plus"] = m.ex2;
          in["xi_minus"] = 0.0;
          if (c.dependence == Dependence::equal)
            in["xi_plus"] = m.ex2 + 2.0 * m.ex + 1.0;
          else
            in["xi_plus"] = m.ex2 + c.c_b;
        }
      }
    }
  }
  for (const auto& [k, v] : cfg.analysis.inputs) in[k] = v;
  return in;
}

std::vector<SidedPrediction> predictions_for(const ExperimentConfig& cfg, const std::vector<double>* samples) {
  const auto in = model_inputs(cfg, samples);
  std::string regime = cfg.analysis.regime;
  std::optional<MapFamily> family;
  if (cfg.model.a && cfg.model.b) family = build_family(cfg.model);
  if (regime == "auto") {
    if (!family) throw ConfigError("regime = auto needs a [model] section");
    regime = resolved_regime(cfg, *family);
  }
  std::vector<SidedPrediction> out;
  const auto add = [&](Prediction p, Side s) {
    if (wants(cfg, s)) out.push_back({std::move(p), s});
  };
  if (regime == "grey") {
    const double ea = need(in, "ea", regime);
    add(make_prediction(Regime::GreyBHeavy, grey_constant(ea), {{"ea", ea}}, "P[B>t]"), Side::right);
  } else if (regime == "kevei") {
    const double ex = need(in, "ex", regime), ea = need(in, "ea", regime);
    add(make_prediction(Regime::KeveiAHeavy, kevei_constant(ex, ea), {{"ex", ex}, {"ea", ea}}, "P[A>t]"),
        Side::right);
  } else if (regime == "indep") {
    const double ex = need(in, "ex_plus", regime), cb = need(in, "c_b", regime), ea = need(in, "ea", regime);
    add(make_prediction(Regime::IndepComparable, indep_constant(ex, cb, ea),
                        {{"ex_plus", ex}, {"c_b", cb}, {"ea", ea}}, "P[A>t]"),
        Side::right);
  } else if (regime == "affine") {
    const double mp = need(in, "mu_plus", regime);
    if (wants(cfg, Side::right)) {
      const double xp = need(in, "xi_plus", regime);
      add(make_prediction(Regime::AffineGeneral, affine_constant(xp, mp), {{"xi_plus", xp}, {"mu_plus", mp}},
                          "P[A>t]"),
          Side::right);
    }
    if (wants(cfg, Side::left)) {
      const double xm = need(in, "xi_minus", regime);
      add(make_prediction(Regime::AffineGeneral, affine_constant(xm, mp), {{"xi_minus", xm}, {"mu_plus", mp}},
                          kLeftRef),
          Side::left);
    }
  } else if (regime == "ifs") {
    const double mp = need(in, "mu_plus", regime), mm = need(in, "mu_minus", regime);
    const double xp = need(in, "xi_plus", regime), xm = need(in, "xi_minus", regime);
    const IfsConstants d = ifs_constants(mp, mm, xp, xm);
    std::vector<std::pair<std::string, double>> inputs = {
        {"mu_plus", mp}, {"mu_minus", mm}, {"xi_plus", xp}, {"xi_minus", xm}};
    add(make_prediction(Regime::IfsSigned, d.d_plus, inputs, "P[A>t]"), Side::right);
    add(make_prediction(Regime::IfsSigned, d.d_minus, inputs, kLeftRef), Side::left);
  } else if (regime == "example") {
    const double mu = need(in, "mu", regime), sigma = need(in, "sigma", regime);
    const ExampleConstants e = example_constants(mu, sigma);
    std::vector<std::pair<std::string, double>> inputs = {{"mu", mu}, {"sigma", sigma}};
    // With a model, keep only the constant belonging to its dependence.
    const bool keep_d1 = !family || family->coeff.dependence != Dependence::equal;
    const bool keep_d2 = !family || family->coeff.dependence == Dependence::equal;
    if (keep_d1) out.push_back({make_prediction(Regime::ExampleD1, e.d1, inputs, "P[A>t]"), Side::right});
    if (keep_d2) out.push_back({make_prediction(Regime::ExampleD2, e.d2, inputs, "P[A>t]"), Side::right});
  } else {
    throw ConfigError("unknown regime '" + regime + "'");
  }
  if (out.empty()) throw ConfigError("no prediction for tail = " + cfg.analysis.tail + " under regime " + regime);
  return out;
}

SampleBatch obtain_samples(const ExperimentConfig& cfg, const MapFamily& family) {
  if (!cfg.output.input.empty()) {
    SampleBatch b;
    b.values = read_batch(cfg.output.input);
    b.config = cfg.sim;
    b.seed = cfg.sim.seed;
    return b;
  }
  if (cfg.sim.method == Method::perpetuity) {
    if (family.kind != MapKind::affine) throw PreconditionError("perpetuity sampling needs kind = affine");
    return sample_perpetuity(family.coeff, cfg.sim);
  }
  return sample_stationary_chain(family, cfg.sim);
}

TailEstimate estimate_tail(const ExperimentConfig& cfg, const MapFamily& family, const std::vector<double>& samples,
                           Side side, bool* smoothed) {
  std::vector<double> view;
  if (side == Side::left) {
    view.resize(samples.size());
    std::transform(samples.begin(), samples.end(), view.begin(), [](double x) { return -x; });
  }
  const std::vector<double>& s = side == Side::left ? view : samples;
  const TGridRule& rule = cfg.analysis.t_grid;
  const std::vector<double> grid =
      rule.from_quantiles ? quantile_grid(s, rule.lo, rule.hi_exceed, rule.points) : rule.values;

  bool use_smoothed = false;
  if (cfg.analysis.estimator == "smoothed") {
    if (!smoothing_supported(family, side))
      throw PreconditionError("smoothed estimator not available for this model; use estimator = ecdf");
    use_smoothed = true;
  } else if (cfg.analysis.estimator == "auto") {
    use_smoothed = smoothing_supported(family, side);
  }
  if (smoothed) *smoothed = use_smoothed;
  if (!use_smoothed) return ecdf_survival(s, grid);
  const auto pts = smoothed_tail(samples, family, grid, side, cfg.sim.workers, cfg.sim.chunk_size);
  return from_smoothed(pts, samples.size());
}

bool VerifyResult::pass() const {
  if (sides.empty()) return false;
  return std::all_of(sides.begin(), sides.end(), [](const SideReport& r) { return r.pass(); });
}

VerifyResult run_verify(const ExperimentConfig& cfg, const SampleBatch& batch) {
  const MapFamily family = build_family(cfg.model);
  VerifyResult res;
  res.n_samples = batch.values.size();
  const auto preds = predictions_for(cfg, &batch.values);
  for (const SidedPrediction& sp : preds) {
    SideReport r;
    r.side = sp.side;
    r.prediction = sp.prediction;
    r.estimate = estimate_tail(cfg, family, batch.values, sp.side, &r.smoothed);
    r.ratio = ratio_curve(r.estimate, reference_tail(family, sp.prediction));
    r.last_reliable = reliable_index(r.estimate, cfg.analysis.min_exceed);
    const double d = sp.prediction.constant;
    r.all_within = r.last_reliable >= 0;
    for (std::ptrdiff_t j = 0; j <= r.last_reliable; ++j)
      if (!(std::abs(r.ratio.ratio[j] / d - 1.0) <= cfg.analysis.tolerance)) r.all_within = false;
    if (r.last_reliable >= 0) {
      const auto j = static_cast<std::size_t>(r.last_reliable);
      r.final_in_ci = r.ratio.lo[j] <= d && d <= r.ratio.hi[j];
      r.spread = last_decade_spread(r.ratio, r.last_reliable);
    }
    res.sides.push_back(std::move(r));
  }
  return res;
}

void write_verify_csv(std::ostream& os, const SideReport& r, double tolerance, double min_exceed) {
  const auto prec = os.precision(12);
  os << "t,p_hat,ci_lo,ci_hi,n_exceed,ref_tail,ratio,ratio_ci_lo,ratio_ci_hi,predicted,rel_err,reliable,pass\n";
  const TailEstimate& e = r.estimate;
  const double d = r.prediction.constant;
  for (std::size_t j = 0; j < e.t_grid.size(); ++j) {
    const double rel = r.ratio.ratio[j] / d - 1.0;
    const bool reliable = e.n_exceed[j] >= min_exceed;
    os << e.t_grid[j] << ',' << e.p_hat[j] << ',' << e.ci_lo[j] << ',' << e.ci_hi[j] << ','
       << std::round(e.n_exceed[j]) << ',' << r.ratio.ref_tail[j] << ',' << r.ratio.ratio[j] << ',' << r.ratio.lo[j]
       << ',' << r.ratio.hi[j] << ',' << d << ',' << rel << ',' << (reliable ? 1 : 0) << ','
       << (reliable ? (std::abs(rel) <= tolerance ? "1" : "0") : "na") << '\n';
  }
  os.precision(prec);
}

bool DistCheckResult::pass() const {
  return !rows.empty() && std::all_of(rows.begin(), rows.end(), [](const Row& r) { return r.pass; });
}

DistCheckResult run_dist_check(const ExperimentConfig& cfg) {
  if (!cfg.model.a) throw ConfigError("dist-check needs [model] a");
  const TailModel& a = *cfg.model.a;
  if (a.is_constant()) throw PreconditionError("dist-check: constant A is not regularly varying");
  DistCheckResult res;
  const auto add_report = [&](const std::string& check, const PredicateReport& rep) {
    for (const Clause& c : rep.clauses) res.rows.push_back({check, c.name, c.pass, c.conclusive, c.detail});
  };
  const Family fam = a.family();
  if (fam == Family::pareto || fam == Family::log_pareto) {
    const double alpha = cfg.analysis.alpha.value_or(a.tail_index());
    const std::vector<double> ts = {1e2, 1e3, 1e4};
    const UniformityReport u = rv_uniformity_check(a, alpha, 0.1, ts);
    std::string dev;
    for (double d : u.deviation) dev += (dev.empty() ? "" : " ") + fmt(d);
    const bool exact = *std::max_element(u.deviation.begin(), u.deviation.end()) < 1e-12;
    res.rows.push_back({"rv_uniformity", "decreasing", u.strictly_decreasing || exact, true, dev});
    res.rows.push_back({"rv_uniformity", "final_below", u.final_below, true, dev});

    const std::size_t n_mc = cfg.sim.n_samples > 0 ? cfg.sim.n_samples : 1000000;
    const ProductReport p =
        product_convolution_check(a, alpha, {10, 30, 100, 300, 1000}, n_mc, cfg.sim.seed, 0.25, cfg.sim.workers);
    std::string est;
    for (double v : p.traj.estimate) est += (est.empty() ? "" : " ") + fmt(v);
    if (p.target_finite) {
      est += " target " + fmt(p.traj.target);
      res.rows.push_back({"product_convolution", "final_within", p.traj.final_within, true, est});
      res.rows.push_back({"product_convolution", "monotone_approach", p.traj.monotone_approach, true, est});
    } else {
      res.rows.push_back({"product_convolution", "target", true, false, p.note});
    }
    return res;
  }
  // Exponential-type laws are read on the log scale directly.
  const LogTail f = LogTail::direct(a);
  const double alpha = cfg.analysis.alpha.value_or(a.alpha());
  add_report("salpha_dom", salpha_check_dom(log_k_of(f, alpha), alpha));
  if (fam == Family::exp_stretched) add_report("salpha_convex", salpha_check_convex(log_k_of(f, alpha), alpha, a.gamma()));
  const Trajectory tr = convolution_limit_check(f, f, f, 1.0, 1.0, alpha, {20, 40, 80, 160, 320});
  std::string est;
  for (double v : tr.estimate) est += (est.empty() ? "" : " ") + fmt(v);
  est += " target " + fmt(tr.target);
  res.rows.push_back({"convolution", "final_within", tr.final_within, true, est});
  res.rows.push_back({"convolution", "monotone_approach", tr.monotone_approach, true, est});
  const SmallIntReport si = appendix_smallint_diagnostic(f, alpha, {1, 2, 4, 8}, {160, 320, 640, 1280, 2560});
  std::string last;
  for (const auto& row : si.values) last += (last.empty() ? "" : " ") + fmt(row.back());
  res.rows.push_back({"smallint", "stabilizes", si.stabilizes, true, last});
  res.rows.push_back({"smallint", "v_monotone", si.v_monotone, true, last});
  return res;
}

int cmd_predict(const ExperimentConfig& cfg, std::ostream& log) {
  const auto preds = predictions_for(cfg, nullptr);
  const std::string path = write_with_sidecar(cfg, ".predict.csv", [&](std::ostream& os) {
    os << kPredictionCsvHeader << '\n';
    for (const auto& p : preds) os << prediction_csv_row(p.prediction) << '\n';
  });
  for (const auto& p : preds) log << prediction_csv_row(p.prediction) << '\n';
  log << "wrote " << path << '\n';
  return 0;
}

int cmd_simulate(const ExperimentConfig& cfg, std::ostream& log) {
  const MapFamily family = build_family(cfg.model);
  if (!cfg.output.input.empty()) throw ConfigError("simulate ignores output.input; remove it");
  const SampleBatch batch = obtain_samples(cfg, family);
  const std::string path = out_path(cfg, ".batch");
  write_batch(path, batch, emit_config(cfg));
  log << "wrote " << batch.values.size() << " samples to " << path << '\n';
  if (batch.method == Method::perpetuity)
    log << "truncation: " << batch.truncation_terms << " terms, remainder bound " << batch.remainder_bound << '\n';
  return 0;
}

int cmd_estimate(const ExperimentConfig& cfg, std::ostream& log) {
  const MapFamily family = build_family(cfg.model);
  const SampleBatch batch = obtain_samples(cfg, family);
  for (Side side : {Side::right, Side::left}) {
    if (!wants(cfg, side)) continue;
    bool smoothed = false;
    const TailEstimate est = estimate_tail(cfg, family, batch.values, side, &smoothed);
    const RatioCurve rc = ratio_curve(est, [&](double t) { return family.coeff.reference_survival(t); });
    const std::string suffix = side == Side::right ? ".tail.csv" : ".left.tail.csv";
    const std::string path = write_with_sidecar(cfg, suffix, [&](std::ostream& os) { write_tail_csv(os, est, rc); });
    const auto last = reliable_index(est, cfg.analysis.min_exceed);
    log << (side == Side::right ? "right" : "left") << " tail (" << (smoothed ? "smoothed" : "ecdf") << "): ";
    if (last >= 0)
      log << "last reliable t = " << rc.t[last] << ", ratio = " << rc.ratio[last] << " [" << rc.lo[last] << ", "
          << rc.hi[last] << "], last-decade spread " << last_decade_spread(rc, last) << '\n';
    else
      log << "no reliable grid point\n";
    log << "wrote " << path << '\n';
  }
  return 0;
}

int cmd_verify(const ExperimentConfig& cfg, std::ostream& log) {
  const MapFamily family = build_family(cfg.model);
  const SampleBatch batch = obtain_samples(cfg, family);
  const VerifyResult res = run_verify(cfg, batch);
  for (const SideReport& r : res.sides) {
    const bool right = r.side == Side::right;
    std::string suffix = right ? ".verify.csv" : ".left.verify.csv";
    if (r.prediction.regime == Regime::ExampleD1 || r.prediction.regime == Regime::ExampleD2)
      suffix = "." + std::string(regime_name(r.prediction.regime)) + suffix;
    const std::string path = write_with_sidecar(cfg, suffix, [&](std::ostream& os) {
      write_verify_csv(os, r, cfg.analysis.tolerance, cfg.analysis.min_exceed);
    });
    log << regime_name(r.prediction.regime) << ' ' << (right ? "right" : "left") << ": predicted "
        << r.prediction.constant;
    if (r.last_reliable >= 0) {
      const auto j = static_cast<std::size_t>(r.last_reliable);
      log << ", final reliable t = " << r.ratio.t[j] << " ratio " << r.ratio.ratio[j] << " [" << r.ratio.lo[j]
          << ", " << r.ratio.hi[j] << "], all within tol " << r.all_within << ", final in CI " << r.final_in_ci
          << ", spread " << r.spread;
    } else {
      log << ", no reliable grid point";
    }
    log << (r.pass() ? " PASS" : " FAIL") << "\nwrote " << path << '\n';
  }
  return res.pass() ? 0 : static_cast<int>(ExitCode::assertion);
}

int cmd_dist_check(const ExperimentConfig& cfg, std::ostream& log) {
  const DistCheckResult res = run_dist_check(cfg);
  const auto esc = [](const std::string& s) {
    std::string o = "\"";
    for (char c : s) o += c == '"' ? std::string("\"\"") : std::string(1, c);
    return o + "\"";
  };
  const std::string path = write_with_sidecar(cfg, ".distcheck.csv", [&](std::ostream& os) {
    os << "check,clause,pass,conclusive,detail\n";
    for (const auto& r : res.rows)
      os << r.check << ',' << r.clause << ',' << r.pass << ',' << r.conclusive << ',' << esc(r.detail) << '\n';
  });
  for (const auto& r : res.rows)
    log << r.check << '.' << r.clause << ": " << (r.pass ? "pass" : "FAIL") << (r.conclusive ? "" : " (inconclusive)")
        << "  " << r.detail << '\n';
  log << "wrote " << path << '\n';
  return res.pass() ? 0 : static_cast<int>(ExitCode::assertion);
}

}  // namespace irf
