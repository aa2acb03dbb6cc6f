#include "irf/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "irf/errors.hpp"

namespace irf {
namespace {

namespace pt = boost::property_tree;

// Shortest text that parses back to the same double.
std::string num(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double to_double(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  char* end = nullptr;
  const double x = std::strtod(v.c_str(), &end);
  if (v.empty() || end != v.c_str() + v.size()) throw ConfigError(key + ": expected a real number, got '" + v + "'");
  return x;
}

std::uint64_t to_uint(const std::string& key, const std::string& raw) {
  const std::string v = trim(raw);
  if (v.empty() || v.find_first_not_of("0123456789") != std::string::npos)
    throw ConfigError(key + ": expected a non-negative integer, got '" + v + "'");
  errno = 0;
  const unsigned long long x = std::strtoull(v.c_str(), nullptr, 10);
  if (errno == ERANGE) throw ConfigError(key + ": integer out of range");
  return x;
}

TailModel to_model(const std::string& key, const std::string& raw) {
  try {
    return TailModel::parse(trim(raw));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(key + ": " + e.what());
  }
}

void check_keys(const std::string& section, const pt::ptree& node, const std::set<std::string>& allowed) {
  for (const auto& [k, child] : node) {
    if (!child.empty()) throw ConfigError("[" + section + "] " + k + ": nested keys are not allowed");
    if (!allowed.count(k)) throw ConfigError("[" + section + "]: unknown key '" + k + "'");
  }
}

const std::set<std::string> kInputKeys = {"mu",      "sigma",   "ea",       "ex",      "ex_plus",
                                          "c_b",     "xi_plus", "xi_minus", "mu_plus", "mu_minus"};

std::string dependence_text(const ModelSection& m) {
  switch (m.dependence) {
    case Dependence::independent: return "independent";
    case Dependence::equal: return "equal";
    case Dependence::signed_a: return "signed(p_plus=" + num(m.p_plus) + ")";
  }
  return {};
}

}  // namespace

TGridRule parse_t_grid(const std::string& text) {
  const std::string s = trim(text);
  TGridRule rule;
  const std::string prefix = "quantile(";
  if (s.rfind(prefix, 0) == 0) {
    if (s.back() != ')') throw ConfigError("t_grid: missing ')'");
    std::stringstream body(s.substr(prefix.size(), s.size() - prefix.size() - 1));
    std::string item;
    while (std::getline(body, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ConfigError("t_grid: expected key=value, got '" + trim(item) + "'");
      const std::string k = trim(item.substr(0, eq));
      const std::string v = item.substr(eq + 1);
      if (k == "lo")
        rule.lo = to_double("t_grid.lo", v);
      else if (k == "hi_exceed")
        rule.hi_exceed = to_double("t_grid.hi_exceed", v);
      else if (k == "points")
        rule.points = to_uint("t_grid.points", v);
      else
        throw ConfigError("t_grid: unknown key '" + k + "'");
    }
    if (!(rule.lo > 0 && rule.lo < 1)) throw ConfigError("t_grid: lo must lie in (0, 1)");
    if (!(rule.hi_exceed >= 1)) throw ConfigError("t_grid: hi_exceed must be >= 1");
    if (rule.points < 2) throw ConfigError("t_grid: points must be >= 2");
    return rule;
  }
  rule.from_quantiles = false;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) rule.values.push_back(to_double("t_grid", item));
  if (rule.values.empty()) throw ConfigError("t_grid: empty list");
  for (std::size_t j = 0; j < rule.values.size(); ++j) {
    if (!(rule.values[j] > 0)) throw ConfigError("t_grid: values must be > 0");
    if (j > 0 && !(rule.values[j] > rule.values[j - 1])) throw ConfigError("t_grid: values must be strictly increasing");
  }
  return rule;
}

std::string t_grid_to_string(const TGridRule& rule) {
  if (rule.from_quantiles)
    return "quantile(lo=" + num(rule.lo) + ", hi_exceed=" + num(rule.hi_exceed) +
           ", points=" + std::to_string(rule.points) + ")";
  std::string out;
  for (std::size_t j = 0; j < rule.values.size(); ++j) out += (j ? ", " : "") + num(rule.values[j]);
  return out;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  const SimConfig& s = sim;
  const SimConfig& t = o.sim;
  return model == o.model && analysis == o.analysis && output == o.output && s.n_samples == t.n_samples &&
         s.burn_in == t.burn_in && s.seed == t.seed && s.chunk_size == t.chunk_size && s.method == t.method &&
         s.truncation_eps == t.truncation_eps && s.x_init == t.x_init && s.workers == t.workers;
}

MapFamily build_family(const ModelSection& m) {
  if (!m.a) throw ConfigError("[model] a is required");
  if (!m.b) throw ConfigError("[model] b is required");
  try {
    const CoeffLaw law = CoeffLaw::make(*m.a, *m.b, m.dependence, m.p_plus, m.c_b);
    switch (m.kind) {
      case MapKind::affine: return MapFamily::affine(law);
      case MapKind::max_affine: return MapFamily::max_affine(law);
      case MapKind::pos_part_affine: return MapFamily::pos_part_affine(law, m.lower_b);
      case MapKind::sqrt_log:
        if (!m.c) throw ConfigError("[model] c is required for sqrt_log");
        return MapFamily::sqrt_log(law, *m.c, m.c_c);
    }
  } catch (const PreconditionError& e) {
    throw ConfigError(std::string("[model] ") + e.what());
  }
  throw ConfigError("[model] unsupported kind");
}

ExperimentConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream is(text);
  try {
    pt::read_ini(is, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  ExperimentConfig cfg;
  for (const auto& [name, node] : tree) {
    if (node.empty()) throw ConfigError("key '" + name + "' outside of a section");
    if (name == "model") {
      check_keys(name, node, {"kind", "a", "b", "c", "dependence", "c_b", "c_c", "lower_b"});
      ModelSection& m = cfg.model;
      if (auto v = node.get_optional<std::string>("kind")) m.kind = parse_map_kind(*v);
      if (auto v = node.get_optional<std::string>("a")) m.a = to_model("a", *v);
      if (auto v = node.get_optional<std::string>("b")) m.b = to_model("b", *v);
      if (auto v = node.get_optional<std::string>("c")) m.c = to_model("c", *v);
      if (auto v = node.get_optional<std::string>("dependence")) m.dependence = parse_dependence(*v, m.p_plus);
      if (auto v = node.get_optional<std::string>("c_b")) m.c_b = to_double("c_b", *v);
      if (auto v = node.get_optional<std::string>("c_c")) m.c_c = to_double("c_c", *v);
      if (auto v = node.get_optional<std::string>("lower_b")) m.lower_b = to_double("lower_b", *v);
    } else if (name == "sim") {
      check_keys(name, node,
                 {"method", "n_samples", "burn_in", "seed", "chunk_size", "truncation_eps", "x_init", "workers"});
      SimConfig& s = cfg.sim;
      if (auto v = node.get_optional<std::string>("method")) s.method = parse_method(trim(*v));
      if (auto v = node.get_optional<std::string>("n_samples")) s.n_samples = to_uint("n_samples", *v);
      if (auto v = node.get_optional<std::string>("burn_in")) s.burn_in = to_uint("burn_in", *v);
      if (auto v = node.get_optional<std::string>("seed")) s.seed = to_uint("seed", *v);
      if (auto v = node.get_optional<std::string>("chunk_size")) s.chunk_size = to_uint("chunk_size", *v);
      if (auto v = node.get_optional<std::string>("truncation_eps")) s.truncation_eps = to_double("truncation_eps", *v);
      if (auto v = node.get_optional<std::string>("x_init")) s.x_init = to_double("x_init", *v);
      if (auto v = node.get_optional<std::string>("workers"))
        s.workers = static_cast<int>(std::min<std::uint64_t>(to_uint("workers", *v), 4096));
    } else if (name == "analysis") {
      std::set<std::string> allowed = {"alpha",     "t_grid",    "regime",    "tail",
                                       "estimator", "tolerance", "min_exceed"};
      allowed.insert(kInputKeys.begin(), kInputKeys.end());
      check_keys(name, node, allowed);
      AnalysisSection& a = cfg.analysis;
      for (const auto& [k, child] : node) {
        const std::string v = trim(child.data());
        if (k == "alpha")
          a.alpha = to_double(k, v);
        else if (k == "t_grid")
          a.t_grid = parse_t_grid(v);
        else if (k == "regime")
          a.regime = v;
        else if (k == "tail")
          a.tail = v;
        else if (k == "estimator")
          a.estimator = v;
        else if (k == "tolerance")
          a.tolerance = to_double(k, v);
        else if (k == "min_exceed")
          a.min_exceed = to_double(k, v);
        else
          a.inputs[k] = to_double(k, v);
      }
      static const std::set<std::string> regimes = {"auto", "grey", "kevei", "indep", "affine", "ifs", "example"};
      if (!regimes.count(a.regime)) throw ConfigError("[analysis] unknown regime '" + a.regime + "'");
      if (a.tail != "right" && a.tail != "left" && a.tail != "both")
        throw ConfigError("[analysis] tail must be right | left | both");
      if (a.estimator != "auto" && a.estimator != "smoothed" && a.estimator != "ecdf")
        throw ConfigError("[analysis] estimator must be auto | smoothed | ecdf");
      if (!(a.tolerance > 0)) throw ConfigError("[analysis] tolerance must be > 0");
      if (a.alpha && !(*a.alpha > 0)) throw ConfigError("[analysis] alpha must be > 0");
    } else if (name == "output") {
      check_keys(name, node, {"dir", "prefix", "input"});
      OutputSection& o = cfg.output;
      if (auto v = node.get_optional<std::string>("dir")) o.dir = trim(*v);
      if (auto v = node.get_optional<std::string>("prefix")) o.prefix = trim(*v);
      if (auto v = node.get_optional<std::string>("input")) o.input = trim(*v);
    } else {
      throw ConfigError("unknown section [" + name + "]");
    }
  }
  if (tree.find("model") != tree.not_found()) build_family(cfg.model);
  if (tree.find("sim") != tree.not_found()) {
    // n_samples = 0 is a valid "not set" for commands that do not simulate.
    SimConfig probe = cfg.sim;
    if (probe.n_samples == 0) probe.n_samples = 1;
    probe.validate();
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config '" + path + "'");
  std::stringstream ss;
  ss << is.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const ExperimentConfig& cfg) {
  std::ostringstream os;
  const ModelSection& m = cfg.model;
  os << "[model]\n";
  os << "kind = " << map_kind_name(m.kind) << '\n';
  if (m.a) os << "a = " << m.a->to_string() << '\n';
  if (m.b) os << "b = " << m.b->to_string() << '\n';
  if (m.c) os << "c = " << m.c->to_string() << '\n';
  os << "dependence = " << dependence_text(m) << '\n';
  if (m.c_b) os << "c_b = " << num(*m.c_b) << '\n';
  if (m.c_c) os << "c_c = " << num(*m.c_c) << '\n';
  if (m.kind == MapKind::pos_part_affine) os << "lower_b = " << num(m.lower_b) << '\n';

  const SimConfig& s = cfg.sim;
  os << "\n[sim]\n";
  os << "method = " << method_name(s.method) << '\n';
  os << "n_samples = " << s.n_samples << '\n';
  os << "burn_in = " << s.burn_in << '\n';
  os << "seed = " << s.seed << '\n';
  os << "chunk_size = " << s.chunk_size << '\n';
  os << "truncation_eps = " << num(s.truncation_eps) << '\n';
  os << "x_init = " << num(s.x_init) << '\n';
  os << "workers = " << s.workers << '\n';

  const AnalysisSection& a = cfg.analysis;
  os << "\n[analysis]\n";
  if (a.alpha) os << "alpha = " << num(*a.alpha) << '\n';
  os << "t_grid = " << t_grid_to_string(a.t_grid) << '\n';
  os << "regime = " << a.regime << '\n';
  os << "tail = " << a.tail << '\n';
  os << "estimator = " << a.estimator << '\n';
  os << "tolerance = " << num(a.tolerance) << '\n';
  os << "min_exceed = " << num(a.min_exceed) << '\n';
  for (const auto& [k, v] : a.inputs) os << k << " = " << num(v) << '\n';

  const OutputSection& o = cfg.output;
  os << "\n[output]\n";
  os << "dir = " << o.dir << '\n';
  os << "prefix = " << o.prefix << '\n';
  if (!o.input.empty()) os << "input = " << o.input << '\n';
  return os.str();
}

}  // namespace irf
