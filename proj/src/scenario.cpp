#include "agesir/scenario.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "agesir/errors.hpp"
#include "agesir/ivp_optimizer.hpp"

namespace agesir {

namespace {

int line_of(const YAML::Node& n) { return n.Mark().is_null() ? 0 : n.Mark().line + 1; }

[[noreturn]] void fail(const YAML::Node& n, const std::string& what) { throw ConfigError(what, line_of(n)); }

YAML::Node require(const YAML::Node& parent, const char* key) {
  YAML::Node child = parent[key];
  if (!child) fail(parent, std::string("missing key '") + key + "'");
  return child;
}

template <class T>
T as(const YAML::Node& n, const char* what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    fail(n, std::string("bad value for '") + what + "'");
  }
}

template <class T>
T get_or(const YAML::Node& parent, const char* key, T fallback) {
  const YAML::Node child = parent[key];
  return child ? as<T>(child, key) : fallback;
}

std::vector<double> get_values(const YAML::Node& parent, const char* key) {
  const YAML::Node child = require(parent, key);
  if (!child.IsSequence()) fail(child, std::string("'") + key + "' must be a list");
  return as<std::vector<double>>(child, key);
}

void check_keys(const YAML::Node& node, std::initializer_list<const char*> allowed) {
  if (!node.IsMap()) fail(node, "expected a mapping");
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) fail(kv.first, "unknown key '" + key + "'");
  }
}

KernelSpec parse_kernel(const YAML::Node& n) {
  KernelSpec k;
  const auto kind = as<std::string>(require(n, "kind"), "kind");
  if (kind == "constant") {
    check_keys(n, {"kind", "value"});
    k.kind = KernelSpec::Kind::kConstant;
    k.value = as<double>(require(n, "value"), "value");
  } else if (kind == "gaussian") {
    check_keys(n, {"kind", "b", "sigma_beta"});
    k.kind = KernelSpec::Kind::kGaussian;
    k.b = as<double>(require(n, "b"), "b");
    k.sigma_beta = as<double>(require(n, "sigma_beta"), "sigma_beta");
    if (!(k.sigma_beta > 0.0)) fail(n["sigma_beta"], "sigma_beta must be > 0");
  } else if (kind == "separable") {
    check_keys(n, {"kind", "values"});
    k.kind = KernelSpec::Kind::kSeparable;
    k.values = get_values(n, "values");
  } else if (kind == "matrix") {
    check_keys(n, {"kind", "file"});
    k.kind = KernelSpec::Kind::kMatrix;
    k.file = as<std::string>(require(n, "file"), "file");
  } else {
    fail(n["kind"], "unknown beta kind '" + kind + "' (constant | gaussian | separable | matrix)");
  }
  return k;
}

RateSpec parse_rate(const YAML::Node& n) {
  RateSpec r;
  const auto kind = as<std::string>(require(n, "kind"), "kind");
  if (kind == "constant") {
    check_keys(n, {"kind", "value"});
    r.kind = RateSpec::Kind::kConstant;
    r.value = as<double>(require(n, "value"), "value");
  } else if (kind == "affine") {
    check_keys(n, {"kind", "m_mu", "q_mu"});
    r.kind = RateSpec::Kind::kAffine;
    r.m_mu = as<double>(require(n, "m_mu"), "m_mu");
    r.q_mu = as<double>(require(n, "q_mu"), "q_mu");
  } else if (kind == "tabulated") {
    check_keys(n, {"kind", "values"});
    r.kind = RateSpec::Kind::kTabulated;
    r.values = get_values(n, "values");
  } else {
    fail(n["kind"], "unknown mu kind '" + kind + "' (constant | affine | tabulated)");
  }
  return r;
}

DensitySpec parse_density(const YAML::Node& n) {
  DensitySpec d;
  const auto kind = as<std::string>(require(n, "kind"), "kind");
  if (kind == "constant") {
    check_keys(n, {"kind", "value"});
    d.kind = DensitySpec::Kind::kConstant;
    d.value = as<double>(require(n, "value"), "value");
  } else if (kind == "gaussian") {
    check_keys(n, {"kind", "xbar", "sigma", "mass"});
    d.kind = DensitySpec::Kind::kGaussian;
    d.xbar = as<double>(require(n, "xbar"), "xbar");
    d.sigma = as<double>(require(n, "sigma"), "sigma");
    d.mass = get_or<double>(n, "mass", 1.0);
    if (!(d.sigma > 0.0)) fail(n["sigma"], "sigma must be > 0");
  } else if (kind == "tabulated") {
    check_keys(n, {"kind", "values"});
    d.kind = DensitySpec::Kind::kTabulated;
    d.values = get_values(n, "values");
  } else {
    fail(n["kind"], "unknown density kind '" + kind + "' (constant | gaussian | tabulated)");
  }
  return d;
}

AllocationSpec parse_allocation(const YAML::Node& n) {
  AllocationSpec a;
  const auto kind = as<std::string>(require(n, "kind"), "kind");
  if (kind == "none") {
    check_keys(n, {"kind"});
  } else if (kind == "fraction_of_s0") {
    check_keys(n, {"kind", "fraction"});
    a.kind = AllocationSpec::Kind::kFractionOfS0;
    a.fraction = as<double>(require(n, "fraction"), "fraction");
    if (a.fraction < 0.0 || a.fraction > 1.0) fail(n["fraction"], "fraction must lie in [0, 1]");
  } else if (kind == "bathtub") {
    check_keys(n, {"kind"});
    a.kind = AllocationSpec::Kind::kBathtub;
  } else if (kind == "tabulated") {
    check_keys(n, {"kind", "values"});
    a.kind = AllocationSpec::Kind::kTabulated;
    a.values = get_values(n, "values");
  } else {
    fail(n["kind"], "unknown allocation kind '" + kind + "' (none | fraction_of_s0 | bathtub | tabulated)");
  }
  return a;
}

PlanSpec parse_plan(const YAML::Node& n) {
  check_keys(n, {"profile", "start", "width", "rate", "horizon"});
  PlanSpec p;
  const auto kind = as<std::string>(require(n, "profile"), "profile");
  if (kind == "none") p.kind = PlanSpec::Kind::kNone;
  else if (kind == "bump") p.kind = PlanSpec::Kind::kBump;
  else if (kind == "box") p.kind = PlanSpec::Kind::kBox;
  else if (kind == "exponential") p.kind = PlanSpec::Kind::kExponential;
  else fail(n["profile"], "unknown plan profile '" + kind + "' (none | bump | box | exponential)");
  p.start = get_or<double>(n, "start", p.start);
  p.width = get_or<double>(n, "width", p.width);
  p.rate = get_or<double>(n, "rate", p.rate);
  p.horizon = get_or<double>(n, "horizon", p.horizon);
  return p;
}

const char* name_of(KernelSpec::Kind k) {
  switch (k) {
    case KernelSpec::Kind::kConstant: return "constant";
    case KernelSpec::Kind::kGaussian: return "gaussian";
    case KernelSpec::Kind::kSeparable: return "separable";
    case KernelSpec::Kind::kMatrix: return "matrix";
  }
  return "";
}

const char* name_of(OptimizerSpec::Method m) {
  switch (m) {
    case OptimizerSpec::Method::kAuto: return "auto";
    case OptimizerSpec::Method::kBathtub: return "bathtub";
    case OptimizerSpec::Method::kProjectedGradient: return "projected_gradient";
    case OptimizerSpec::Method::kBoth: return "both";
  }
  return "";
}

const char* name_of(PlanSpec::Kind k) {
  switch (k) {
    case PlanSpec::Kind::kNone: return "none";
    case PlanSpec::Kind::kBump: return "bump";
    case PlanSpec::Kind::kBox: return "box";
    case PlanSpec::Kind::kExponential: return "exponential";
  }
  return "";
}

void emit_density(YAML::Emitter& e, const DensitySpec& d) {
  e << YAML::BeginMap;
  switch (d.kind) {
    case DensitySpec::Kind::kConstant:
      e << YAML::Key << "kind" << YAML::Value << "constant" << YAML::Key << "value" << YAML::Value << d.value;
      break;
    case DensitySpec::Kind::kGaussian:
      e << YAML::Key << "kind" << YAML::Value << "gaussian" << YAML::Key << "xbar" << YAML::Value << d.xbar
        << YAML::Key << "sigma" << YAML::Value << d.sigma << YAML::Key << "mass" << YAML::Value << d.mass;
      break;
    case DensitySpec::Kind::kTabulated:
      e << YAML::Key << "kind" << YAML::Value << "tabulated" << YAML::Key << "values" << YAML::Value << YAML::Flow
        << d.values;
      break;
  }
  e << YAML::EndMap;
}

Eigen::VectorXd tabulated(const std::vector<double>& values, const AgeGrid& g, const char* what) {
  if (values.size() != g.size())
    throw ConfigError(std::string(what) + ": " + std::to_string(values.size()) + " values for " +
                      std::to_string(g.size()) + " nodes");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

AgeDensity build_density(const DensitySpec& d, const GridPtr& g, const char* what) {
  switch (d.kind) {
    case DensitySpec::Kind::kConstant: return AgeDensity::constant(g, d.value);
    case DensitySpec::Kind::kGaussian:
      return AgeDensity::from_function(g, [&](double x) {
        const double z = (x - d.xbar) / d.sigma;
        return d.mass * std::exp(-0.5 * z * z) / (d.sigma * std::sqrt(2.0 * std::numbers::pi));
      });
    case DensitySpec::Kind::kTabulated: return AgeDensity(g, tabulated(d.values, *g, what));
  }
  throw ConfigError(std::string(what) + ": unknown density kind");
}

Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path, std::size_t n) {
  std::ifstream in(path);
  if (!in) throw ConfigError("beta matrix file not found: " + path.string());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  std::string line;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (row >= n) throw ConfigError(path.string() + ": more than " + std::to_string(n) + " rows", static_cast<int>(row + 1));
    std::stringstream ss(line);
    std::string cell;
    std::size_t col = 0;
    while (std::getline(ss, cell, ',')) {
      if (col >= n) throw ConfigError(path.string() + ": too many columns", static_cast<int>(row + 1));
      try {
        m(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col)) = std::stod(cell);
      } catch (const std::exception&) {
        throw ConfigError(path.string() + ": bad number '" + cell + "'", static_cast<int>(row + 1));
      }
      ++col;
    }
    if (col != n) throw ConfigError(path.string() + ": expected " + std::to_string(n) + " columns", static_cast<int>(row + 1));
    ++row;
  }
  if (row != n) throw ConfigError(path.string() + ": expected " + std::to_string(n) + " rows");
  return m;
}

}  // namespace

bool ScenarioConfig::operator==(const ScenarioConfig& o) const {
  auto sim_eq = [](const SimConfig& a, const SimConfig& b) {
    return a.dt == b.dt && a.dt_active == b.dt_active && a.t_max == b.t_max && a.eps_i == b.eps_i &&
           a.eps_ds == b.eps_ds && a.snapshot_stride == b.snapshot_stride && a.max_halvings == b.max_halvings &&
           a.tol_s_rel == b.tol_s_rel && a.allow_clipping == b.allow_clipping && a.probe_times == b.probe_times;
  };
  return name == o.name && a_max == o.a_max && n == o.n && relaxed_checks == o.relaxed_checks && beta == o.beta &&
         mu == o.mu && s0 == o.s0 && i0 == o.i0 && budget == o.budget &&
         budget_bound_fraction == o.budget_bound_fraction && sim_eq(sim, o.sim) && optimizer == o.optimizer &&
         allocation == o.allocation && plan == o.plan && equivalence == o.equivalence && sweep == o.sweep &&
         seed == o.seed && threads == o.threads && output_dir == o.output_dir;
}

ScenarioConfig parse_scenario(const std::string& text, const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::ParserException& e) {
    throw ConfigError(e.msg, e.mark.line + 1);
  }
  if (!root || !root.IsMap()) throw ConfigError("scenario file must be a mapping", 1);
  check_keys(root, {"name", "grid", "model", "budget", "simulation", "optimizer", "allocation", "plan",
                    "equivalence", "sweep", "seed", "threads", "output"});

  ScenarioConfig c;
  c.base_dir = base_dir;
  c.name = get_or<std::string>(root, "name", c.name);

  const YAML::Node grid = require(root, "grid");
  check_keys(grid, {"a_max", "n"});
  c.a_max = get_or<double>(grid, "a_max", c.a_max);
  c.n = as<std::size_t>(require(grid, "n"), "n");
  if (c.n < 2) fail(grid["n"], "grid.n must be >= 2");
  if (!(c.a_max > 0.0)) fail(grid, "grid.a_max must be > 0");

  const YAML::Node model = require(root, "model");
  check_keys(model, {"beta", "mu", "s0", "i0", "checks"});
  c.beta = parse_kernel(require(model, "beta"));
  c.mu = parse_rate(require(model, "mu"));
  c.s0 = parse_density(require(model, "s0"));
  c.i0 = parse_density(require(model, "i0"));
  if (const YAML::Node checks = model["checks"]) {
    const auto s = as<std::string>(checks, "checks");
    if (s != "strict" && s != "relaxed") fail(checks, "checks must be 'strict' or 'relaxed'");
    c.relaxed_checks = s == "relaxed";
  }

  if (const YAML::Node b = root["budget"]) {
    if (b.IsMap()) {
      check_keys(b, {"fraction_of_bound"});
      c.budget_bound_fraction = as<double>(require(b, "fraction_of_bound"), "fraction_of_bound");
      if (!(c.budget_bound_fraction > 0.0)) fail(b, "fraction_of_bound must be > 0");
    } else {
      c.budget = as<double>(b, "budget");
      if (c.budget < 0.0) fail(b, "budget must be >= 0");
    }
  }

  if (const YAML::Node s = root["simulation"]) {
    check_keys(s, {"dt", "dt_active", "t_max", "eps_i", "eps_ds", "snapshot_stride", "max_halvings", "tol_s_rel"});
    c.sim.dt = get_or<double>(s, "dt", c.sim.dt);
    c.sim.dt_active = get_or<double>(s, "dt_active", c.sim.dt_active);
    c.sim.t_max = get_or<double>(s, "t_max", c.sim.t_max);
    c.sim.eps_i = get_or<double>(s, "eps_i", c.sim.eps_i);
    c.sim.eps_ds = get_or<double>(s, "eps_ds", c.sim.eps_ds);
    c.sim.snapshot_stride = get_or<std::size_t>(s, "snapshot_stride", c.sim.snapshot_stride);
    c.sim.max_halvings = get_or<int>(s, "max_halvings", c.sim.max_halvings);
    c.sim.tol_s_rel = get_or<double>(s, "tol_s_rel", c.sim.tol_s_rel);
    if (!(c.sim.dt > 0.0)) fail(s, "simulation.dt must be > 0");
  }

  if (const YAML::Node o = root["optimizer"]) {
    check_keys(o, {"method", "tol_kkt", "max_iter"});
    const auto m = get_or<std::string>(o, "method", "auto");
    if (m == "auto") c.optimizer.method = OptimizerSpec::Method::kAuto;
    else if (m == "bathtub") c.optimizer.method = OptimizerSpec::Method::kBathtub;
    else if (m == "projected_gradient") c.optimizer.method = OptimizerSpec::Method::kProjectedGradient;
    else if (m == "both") c.optimizer.method = OptimizerSpec::Method::kBoth;
    else fail(o["method"], "unknown optimizer method '" + m + "'");
    c.optimizer.tol_kkt = get_or<double>(o, "tol_kkt", c.optimizer.tol_kkt);
    c.optimizer.max_iter = get_or<int>(o, "max_iter", c.optimizer.max_iter);
  }

  if (const YAML::Node a = root["allocation"]) c.allocation = parse_allocation(a);
  if (const YAML::Node p = root["plan"]) c.plan = parse_plan(p);

  if (const YAML::Node e = root["equivalence"]) {
    check_keys(e, {"epsilons", "audit_plans"});
    if (e["epsilons"]) c.equivalence.epsilons = get_values(e, "epsilons");
    c.equivalence.audit_plans = get_or<int>(e, "audit_plans", c.equivalence.audit_plans);
    for (double eps : c.equivalence.epsilons)
      if (!(eps > 0.0)) fail(e["epsilons"], "epsilons must be > 0");
  }

  if (const YAML::Node s = root["sweep"]) {
    check_keys(s, {"points", "max_budget"});
    c.sweep.points = get_or<int>(s, "points", c.sweep.points);
    c.sweep.max_budget = get_or<double>(s, "max_budget", c.sweep.max_budget);
    if (c.sweep.points < 2) fail(s, "sweep.points must be >= 2");
  }

  c.seed = get_or<std::uint64_t>(root, "seed", c.seed);
  c.threads = get_or<unsigned>(root, "threads", c.threads);
  if (const YAML::Node out = root["output"]) {
    check_keys(out, {"dir"});
    c.output_dir = get_or<std::string>(out, "dir", c.output_dir);
  }
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str(), path.parent_path());
}

std::string dump_scenario(const ScenarioConfig& c) {
  YAML::Emitter e;
  e.SetDoublePrecision(17);
  e << YAML::BeginMap;
  e << YAML::Key << "name" << YAML::Value << c.name;
  e << YAML::Key << "grid" << YAML::Value << YAML::BeginMap << YAML::Key << "a_max" << YAML::Value << c.a_max
    << YAML::Key << "n" << YAML::Value << c.n << YAML::EndMap;

  e << YAML::Key << "model" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "beta" << YAML::Value << YAML::BeginMap << YAML::Key << "kind" << YAML::Value
    << name_of(c.beta.kind);
  switch (c.beta.kind) {
    case KernelSpec::Kind::kConstant: e << YAML::Key << "value" << YAML::Value << c.beta.value; break;
    case KernelSpec::Kind::kGaussian:
      e << YAML::Key << "b" << YAML::Value << c.beta.b << YAML::Key << "sigma_beta" << YAML::Value << c.beta.sigma_beta;
      break;
    case KernelSpec::Kind::kSeparable: e << YAML::Key << "values" << YAML::Value << YAML::Flow << c.beta.values; break;
    case KernelSpec::Kind::kMatrix: e << YAML::Key << "file" << YAML::Value << c.beta.file; break;
  }
  e << YAML::EndMap;
  e << YAML::Key << "mu" << YAML::Value << YAML::BeginMap;
  switch (c.mu.kind) {
    case RateSpec::Kind::kConstant:
      e << YAML::Key << "kind" << YAML::Value << "constant" << YAML::Key << "value" << YAML::Value << c.mu.value;
      break;
    case RateSpec::Kind::kAffine:
      e << YAML::Key << "kind" << YAML::Value << "affine" << YAML::Key << "m_mu" << YAML::Value << c.mu.m_mu
        << YAML::Key << "q_mu" << YAML::Value << c.mu.q_mu;
      break;
    case RateSpec::Kind::kTabulated:
      e << YAML::Key << "kind" << YAML::Value << "tabulated" << YAML::Key << "values" << YAML::Value << YAML::Flow
        << c.mu.values;
      break;
  }
  e << YAML::EndMap;
  e << YAML::Key << "s0" << YAML::Value;
  emit_density(e, c.s0);
  e << YAML::Key << "i0" << YAML::Value;
  emit_density(e, c.i0);
  e << YAML::Key << "checks" << YAML::Value << (c.relaxed_checks ? "relaxed" : "strict");
  e << YAML::EndMap;

  if (c.budget_bound_fraction > 0.0)
    e << YAML::Key << "budget" << YAML::Value << YAML::BeginMap << YAML::Key << "fraction_of_bound" << YAML::Value
      << c.budget_bound_fraction << YAML::EndMap;
  else
    e << YAML::Key << "budget" << YAML::Value << c.budget;

  e << YAML::Key << "simulation" << YAML::Value << YAML::BeginMap;
  e << YAML::Key << "dt" << YAML::Value << c.sim.dt << YAML::Key << "dt_active" << YAML::Value << c.sim.dt_active
    << YAML::Key << "t_max" << YAML::Value << c.sim.t_max << YAML::Key << "eps_i" << YAML::Value << c.sim.eps_i
    << YAML::Key << "eps_ds" << YAML::Value << c.sim.eps_ds << YAML::Key << "snapshot_stride" << YAML::Value
    << c.sim.snapshot_stride << YAML::Key << "max_halvings" << YAML::Value << c.sim.max_halvings << YAML::Key
    << "tol_s_rel" << YAML::Value << c.sim.tol_s_rel;
  e << YAML::EndMap;

  e << YAML::Key << "optimizer" << YAML::Value << YAML::BeginMap << YAML::Key << "method" << YAML::Value
    << name_of(c.optimizer.method) << YAML::Key << "tol_kkt" << YAML::Value << c.optimizer.tol_kkt << YAML::Key
    << "max_iter" << YAML::Value << c.optimizer.max_iter << YAML::EndMap;

  e << YAML::Key << "allocation" << YAML::Value << YAML::BeginMap;
  switch (c.allocation.kind) {
    case AllocationSpec::Kind::kNone: e << YAML::Key << "kind" << YAML::Value << "none"; break;
    case AllocationSpec::Kind::kFractionOfS0:
      e << YAML::Key << "kind" << YAML::Value << "fraction_of_s0" << YAML::Key << "fraction" << YAML::Value
        << c.allocation.fraction;
      break;
    case AllocationSpec::Kind::kBathtub: e << YAML::Key << "kind" << YAML::Value << "bathtub"; break;
    case AllocationSpec::Kind::kTabulated:
      e << YAML::Key << "kind" << YAML::Value << "tabulated" << YAML::Key << "values" << YAML::Value << YAML::Flow
        << c.allocation.values;
      break;
  }
  e << YAML::EndMap;

  e << YAML::Key << "plan" << YAML::Value << YAML::BeginMap << YAML::Key << "profile" << YAML::Value
    << name_of(c.plan.kind) << YAML::Key << "start" << YAML::Value << c.plan.start << YAML::Key << "width"
    << YAML::Value << c.plan.width << YAML::Key << "rate" << YAML::Value << c.plan.rate << YAML::Key << "horizon"
    << YAML::Value << c.plan.horizon << YAML::EndMap;

  e << YAML::Key << "equivalence" << YAML::Value << YAML::BeginMap << YAML::Key << "epsilons" << YAML::Value
    << YAML::Flow << c.equivalence.epsilons << YAML::Key << "audit_plans" << YAML::Value << c.equivalence.audit_plans
    << YAML::EndMap;
  e << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap << YAML::Key << "points" << YAML::Value
    << c.sweep.points << YAML::Key << "max_budget" << YAML::Value << c.sweep.max_budget << YAML::EndMap;
  e << YAML::Key << "seed" << YAML::Value << c.seed;
  e << YAML::Key << "threads" << YAML::Value << c.threads;
  e << YAML::Key << "output" << YAML::Value << YAML::BeginMap << YAML::Key << "dir" << YAML::Value << c.output_dir
    << YAML::EndMap;
  e << YAML::EndMap;
  return std::string(e.c_str()) + "\n";
}

EpidemicModel build_model(const ScenarioConfig& c) {
  const GridPtr g = make_grid(c.a_max, c.n);
  auto kernel = [&]() -> Kernel {
    switch (c.beta.kind) {
      case KernelSpec::Kind::kConstant:
        return Kernel::from_function(g, [&](double, double) { return c.beta.value; });
      case KernelSpec::Kind::kGaussian:
        return Kernel::from_function(g, [&](double x, double y) {
          return c.beta.b * std::exp(-(x - y) * (x - y) / c.beta.sigma_beta);
        });
      case KernelSpec::Kind::kSeparable: {
        const Eigen::VectorXd col = tabulated(c.beta.values, *g, "beta");
        const auto n = static_cast<Eigen::Index>(c.n);
        return Kernel(g, Eigen::VectorXd::Ones(n) * col.transpose());
      }
      case KernelSpec::Kind::kMatrix: {
        std::filesystem::path p(c.beta.file);
        if (p.is_relative()) p = c.base_dir / p;
        return Kernel(g, read_matrix_csv(p, c.n));
      }
    }
    throw ConfigError("unknown beta kind");
  };
  auto rate = [&]() -> AgeDensity {
    switch (c.mu.kind) {
      case RateSpec::Kind::kConstant: return AgeDensity::constant(g, c.mu.value);
      case RateSpec::Kind::kAffine:
        return AgeDensity::from_function(g, [&](double x) { return c.mu.m_mu * x + c.mu.q_mu; });
      case RateSpec::Kind::kTabulated: return AgeDensity(g, tabulated(c.mu.values, *g, "mu"));
    }
    throw ConfigError("unknown mu kind");
  };
  try {
    return EpidemicModel(kernel(), rate(), build_density(c.s0, g, "s0"), build_density(c.i0, g, "i0"),
                         c.relaxed_checks ? ModelChecks::kRelaxed : ModelChecks::kStrict);
  } catch (const ModelError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
}

Budget resolve_budget(const ScenarioConfig& c, const EpidemicModel& model) {
  if (c.budget_bound_fraction > 0.0) {
    const RatioSource src = model.separable() ? RatioSource::kSeparable : RatioSource::kColumnMean;
    return Budget(c.budget_bound_fraction * bathtub_budget_bound(model, src));
  }
  return Budget(c.budget);
}

StaticAllocation build_allocation(const ScenarioConfig& c, const EpidemicModel& model) {
  switch (c.allocation.kind) {
    case AllocationSpec::Kind::kNone: return StaticAllocation::none(model);
    case AllocationSpec::Kind::kFractionOfS0: return StaticAllocation::fraction_of_s0(model, c.allocation.fraction);
    case AllocationSpec::Kind::kBathtub: {
      const RatioSource src = model.separable() ? RatioSource::kSeparable : RatioSource::kColumnMean;
      return bathtub_allocate(model, resolve_budget(c, model), src).allocation;
    }
    case AllocationSpec::Kind::kTabulated:
      try {
        return StaticAllocation(model, AgeDensity(model.grid(), tabulated(c.allocation.values, *model.grid(), "allocation")));
      } catch (const ModelError& e) {
        throw ConfigError(std::string("allocation: ") + e.what());
      }
  }
  throw ConfigError("unknown allocation kind");
}

VaccinationPlan build_plan(const ScenarioConfig& c, const EpidemicModel& model) {
  if (c.plan.kind == PlanSpec::Kind::kNone || c.allocation.kind == AllocationSpec::Kind::kNone)
    return VaccinationPlan::none(model.grid());
  const AgeDensity density = build_allocation(c, model).v();
  try {
    switch (c.plan.kind) {
      case PlanSpec::Kind::kBump: return VaccinationPlan::separable(TimeProfile::bump(c.plan.start, c.plan.width), density);
      case PlanSpec::Kind::kBox: return VaccinationPlan::separable(TimeProfile::box(c.plan.start, c.plan.width), density);
      case PlanSpec::Kind::kExponential:
        return VaccinationPlan::separable(TimeProfile::exponential(c.plan.rate, c.plan.horizon), density);
      case PlanSpec::Kind::kNone: break;
    }
  } catch (const ModelError& e) {
    throw ConfigError(std::string("plan: ") + e.what());
  }
  return VaccinationPlan::none(model.grid());
}

ScenarioConfig homogeneous_scenario(double beta, std::size_t n) {
  ScenarioConfig c;
  c.name = "homogeneous";
  c.a_max = 1.0;
  c.n = n;
  c.beta = {KernelSpec::Kind::kConstant, beta, 0.0, 0.0, {}, {}};
  c.mu = {RateSpec::Kind::kConstant, 1.0, 0.0, 0.0, {}};
  c.s0 = {DensitySpec::Kind::kConstant, 1.0, 0.0, 1.0, 1.0, {}};
  c.i0 = {DensitySpec::Kind::kConstant, 1e-4, 0.0, 1.0, 1.0, {}};
  return c;
}

ScenarioConfig reference_scenario(std::size_t n) {
  ScenarioConfig c;
  c.name = "reference";
  c.a_max = 1.0;
  c.n = n;
  c.beta = {KernelSpec::Kind::kGaussian, 0.0, 0.05, 0.05, {}, {}};
  c.mu = {RateSpec::Kind::kAffine, 0.0, 0.4, 0.1, {}};
  c.s0 = {DensitySpec::Kind::kGaussian, 0.0, 0.3, 0.5, 1.0, {}};
  c.i0 = {DensitySpec::Kind::kConstant, 1e-4, 0.0, 1.0, 1.0, {}};
  c.budget_bound_fraction = 0.5;
  c.allocation.kind = AllocationSpec::Kind::kBathtub;
  c.plan = {PlanSpec::Kind::kBump, 0.0, 0.02, 1.0, 1.0};
  return c;
}

ScenarioConfig separable_scenario(std::size_t n) {
  ScenarioConfig c;
  c.name = "separable";
  c.a_max = 1.0;
  c.n = n;
  c.beta.kind = KernelSpec::Kind::kSeparable;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = static_cast<double>(i) / static_cast<double>(n - 1);
    c.beta.values.push_back(1.5 + std::sin(5.0 * y));
  }
  c.mu = {RateSpec::Kind::kAffine, 0.0, 1.0, 0.5, {}};
  c.s0 = {DensitySpec::Kind::kConstant, 2.0, 0.0, 1.0, 1.0, {}};
  c.i0 = {DensitySpec::Kind::kConstant, 1e-3, 0.0, 1.0, 1.0, {}};
  c.budget_bound_fraction = 0.5;
  c.allocation.kind = AllocationSpec::Kind::kBathtub;
  return c;
}

}  // namespace agesir
