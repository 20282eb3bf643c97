#include "msq/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "msq/parallel.hpp"

namespace msq {

// ---------------------------------------------------------------- config

int ExperimentConfig::arity() const { return make_kernel(kernel, mesh.dimension()).arity(); }

std::vector<double> ExperimentConfig::exponent_vector() const {
  const auto m = static_cast<std::size_t>(arity());
  if (exponents.empty()) return std::vector<double>(m, 2.0);
  if (exponents.size() != m) throw ConfigError("exponents must have one entry per kernel slot");
  return exponents;
}

double ExperimentConfig::g_star_lambda() const { return lambda > 0.0 ? lambda : 2.0 * arity() + 0.5; }

std::int64_t ExperimentConfig::field_padding() const {
  return padding >= 0 ? padding : mesh.cells_per_axis() / 2;
}

int ExperimentConfig::tail_levels() const {
  return quadrature.tail_levels >= 0 ? quadrature.tail_levels : 2 * quadrature.per_octave;
}

ConeQuadrature ExperimentConfig::cone_quadrature() const {
  if (quadrature.t_min > 0.0 || quadrature.t_max > 0.0 || quadrature.levels > 0) {
    const double lo = quadrature.t_min > 0.0 ? quadrature.t_min : mesh.cell_side();
    const double hi = quadrature.t_max > 0.0 ? quadrature.t_max : 4.0 * mesh.side();
    const int k = quadrature.levels > 0
                      ? quadrature.levels
                      : std::max(8, static_cast<int>(std::ceil(quadrature.per_octave * std::log2(hi / lo))));
    return ConeQuadrature(lo, hi, k);
  }
  return ConeQuadrature::for_mesh(mesh, quadrature.per_octave);
}

ExperimentConfig config_from_json(const json& j, const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment.empty() ? j.value("experiment", std::string()) : experiment;
  c.raw = j;
  try {
    if (j.contains("mesh")) c.mesh = mesh_from_json(j.at("mesh"));
    c.kernel = j.value("kernel", c.kernel);
    if (j.contains("exponents")) c.exponents = j.at("exponents").get<std::vector<double>>();
    if (j.contains("gamma")) {
      const json& g = j.at("gamma");
      c.gammas = g.is_array() ? g.get<std::vector<double>>() : std::vector<double>{g.get<double>()};
    }
    if (j.contains("alphas")) c.alphas = j.at("alphas").get<std::vector<double>>();
    c.lambda = j.value("lambda", c.lambda);
    c.annuli = j.value("annuli", c.annuli);
    if (c.annuli < 1 || c.annuli > 30) throw ConfigError("annuli must lie in [1, 30]");
    if (j.contains("weights")) {
      const json& w = j.at("weights");
      c.weight_family = w.value("family", std::string("power"));
      if (w.contains("values")) c.weight_values = w.at("values").get<std::vector<double>>();
    }
    c.seed = j.value("seed", c.seed);
    if (j.contains("quadrature")) {
      const json& q = j.at("quadrature");
      c.quadrature.per_octave = q.value("per_octave", c.quadrature.per_octave);
      c.quadrature.tail_levels = q.value("tail_levels", c.quadrature.tail_levels);
      c.quadrature.t_min = q.value("t_min", c.quadrature.t_min);
      c.quadrature.t_max = q.value("t_max", c.quadrature.t_max);
      c.quadrature.levels = q.value("levels", c.quadrature.levels);
    }
    c.padding = j.value("padding", c.padding);
    c.instances = j.value("instances", c.instances);
    c.atoms = j.value("atoms", c.atoms);
    c.inputs = j.value("inputs", c.inputs);
    if (j.contains("support")) {
      const auto w = j.at("support").get<std::vector<double>>();
      if (w.size() != 2 || !(w[0] > 0.0 && w[0] <= w[1] && w[1] <= 0.5))
        throw ConfigError("support must be [min, max] with 0 < min <= max <= 0.5");
      c.min_support = w[0];
      c.max_support = w[1];
    }
    c.negative_control = j.value("negative_control", c.negative_control);
    c.input_path = j.value("input", c.input_path);
    c.output = j.value("output", c.output);
    // Resolve names eagerly so configuration problems surface before any work.
    if (c.experiment != "apconst" && c.experiment != "decompose") (void)c.exponent_vector();
    (void)c.cone_quadrature();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  if (c.inputs != "bump" && c.inputs != "random" && c.inputs != "zero")
    throw ConfigError("inputs must be bump, random or zero");
  if (c.weight_family != "none" && c.weight_family != "power")
    throw ConfigError("weight family must be none or power");
  return c;
}

json to_json(const ExperimentConfig& c) {
  std::vector<double> exponents = c.exponents;
  if (exponents.empty() && c.experiment != "apconst") exponents = c.exponent_vector();
  json q{{"per_octave", c.quadrature.per_octave},
         {"tail_levels", c.tail_levels()},
         {"t_min", c.cone_quadrature().t_min()},
         {"t_max", c.cone_quadrature().t_max()},
         {"levels", c.cone_quadrature().levels()}};
  return json{{"experiment", c.experiment},
              {"mesh", to_json(c.mesh)},
              {"kernel", c.kernel},
              {"exponents", exponents},
              {"gamma", c.gammas},
              {"alphas", c.alphas},
              {"lambda", c.g_star_lambda()},
              {"annuli", c.annuli},
              {"weights", json{{"family", c.weight_family}, {"values", c.weight_values}}},
              {"seed", c.seed},
              {"quadrature", q},
              {"padding", c.field_padding()},
              {"instances", c.instances},
              {"atoms", c.atoms},
              {"inputs", c.inputs},
              {"support", {c.min_support, c.max_support}},
              {"negative_control", c.negative_control}};
}

// ---------------------------------------------------------------- reports

void ExperimentReport::add_row(std::vector<Value> row) {
  if (row.size() != columns.size()) throw std::logic_error("report row width does not match the columns");
  rows.push_back(std::move(row));
}

void ExperimentReport::fail(const std::string& what) {
  passed = false;
  failures.push_back(what);
}

const char* toolkit_version() { return "0.1.0"; }

namespace {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_value(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return format_number(*d);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return std::to_string(*i);
  return std::get<std::string>(v);
}

json value_json(const Value& v) {
  if (const auto* d = std::get_if<double>(&v)) return std::isfinite(*d) ? json(*d) : json(format_number(*d));
  if (const auto* i = std::get_if<std::int64_t>(&v)) return json(*i);
  return json(std::get<std::string>(v));
}

}  // namespace

std::string to_csv(const ExperimentReport& r) {
  std::ostringstream os;
  os << "# experiment: " << r.experiment << "\n";
  os << "# toolkit: " << toolkit_version() << "\n";
  os << "# config: " << r.config.dump() << "\n";
  if (!r.policy.empty()) os << "# policy: " << r.policy.dump() << "\n";
  for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << r.columns[i];
  os << "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format_value(row[i]);
    os << "\n";
  }
  os << "# summary: " << r.summary.dump() << "\n";
  os << "# passed: " << (r.passed ? "true" : "false") << "\n";
  return os.str();
}

json to_json(const ExperimentReport& r) {
  json rows = json::array();
  for (const auto& row : r.rows) {
    json o = json::object();
    for (std::size_t i = 0; i < row.size(); ++i) o[r.columns[i]] = value_json(row[i]);
    rows.push_back(o);
  }
  return json{{"experiment", r.experiment},
              {"toolkit_version", toolkit_version()},
              {"config", r.config},
              {"policy", r.policy},
              {"rows", rows},
              {"summary", r.summary},
              {"passed", r.passed},
              {"failures", r.failures},
              {"wall_clock_seconds", r.wall_clock_seconds}};
}

// ---------------------------------------------------------------- building blocks

double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw std::invalid_argument("slope fit needs two or more points");
  double mx = 0.0, my = 0.0;
  const auto n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  return sxy / sxx;
}

double median_of(std::vector<double> v) {
  if (v.empty()) throw std::invalid_argument("median of an empty list");
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

std::vector<GridFunction> bump_inputs(const DyadicMesh& mesh, std::size_t m) {
  static constexpr double centers[][2] = {{0.03, 0.02}, {-0.05, -0.03}, {0.07, -0.06}, {-0.02, 0.05}};
  static constexpr double radii[] = {0.09, 0.06, 0.08, 0.05};
  std::vector<GridFunction> out;
  const Point o = mesh.corner();
  const double side = mesh.side();
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t k = j % 4;
    std::vector<double> v(mesh.cell_count());
    for (std::size_t i = 0; i < v.size(); ++i) {
      const Point x = mesh.cell_center(i);
      double r2 = 0.0;
      for (int a = 0; a < mesh.dimension(); ++a) {
        const double s = (x[a] - (o[a] + side * (0.5 + centers[k][a]))) / (side * radii[k]);
        r2 += s * s;
      }
      v[i] = r2 < 1.0 ? (1.0 - r2) * (1.0 - r2) : 0.0;
    }
    out.emplace_back(mesh, std::move(v));
  }
  return out;
}

GridFunction random_function(const DyadicMesh& mesh, Rng& rng, RandomKind kind) {
  std::vector<double> v(mesh.cell_count());
  for (double& x : v) {
    switch (kind) {
      case RandomKind::uniform:
        x = rng.uniform();
        break;
      case RandomKind::spikes:
        x = rng.coin(0.1) ? 8.0 * rng.uniform() : rng.uniform();
        break;
      case RandomKind::dyadic:
        x = static_cast<double>(rng.coin(0.1) ? rng.below(4096) : rng.below(64)) / 64.0;
        break;
    }
  }
  return GridFunction(mesh, std::move(v));
}

std::vector<GridFunction> random_inputs(const DyadicMesh& mesh, std::size_t m, Rng& rng, double min_width, double max_width) {
  const std::int64_t N = mesh.cells_per_axis();
  std::vector<GridFunction> out;
  for (std::size_t j = 0; j < m; ++j) {
    std::array<std::int64_t, 2> lo{0, 0}, hi{1, 1};
    for (int a = 0; a < mesh.dimension(); ++a) {
      const auto len = std::max<std::int64_t>(1, static_cast<std::int64_t>(rng.uniform(min_width, max_width) * N));
      lo[a] = N / 4 + static_cast<std::int64_t>(rng.below(static_cast<std::uint64_t>(N / 2 - len + 1)));
      hi[a] = lo[a] + len;
    }
    std::vector<double> v(mesh.cell_count(), 0.0);
    for (std::int64_t y = lo[1]; y < hi[1]; ++y)
      for (std::int64_t x = lo[0]; x < hi[0]; ++x)
        v[mesh.cell_index({x, y})] = rng.coin(0.1) ? 8.0 * rng.uniform() : rng.uniform();
    out.emplace_back(mesh, std::move(v));
  }
  return out;
}

SparseFamily corrupt_sparse_family(const SparseFamily& family) {
  SparseFamily out = family;
  for (std::size_t k = 0; k < out.size(); ++k) {
    const std::size_t cells = out.mesh.cells_in(out.cubes[k]);
    if (cells < 2) continue;
    auto& e = out.major_subsets[k];
    e.resize(std::min(e.size(), cells / 2 - 1));
    if (2 * e.size() < cells) return out;
  }
  throw std::invalid_argument("family has no cube that can be corrupted");
}

namespace {

double product_of_averages(const std::vector<GridFunction>& absf, const RegionBox& r) {
  double v = 1.0;
  for (const GridFunction& g : absf) v *= average(g, r);
  return v;
}

std::vector<GridFunction> absolute_values(const std::vector<GridFunction>& f) {
  std::vector<GridFunction> out;
  for (const GridFunction& g : f) out.push_back(g.map([](double v) { return std::abs(v); }));
  return out;
}

}  // namespace

double oscillation_max_ratio(const ConeField& field, const std::vector<GridFunction>& f, double alpha, double delta0) {
  const DyadicMesh& mesh = field.base();
  const int n = mesh.dimension();
  const auto m = static_cast<double>(f.size());
  const GridFunction st = field.s_tilde_sq(alpha, mesh);
  const auto absf = absolute_values(f);
  const double lam = decomposition_lambda(n);
  const double scale = std::pow(alpha, 2.0 * m * n);
  std::vector<Cube> cubes;
  for (const Cube& q : mesh.subcubes(mesh.root()))
    if (q.level < mesh.depth()) cubes.push_back(q);
  std::vector<double> ratio(cubes.size(), 0.0);
  parallel_for(cubes.size(), [&](std::size_t i) {
    const Cube& q = cubes[i];
    double den = 0.0;
    for (int l = 0; l <= mesh.depth(); ++l) {
      const double p = product_of_averages(absf, mesh.dilate(q, std::ldexp(1.0, l)));
      den += std::pow(2.0, -l * delta0) * p * p;
    }
    const double num = local_mean_oscillation(st, q, lam);
    ratio[i] = den > 0.0 ? num / (scale * den) : (num > 0.0 ? std::numeric_limits<double>::infinity() : 0.0);
  });
  return *std::max_element(ratio.begin(), ratio.end());
}

double domination_max_ratio(const ConeField& field, const std::vector<GridFunction>& f, double alpha) {
  const DyadicMesh& base = field.base();
  const int n = base.dimension();
  const std::size_t m = f.size();
  const auto absf = absolute_values(f);
  std::vector<double> best(base.cell_count(), 0.0);
  for (const CellCoord& shift : third_shifts(base)) {
    const DyadicMesh shifted = shifted_mesh(base, shift);
    const GridFunction s2 = field.s_alpha_sq(alpha, shifted);
    const OscillationDecomposition d = lerner_decomposition(s2, shifted.root());
    std::vector<GridFunction> moved;
    for (const GridFunction& g : absf) moved.push_back(transfer(g, shifted));
    const GridFunction a2 = sparse_operator(SparseOperatorSpec{d.family, 2.0, m}, moved);
    const std::int64_t N = base.cells_per_axis();
    for (std::size_t i = 0; i < shifted.cell_count(); ++i) {
      CellCoord c = shifted.cell_coord(i);
      c[0] += shift[0];
      c[1] += n == 2 ? shift[1] : 0;
      if (c[0] < 0 || c[0] >= N || c[1] < 0 || c[1] >= (n == 2 ? N : 1)) continue;
      const std::size_t b = base.cell_index(c);
      best[b] = std::max(best[b], a2[i]);
    }
  }
  const GridFunction s2 = field.s_alpha_sq(alpha, base);
  const double scale = std::pow(alpha, 2.0 * static_cast<double>(m) * n);
  double worst = 0.0;
  for (std::size_t i = 0; i < best.size(); ++i) {
    if (s2[i] == 0.0) continue;
    const double r = best[i] > 0.0 ? s2[i] / (scale * best[i] * best[i]) : std::numeric_limits<double>::infinity();
    worst = std::max(worst, r);
  }
  return worst;
}

namespace {

std::vector<GridFunction> experiment_inputs(const ExperimentConfig& c, std::size_t m, Rng& rng) {
  if (c.inputs == "zero") return std::vector<GridFunction>(m, GridFunction::constant(c.mesh, 0.0));
  if (c.inputs == "random") return random_inputs(c.mesh, m, rng, c.min_support, c.max_support);
  return bump_inputs(c.mesh, m);
}

ExperimentReport start(const ExperimentConfig& c, const std::string& name, std::vector<std::string> columns) {
  ExperimentReport r;
  r.experiment = name;
  r.config = to_json(c);
  r.columns = std::move(columns);
  return r;
}

WeightSystem power_system(const DyadicMesh& mesh, double a, const std::vector<double>& exponents) {
  return WeightSystem(mesh, std::vector<Weight>(exponents.size(), PowerWeight{a}), exponents);
}

}  // namespace

// ---------------------------------------------------------------- aperture sweep

ExperimentReport run_aperture_sweep(const ExperimentConfig& c) {
  ExperimentReport r = start(c, "aperture-sweep", {"alpha", "norm", "norm_extended", "tail", "normalized"});
  const MultilinearKernel k = make_kernel(c.kernel, c.mesh.dimension());
  const int m = k.arity(), n = c.mesh.dimension();
  for (double a : c.alphas)
    if (!(a >= 1.0 && a <= 16.0)) throw ConfigError("aperture sweep α values must lie in [1, 16]");
  if (c.alphas.empty()) throw ConfigError("aperture sweep needs at least one α");
  const auto exponents = c.exponent_vector();
  Rng rng(c.seed);
  const auto f = experiment_inputs(c, static_cast<std::size_t>(m), rng);
  GridFunction nu = GridFunction::constant(c.mesh, 1.0);
  double p = 0.0;
  for (double pj : exponents) p += 1.0 / pj;
  p = 1.0 / p;
  if (c.weight_family == "power") {
    if (c.weight_values.size() != 1) throw ConfigError("aperture sweep takes a single power-weight exponent");
    const WeightSystem w = power_system(c.mesh, c.weight_values.front(), exponents);
    const double ap = multilinear_ap_constant(w);
    if (!std::isfinite(ap)) throw ConfigError("weight is outside A_P (infinite constant)");
    nu = nu_w(w);
    r.summary["apconst"] = ap;
  }
  const ConeField field(k, f, c.cone_quadrature(), c.field_padding(), c.tail_levels());
  std::vector<double> norms;
  double first = 0.0;
  for (std::size_t i = 0; i < c.alphas.size(); ++i) {
    const double alpha = c.alphas[i];
    auto root = [](const GridFunction& g) { return g.map([](double v) { return std::sqrt(v); }); };
    const double core = lp_norm(root(field.s_alpha_sq(alpha, c.mesh, ConeField::Window::core)), nu, p);
    const double ext = lp_norm(root(field.s_alpha_sq(alpha, c.mesh, ConeField::Window::extended)), nu, p);
    const double tail = ext - core;
    if (i == 0) first = core;
    if (tail > 0.05 * first) {
      std::ostringstream os;
      os.precision(6);
      os << "quadrature tail at α = " << alpha << " is " << tail << ", above 5% of the first norm " << first
         << "; widen the t-window";
      throw TailError(os.str());
    }
    norms.push_back(core);
    r.add_row({alpha, core, ext, tail, core / std::pow(alpha, m * n)});
  }
  const double bound = m * n + 0.3;
  r.policy = json{{"slope_tolerance", 0.3}, {"tail_fraction", 0.05}};
  if (first == 0.0) {
    r.summary["slope"] = nullptr;
    r.summary["note"] = "all norms vanish";
  } else if (norms.size() >= 2) {
    const double slope = fitted_slope(c.alphas, norms);
    r.summary["slope"] = slope;
    r.summary["slope_bound"] = bound;
    if (!(slope <= bound)) r.fail("fitted slope " + format_number(slope) + " exceeds mn + 0.3 = " + format_number(bound));
  }
  return r;
}

// ---------------------------------------------------------------- weight sweep

ExperimentReport run_weight_sweep(const ExperimentConfig& c) {
  ExperimentReport r =
      start(c, "weight-sweep", {"a", "operator", "apconst", "exponent", "lhs", "rhsfactor", "ratio"});
  const MultilinearKernel k = make_kernel(c.kernel, c.mesh.dimension());
  const auto m = static_cast<std::size_t>(k.arity());
  const auto exponents = c.exponent_vector();
  std::vector<double> values = c.weight_values;
  if (values.empty()) values = {0.0, 0.5, 0.9, 0.99};
  Rng rng(c.seed);
  const auto f = experiment_inputs(c, m, rng);
  const SparseFamily family = random_sparse_family(c.mesh, rng);
  const double alpha = c.alphas.empty() ? 1.0 : c.alphas.front();
  const double lambda = c.g_star_lambda();
  require_g_star_lambda(lambda, k.arity());
  const ConeField field(k, f, c.cone_quadrature(), c.field_padding(), 0);
  const GridFunction s = field.s_alpha_sq(alpha, c.mesh).map([](double v) { return std::sqrt(v); });
  const GridFunction g = field.g_star_sq(lambda, c.mesh).map([](double v) { return std::sqrt(v); });
  double p = 0.0;
  for (double pj : exponents) p += 1.0 / pj;
  p = 1.0 / p;

  std::vector<std::string> ops;
  for (double gamma : c.gammas) ops.push_back("A^" + format_number(gamma));
  ops.push_back("S_alpha");
  ops.push_back("g_star");
  std::vector<std::vector<double>> ratios(ops.size());
  std::vector<double> aps;
  for (double a : values) {
    const WeightSystem w = power_system(c.mesh, a, exponents);
    const double ap = multilinear_ap_constant(w);
    if (!std::isfinite(ap)) throw ConfigError("A_P constant overflowed at a = " + format_number(a));
    aps.push_back(ap);
    const GridFunction nu = nu_w(w);
    double fnorm = 1.0;
    for (std::size_t j = 0; j < m; ++j) fnorm *= lp_norm(f[j], w.weight_cells(j), exponents[j]);
    for (std::size_t o = 0; o < ops.size(); ++o) {
      double lhs = 0.0, beta = 0.0;
      if (o < c.gammas.size()) {
        beta = bound_exponent(c.gammas[o], exponents);
        lhs = lp_norm(sparse_operator(SparseOperatorSpec{family, c.gammas[o], m}, f), nu, p);
      } else {
        beta = bound_exponent(2.0, exponents);
        lhs = lp_norm(ops[o] == "S_alpha" ? s : g, nu, p);
      }
      const double rhs = std::pow(ap, beta) * fnorm;
      const double ratio = rhs > 0.0 ? lhs / rhs : 0.0;
      ratios[o].push_back(ratio);
      r.add_row({a, ops[o], ap, beta, lhs, rhs, ratio});
    }
  }
  r.policy = json{{"trend_factor", 2.0}, {"min_apconst_growth", 10.0}};
  const double growth = aps.back() / aps.front();
  r.summary["apconst_growth"] = growth;
  if (values.size() > 1 && !(growth >= 10.0))
    r.fail("A_P constant grows only by " + format_number(growth) + " (< 10)");
  for (std::size_t o = 0; o < ops.size(); ++o) {
    const double med = median_of(ratios[o]);
    const double last = ratios[o].back();
    r.summary["ratio_" + ops[o]] = json{{"median", med}, {"last", last}, {"max", *std::max_element(ratios[o].begin(), ratios[o].end())}};
    if (!(last <= 2.0 * med)) r.fail(ops[o] + ": last ratio " + format_number(last) + " > 2 x median " + format_number(med));
  }
  return r;
}

// ---------------------------------------------------------------- property suite

namespace {

struct Tally {
  std::string name;
  std::int64_t instances = 0;
  std::int64_t failures = 0;
  std::string first_failure;
  double constant = 0.0;
};

class Suite {
 public:
  Tally& property(const std::string& name) {
    for (auto& t : tallies_)
      if (t.name == name) return t;
    tallies_.push_back(Tally{name, 0, 0, std::string(), 0.0});
    return tallies_.back();
  }
  void check(const std::string& name, bool ok, const std::string& detail) {
    Tally& t = property(name);
    ++t.instances;
    if (!ok) {
      if (t.failures == 0) t.first_failure = detail;
      ++t.failures;
    }
  }
  void record(const std::string& name, double v) {
    Tally& t = property(name);
    t.constant = std::max(t.constant, v);
  }
  const std::vector<Tally>& tallies() const { return tallies_; }

 private:
  std::vector<Tally> tallies_;
};

bool close(double a, double b, double rel = 1e-12) {
  return std::abs(a - b) <= rel * std::max({std::abs(a), std::abs(b), std::numeric_limits<double>::min()});
}

// Per-cell brute force for the (shifted) sparse operators, independent of the
// library's pyramid and region code.
std::vector<double> brute_sparse(const SparseFamily& fam, const std::vector<GridFunction>& f, double gamma, int l) {
  const DyadicMesh& mesh = fam.mesh;
  const std::int64_t N = mesh.cells_per_axis();
  const int n = mesh.dimension();
  std::vector<double> out(mesh.cell_count());
  for (std::size_t x = 0; x < out.size(); ++x) {
    double s = 0.0;
    for (const Cube& q : fam.cubes) {
      if (!mesh.cell_in(x, q)) continue;
      const auto side = static_cast<double>(mesh.cells_per_side(q.level));
      double lo[2] = {0, 0}, hi[2] = {1, 1};
      for (int a = 0; a < n; ++a) {
        const double c = (static_cast<double>(q.coord[a]) + 0.5) * side;
        const double half = std::ldexp(side, l) / 2;
        lo[a] = std::max(0.0, c - half);
        hi[a] = std::min(static_cast<double>(N), c + half);
      }
      double prod = 1.0;
      for (const GridFunction& g : f) {
        double num = 0.0, den = 0.0;
        for (std::int64_t j = static_cast<std::int64_t>(lo[1]); j < static_cast<std::int64_t>(std::ceil(hi[1])); ++j) {
          const double wy = n == 2 ? std::min(hi[1], j + 1.0) - std::max(lo[1], static_cast<double>(j)) : 1.0;
          for (std::int64_t i = static_cast<std::int64_t>(lo[0]); i < static_cast<std::int64_t>(std::ceil(hi[0])); ++i) {
            const double wx = std::min(hi[0], i + 1.0) - std::max(lo[0], static_cast<double>(i));
            num += wx * wy * std::abs(g[mesh.cell_index({i, j})]);
            den += wx * wy;
          }
        }
        prod *= num / den;
      }
      s += std::pow(prod, gamma);
    }
    out[x] = std::pow(s, 1.0 / gamma);
  }
  return out;
}

double classical_ap(const GridFunction& w, double p) {
  const DyadicMesh& mesh = w.mesh();
  double best = 0.0;
  for (const CellBox& b : shifted_dyadic_boxes(mesh)) {
    double sw = 0.0, sd = 0.0, cnt = 0.0;
    for (std::int64_t j = b.lo[1]; j < b.hi[1]; ++j)
      for (std::int64_t i = b.lo[0]; i < b.hi[0]; ++i) {
        const double v = w[mesh.cell_index({i, j})];
        sw += v;
        sd += std::pow(v, -1.0 / (p - 1.0));
        cnt += 1.0;
      }
    best = std::max(best, (sw / cnt) * std::pow(sd / cnt, p - 1.0));
  }
  return best;
}

GridFunction random_weight(const DyadicMesh& mesh, Rng& rng) {
  std::vector<double> v(mesh.cell_count());
  for (double& x : v) x = std::exp(rng.uniform(-2.0, 2.0));
  return GridFunction(mesh, std::move(v));
}

}  // namespace

ExperimentReport run_property_suite(const ExperimentConfig& c) {
  ExperimentReport r = start(c, "suite", {"property", "instances", "failures", "constant", "first_failure"});
  Suite suite;
  const DyadicMesh& mesh = c.mesh;
  const int n = mesh.dimension();
  const bool zero = c.inputs == "zero";
  const std::size_t count = c.instances;
  auto gen = [&](Rng& rng, RandomKind kind = RandomKind::spikes) {
    return zero ? GridFunction::constant(mesh, 0.0) : random_function(mesh, rng, kind);
  };
  auto seed_of = [&](std::size_t i, std::uint64_t salt) { return c.seed * 1000003ULL + salt * 7919ULL + i; };
  auto where = [&](std::size_t i, std::uint64_t salt) { return "seed " + std::to_string(seed_of(i, salt)); };

  for (std::size_t i = 0; i < count; ++i) {
    // mesh
    {
      Rng rng(seed_of(i, 1));
      const GridFunction f = gen(rng);
      bool ok = true;
      for (const Cube& q : mesh.subcubes(mesh.root())) {
        if (q.level == mesh.depth()) break;
        double s = 0.0;
        for (const Cube& ch : mesh.children(q)) s += integrate(f, ch);
        ok = ok && s == integrate(f, q);
      }
      suite.check("mesh.tiling", ok, where(i, 1));
      const double p = rng.uniform(0.5, 4.0);
      std::vector<double> v;
      for (double x : f.values()) v.push_back(std::abs(x));
      std::sort(v.begin(), v.end());
      v.erase(std::unique(v.begin(), v.end()), v.end());
      double layer = 0.0, prev = 0.0;
      for (double x : v) {
        layer += (std::pow(x, p) - std::pow(prev, p)) * distribution(f, prev);
        prev = x;
      }
      suite.check("mesh.norm_layer_cake", close(std::pow(lp_norm(f, p), p), layer, 1e-11), where(i, 1));
      suite.check("mesh.weak_below_strong", weak_lp_norm(f, p) <= lp_norm(f, p) * (1 + 1e-12), where(i, 1));
      bool mono = true;
      double last = std::numeric_limits<double>::infinity();
      for (double lam = 0.0; lam < 9.0; lam += 0.25) {
        const double d = distribution(f, lam);
        const double k = d / mesh.cell_measure();
        mono = mono && d <= last && k == std::floor(k);
        last = d;
      }
      suite.check("mesh.distribution_monotone", mono, where(i, 1));
    }
    // oscillation
    {
      Rng rng(seed_of(i, 2));
      const GridFunction f = gen(rng, RandomKind::dyadic);
      try {
        const auto d = lerner_decomposition(f, mesh.root());
        const auto sp = check_sparseness(d.family);
        suite.check("oscillation.decomposition", sp.ok, where(i, 2) + ": " + sp.reason);
        suite.record("oscillation.decomposition", static_cast<double>(d.family.size()));
      } catch (const DecompositionError& e) {
        suite.check("oscillation.decomposition", false, where(i, 2) + ": " + e.what());
      }
      const auto cubes = mesh.subcubes(mesh.root());
      const Cube q = cubes[rng.below(cubes.size())];
      const double l1 = rng.uniform(0.01, 0.98), l2 = rng.uniform(l1, 0.99);
      suite.check("oscillation.omega_monotone_in_lambda",
                  local_mean_oscillation(f, q, l1) >= local_mean_oscillation(f, q, l2), where(i, 2));
      const double shift = rng.uniform(-3.0, 3.0);
      const GridFunction g = f.map([shift](double v) { return v + shift; });
      const double w0 = local_mean_oscillation(f, q, 0.25), w1 = local_mean_oscillation(g, q, 0.25);
      suite.check("oscillation.translation",
                  median(g, q) == median(f, q) + shift && std::abs(w0 - w1) <= 1e-12 * (1 + std::abs(shift) + w0),
                  where(i, 2));
      suite.check("oscillation.median_bound", median_bound_check(f, q), where(i, 2));
    }
    // weights
    {
      Rng rng(seed_of(i, 3));
      const std::size_t m = 1 + rng.below(2);
      std::vector<Weight> ws;
      std::vector<double> ps;
      for (std::size_t j = 0; j < m; ++j) {
        ws.emplace_back(random_weight(mesh, rng));
        ps.push_back(rng.uniform(1.2, 4.0));
      }
      const WeightSystem w(mesh, ws, ps);
      const double ap = multilinear_ap_constant(w);
      suite.check("weights.ap_at_least_one", ap >= 1.0 - 1e-12, where(i, 3));
      std::vector<Weight> scaled;
      for (std::size_t j = 0; j < m; ++j) {
        const double cj = std::exp(rng.uniform(-3.0, 3.0));
        scaled.emplace_back(std::get<GridFunction>(ws[j]).map([cj](double v) { return cj * v; }));
      }
      suite.check("weights.scaling_invariance", close(multilinear_ap_constant(WeightSystem(mesh, scaled, ps)), ap, 1e-12),
                  where(i, 3));
      const double p1 = ps[0];
      const WeightSystem single(mesh, {ws[0]}, {p1});
      suite.check("weights.classical_cross_check",
                  close(multilinear_ap_constant(single), classical_ap(std::get<GridFunction>(ws[0]), p1), 1e-12),
                  where(i, 3));
      const GridFunction f = gen(rng);
      for (double p : {1.5, 2.0, 3.0}) {
        const double ratio = maximal_bound_check(f, std::get<GridFunction>(ws[0]), p);
        suite.check("weights.maximal_bound", ratio <= p / (p - 1.0) * (1 + 1e-12), where(i, 3));
        suite.record("weights.maximal_bound", ratio / (p / (p - 1.0)));
      }
      std::vector<std::size_t> cells;
      for (std::size_t x = 0; x < mesh.cell_count(); ++x)
        if (rng.coin(0.3)) cells.push_back(x);
      suite.check("weights.holder", holder_cell_check(w, cells), where(i, 3));
    }
    // sparse
    {
      Rng rng(seed_of(i, 4));
      const std::size_t m = 1 + rng.below(3);
      SparseFamily fam = random_sparse_family(mesh, rng);
      if (c.negative_control && i == 0) fam = corrupt_sparse_family(fam);
      const auto sp = check_sparseness(fam);
      suite.check("sparse.family_sparseness", sp.ok, where(i, 4) + ": " + sp.reason);
      suite.check("sparse.negative_control_detected", !check_sparseness(corrupt_sparse_family(fam)).ok || !sp.ok,
                  where(i, 4));
      std::vector<GridFunction> f;
      for (std::size_t j = 0; j < m; ++j) f.push_back(gen(rng));
      const double gamma = rng.uniform(1.0, 3.0);
      const int l = static_cast<int>(rng.below(4));
      const SparseOperatorSpec spec{fam, gamma, m};
      const GridFunction a = sparse_operator(spec, f);
      const GridFunction t = shifted_sparse_operator(fam, l, gamma, f);
      const auto ba = brute_sparse(fam, f, gamma, 0), bt = brute_sparse(fam, f, gamma, l);
      bool eq = true;
      for (std::size_t x = 0; x < ba.size(); ++x) eq = eq && close(a[x], ba[x]) && close(t[x], bt[x]);
      suite.check("sparse.brute_force_oracle", eq, where(i, 4));
      std::vector<GridFunction> bigger, scaled_f;
      double cprod = 1.0;
      for (const GridFunction& g : f) {
        bigger.push_back(g.map([&rng](double v) { return v + rng.uniform(); }));
        const double cj = std::exp(rng.uniform(-1.0, 1.0));
        cprod *= cj;
        scaled_f.push_back(g.map([cj](double v) { return cj * v; }));
      }
      const GridFunction ab = sparse_operator(spec, bigger), as = sparse_operator(spec, scaled_f);
      const GridFunction a1 = sparse_operator(SparseOperatorSpec{fam, 1.0, m}, f);
      const GridFunction a2 = sparse_operator(SparseOperatorSpec{fam, 2.0, m}, f);
      std::vector<GridFunction> doubled = f;
      doubled.insert(doubled.end(), f.begin(), f.end());
      const GridFunction link = sparse_operator(SparseOperatorSpec{fam, 1.0, 2 * m}, doubled);
      bool mono = true, homog = true, nest = true, tlink = true;
      for (std::size_t x = 0; x < a.size(); ++x) {
        mono = mono && a[x] <= ab[x];
        homog = homog && close(as[x], cprod * a[x], 1e-12);
        nest = nest && a2[x] <= a1[x] * (1 + 1e-12);
        tlink = tlink && close(a2[x] * a2[x], link[x], 1e-12);
      }
      suite.check("sparse.monotone", mono, where(i, 4));
      suite.check("sparse.homogeneity", homog, where(i, 4));
      suite.check("sparse.gamma_nesting", nest, where(i, 4));
      suite.check("sparse.t_link", tlink, where(i, 4));
    }
  }

  // Square functions on a small mesh.
  const DyadicMesh small = build_mesh(n, mesh.corner(), mesh.side(), std::min(mesh.depth(), n == 1 ? 6 : 4));
  const std::size_t sq_count = std::min<std::size_t>(count, 20);
  for (std::size_t i = 0; i < sq_count; ++i) {
    Rng rng(seed_of(i, 5));
    const MultilinearKernel k = make_kernel(i % 2 ? "bilinear" : "linear", n);
    const auto m = static_cast<std::size_t>(k.arity());
    std::vector<GridFunction> f = zero ? std::vector<GridFunction>(m, GridFunction::constant(small, 0.0))
                                       : random_inputs(small, m, rng);
    const ConeQuadrature quad = ConeQuadrature::for_mesh(small, 2);
    const ConeField field(k, f, quad, small.cells_per_axis() / 4);
    bool sandwich = true, mono = true, lower = true;
    for (double alpha : {1.0, 2.0, 4.0}) {
      const GridFunction s1 = field.s_alpha_sq(alpha, small), st = field.s_tilde_sq(alpha, small),
                         s2 = field.s_alpha_sq(2.0 * alpha, small);
      for (std::size_t x = 0; x < s1.size(); ++x) {
        sandwich = sandwich && s1[x] <= st[x] && st[x] <= s2[x];
        mono = mono && s1[x] <= s2[x];
      }
    }
    const double lam = 2.0 * static_cast<double>(m) + 0.5;
    const GridFunction g = field.g_star_sq(lam, small), gl = field.g_star_lower_sq(lam, small);
    for (std::size_t x = 0; x < g.size(); ++x) lower = lower && g[x] >= gl[x];
    suite.check("squarefn.sandwich", sandwich, where(i, 5));
    suite.check("squarefn.aperture_monotone", mono, where(i, 5));
    suite.check("squarefn.g_star_lower_bound", lower, where(i, 5));
    // Multilinearity of ψ_t in the first slot.
    const GridFunction h = random_function(small, rng, RandomKind::uniform);
    const double a = rng.uniform(-2.0, 2.0), b = rng.uniform(-2.0, 2.0);
    std::vector<GridFunction> mix = f, only = f;
    std::vector<double> comb(small.cell_count());
    for (std::size_t x = 0; x < comb.size(); ++x) comb[x] = a * f[0][x] + b * h[x];
    mix[0] = GridFunction(small, comb);
    only[0] = h;
    const double t = rng.uniform(0.2, 2.0);
    const Point x0 = small.cell_center(rng.below(small.cell_count()));
    const double lhs = psi_t_exact(k, mix, t, x0);
    const double rhs = a * psi_t_exact(k, f, t, x0) + b * psi_t_exact(k, only, t, x0);
    const double scale = std::abs(a * psi_t_exact(k, f, t, x0)) + std::abs(b * psi_t_exact(k, only, t, x0));
    suite.check("squarefn.psi_multilinear", std::abs(lhs - rhs) <= 1e-12 * std::max(scale, 1e-300) || lhs == rhs,
                where(i, 5));
    // Atomic fields: exact membership and the single-atom aperture identity.
    const AtomicField F = random_atomic_field(rng, n, 50);
    const Point xq{rng.uniform(-1.5, 1.5), n == 2 ? rng.uniform(-1.5, 1.5) : 0.0};
    const double alpha = std::ldexp(1.0, static_cast<int>(rng.below(4)));
    double oracle = 0.0;
    for (const Atom& at : F.atoms()) {
      const double dx = xq[0] - at.y[0], dy = xq[1] - at.y[1];
      if (dx * dx + dy * dy < alpha * at.t * alpha * at.t) oracle += at.c;
    }
    suite.check("squarefn.atomic_membership", close(s_alpha_field(F, alpha, xq), std::sqrt(oracle), 1e-12) ||
                                                  s_alpha_field(F, alpha, xq) == std::sqrt(oracle),
                where(i, 5));
    if (n == 1) {
      const AtomicField one(1, {Atom{{0.0, 0.0}, 1.0, 1.0}});
      suite.check("squarefn.single_atom_ratio", weak_aperture_check(one, alpha, 1.0).normalized_ratio == 1.0,
                  where(i, 5));
      const double ratio = weak_aperture_check(F, alpha, 1.0).normalized_ratio;
      suite.check("squarefn.weak_aperture_finite", std::isfinite(ratio), where(i, 5));
      suite.record("squarefn.weak_aperture_finite", ratio);
    }
  }

  json summary = json::object();
  for (const Tally& t : suite.tallies()) {
    r.add_row({t.name, t.instances, t.failures, t.constant, t.first_failure});
    summary[t.name] = json{{"instances", t.instances}, {"failures", t.failures}};
    if (t.failures > 0) r.fail(t.name + " failed " + std::to_string(t.failures) + "x (first: " + t.first_failure + ")");
  }
  r.summary = summary;
  return r;
}

// ---------------------------------------------------------------- g* check

ExperimentReport run_gstar_check(const ExperimentConfig& c) {
  ExperimentReport r = start(c, "gstar-check", {"instance", "max_ratio", "max_ratio_constant_one", "tail_fraction",
                                                "window_tail_fraction", "lower_bound_ok"});
  const MultilinearKernel k = make_kernel(c.kernel, c.mesh.dimension());
  const int n = c.mesh.dimension();
  const double lambda = c.g_star_lambda();
  require_g_star_lambda(lambda, k.arity());
  const ConeQuadrature quad = c.cone_quadrature();
  const std::int64_t pad = c.field_padding();
  const int K = c.annuli;
  const double e = n * lambda;
  double worst = 0.0, worst_one = 0.0, worst_tail = 0.0, worst_window = 0.0;
  for (std::size_t i = 0; i < c.instances; ++i) {
    Rng rng(c.seed + i);
    const auto f = c.inputs == "zero" ? std::vector<GridFunction>(static_cast<std::size_t>(k.arity()),
                                                                  GridFunction::constant(c.mesh, 0.0))
                                      : random_inputs(c.mesh, static_cast<std::size_t>(k.arity()), rng, c.min_support, c.max_support);
    const ConeField field(k, f, quad, pad, c.tail_levels());
    const GridFunction lhs = field.g_star_sq(lambda, c.mesh);
    const GridFunction ext = field.g_star_sq(lambda, c.mesh, ConeField::Window::extended);
    const GridFunction lower = field.g_star_lower_sq(lambda, c.mesh);
    const GridFunction outside = field.g_star_outside_sq(lambda, std::ldexp(1.0, K), c.mesh);
    std::vector<double> sum(c.mesh.cell_count(), 0.0);
    for (int kk = 1; kk <= K; ++kk) {
      const GridFunction s = field.s_alpha_sq(std::ldexp(1.0, kk), c.mesh);
      const double wk = std::pow(2.0, -kk * e);
      for (std::size_t x = 0; x < sum.size(); ++x) sum[x] += wk * s[x];
    }
    const double front = std::pow(2.0, e);
    double ratio = 0.0, ratio_one = 0.0, tail_total = 0.0, core_total = 0.0, ext_total = 0.0;
    bool ok = true, lower_ok = true;
    for (std::size_t x = 0; x < sum.size(); ++x) {
      const double rhs = front * sum[x];
      ok = ok && lhs[x] <= rhs + outside[x];
      lower_ok = lower_ok && lhs[x] >= lower[x];
      if (rhs > 0.0) ratio = std::max(ratio, lhs[x] / rhs);
      if (sum[x] > 0.0) ratio_one = std::max(ratio_one, lhs[x] / sum[x]);
      tail_total += outside[x];
      core_total += lhs[x];
      ext_total += ext[x];
    }
    const double tail_fraction = core_total > 0.0 ? tail_total / core_total : 0.0;
    const double window_fraction = core_total > 0.0 ? (ext_total - core_total) / core_total : 0.0;
    worst = std::max(worst, ratio);
    worst_one = std::max(worst_one, ratio_one);
    worst_tail = std::max(worst_tail, tail_fraction);
    worst_window = std::max(worst_window, window_fraction);
    r.add_row({static_cast<std::int64_t>(i), ratio, ratio_one, tail_fraction, window_fraction,
               std::string(lower_ok ? "true" : "false")});
    if (!ok) r.fail("instance " + std::to_string(i) + ": g*² exceeds the annulus bound");
    if (!lower_ok) r.fail("instance " + std::to_string(i) + ": g* lower bound violated");
    if (tail_fraction > 0.05) r.fail("instance " + std::to_string(i) + ": annulus tail above 5% of g*²");
  }
  r.policy = json{{"tail_fraction", 0.05}, {"annuli", K}};
  r.summary = json{{"max_ratio", worst}, {"max_ratio_constant_one", worst_one}, {"max_tail_fraction", worst_tail},
                   {"max_window_tail_fraction", worst_window}, {"constant_one_holds", worst_one <= 1.0}};
  return r;
}

// ---------------------------------------------------------------- weak aperture

ExperimentReport run_weak_aperture(const ExperimentConfig& c) {
  ExperimentReport r = start(c, "weak-aperture", {"instance", "p", "alpha", "weak_alpha", "weak_one", "ratio"});
  const int n = c.mesh.dimension();
  const DyadicMesh* eval = nullptr;
  DyadicMesh eval_mesh = build_mesh(n, {-4.0, -4.0}, 8.0, std::min(c.mesh.depth(), 7));
  if (n == 2) eval = &eval_mesh;
  const std::vector<double> ps{0.5, 1.0};
  double single = 0.0;
  if (n == 1) {
    const AtomicField one(1, {Atom{{0.0, 0.0}, 1.0, 1.0}});
    for (double alpha : c.alphas) single = std::max(single, std::abs(weak_aperture_check(one, alpha, 1.0).normalized_ratio - 1.0));
    if (single != 0.0) r.fail("single-atom normalized ratio differs from 1");
  }
  auto run = [&](std::size_t count, bool record) {
    std::vector<double> per_alpha(c.alphas.size(), 0.0);
    double best = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
      Rng rng(c.seed + i);
      const AtomicField F = random_atomic_field(rng, n, c.atoms);
      for (double p : ps)
        for (std::size_t a = 0; a < c.alphas.size(); ++a) {
          const auto rep = weak_aperture_check(F, c.alphas[a], p, eval);
          per_alpha[a] = std::max(per_alpha[a], rep.normalized_ratio);
          best = std::max(best, rep.normalized_ratio);
          if (record)
            r.add_row({static_cast<std::int64_t>(i), p, c.alphas[a], rep.weak_alpha, rep.weak_one, rep.normalized_ratio});
        }
    }
    return std::make_pair(best, per_alpha);
  };
  const auto [C, per_alpha] = run(c.instances, true);
  const auto [C2, per_alpha2] = run(2 * c.instances, false);
  (void)per_alpha2;
  const double drift = C2 / C - 1.0;
  r.policy = json{{"stability", 0.10}};
  r.summary = json{{"suite_constant", C}, {"suite_constant_doubled", C2}, {"relative_change", drift},
                   {"max_ratio_per_alpha", per_alpha}, {"single_atom_deviation", single}};
  if (!std::isfinite(C)) r.fail("suite constant is not finite");
  if (std::abs(drift) > 0.10) r.fail("suite constant moved by " + format_number(drift) + " when doubling instances");
  return r;
}

// ---------------------------------------------------------------- sparse bound

ExperimentReport run_sparse_bound(const ExperimentConfig& c) {
  const std::size_t mmax = 2;
  std::vector<std::string> cols{"m", "gamma"};
  for (std::size_t j = 1; j <= mmax; ++j) cols.push_back("p" + std::to_string(j));
  for (const char* s : {"weight-id", "apconst", "exponent", "lhs", "rhsfactor", "ratio"}) cols.emplace_back(s);
  ExperimentReport r = start(c, "sparse-bound", cols);
  double worst = 0.0;
  const std::vector<double> choices{1.5, 2.0, 3.0, 4.0};
  for (std::size_t i = 0; i < c.instances; ++i) {
    Rng rng(c.seed + i);
    const std::size_t m = 1 + rng.below(mmax);
    const double gamma = rng.coin(0.5) ? 1.0 : 2.0;
    std::vector<double> ps;
    for (std::size_t j = 0; j < m; ++j) ps.push_back(choices[rng.below(choices.size())]);
    std::vector<Weight> ws;
    std::string id;
    if (rng.coin(0.5)) {
      const double a = rng.uniform(-0.4, 0.4);
      ws.assign(m, PowerWeight{a});
      id = "power:" + format_number(a);
    } else {
      for (std::size_t j = 0; j < m; ++j) ws.emplace_back(random_weight(c.mesh, rng));
      id = "grid:" + std::to_string(c.seed + i);
    }
    const WeightSystem w(c.mesh, ws, ps);
    const SparseFamily fam = random_sparse_family(c.mesh, rng);
    std::vector<GridFunction> f;
    for (std::size_t j = 0; j < m; ++j) f.push_back(random_function(c.mesh, rng));
    const auto rep = verify_sparse_bound(SparseOperatorSpec{fam, gamma, m}, w, f);
    worst = std::max(worst, rep.ratio);
    std::vector<Value> row{static_cast<std::int64_t>(m), gamma};
    for (std::size_t j = 0; j < mmax; ++j) row.emplace_back(j < m ? ps[j] : std::numeric_limits<double>::quiet_NaN());
    for (Value v : std::vector<Value>{id, rep.ap_constant, rep.exponent, rep.lhs, rep.rhs_factor, rep.ratio})
      row.push_back(v);
    r.add_row(std::move(row));
  }
  r.summary = json{{"suite_constant", worst}};
  if (!std::isfinite(worst)) r.fail("sparse bound ratio is not finite");
  return r;
}

// ---------------------------------------------------------------- single computations

ExperimentReport run_apconst(const ExperimentConfig& c) {
  ExperimentReport r = start(c, "apconst", {"apconst", "box_lo", "box_hi", "shift"});
  const auto exponents = c.exponents.empty() ? std::vector<double>{2.0} : c.exponents;
  std::vector<Weight> ws;
  if (c.raw.contains("weight_list")) {
    for (const json& wj : c.raw.at("weight_list")) ws.push_back(weight_from_json(wj, c.mesh));
  } else {
    const double a = c.weight_values.empty() ? 0.0 : c.weight_values.front();
    ws.assign(exponents.size(), PowerWeight{a});
  }
  if (ws.size() != exponents.size()) throw ConfigError("one exponent per weight is required");
  const WeightSystem w(c.mesh, ws, exponents);
  const ApConstant ap = multilinear_ap_detail(w);
  auto box = [](const CellCoord& v) { return "(" + std::to_string(v[0]) + ";" + std::to_string(v[1]) + ")"; };
  r.add_row({ap.value, box(ap.argmax.lo), box(ap.argmax.hi), static_cast<std::int64_t>(ap.shift)});
  r.summary = json{{"apconst", ap.value}, {"shift", ap.shift}};
  return r;
}

ExperimentReport run_decompose(const ExperimentConfig& c) {
  ExperimentReport r = start(c, "decompose", {"level", "coord0", "coord1", "coefficient", "major_cells"});
  if (c.input_path.empty()) throw ConfigError("decompose needs an input function file");
  GridFunction f = GridFunction::constant(c.mesh, 0.0);
  try {
    f = grid_function_from_json(read_json_file(c.input_path));
  } catch (const std::exception& e) {
    throw ConfigError(std::string("cannot read input function: ") + e.what());
  }
  const OscillationDecomposition d = lerner_decomposition(f, f.mesh().root());
  for (std::size_t k = 0; k < d.family.size(); ++k) {
    const Cube& q = d.family.cubes[k];
    r.add_row({static_cast<std::int64_t>(q.level), q.coord[0], q.coord[1], d.coefficients[k],
               static_cast<std::int64_t>(d.family.major_subsets[k].size())});
  }
  r.summary = json{{"median", d.root_median}, {"family_size", d.family.size()}, {"decomposition", to_json(d)}};
  return r;
}

// ---------------------------------------------------------------- oscillation and domination stability

ExperimentReport run_prop_stability(const ExperimentConfig& c) {
  ExperimentReport r = start(c, "prop-stability", {"alpha", "oscillation_max_ratio", "domination_max_ratio", "domination_unnormalized"});
  const MultilinearKernel k = make_kernel(c.kernel, c.mesh.dimension());
  const auto m = static_cast<std::size_t>(k.arity());
  const int n = c.mesh.dimension();
  const double delta0 = std::min(k.constants().delta, 0.5) / 2.0;
  const std::int64_t pad = std::max(c.field_padding(), third_shift_cells(c.mesh));
  std::vector<double> r32(c.alphas.size(), 0.0), r33(c.alphas.size(), 0.0);
  for (std::size_t i = 0; i < c.instances; ++i) {
    Rng rng(c.seed + i);
    const auto f = random_inputs(c.mesh, m, rng, c.min_support, c.max_support);
    const ConeField field(k, f, c.cone_quadrature(), pad, 0);
    for (std::size_t a = 0; a < c.alphas.size(); ++a) {
      r32[a] = std::max(r32[a], oscillation_max_ratio(field, f, c.alphas[a], delta0));
      r33[a] = std::max(r33[a], domination_max_ratio(field, f, c.alphas[a]));
    }
  }
  std::vector<double> unnorm(c.alphas.size());
  const double e = 2.0 * static_cast<double>(m) * n;
  for (std::size_t a = 0; a < c.alphas.size(); ++a) {
    unnorm[a] = r33[a] * std::pow(c.alphas[a], e);
    r.add_row({c.alphas[a], r32[a], r33[a], unnorm[a]});
  }
  r.policy = json{{"slope_tolerance", 0.3}};
  const double s32 = fitted_slope(c.alphas, r32);
  const double s33 = fitted_slope(c.alphas, unnorm);
  r.summary = json{{"oscillation_slope", s32}, {"domination_unnormalized_slope", s33}, {"domination_target_slope", e},
                   {"oscillation_constant", *std::max_element(r32.begin(), r32.end())},
                   {"domination_constant", *std::max_element(r33.begin(), r33.end())}};
  for (double v : r32)
    if (!std::isfinite(v)) r.fail("oscillation ratio is not finite");
  for (double v : r33)
    if (!std::isfinite(v)) r.fail("domination ratio is not finite");
  if (!(std::abs(s32) <= 0.3)) r.fail("oscillation-estimate slope " + format_number(s32) + " is outside 0 ± 0.3");
  if (!(std::abs(s33 - e) <= 0.3))
    r.fail("domination slope " + format_number(s33) + " is outside " + format_number(e) + " ± 0.3");
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& c) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentReport r;
  const std::string& e = c.experiment;
  if (e == "aperture-sweep") r = run_aperture_sweep(c);
  else if (e == "weight-sweep") r = run_weight_sweep(c);
  else if (e == "suite") r = run_property_suite(c);
  else if (e == "gstar-check") r = run_gstar_check(c);
  else if (e == "weak-aperture") r = run_weak_aperture(c);
  else if (e == "sparse-bound") r = run_sparse_bound(c);
  else if (e == "apconst") r = run_apconst(c);
  else if (e == "decompose") r = run_decompose(c);
  else if (e == "prop-stability") r = run_prop_stability(c);
  else throw ConfigError("unknown experiment '" + e + "'");
  r.wall_clock_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace msq
