#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "msq/io.hpp"
#include "msq/mesh.hpp"
#include "msq/oscillation.hpp"
#include "msq/random.hpp"
#include "msq/sparse.hpp"
#include "msq/squarefn.hpp"

namespace msq {

/// Invalid or unresolvable configuration (CLI exit code 2).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cone quadrature truncation tail above the allowed fraction.
class TailError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct QuadratureConfig {
  int per_octave = 4;
  /// Extra bands on each side used to measure the truncation tail; -1 means two octaves.
  int tail_levels = -1;
  double t_min = 0.0;  // 0 selects the mesh default
  double t_max = 0.0;
  int levels = 0;
};

struct ExperimentConfig {
  std::string experiment;
  DyadicMesh mesh = build_mesh(1, {-8.0, 0.0}, 16.0, 8);
  std::string kernel = "bilinear";
  std::vector<double> exponents;   // empty: 2 for every slot
  std::vector<double> gammas{1.0, 2.0};
  std::vector<double> alphas{1.0, 2.0, 4.0, 8.0};
  double lambda = 0.0;             // 0 selects 2m + 1/2
  int annuli = 4;                  // K in the g* annulus decomposition
  std::string weight_family = "none";
  std::vector<double> weight_values;
  std::uint64_t seed = 42;
  QuadratureConfig quadrature;
  std::int64_t padding = -1;       // -1 selects half the cells per axis
  std::size_t instances = 20;
  std::size_t atoms = 20;
  std::string inputs = "bump";     // bump | random | zero
  double min_support = 0.05;       // random input support width, fraction of the root side
  double max_support = 0.25;
  bool negative_control = false;
  std::string input_path;
  std::string output;
  json raw = json::object();

  int arity() const;
  std::vector<double> exponent_vector() const;
  double g_star_lambda() const;
  std::int64_t field_padding() const;
  ConeQuadrature cone_quadrature() const;
  int tail_levels() const;
};

/// Reads the recognized keys; unknown kernels, bad meshes and malformed
/// values raise ConfigError.
ExperimentConfig config_from_json(const json& j, const std::string& experiment);
json to_json(const ExperimentConfig& c);

using Value = std::variant<double, std::int64_t, std::string>;

struct ExperimentReport {
  std::string experiment;
  json config = json::object();
  std::vector<std::string> columns;
  std::vector<std::vector<Value>> rows;
  json summary = json::object();
  json policy = json::object();
  std::vector<std::string> failures;
  bool passed = true;
  double wall_clock_seconds = 0.0;

  void add_row(std::vector<Value> row);
  void fail(const std::string& what);
};

/// Rows with %.17g numbers, preceded by '#' header lines; no timestamps.
std::string to_csv(const ExperimentReport& r);
json to_json(const ExperimentReport& r);
const char* toolkit_version();

ExperimentReport run_aperture_sweep(const ExperimentConfig& c);
ExperimentReport run_weight_sweep(const ExperimentConfig& c);
ExperimentReport run_property_suite(const ExperimentConfig& c);
ExperimentReport run_gstar_check(const ExperimentConfig& c);
ExperimentReport run_weak_aperture(const ExperimentConfig& c);
ExperimentReport run_sparse_bound(const ExperimentConfig& c);
ExperimentReport run_apconst(const ExperimentConfig& c);
ExperimentReport run_decompose(const ExperimentConfig& c);
ExperimentReport run_prop_stability(const ExperimentConfig& c);
/// Dispatch on c.experiment; records the wall-clock time.
ExperimentReport run_experiment(const ExperimentConfig& c);

// ---------------------------------------------------------------- building blocks

/// Least-squares slope of log y against log x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y);

double median_of(std::vector<double> v);

/// Smooth compactly supported bumps near the mesh center, one per slot.
std::vector<GridFunction> bump_inputs(const DyadicMesh& mesh, std::size_t m);

enum class RandomKind { uniform, spikes, dyadic };

/// Nonnegative random values. `dyadic` draws multiples of 1/64 so sums stay exact.
GridFunction random_function(const DyadicMesh& mesh, Rng& rng, RandomKind kind = RandomKind::spikes);

/// Random nonnegative inputs supported in the central half of the root.
std::vector<GridFunction> random_inputs(const DyadicMesh& mesh, std::size_t m, Rng& rng, double min_width = 0.05,
                                        double max_width = 0.25);

/// Removes cells from the first nontrivial major subset until it covers less than half its cube.
SparseFamily corrupt_sparse_family(const SparseFamily& family);

/// ω_λ(S̃²_α; Q) / (α^{2mn} Σ_{l=0}^{D} 2^{-lδ0} (∏ avg_{2^l Q} |f_i|)²), maximized over
/// all cubes with at least 2^n cells.
double oscillation_max_ratio(const ConeField& field, const std::vector<GridFunction>& f, double alpha, double delta0);

/// max over cells of S_α² / (α^{2mn} A²_best²), A²_best taken over the decomposition families
/// of S_α² on the 3^n shifted meshes. The field padding must cover the shifts.
double domination_max_ratio(const ConeField& field, const std::vector<GridFunction>& f, double alpha);

}  // namespace msq
