#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "msq/harness.hpp"
#include "msq/parallel.hpp"

namespace {

constexpr int exit_pass = 0;
constexpr int exit_failure = 1;
constexpr int exit_config = 2;

struct Options {
  std::string config_path;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::string out;
  std::string input;
  int threads = 0;
  std::string format = "csv";
};

int run(const std::string& experiment, const Options& o) {
  msq::json j = msq::json::object();
  if (!o.config_path.empty()) {
    try {
      j = msq::read_json_file(o.config_path);
    } catch (const std::exception& e) {
      throw msq::ConfigError(std::string("cannot read config: ") + e.what());
    }
  }
  if (o.seed_set) j["seed"] = o.seed;
  if (!o.input.empty()) j["input"] = o.input;
  if (!o.out.empty()) j["output"] = o.out;
  const msq::ExperimentConfig config = msq::config_from_json(j, experiment);
  if (o.threads > 0) msq::set_thread_count(static_cast<std::size_t>(o.threads));

  const msq::ExperimentReport report = msq::run_experiment(config);
  const std::string text = o.format == "json" ? msq::to_json(report).dump(2) + "\n" : msq::to_csv(report);
  if (config.output.empty())
    std::cout << text;
  else
    msq::write_text_file(config.output, text);
  for (const std::string& f : report.failures) std::cerr << "FAIL: " << f << "\n";
  return report.passed ? exit_pass : exit_failure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical toolkit for multilinear square functions and sparse bounds"};
  app.require_subcommand(1);
  app.fallthrough();
  Options o;
  app.add_option("--config", o.config_path, "JSON configuration file");
  app.add_option("--seed", o.seed, "random seed (overrides the config)")->each([&o](const std::string&) {
    o.seed_set = true;
  });
  app.add_option("--out", o.out, "report path (default: stdout)");
  app.add_option("--threads", o.threads, "worker threads")->check(CLI::PositiveNumber);
  app.add_option("--format", o.format, "report format")->check(CLI::IsMember({"csv", "json"}));

  const std::vector<std::pair<std::string, std::string>> commands{
      {"decompose", "oscillation decomposition of an input function file"},
      {"apconst", "multilinear A_P constant of a weight vector"},
      {"sparse-bound", "weighted bound for random sparse operators"},
      {"aperture-sweep", "norm of S_alpha across apertures"},
      {"weight-sweep", "normalized ratios along a power-weight sweep"},
      {"gstar-check", "g* against its aperture decomposition"},
      {"weak-aperture", "weak-type aperture estimate for atomic fields"},
      {"suite", "randomized property suite"},
      {"prop-stability", "oscillation and domination ratios across apertures"},
  };
  for (const auto& [name, help] : commands) {
    CLI::App* sub = app.add_subcommand(name, help);
    if (name == "decompose") sub->add_option("input", o.input, "grid function JSON file");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? exit_pass : exit_config;
  }

  try {
    return run(app.get_subcommands().front()->get_name(), o);
  } catch (const msq::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const msq::TailError& e) {
    std::cerr << "quadrature tail: " << e.what() << "\n";
    return exit_failure;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return exit_config;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_failure;
  }
}
