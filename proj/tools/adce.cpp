// Command-line front end: one subcommand per scenario family.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "adce/config.hpp"
#include "adce/error.hpp"
#include "adce/experiments.hpp"
#include "json.hpp"

namespace {

enum ExitCode { kOk = 0, kConfig = 2, kRegime = 3, kNumerical = 4 };

struct Options {
  std::string config_path;
  std::string out_dir;
  unsigned threads = 1;
  bool seedless = false;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw adce::ConfigError("cannot read config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The subcommand fixes the scenario; a config file may restate it but not
// contradict it.
adce::ExperimentConfig load_config(adce::Scenario scenario, const Options& opt) {
  nlohmann::ordered_json doc = nlohmann::ordered_json::object();
  if (!opt.config_path.empty()) {
    try {
      doc = nlohmann::ordered_json::parse(read_file(opt.config_path));
    } catch (const nlohmann::ordered_json::parse_error& e) {
      throw adce::ConfigError(std::string("malformed JSON: ") + e.what());
    }
    if (!doc.is_object()) throw adce::ConfigError("config: expected an object");
  }
  const std::string name(adce::to_string(scenario));
  if (doc.contains("scenario")) {
    if (!doc["scenario"].is_string() || doc["scenario"].get<std::string>() != name) {
      throw adce::ConfigError("config scenario " + doc["scenario"].dump() + " does not match subcommand " + name);
    }
  } else {
    doc["scenario"] = name;
  }
  adce::ExperimentConfig config = adce::parse_config(doc.dump());
  if (!opt.out_dir.empty()) config.output.dir = opt.out_dir;
  adce::validate(config);
  return config;
}

int run(adce::Scenario scenario, const Options& opt) {
  const adce::ExperimentConfig config = load_config(scenario, opt);
  const adce::ResultBundle bundle = adce::run_scenario(config, {opt.threads});
  for (const auto& w : bundle.warnings) std::cerr << "warning: " << w << "\n";
  for (const auto& path : adce::write_bundle(bundle, config.output.dir)) std::cout << path << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Anti-dynamical Casimir effect simulator for a qutrit coupled to a cavity"};
  app.require_subcommand(1);
  Options opt;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opt.config_path, "JSON experiment configuration");
    sub->add_option("--out", opt.out_dir, "Output directory (overrides output.dir)");
    sub->add_option("--threads", opt.threads, "Worker threads, 0 = hardware concurrency");
    sub->add_flag("--seedless", opt.seedless, "Assert that no random numbers are used (always true)");
  };

  std::string figure_id;
  auto* dressed = app.add_subcommand("dressed", "Dressed energies and states");
  auto* rates = app.add_subcommand("rates", "Perturbative transition rates");
  auto* simulate = app.add_subcommand("simulate", "Exact and effective dynamics for a custom setup");
  auto* figure = app.add_subcommand("figure", "Reproduce a figure: fig1 fig2a fig2b fig3a fig3b fig3c fig4");
  figure->add_option("id", figure_id, "Figure identifier")->required();
  auto* sweep = app.add_subcommand("sweep", "Rate sweep over up to two parameters");
  auto* schema = app.add_subcommand("schema", "Print the configuration JSON Schema");
  for (auto* sub : {dressed, rates, simulate, figure, sweep}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (schema->parsed()) {
      std::cout << adce::config_schema();
      return kOk;
    }
    adce::Scenario scenario = adce::Scenario::Simulate;
    if (dressed->parsed()) scenario = adce::Scenario::Dressed;
    if (rates->parsed()) scenario = adce::Scenario::Rates;
    if (sweep->parsed()) scenario = adce::Scenario::Sweep;
    if (figure->parsed()) {
      scenario = adce::parse_scenario(figure_id);
      if (!adce::is_figure(scenario)) throw adce::ConfigError("'" + figure_id + "' is not a figure id");
    }
    return run(scenario, opt);
  } catch (const adce::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const adce::InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << "\n";
    return kConfig;
  } catch (const adce::RegimeViolation& e) {
    std::cerr << "regime violation: " << e.what() << "\n";
    return kRegime;
  } catch (const adce::NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  }
}
