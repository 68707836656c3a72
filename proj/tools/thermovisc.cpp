#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "thermovisc/thermovisc.hpp"

int main(int argc, char** argv) {
  thermovisc::RunSpec run;
  CLI::App app{"Thermo-viscoelastic solids at finite and small strain"};
  app.set_version_flag("--version", thermovisc::kVersion);
  std::string eps;
  double alpha = 0.0;
  app.add_option("command", run.command, "validate, simulate, linearize-sweep or diagnose")
      ->required()
      ->check(CLI::IsMember({"validate", "simulate", "linearize-sweep", "diagnose"}));
  app.add_option("--config", run.config_path, "configuration file")->required();
  app.add_option("--out", run.out_dir, "output directory")->required();
  app.add_option("--eps", eps, "comma-separated eps values");
  auto* alpha_opt = app.add_option("--alpha", alpha, "override of alpha");
  app.add_option("--parallel", run.parallel, "concurrent sweep points")->check(CLI::PositiveNumber);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : thermovisc::kExitConfig;
  }
  if (*alpha_opt) run.alpha = alpha;
  if (!eps.empty()) {
    std::stringstream ss(eps);
    std::string item;
    while (std::getline(ss, item, ',')) {
      try {
        std::size_t used = 0;
        run.eps_list.push_back(std::stod(item, &used));
        if (used != item.size()) throw std::invalid_argument(item);
      } catch (const std::exception&) {
        std::cerr << "config error: --eps: cannot parse '" << item << "'\n";
        return thermovisc::kExitConfig;
      }
    }
  }
  return thermovisc::run_command(run, std::cout, std::cerr);
}
