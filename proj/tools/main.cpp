// Copyright (c) 2026 the tracefem authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "tracefem/study.hpp"

namespace {

struct RawOptions {
  std::string config_file;
  std::vector<std::pair<std::string, std::string>> overrides;
};

void add_study_options(CLI::App* sub, RawOptions& raw) {
  sub->add_option("--config", raw.config_file, "config file (key = value lines)");
  for (const auto& key : tracefem::config_keys()) {
    if (key == "study") continue;
    std::string names = "--" + key;
    if (key == "out_dir") names += ",--out";
    if (key == "rho_s") names += ",--rho";
    sub->add_option_function<std::string>(
        names,
        [&raw, key](const std::string& v) { raw.overrides.emplace_back(key, v); },
        "override config key '" + key + "'");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"TraceFEM studies: elliptic PDEs on implicitly defined surfaces"};
  app.require_subcommand(1);

  const std::vector<std::pair<std::string, std::string>> studies = {
      {"convergence", "uniform refinement error/EOC study"},
      {"conditioning", "stabilized vs raw condition numbers over offsets"},
      {"supg", "streamline-stabilized convection-diffusion study"},
      {"adapt", "residual-estimator driven adaptive study"},
      {"geometry", "discrete surface distance study (k = 1, 2)"},
  };

  std::map<std::string, RawOptions> raw;
  for (auto& [name, desc] : studies)
    add_study_options(app.add_subcommand(name, desc), raw[name]);

  CLI11_PARSE(app, argc, argv);

  try {
    for (auto& [name, desc] : studies) {
      (void)desc;
      CLI::App* sub = app.get_subcommand(name);
      if (!sub->parsed()) continue;
      tracefem::StudyConfig cfg;
      const RawOptions& r = raw[name];
      if (!r.config_file.empty()) {
        std::ifstream in(r.config_file);
        if (!in) {
          std::cerr << "cannot open config file " << r.config_file << "\n";
          return 1;
        }
        cfg = tracefem::parse_config(in);
      }
      cfg.study = name;
      for (auto& [key, value] : r.overrides)
        tracefem::apply_override(cfg, key, value);
      tracefem::StudyReport rep = tracefem::run_study(cfg);
      std::cout << rep.summary;
      std::cout << "report written to " << cfg.out_dir << "/report.csv\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
