// Command-line front end: fit, sigma, simulate, datasets.

#include <unistd.h>

#include <cstdlib>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "ffitts/cli.hpp"

namespace {

using ffitts::cli::RunConfig;

void add_input_flags(CLI::App* cmd, RunConfig& cfg, std::string& dim, std::string& axis) {
  cmd->add_option("--dataset", cfg.dataset, "embedded dataset name (paper-1d, paper-2d)");
  cmd->add_option("--input", cfg.input, "trial or aggregate CSV ('-' for stdin)");
  cmd->add_option("--dim", dim, "dimensionality of --input data")->check(CLI::IsMember({"1d", "2d"}));
  cmd->add_option("--axis", axis, "endpoint axis for trial input")->check(CLI::IsMember({"x", "y", "bivariate"}));
  cmd->add_option("--outlier-mm", cfg.outlier_mm, "outlier radius around the target centre");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fitts / FFitts movement-time model fitting"};
  app.require_subcommand(1);

  RunConfig cfg;
  std::string dim = "1d", axis = "y", format = "md", models = "all";
  std::string sim_dim = "1d", amplitudes = "20,30,45,60", widths = "2,4,6,8,10";

  auto* fit = app.add_subcommand("fit", "fit and compare movement-time models");
  add_input_flags(fit, cfg, dim, axis);
  fit->add_option("--models", models, "m1,...,m7 or all");
  fit->add_option("--sigma-a", cfg.sigma_a, "calib-ra|calib-acc|intercept-fitts|intercept-random|<mm>");
  fit->add_flag("--cv,!--no-cv", cfg.cv, "leave-one-condition-out cross-validation");

  auto* sigma = app.add_subcommand("sigma", "estimate the finger tremor factor sigma_a");
  add_input_flags(sigma, cfg, dim, axis);
  sigma->add_option("--calibration", cfg.calibration, "calibration-task trial CSV");
  sigma->add_option("--method", cfg.sigma_method,
                    "all|intercept|intercept-fitts|intercept-random|calib-ra|calib-acc");

  auto* sim = app.add_subcommand("simulate", "generate dual-Gaussian touch endpoints as trial CSV");
  sim->add_option("--alpha", cfg.sim.alpha, "relative spread coefficient (sigma_r^2 = alpha W^2)");
  sim->add_option("--sigma-a", cfg.sim.sigma_a_mm, "absolute finger tremor SD in mm");
  sim->add_option("--trials", cfg.sim.trials_per_condition, "trials per condition");
  sim->add_option("--seed", cfg.sim.seed, "64-bit seed");
  sim->add_option("--dim", sim_dim, "1d or 2d")->check(CLI::IsMember({"1d", "2d"}));
  sim->add_option("--amplitudes", amplitudes, "comma-separated amplitudes in mm");
  sim->add_option("--widths", widths, "comma-separated widths in mm");
  sim->add_option("--a-ms", cfg.sim.mt_model.a_ms, "MT intercept");
  sim->add_option("--b-ms", cfg.sim.mt_model.b_ms_per_bit, "MT slope per bit");
  sim->add_option("--noise-ms", cfg.sim.mt_model.noise_sd_ms, "MT noise SD");

  auto* ds = app.add_subcommand("datasets", "list embedded datasets or export one as aggregate CSV");
  ds->add_option("--dataset", cfg.dataset, "export this dataset");

  for (auto* cmd : {fit, sigma, sim, ds}) {
    cmd->add_option("--format", format, "md|csv|json")->check(CLI::IsMember({"md", "markdown", "csv", "json"}));
    cmd->add_option("--out", cfg.out, "output path (default stdout)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : ffitts::cli::kExitUsage;
  }

  auto split_list = [](const std::string& s) {
    std::vector<double> v;
    std::size_t start = 0;
    while (start <= s.size()) {
      const auto pos = s.find(',', start);
      const auto tok = s.substr(start, pos == std::string::npos ? std::string::npos : pos - start);
      if (!tok.empty()) v.push_back(std::stod(tok));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
    return v;
  };

  cfg.format = *ffitts::cli::parse_format(format);
  cfg.axis = *ffitts::cli::parse_axis(axis);
  if (fit->parsed()) {
    cfg.command = ffitts::cli::Command::Fit;
  } else if (sigma->parsed()) {
    cfg.command = ffitts::cli::Command::Sigma;
  } else if (sim->parsed()) {
    cfg.command = ffitts::cli::Command::Simulate;
    cfg.seed_given = sim->count("--seed") > 0;
    cfg.sim.dimensionality = sim_dim == "2d" ? ffitts::Dimensionality::TwoD : ffitts::Dimensionality::OneD;
    try {
      cfg.sim.amplitudes_mm = split_list(amplitudes);
      cfg.sim.widths_mm = split_list(widths);
    } catch (const std::exception&) {
      std::cerr << "usage error: --amplitudes/--widths must be comma-separated numbers\n";
      return ffitts::cli::kExitUsage;
    }
  } else {
    cfg.command = ffitts::cli::Command::Datasets;
  }
  cfg.dim = dim == "2d" ? ffitts::Dimensionality::TwoD : ffitts::Dimensionality::OneD;
  // the paper-2d dataset is 2D regardless of --dim; --dim only labels file input
  cfg.models.clear();
  {
    std::size_t start = 0;
    while (true) {
      const auto pos = models.find(',', start);
      cfg.models.push_back(models.substr(start, pos == std::string::npos ? std::string::npos : pos - start));
      if (pos == std::string::npos) break;
      start = pos + 1;
    }
  }
  cfg.color = isatty(STDOUT_FILENO) && std::getenv("FFITTS_NO_COLOR") == nullptr;
  return ffitts::cli::run(cfg);
}
