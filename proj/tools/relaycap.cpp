#include <fstream>
#include <iostream>

#include "CLI11.hpp"
#include "relaycap/cli.hpp"

using namespace relaycap;

int main(int argc, char** argv) {
  CLI::App app{"Capacity and outage of relayed fading links"};
  app.require_subcommand(1);
  app.footer(config::schema_help());

  std::string config_path, out_path, format;
  std::optional<std::uint64_t> seed, samples;
  std::optional<int> jobs;
  bool with_mc = false;

  const auto common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_path, "output file, - for stdout (overrides output.path)");
    cmd->add_option("--format", format, "csv or json (overrides output.format)")
        ->check(CLI::IsMember({"csv", "json"}));
    cmd->add_option("--seed", seed, "Monte Carlo seed (overrides mc.seed)");
    cmd->add_option("--samples", samples, "Monte Carlo samples (overrides mc.samples)");
    cmd->add_option("--jobs", jobs, "worker threads (overrides jobs)")->check(CLI::PositiveNumber);
  };
  auto* sweep = app.add_subcommand("capacity-sweep", "capacity of every policy over the SNR grid");
  auto* outage = app.add_subcommand("outage-sweep", "outage probability over the SNR and tau grids");
  auto* cutoff = app.add_subcommand("opra-cutoff", "OPRA cutoff SNR over the SNR grid");
  auto* check = app.add_subcommand("validate", "analytic results against Monte Carlo");
  for (auto* cmd : {sweep, outage, cutoff, check}) common(cmd);
  for (auto* cmd : {sweep, outage}) cmd->add_flag("--validate", with_mc, "add Monte Carlo columns");

  CLI11_PARSE(app, argc, argv);

  config::ExperimentConfig cfg;
  try {
    cfg = config::load(config_path);
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return cli::kConfigError;
  }
  if (!out_path.empty()) cfg.output_path = out_path;
  if (!format.empty()) cfg.format = format == "json" ? config::Format::Json : config::Format::Csv;
  if (seed) cfg.mc.seed = *seed;
  if (samples) cfg.mc.samples = *samples;
  if (jobs) cfg.jobs = *jobs;

  std::ofstream file;
  if (cfg.output_path != "-") {
    file.open(cfg.output_path);
    if (!file) {
      std::cerr << "cannot write " << cfg.output_path << '\n';
      return cli::kConfigError;
    }
  }
  std::ostream& out = file.is_open() ? file : std::cout;

  if (*sweep) return cli::capacity_sweep(cfg, with_mc, out, std::cerr);
  if (*outage) return cli::outage_sweep(cfg, with_mc, out, std::cerr);
  if (*cutoff) return cli::opra_cutoff(cfg, out, std::cerr);
  return cli::validate(cfg, out, std::cerr);
}
