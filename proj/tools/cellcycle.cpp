// Command-line front end: validate, spectral, evolve, abm.
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "cellcycle/commands.hpp"

namespace {

struct Args {
  std::string config, preset;
  std::vector<std::string> sets;
  cellcycle::CliOptions cli;
  int grid = 0;
  double t_end = 0.0;
  long cells = 0;
  unsigned long long seed = 0;
};

void add_common(CLI::App* sub, Args& a) {
  sub->add_option("-c,--config", a.config, "config file (key = value lines)");
  sub->add_option("-p,--preset", a.preset, "bundled preset name");
  sub->add_option("-s,--set", a.sets, "override a key: --set cycle.eps=0.3");
  sub->add_option("-o,--out", a.cli.out, "output directory")->capture_default_str();
  sub->add_option("-j,--threads", a.cli.threads, "worker threads")->check(CLI::Range(1, 1024))->capture_default_str();
  sub->add_option("--grid", a.grid, "quadrature nodes in x_b")->check(CLI::Range(16, 65536));
  sub->add_option("--t-end", a.t_end, "end time")->check(CLI::PositiveNumber);
  sub->add_option("--cells", a.cells, "abm: population cap before thinning")->check(CLI::Range(2L, 1000000000L));
  sub->add_option("--seed", a.seed, "abm: random seed");
}

cellcycle::Config load(const Args& a) {
  cellcycle::Config c;
  if (!a.config.empty() && !a.preset.empty()) throw cellcycle::ConfigError("give --config or --preset, not both");
  if (!a.config.empty())
    c = cellcycle::Config::load(a.config);
  else if (!a.preset.empty())
    c = cellcycle::preset_config(a.preset);
  else
    throw cellcycle::ConfigError("no configuration: use --config FILE or --preset NAME");
  for (const auto& s : a.sets) c.apply(s);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Age and size structured cell populations: growth rate, stable profiles, transport, agents"};
  app.require_subcommand(1);
  Args a;
  std::string names;
  for (const auto& [k, v] : cellcycle::presets()) names += (names.empty() ? "" : ", ") + k;
  app.footer("presets: " + names);

  auto* v = app.add_subcommand("validate", "check the model assumptions");
  auto* s = app.add_subcommand("spectral", "growth rate and stable profiles");
  auto* e = app.add_subcommand("evolve", "transport the density over time");
  auto* b = app.add_subcommand("abm", "agent-based simulation");
  for (auto* sub : {v, s, e, b}) add_common(sub, a);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& ex) {
    int rc = app.exit(ex);
    return rc == 0 ? 0 : cellcycle::kParse;
  }

  if (a.grid) a.cli.grid = a.grid;
  if (a.t_end > 0) a.cli.t_end = a.t_end;
  if (a.cells) a.cli.cells = a.cells;
  for (auto* sub : {v, s, e, b})
    if (sub->count("--seed")) a.cli.seed = a.seed;

  cellcycle::Config cfg;
  if (int rc = cellcycle::detail::guarded(std::cerr, [&] {
        cfg = load(a);
        return 0;
      }))
    return rc;

  if (*v) return cellcycle::cmd_validate(cfg, a.cli, std::cout, std::cerr);
  if (*s) return cellcycle::cmd_spectral(cfg, a.cli, std::cout, std::cerr);
  if (*e) return cellcycle::cmd_evolve(cfg, a.cli, std::cout, std::cerr);
  return cellcycle::cmd_abm(cfg, a.cli, std::cout, std::cerr);
}
