#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "commands.hpp"

namespace {

using qclose::cli::RunConfig;

struct Common {
  std::string config, out;
  long threads = 0;
  std::optional<long> seed;
};

void add_common(CLI::App* sub, Common& c) {
  sub->add_option("--config", c.config, "Configuration file")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "Output CSV path (standard output when omitted)");
  sub->add_option("--threads", c.threads, "Worker threads, overrides run.threads")->check(CLI::PositiveNumber);
  sub->add_option("--seed", c.seed, "Random seed, overrides run.seed");
}

RunConfig resolve(const Common& c) {
  RunConfig cfg = c.config.empty() ? RunConfig() : RunConfig::load(c.config);
  if (c.threads > 0) cfg.set("run", "threads", std::to_string(c.threads));
  if (c.seed) cfg.set("run", "seed", std::to_string(*c.seed));
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"High-order close evaluation of Laplace layer potentials"};
  app.require_subcommand(1);
  Common common;
  using Command = void (*)(const RunConfig&, std::ostream&);
  const std::pair<const char*, Command> commands[] = {
      {"fit-convergence", qclose::cli::cmd_fit_convergence},
      {"eval-grid", qclose::cli::cmd_eval_grid},
      {"table1", qclose::cli::cmd_table1},
      {"bvp", qclose::cli::cmd_bvp},
  };
  const char* help[] = {
      "Density-fit convergence sweep on graph patches",
      "Layer potential on a target slice against a reference",
      "Convergence table against a refined reference",
      "Interior Dirichlet problem with exterior point sources",
  };
  std::vector<std::pair<CLI::App*, Command>> subs;
  for (size_t i = 0; i < std::size(commands); ++i) {
    CLI::App* sub = app.add_subcommand(commands[i].first, help[i]);
    add_common(sub, common);
    subs.emplace_back(sub, commands[i].second);
  }
  CLI::App* show = app.add_subcommand("config", "Print the resolved configuration in canonical form");
  add_common(show, common);

  CLI11_PARSE(app, argc, argv);
  try {
    const RunConfig cfg = resolve(common);
    std::ostringstream text;
    if (show->parsed()) text << cfg.canonical();
    for (const auto& [sub, run] : subs)
      if (sub->parsed()) run(cfg, text);
    if (common.out.empty()) {
      std::cout << text.str();
    } else {
      std::ofstream f(common.out, std::ios::binary);
      if (!(f << text.str())) throw std::runtime_error(common.out + ": cannot write output");
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
