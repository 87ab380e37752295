#include <iostream>

#include <CLI11.hpp>

#include "run.hpp"

int main(int argc, char** argv) {
  using dnar::app::RunOptions;
  CLI::App app{"dnarlab: DNAR / Euler-alignment simulation lab"};
  app.require_subcommand(1);

  RunOptions opts;
  std::string config, out, a, b;
  std::uint64_t seed = 0;
  int workers = 1;

  for (const auto& mode : dnar::app::modes()) {
    auto* sub = app.add_subcommand(mode);
    sub->add_option("--config", config, "run configuration (JSON)")->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory");
    sub->add_option("--seed", seed, "master seed (u64)");
    sub->add_option("--workers", workers, "worker threads for independent runs");
    if (mode == "metrics") {
      sub->add_option("--a", a, "first measure (CSV or JSON)")->required()->check(CLI::ExistingFile);
      sub->add_option("--b", b, "second measure (CSV or JSON)")->required()->check(CLI::ExistingFile);
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : dnar::app::kConfigError;
  }

  const CLI::App* sub = app.get_subcommands().front();
  opts.mode = sub->get_name();
  if (sub->count("--config")) opts.config = config;
  if (sub->count("--out")) opts.out = out;
  if (sub->count("--seed")) opts.seed = seed;
  if (sub->count("--workers")) opts.workers = workers;
  if (opts.mode == "metrics") {
    opts.a = a;
    opts.b = b;
  }
  return dnar::app::run(opts, std::cerr);
}
