#include <cstdint>
#include <cstdio>
#include <string>

#include <CLI11.hpp>

#include "gdrisk/commands.hpp"

namespace {

struct CliState {
  gdrisk::RunConfig rc;
  std::string threads = "auto";
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void add_common_options(CLI::App* sub, CliState& state) {
  sub->add_option("--config", state.rc.config_path, "config file (sectioned key = value)");
  sub->add_option("--out", state.rc.output_dir, "output directory")->capture_default_str();
  sub->add_option("--threads", state.threads, "worker threads (N or auto)")
      ->capture_default_str();
  sub->add_option("--set", state.rc.overrides, "override, repeatable: section.key=value");
  sub->add_option("--seed", state.seed, "master seed override")
      ->each([&state](const std::string&) { state.seed_set = true; });
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"numerical laboratory for overparameterized linear regression under gradient descent"};
  app.require_subcommand(1);

  CliState state;
  const std::pair<const char*, const char*> commands[] = {
      {"spectrum", "effective-dimension rate tables over a grid of sample sizes"},
      {"trajectory", "mean excess-risk curves along the GD trajectory"},
      {"bounds", "bias/variance bound curves and comparison-bound rates"},
      {"table", "optimal vs min-norm excess risk across spectrum families"},
      {"scan", "low-risk epoch regions across sample sizes"},
      {"verify", "cross-module oracle checks"},
  };
  for (const auto& [name, desc] : commands) {
    CLI::App* sub = app.add_subcommand(name, desc);
    add_common_options(sub, state);
    sub->callback([&state, name = std::string(name)] { state.rc.command = name; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : gdrisk::kExitConfigError;
  }

  if (state.threads == "auto") {
    state.rc.threads = 0;
  } else {
    try {
      state.rc.threads = std::stoi(state.threads);
    } catch (const std::exception&) {
      state.rc.threads = -1;
    }
    if (state.rc.threads < 1) {
      std::fprintf(stderr, "config error: --threads expects a positive integer or auto\n");
      return gdrisk::kExitConfigError;
    }
  }
  if (state.seed_set) state.rc.seed = state.seed;

  return gdrisk::run_command(state.rc);
}
