#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "modlab/cli.hpp"

int main(int argc, char** argv) {
  CLI::App app{"modlab: modulated ergodic averages along primes"};
  app.set_version_flag("--version", std::string(modlab::tool_version));
  app.require_subcommand(1);

  modlab::Overrides ov;
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  std::string out;
  double ratio = 0.0;
  double tol = 0.0;
  std::string cache;

  const auto common = [&](CLI::App* sub, bool with_tol) {
    sub->add_option("--horizon,-H", horizon, "horizon N (overrides the spec)");
    sub->add_option("--seed", seed, "RNG seed (overrides the spec)");
    sub->add_option("--out,-o", out, "output directory (run) or file (verify, seq-stats)");
    sub->add_option("--checkpoint-ratio", ratio, "geometric checkpoint ratio > 1")->check(CLI::PositiveNumber);
    if (with_tol) sub->add_option("--tol", tol, "convergence tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--cache-dir", cache, "prime table cache directory (default $MODLAB_CACHE_DIR)");
  };

  auto* sieve = app.add_subcommand("sieve", "build the prime table and print summary statistics");
  std::uint64_t sieve_h = 0;
  sieve->add_option("horizon", sieve_h, "table horizon H")->required();
  sieve->add_option("--cache-dir", cache, "prime table cache directory");

  auto* run = app.add_subcommand("run", "run an experiment spec and write trace CSV and report JSON");
  std::string spec_path;
  run->add_option("spec", spec_path, "experiment spec (JSON)")->required();
  common(run, true);

  auto* verify = app.add_subcommand("verify", "run the theorem suite and print the pass/fail matrix");
  std::string config_path;
  verify->add_option("config", config_path, "suite config (JSON)");
  common(verify, false);

  auto* stats = app.add_subcommand("seq-stats", "running statistics of a sequence as CSV");
  std::string seq;
  stats->add_option("sequence", seq, "sequence spec: JSON file or inline JSON")->required();
  common(stats, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : modlab::exit_error;
  }

  const auto collect = [&](CLI::App* sub) {
    if (sub->count("--horizon")) ov.horizon = horizon;
    if (sub->count("--seed")) ov.seed = seed;
    if (sub->count("--out")) ov.out = out;
    if (sub->count("--checkpoint-ratio")) ov.checkpoint_ratio = ratio;
    if (sub->get_option_no_throw("--tol") && sub->count("--tol")) ov.tol = tol;
    if (sub->count("--cache-dir")) ov.cache_dir = cache;
  };

  if (*sieve) {
    std::optional<std::string> dir = modlab::default_cache_dir();
    if (sieve->count("--cache-dir")) dir = cache;
    return modlab::cmd_sieve(sieve_h, std::cout, std::cerr, dir);
  }
  if (*run) {
    collect(run);
    return modlab::cmd_run(spec_path, ov, std::cout, std::cerr);
  }
  if (*verify) {
    collect(verify);
    std::optional<std::string> cfg;
    if (!config_path.empty()) cfg = config_path;
    return modlab::cmd_verify(cfg, ov, std::cout, std::cerr);
  }
  collect(stats);
  return modlab::cmd_seq_stats(seq, ov.horizon.value_or(10000), ov, std::cout, std::cerr);
}
