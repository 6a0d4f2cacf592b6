// ncentre: batch driver for the n-centre library.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

#include "ncentre/cli.hpp"

namespace fs = std::filesystem;
using namespace ncentre;

namespace {

enum Exit { kOk = 0, kFailed = 1, kBadInput = 2, kPartial = 3 };

std::ofstream open_out(const fs::path& dir, const std::string& name) {
  fs::create_directories(dir);
  std::ofstream f(dir / name, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + (dir / name).string());
  return f;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"n-centre scattering, integrals and symbolic dynamics"};
  app.require_subcommand(1);
  app.fallthrough();

  std::string config_path, out_dir;
  int jobs = 0;
  long long seed = -1;
  app.add_option("--config", config_path, "YAML run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--out", out_dir, "output directory (overrides run.out)");
  app.add_option("--jobs", jobs, "worker threads (overrides run.jobs)")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "sampling seed for check (overrides run.seed)")->check(CLI::NonNegativeNumber);

  auto* scatter = app.add_subcommand("scatter", "scattering batch over the launch grid -> scatter.csv");
  auto* classify = app.add_subcommand("classify", "orbit classes over the launch grid -> classify.csv");
  auto* orbit = app.add_subcommand("orbit", "periodic orbit atlas -> atlas.json (and entropy.csv)");
  auto* entropy = app.add_subcommand("entropy", "entropy estimate -> entropy.json, entropy.csv");
  auto* integrals = app.add_subcommand("integrals", "Gevrey integrals, brackets and rank -> integrals.csv");
  auto* check = app.add_subcommand("check", "invariant battery -> check.json");
  auto* dump = app.add_subcommand("dump-config", "print the normalized configuration");

  CLI11_PARSE(app, argc, argv);

  RunConfig c;
  try {
    c = load_config(config_path);
    if (!out_dir.empty()) c.run.out = out_dir;
    if (jobs > 0) c.run.jobs = jobs;
    if (seed >= 0) c.run.seed = static_cast<std::uint64_t>(seed);
  } catch (const Error& e) {
    std::cerr << config_path << ": " << e.what() << '\n';
    return kBadInput;
  }

  if (dump->parsed()) {
    std::cout << dump_config(c);
    return kOk;
  }

  const fs::path dir = c.run.out;
  const int J = c.run.jobs;
  try {
    open_out(dir, "config.yaml") << dump_config(c);

    if (scatter->parsed()) {
      const auto rows = run_scatter_batch(c, J);
      auto f = open_out(dir, "scatter.csv");
      write_scatter_csv(f, c, rows);
      int scattering = 0, flagged = 0;
      for (const auto& r : rows) {
        scattering += r.analysed;
        flagged += !r.flags.empty();
      }
      std::cout << rows.size() << " rows, " << scattering << " analysed scattering, " << flagged << " flagged\n";
    } else if (classify->parsed()) {
      const auto rows = run_classify_batch(c, J);
      auto f = open_out(dir, "classify.csv");
      write_classify_csv(f, c, rows);
      std::cout << rows.size() << " rows\n";
    } else if (orbit->parsed() || entropy->parsed()) {
      const auto atlas = run_orbit_atlas(c, J);
      const auto& r = atlas.report;
      for (const auto& o : r.orbits)
        if (o.weak_contraction)
          std::cerr << "warning: weak Newton contraction for " << to_string(o.word) << "; E may be below threshold\n";
      for (const auto& [w, msg] : r.failures) std::cerr << to_string(w) << ": " << msg << '\n';
      if (orbit->parsed()) {
        auto f = open_out(dir, "atlas.json");
        write_atlas_json(f, c, atlas);
      } else {
        if (!atlas.enumerated) std::cerr << "warning: symbolic.words is set; entropy uses those words only\n";
        auto f = open_out(dir, "entropy.json");
        write_entropy_json(f, c, r);
      }
      if (atlas.enumerated) {
        auto f = open_out(dir, "entropy.csv");
        write_entropy_csv(f, c, r);
        std::cout << "h_est = " << format_double(r.h_est) << '\n';
      }
      std::cout << r.orbits.size() << " realized, " << r.failures.size() << " failed\n";
      return atlas.complete() ? kOk : kPartial;
    } else if (integrals->parsed()) {
      const auto rows = run_integrals_batch(c, J);
      auto f = open_out(dir, "integrals.csv");
      write_integrals_csv(f, c, rows);
      std::cout << rows.size() << " rows\n";
    } else if (check->parsed()) {
      const auto report = run_check_suite(c, J);
      auto f = open_out(dir, "check.json");
      write_check_json(f, c, report);
      for (const auto& k : report.checks)
        std::cout << (k.passed ? "PASS " : "FAIL ") << k.name << "  measured " << format_double(k.measured)
                  << "  tolerance " << format_double(k.tolerance) << '\n';
      return report.passed() ? kOk : kFailed;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kBadInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
  return kOk;
}
