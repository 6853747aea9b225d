// bohm: scenario runner.
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "bohm/error.hpp"
#include "bohm/io/presets.hpp"
#include "bohm/io/runner.hpp"
#include "bohm/io/scenario.hpp"

namespace {

enum Exit { kOk = 0, kFailure = 1, kParse = 2, kUnstable = 3, kInconclusive = 4 };

// Bare numbers on the command line are electron volts.
double cli_energy(const std::string& text) {
  const bool bare = !text.empty() && (std::isdigit(static_cast<unsigned char>(text.back())) || text.back() == '.');
  return bohm::io::parse_quantity(bare ? text + " eV" : text, bohm::io::Dimension::energy);
}

int cmd_run(const std::string& file, const std::string& out, long long seed, std::size_t threads, bool override) {
  auto cfg = bohm::io::load_scenario(file);
  bohm::io::RunOptions opts;
  opts.out_dir = out;
  if (seed >= 0) opts.seed = static_cast<std::uint64_t>(seed);
  opts.threads = threads;
  opts.override_stability = override;
  const auto res = bohm::io::run_scenario(std::move(cfg), opts);
  std::cout << res.dir.string() << "\n";
  for (const auto& f : res.files) std::cout << "  " << f.name << "  " << f.rows << " rows\n";
  std::cout << "  stability factor " << bohm::io::format_double(res.stability_factor) << ", node carries "
            << res.node_carries << ", boundary hits " << res.boundary_hits << "\n";
  return kOk;
}

int cmd_scan(const std::string& file, const std::string& emin, const std::string& emax, const std::string& de,
             const std::string& out) {
  const auto cfg = bohm::io::load_scenario(file);
  const auto scan = bohm::io::scan_transmission(cfg, cli_energy(emin), cli_energy(emax), cli_energy(de));
  const auto text = bohm::io::transmission_csv(scan, cfg.units());
  if (out.empty()) {
    std::cout << text;
  } else {
    const std::filesystem::path p(out);
    bohm::io::write_file(p.has_parent_path() ? p.parent_path() : ".", p.filename().string(), text, scan.size());
  }
  for (const auto& p : scan) {
    if (p.resonance) {
      std::cerr << "resonance at " << bohm::io::format_double(cfg.units().electron_volts(p.energy))
                << " eV, |t|^2 = " << bohm::io::format_double(p.transmission) << "\n";
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bohmian mechanics engine: wave functions, trajectories, quantum Hamilton-Jacobi, many-body"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "run a scenario file; output goes to $BOHM_OUTPUT_ROOT (default ./runs)");
  std::string run_file, run_out;
  long long run_seed = -1;
  std::size_t run_threads = 1;
  bool run_override = false;
  run->add_option("scenario", run_file, "scenario file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", run_out, "output directory (default <root>/<name>-seed<seed>)");
  run->add_option("--seed", run_seed, "ensemble seed, replaces the scenario's")->check(CLI::NonNegativeNumber);
  run->add_option("--threads", run_threads, "worker threads; outputs do not depend on it")->check(CLI::PositiveNumber);
  run->add_flag("--override-stability", run_override, "run even when the stability factor exceeds the gate");

  auto* scan = app.add_subcommand("scan-transmission", "|t|^2 and |r|^2 over an energy range (bare numbers in eV)");
  std::string scan_file, emin, emax, de, scan_out;
  scan->add_option("scenario", scan_file, "scenario file")->required()->check(CLI::ExistingFile);
  scan->add_option("--emin", emin, "lowest energy")->required();
  scan->add_option("--emax", emax, "highest energy")->required();
  scan->add_option("--de", de, "energy step")->required();
  scan->add_option("--out", scan_out, "CSV file (default stdout)");

  auto* presets = app.add_subcommand("presets", "built-in scenarios");
  presets->require_subcommand(1);
  auto* list = presets->add_subcommand("list", "names and summaries");
  auto* show = presets->add_subcommand("show", "print a preset's scenario text");
  std::string show_name;
  show->add_option("name", show_name, "preset name")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kParse;
  }

  try {
    if (*run) return cmd_run(run_file, run_out, run_seed, run_threads, run_override);
    if (*scan) return cmd_scan(scan_file, emin, emax, de, scan_out);
    if (*list) {
      for (const auto& p : bohm::io::preset_list()) std::cout << p.name << "\t" << p.summary << "\n";
      return kOk;
    }
    if (*show) {
      std::cout << bohm::io::preset_text(show_name);
      return kOk;
    }
  } catch (const bohm::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParse;
  } catch (const bohm::InstabilityError& e) {
    std::cerr << "unstable: " << e.what() << "\n";
    return kUnstable;
  } catch (const bohm::InconclusiveRunError& e) {
    std::cerr << "inconclusive: " << e.what() << "\n";
    return kInconclusive;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kFailure;
  }
  return kFailure;
}
