#include "cli.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "instanton/amoeba.hpp"
#include "instanton/casegen.hpp"
#include "instanton/errors.hpp"
#include "instanton/instanton.hpp"
#include "instanton/report.hpp"

namespace instanton::cli {

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
  if (!f) throw Error("failed writing " + path.string());
}

}  // namespace

ScanConfig load_scan_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scan config " + path);
  ScanConfig c;
  try {
    const auto j = nlohmann::json::parse(in);
    c.grid = j.value("grid", c.grid);
    c.cost = j.value("cost", c.cost);
    c.amoeba_restarts = j.value("amoeba_restarts", c.amoeba_restarts);
    c.seed = j.value("seed", c.seed);
    c.out = j.value("out", c.out);
    c.jobs = j.value("jobs", c.jobs);
    c.kkt_tolerance = j.value("kkt_tolerance", c.kkt_tolerance);
    c.top = j.value("top", c.top);
    if (j.contains("dump_facets")) c.dump_facets = j.at("dump_facets").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed scan config: ") + e.what());
  }
  return c;
}

void validate(const ScanConfig& c) {
  if (c.grid.empty()) throw ValidationError("scan needs a grid path");
  if (!std::filesystem::exists(c.grid)) throw ValidationError("grid file not found: " + c.grid);
  if (c.out.empty()) throw ValidationError("scan needs an output directory");
  if (c.jobs < 1) throw ValidationError("jobs must be at least 1");
  if (!(c.kkt_tolerance >= kKktTolerance))
    throw ValidationError("kkt tolerance cannot be tighter than " + format_double(kKktTolerance));
  if (c.cost != "white-gaussian") throw ValidationError("unknown cost kind '" + c.cost + "'");
}

int cmd_scan(const ScanConfig& config, std::ostream& out, std::ostream& err) {
  try {
    validate(config);
    const auto start = std::chrono::steady_clock::now();
    const GridModel grid = load_grid(config.grid);
    const auto cost = make_cost(config.cost, grid);
    const Polytope polytope = build_polytope(grid);
    const InstantonSpectrum spectrum = scan(polytope, *cost, ScanOptions{config.jobs});
    const double scan_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    for (std::size_t f : spectrum.skipped_facets)
      err << "notice: facet " << f << " has a zero normal and was skipped\n";

    ScanReportInput in;
    in.grid_label = config.grid;
    in.cost_name = cost->name();
    in.grid = &grid;
    in.polytope = &polytope;
    in.cost = cost.get();
    in.spectrum = &spectrum;
    in.kkt_tolerance = config.kkt_tolerance;
    double amoeba_seconds = 0.0;
    if (config.amoeba_restarts > 0) {
      const auto t0 = std::chrono::steady_clock::now();
      AmoebaOptions opts;
      opts.restarts = config.amoeba_restarts;
      opts.seed = config.seed;
      const AmoebaResult a = amoeba_search(polytope, *cost, opts);
      amoeba_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      AmoebaComparison cmp;
      cmp.restarts = opts.restarts;
      cmp.seed = opts.seed;
      cmp.amoeba_cost = a.best_cost;
      cmp.exact_cost = spectrum.top().result.cost;
      cmp.gap = a.best_cost - cmp.exact_cost;
      cmp.amoeba_exterior = a.best_is_exterior;
      cmp.rho.assign(a.best_rho.data(), a.best_rho.data() + a.best_rho.size());
      in.amoeba = cmp;
    }

    const std::string report = spectrum_report_json(in);
    const std::string summary = summary_table(in);
    const std::string sites = sites_csv(in, config.top);
    const std::string lines = lines_csv(in, config.top);
    const std::filesystem::path dir(config.out);
    std::filesystem::create_directories(dir);
    write_file(dir / "report.json", report);
    write_file(dir / "summary.txt", summary);
    write_file(dir / "sites.csv", sites);
    write_file(dir / "lines.csv", lines);
    if (config.dump_facets) write_file(*config.dump_facets, facets_to_json(polytope, grid));

    out << summary;
    out << "scan time: " << scan_seconds << " s (" << polytope.size() << " facets)\n";
    if (config.amoeba_restarts > 0) out << "amoeba time: " << amoeba_seconds << " s\n";
    out << "wrote " << (dir / "report.json").string() << "\n";
    return kOk;
  } catch (const EquilibriumInfeasible& e) {
    err << "error: " << e.what() << "\n";
    return kEquilibriumInfeasible;
  } catch (const AllInfeasible& e) {
    err << "error: " << e.what() << "\n";
    return kAllInfeasible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

int cmd_extend(const std::string& base, std::size_t n_new, double penetration, std::uint64_t seed,
               const std::string& out_path, std::ostream& out, std::ostream& err) {
  try {
    const GridModel g = load_grid(base);
    ExtensionSpec spec;
    spec.n_new = n_new;
    spec.penetration = penetration;
    spec.seed = seed;
    const GridModel extended = extend(g, spec);
    save_grid(extended, out_path);
    out << "wrote " << out_path << ": " << extended.bus_count() << " buses, " << extended.line_count()
        << " lines, penetration " << penetration_achieved(extended) << "\n";
    return kOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Most probable renewable configurations that overload a DC grid", "instanton"};
  app.require_subcommand(1);

  ScanConfig scan_cfg;
  std::string config_path;
  auto* scan = app.add_subcommand("scan", "Exact instanton scan over every polytope facet");
  scan->add_option("--config", config_path, "JSON scan configuration");
  scan->add_option("--grid", scan_cfg.grid, "Grid file");
  scan->add_option("--cost", scan_cfg.cost, "Cost model (white-gaussian)");
  scan->add_option("--amoeba-restarts", scan_cfg.amoeba_restarts, "Downhill-simplex restarts, 0 = off");
  scan->add_option("--seed", scan_cfg.seed, "Seed of the amoeba cross-check");
  scan->add_option("--out", scan_cfg.out, "Output directory");
  scan->add_option("--jobs", scan_cfg.jobs, "Parallel facet workers");
  scan->add_option("--kkt-tol", scan_cfg.kkt_tolerance, "KKT residual threshold (>= 1e-8)");
  scan->add_option("--top", scan_cfg.top, "Instantons written to the CSV files");
  scan->add_option("--dump-facets", scan_cfg.dump_facets, "Write the facets as JSON");

  std::string base;
  std::size_t n_new = 0;
  double penetration = 0.0;
  std::uint64_t seed = 0;
  std::string out_path;
  auto* ext = app.add_subcommand("extend", "Add seeded renewable buses to a base grid");
  ext->add_option("--base", base, "Base grid file")->required();
  ext->add_option("--n-new", n_new, "Number of renewable buses")->required();
  ext->add_option("--penetration", penetration, "sum(rho_bar) / sum(p)")->required();
  ext->add_option("--seed", seed, "Seed");
  ext->add_option("--out", out_path, "Output grid file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kInputError;
  }

  if (scan->parsed()) {
    ScanConfig cfg = scan_cfg;
    if (!config_path.empty()) {
      try {
        cfg = load_scan_config(config_path);
      } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kInputError;
      }
      // Flags given explicitly win over the file.
      if (scan->count("--grid")) cfg.grid = scan_cfg.grid;
      if (scan->count("--cost")) cfg.cost = scan_cfg.cost;
      if (scan->count("--amoeba-restarts")) cfg.amoeba_restarts = scan_cfg.amoeba_restarts;
      if (scan->count("--seed")) cfg.seed = scan_cfg.seed;
      if (scan->count("--out")) cfg.out = scan_cfg.out;
      if (scan->count("--jobs")) cfg.jobs = scan_cfg.jobs;
      if (scan->count("--kkt-tol")) cfg.kkt_tolerance = scan_cfg.kkt_tolerance;
      if (scan->count("--top")) cfg.top = scan_cfg.top;
      if (scan->count("--dump-facets")) cfg.dump_facets = scan_cfg.dump_facets;
    }
    return cmd_scan(cfg, out, err);
  }
  return cmd_extend(base, n_new, penetration, seed, out_path, out, err);
}

}  // namespace instanton::cli
