// Command-line harness: generate point sets, build H and UH matrices, time
// matrix-vector products, sweep parameters and verify error bounds.

#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "uhm/bench.hpp"
#include "uhm/errors.hpp"

namespace {

using namespace uhm;
using namespace uhm::bench;

struct Flags {
  std::string geometry = "sphere";
  std::string kernel = "laplace";
  std::string criterion = "weak";
  std::string format = "both";
  std::string out = ".";
  std::string points;
};

void add_common(CLI::App* cmd, RunConfig& cfg, Flags& f) {
  cmd->add_option("--geometry", f.geometry, "sphere | knot | file")->check(CLI::IsMember({"sphere", "knot", "file"}));
  cmd->add_option("--points", f.points, "point file (x y z w per line) for --geometry file");
  cmd->add_option("--n", cfg.n, "number of points");
  cmd->add_option("--seed", cfg.seed, "geometry and probe-vector seed");
  cmd->add_option("--out", f.out, "output directory");
}

void add_matrix(CLI::App* cmd, RunConfig& cfg, Flags& f) {
  add_common(cmd, cfg, f);
  cmd->add_option("--kernel", f.kernel, "laplace | helmholtz")->check(CLI::IsMember({"laplace", "helmholtz"}));
  cmd->add_option("--kappa-h", cfg.kappa_h,
                  "wavenumber times mesh width; h is the largest nearest-neighbour distance of the point set");
  cmd->add_option("--eta", cfg.eta, "admissibility parameter")->capture_default_str();
  cmd->add_option("--criterion", f.criterion, "weak | strong")->check(CLI::IsMember({"weak", "strong"}));
  cmd->add_option("--nmin", cfg.n_min, "minimal leaf size")->capture_default_str();
  cmd->add_option("--eps", cfg.eps, "relative tolerance")->capture_default_str();
  cmd->add_option("--format", f.format, "h | uh | both")->check(CLI::IsMember({"h", "uh", "both"}));
  cmd->add_option("--workers", cfg.workers, "worker threads (0: hardware parallelism)");
  cmd->add_option("--repeats", cfg.repeats, "timed matrix-vector products")->capture_default_str();
}

RunConfig resolve(RunConfig cfg, const Flags& f) {
  cfg.geometry = parse_geometry(f.geometry);
  cfg.kernel = parse_kernel(f.kernel);
  cfg.criterion = parse_criterion(f.criterion);
  cfg.format = parse_format(f.format);
  cfg.out_dir = f.out;
  cfg.points = f.points;
  cfg.validate();
  return cfg;
}

void print_rows(const std::vector<MetricsRow>& rows) {
  write_metrics_header(std::cout);
  for (const auto& r : rows) write_metrics_row(std::cout, r);
}

bool all_ok(const std::vector<MetricsRow>& rows) {
  for (const auto& r : rows)
    if (!r.invariants_ok) return false;
  return true;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hierarchical and uniform hierarchical matrix toolkit"};
  app.require_subcommand(1);

  RunConfig cfg;
  Flags flags;
  bool estimate = false;
  std::string axis;
  std::vector<double> values;

  auto* gen = app.add_subcommand("gen", "write a point set to OUT/points.txt");
  add_common(gen, cfg, flags);
  auto* build = app.add_subcommand("build", "build the selected formats and write metrics and structure dumps");
  add_matrix(build, cfg, flags);
  build->add_flag("--estimate-error", estimate, "also estimate the relative spectral error");
  auto* matvec = app.add_subcommand("matvec", "time matrix-vector products");
  add_matrix(matvec, cfg, flags);
  auto* sweep = app.add_subcommand("sweep", "vary one parameter and collect metrics");
  add_matrix(sweep, cfg, flags);
  sweep->add_option("--axis", axis, "eta | eps | n")->required()->check(CLI::IsMember({"eta", "eps", "n"}));
  sweep->add_option("--values", values, "values of the swept parameter")->required()->expected(2, -1);
  sweep->add_flag("--estimate-error", estimate, "also estimate the relative spectral error");
  auto* verify = app.add_subcommand("verify", "estimate spectral errors and check the global error bound");
  add_matrix(verify, cfg, flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    cfg = resolve(cfg, flags);
    cfg.estimate_error = estimate;
    if (gen->parsed()) {
      const Geometry g = make_geometry(cfg);
      std::filesystem::create_directories(cfg.out_dir);
      save_points(g, cfg.out_dir / "points.txt");
      std::cout << "wrote " << g.size() << " points to " << (cfg.out_dir / "points.txt").string() << '\n';
      return 0;
    }
    if (build->parsed()) {
      const auto rows = cmd_build(cfg);
      print_rows(rows);
      return all_ok(rows) ? 0 : 1;
    }
    if (matvec->parsed()) {
      const auto rep = cmd_matvec(cfg);
      bool ok = true;
      for (const auto& t : rep.timings) {
        std::cout << t.format << ": samples=" << t.samples << " mean_s=" << t.mean_s << " min_s=" << t.min_s
                  << (t.reproducible ? "" : " (results differ between repeats)") << '\n';
        ok = ok && t.reproducible;
      }
      if (rep.h_over_uh) std::cout << "h/uh mean time ratio: " << *rep.h_over_uh << '\n';
      return ok ? 0 : 1;
    }
    if (sweep->parsed()) {
      const auto res = cmd_sweep(cfg, parse_axis(axis), values);
      print_rows(res.rows);
      for (const auto& f : res.fits)
        std::cout << "# " << f.format << " slope vs N: " << f.slope_vs_n << ", vs N log N: " << f.slope_vs_nlogn << '\n';
      return all_ok(res.rows) ? 0 : 1;
    }
    if (verify->parsed()) {
      const auto rows = cmd_verify(cfg);
      bool ok = true;
      write_error_csv_header(std::cout);
      for (const auto& r : rows) {
        write_error_csv_row(std::cout, r.instance, r.format, r.error);
        if (r.bound)
          std::cout << "# global bound: lhs=" << r.bound->lhs << " rhs=" << r.bound->rhs
                    << " holds=" << (r.bound->holds ? "true" : "false") << '\n';
        if (r.bound_skipped) std::cerr << "warning: instance too large for the dense bound check, skipped\n";
        ok = ok && r.ok;
      }
      return ok ? 0 : 1;
    }
  } catch (const uhm::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
