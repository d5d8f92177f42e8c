#include "uhm/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>

#include "uhm/errors.hpp"
#include "uhm/parallel.hpp"

namespace uhm::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

constexpr const char* kSchemaLine = "# uhm-kit metrics v1\n";

std::ofstream open_csv(const RunConfig& config, const std::string& name) {
  std::filesystem::create_directories(config.out_dir);
  std::ofstream os(config.out_dir / name);
  if (!os) throw invalid_argument("cannot write " + (config.out_dir / name).string());
  os << std::setprecision(10);
  return os;
}

Vector seeded_vector(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Vector v(static_cast<idx_t>(n));
  for (auto& c : v) c = cplx(normal(rng), normal(rng));
  return v / v.norm();
}

std::string opt(const std::optional<double>& x) {
  if (!x) return "";
  std::ostringstream s;
  s << std::setprecision(10) << *x;
  return s.str();
}

} // namespace

void RunConfig::validate() const {
  if (geometry != GeometryKind::file && n == 0) throw invalid_argument("--n must be positive");
  if (geometry == GeometryKind::file && points.empty()) throw invalid_argument("--points is required for file geometry");
  if (!(eta > 0.0) || !std::isfinite(eta)) throw invalid_argument("--eta must be positive");
  if (!(eps > 0.0) || eps >= 1.0) throw invalid_argument("--eps must lie in (0, 1)");
  if (n_min == 0) throw invalid_argument("--nmin must be positive");
  if (!(kappa_h >= 0.0) || !std::isfinite(kappa_h)) throw invalid_argument("--kappa-h must be non-negative");
  if (kernel == KernelKind::laplace && kappa_h != 0.0) throw invalid_argument("--kappa-h requires --kernel helmholtz");
  if (power_iters == 0) throw invalid_argument("power iteration count must be positive");
}

std::string to_string(GeometryKind g) {
  switch (g) {
  case GeometryKind::sphere: return "sphere";
  case GeometryKind::knot: return "knot";
  case GeometryKind::file: return "file";
  }
  return "?";
}

std::string to_string(FormatSel f) {
  switch (f) {
  case FormatSel::h: return "h";
  case FormatSel::uh: return "uh";
  case FormatSel::both: return "both";
  }
  return "?";
}

std::string to_string(KernelKind k) { return k == KernelKind::laplace ? "laplace" : "helmholtz"; }
std::string to_string(Criterion c) { return c == Criterion::weak ? "weak" : "strong"; }

GeometryKind parse_geometry(const std::string& s) {
  if (s == "sphere") return GeometryKind::sphere;
  if (s == "knot") return GeometryKind::knot;
  if (s == "file") return GeometryKind::file;
  throw invalid_argument("unknown geometry '" + s + "'");
}

FormatSel parse_format(const std::string& s) {
  if (s == "h") return FormatSel::h;
  if (s == "uh") return FormatSel::uh;
  if (s == "both") return FormatSel::both;
  throw invalid_argument("unknown format '" + s + "'");
}

KernelKind parse_kernel(const std::string& s) {
  if (s == "laplace") return KernelKind::laplace;
  if (s == "helmholtz") return KernelKind::helmholtz;
  throw invalid_argument("unknown kernel '" + s + "'");
}

Criterion parse_criterion(const std::string& s) {
  if (s == "weak") return Criterion::weak;
  if (s == "strong") return Criterion::strong;
  throw invalid_argument("unknown criterion '" + s + "'");
}

SweepAxis parse_axis(const std::string& s) {
  if (s == "eta") return SweepAxis::eta;
  if (s == "eps") return SweepAxis::eps;
  if (s == "n") return SweepAxis::n;
  throw invalid_argument("unknown sweep axis '" + s + "'");
}

Geometry make_geometry(const RunConfig& config) {
  switch (config.geometry) {
  case GeometryKind::sphere: return generate_sphere(config.n, 1.0, config.seed);
  case GeometryKind::knot: return generate_torus_knot(config.n, 2, 3, 1.0, 0.1, config.seed);
  case GeometryKind::file: return load_points(config.points);
  }
  throw invalid_argument("make_geometry: unknown geometry");
}

Instance make_instance(const RunConfig& config) {
  config.validate();
  Instance inst;
  inst.geometry = make_geometry(config);
  inst.tree = std::make_shared<const ClusterTree>(build_cluster_tree(inst.geometry, config.n_min));
  inst.bct = build_block_tree(inst.tree, inst.tree, AdmissibilityParams{config.eta, config.criterion});
  inst.kernel.kind = config.kernel;
  inst.kernel.reg_dist = default_reg_dist(inst.geometry);
  if (config.kernel == KernelKind::helmholtz) {
    inst.spacing = max_nearest_neighbor_spacing(inst.geometry);
    inst.kernel.kappa = inst.spacing > 0.0 ? config.kappa_h / inst.spacing : 0.0;
  }
  inst.oracle = std::make_unique<EntryOracle>(inst.geometry, inst.geometry, inst.kernel, *inst.tree, *inst.tree);
  return inst;
}

std::string instance_name(const RunConfig& c) {
  std::ostringstream s;
  s << to_string(c.geometry) << "-n" << c.n << "-s" << c.seed << '-' << to_string(c.kernel) << "-eta" << c.eta
    << "-eps" << c.eps;
  return s.str();
}

void write_metrics_header(std::ostream& os) {
  os << kSchemaLine
     << "geometry,points,n,seed,kernel,kappa_h,kappa,eta,criterion,nmin,eps,workers,format,adm_elements,"
        "adm_factor_elements,dense_elements,total_elements,c_sp,k_max,l_max,aca_calls,admissible_blocks,build_s,"
        "mv_mean_s,mv_min_s,rel_spec_err,invariants_ok\n";
}

void write_metrics_row(std::ostream& os, const MetricsRow& r) {
  const auto& c = r.config;
  const auto& s = r.storage;
  os << to_string(c.geometry) << ',' << c.points.string() << ',' << c.n << ',' << c.seed << ','
     << to_string(c.kernel) << ',' << c.kappa_h << ',' << r.kappa << ',' << c.eta << ',' << to_string(c.criterion)
     << ',' << c.n_min << ',' << c.eps << ',' << resolve_workers(c.workers) << ',' << r.format << ','
     << s.adm_elements << ',' << s.adm_factor_elements << ',' << s.dense_elements << ',' << s.total_elements << ','
     << s.c_sp << ',' << s.k_max << ',' << s.l_max << ',' << r.aca_calls << ',' << r.admissible_blocks << ','
     << r.build_s << ',' << opt(r.matvec_mean_s) << ',' << opt(r.matvec_min_s) << ',' << opt(r.rel_spec_err) << ','
     << (r.invariants_ok ? 1 : 0) << '\n';
}

std::unique_ptr<Reference> make_reference(const Instance& inst, const RunConfig& config, std::size_t dense_limit) {
  auto ref = std::make_unique<Reference>();
  const std::size_t n = inst.oracle->rows();
  if (n <= dense_limit) {
    ref->dense = inst.oracle->dense(dense_limit * dense_limit);
    ref->op = as_operator(*ref->dense);
  } else {
    const double eps_ref = 1e-3 * config.eps;
    ref->accurate.emplace(assemble_h(*inst.oracle, inst.bct, ToleranceSpec{eps_ref}, ToleranceSpec{eps_ref / 10.0},
                                     resolve_workers(config.workers)));
    ref->op = as_operator(*ref->accurate, resolve_workers(config.workers));
  }
  return ref;
}

Built build_formats(const RunConfig& config) {
  Built out;
  out.instance = make_instance(config);
  const auto& inst = out.instance;
  const std::size_t workers = resolve_workers(config.workers);
  const bool want_h = config.format != FormatSel::uh;
  const bool want_uh = config.format != FormatSel::h;

  if (want_h) {
    MetricsRow row;
    row.config = config;
    row.format = "h";
    row.kappa = inst.kernel.kappa;
    AssemblyStats st;
    const auto t0 = Clock::now();
    out.h.emplace(assemble_h(*inst.oracle, inst.bct, ToleranceSpec{config.eps}, ToleranceSpec{config.eps / 10.0},
                             workers, Pivoting::partial, &st));
    row.build_s = seconds_since(t0);
    row.storage = storage_report(*out.h);
    row.aca_calls = st.aca_calls;
    row.admissible_blocks = inst.bct->admissible().size();
    const auto bounds = storage_bounds(*inst.bct, row.storage.k_max, row.storage.l_max);
    row.invariants_ok = static_cast<double>(row.storage.adm_factor_elements) <= bounds.h_bound &&
                        row.aca_calls == row.admissible_blocks;
    out.rows.push_back(row);
  }
  if (want_uh) {
    MetricsRow row;
    row.config = config;
    row.format = "uh";
    row.kappa = inst.kernel.kappa;
    DirectBuildStats st;
    const auto t0 = Clock::now();
    out.uh.emplace(direct_build_uh(*inst.oracle, inst.bct, uniform_split(config.eps), workers, &st));
    row.build_s = seconds_since(t0);
    row.storage = storage_report_uh(*out.uh);
    row.aca_calls = st.aca_calls;
    row.admissible_blocks = inst.bct->admissible().size();
    const auto bounds = storage_bounds(*inst.bct, row.storage.k_max, row.storage.l_max);
    row.invariants_ok = static_cast<double>(row.storage.adm_factor_elements) <= bounds.uh_bound &&
                        row.aca_calls == row.admissible_blocks;
    out.rows.push_back(row);
  }

  if (config.estimate_error) {
    const auto ref = make_reference(inst, config);
    for (auto& row : out.rows) {
      const LinearOperator cmp = row.format == "h" ? as_operator(*out.h, workers) : as_operator(*out.uh, workers);
      row.rel_spec_err = compression_error(ref->op, cmp, config.power_iters, config.seed).rel_spectral_estimate;
    }
  }
  return out;
}

std::vector<MetricsRow> cmd_build(const RunConfig& config) {
  Built b = build_formats(config);
  auto os = open_csv(config, "metrics.csv");
  write_metrics_header(os);
  for (const auto& r : b.rows) write_metrics_row(os, r);
  if (b.h) {
    auto s = open_csv(config, "structure_h.csv");
    write_structure_csv(*b.h, s);
  }
  if (b.uh) {
    auto s = open_csv(config, "basis_uh.csv");
    write_basis_csv(*b.uh, s);
    auto c = open_csv(config, "coefficients_uh.csv");
    write_coefficient_csv(*b.uh, c);
  }
  return b.rows;
}

MatvecTiming time_matvec(const std::string& format, const std::function<Vector(const Vector&)>& product,
                         std::size_t n, std::size_t repeats, std::uint64_t seed) {
  MatvecTiming t;
  t.format = format;
  const Vector v = seeded_vector(n, seed);
  const Vector first = product(v);
  double total = 0.0;
  t.min_s = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < repeats; ++r) {
    const auto t0 = Clock::now();
    const Vector w = product(v);
    const double dt = seconds_since(t0);
    total += dt;
    t.min_s = std::min(t.min_s, dt);
    if (w != first) t.reproducible = false;
  }
  t.samples = repeats;
  t.mean_s = repeats ? total / static_cast<double>(repeats) : 0.0;
  if (!repeats) t.min_s = 0.0;
  return t;
}

MatvecReport cmd_matvec(const RunConfig& config) {
  Built b = build_formats(config);
  const std::size_t workers = resolve_workers(config.workers);
  const std::size_t n = b.instance.oracle->cols();
  MatvecReport rep;
  if (b.h)
    rep.timings.push_back(time_matvec("h", [&](const Vector& v) { return matvec_h(*b.h, v, workers); }, n,
                                      config.repeats, config.seed));
  if (b.uh)
    rep.timings.push_back(time_matvec("uh", [&](const Vector& v) { return matvec_uh(*b.uh, v, workers); }, n,
                                      config.repeats, config.seed));
  if (rep.timings.size() == 2 && rep.timings[1].mean_s > 0.0)
    rep.h_over_uh = rep.timings[0].mean_s / rep.timings[1].mean_s;

  auto os = open_csv(config, "matvec.csv");
  write_metrics_header(os);
  for (std::size_t i = 0; i < b.rows.size(); ++i) {
    b.rows[i].matvec_mean_s = rep.timings[i].mean_s;
    b.rows[i].matvec_min_s = rep.timings[i].min_s;
    b.rows[i].invariants_ok = b.rows[i].invariants_ok && rep.timings[i].reproducible;
    write_metrics_row(os, b.rows[i]);
  }
  return rep;
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw invalid_argument("loglog_slope: need at least two points");
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= static_cast<double>(x.size());
  my /= static_cast<double>(x.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = std::log(x[i]) - mx;
    sxy += dx * (std::log(y[i]) - my);
    sxx += dx * dx;
  }
  if (sxx == 0.0) throw invalid_argument("loglog_slope: abscissae coincide");
  return sxy / sxx;
}

SweepResult cmd_sweep(const RunConfig& config, SweepAxis axis, const std::vector<double>& values) {
  if (values.size() < 2) throw invalid_argument("sweep needs at least two values");
  SweepResult res;
  for (double value : values) {
    RunConfig c = config;
    switch (axis) {
    case SweepAxis::eta: c.eta = value; break;
    case SweepAxis::eps: c.eps = value; break;
    case SweepAxis::n:
      if (!(value >= 1.0) || value != std::floor(value)) throw invalid_argument("sweep over n needs positive integers");
      c.n = static_cast<std::size_t>(value);
      break;
    }
    Built b = build_formats(c);
    if (c.repeats > 0) {
      const std::size_t workers = resolve_workers(c.workers);
      const std::size_t n = b.instance.oracle->cols();
      for (auto& row : b.rows) {
        const auto t = row.format == "h"
                           ? time_matvec("h", [&](const Vector& v) { return matvec_h(*b.h, v, workers); }, n,
                                         c.repeats, c.seed)
                           : time_matvec("uh", [&](const Vector& v) { return matvec_uh(*b.uh, v, workers); }, n,
                                         c.repeats, c.seed);
        row.matvec_mean_s = t.mean_s;
        row.matvec_min_s = t.min_s;
      }
    }
    for (auto& row : b.rows) res.rows.push_back(std::move(row));
  }

  if (axis == SweepAxis::n) {
    for (const std::string fmt : {"h", "uh"}) {
      std::vector<double> ns, nlogn, adm;
      for (const auto& r : res.rows) {
        if (r.format != fmt) continue;
        const double n = static_cast<double>(r.config.n);
        ns.push_back(n);
        nlogn.push_back(n * std::log(n));
        adm.push_back(static_cast<double>(r.storage.adm_elements));
      }
      if (std::adjacent_find(ns.begin(), ns.end(), std::not_equal_to<>()) == ns.end()) continue;
      res.fits.push_back({fmt, loglog_slope(ns, adm), loglog_slope(nlogn, adm)});
    }
  }

  const std::string axis_name = axis == SweepAxis::eta ? "eta" : axis == SweepAxis::eps ? "eps" : "n";
  auto os = open_csv(config, "sweep_" + axis_name + ".csv");
  write_metrics_header(os);
  for (const auto& r : res.rows) write_metrics_row(os, r);
  if (!res.fits.empty()) {
    auto fs = open_csv(config, "sweep_n_slopes.csv");
    fs << kSchemaLine << "format,slope_vs_n,slope_vs_nlogn\n";
    for (const auto& f : res.fits) fs << f.format << ',' << f.slope_vs_n << ',' << f.slope_vs_nlogn << '\n';
  }
  return res;
}

std::vector<VerifyRow> cmd_verify(const RunConfig& config) {
  RunConfig c = config;
  c.estimate_error = false;
  Built b = build_formats(c);
  const auto& inst = b.instance;
  const std::size_t workers = resolve_workers(config.workers);
  const auto ref = make_reference(inst, config);
  const std::string name = instance_name(config);

  std::vector<VerifyRow> rows;
  for (const auto& m : b.rows) {
    VerifyRow row;
    row.instance = name;
    row.format = m.format;
    const LinearOperator cmp = m.format == "h" ? as_operator(*b.h, workers) : as_operator(*b.uh, workers);
    row.error = compression_error(ref->op, cmp, config.power_iters, config.seed);
    row.ok = m.invariants_ok;
    if (m.format == "uh") {
      constexpr std::size_t kBoundCap = 800;
      if (inst.oracle->rows() <= kBoundCap) {
        const double eps3 = config.eps / 3.0;
        const HMatrix h = assemble_h(*inst.oracle, inst.bct, ToleranceSpec{eps3}, ToleranceSpec{config.eps / 10.0},
                                     workers);
        const UniformHMatrix u = compress_h_to_uh(h, ClusterTolerances(ToleranceSpec{eps3}), RankRevealing::svd,
                                                  workers);
        row.bound = error_bound_check(to_dense(h), u, kBoundCap * kBoundCap);
        row.ok = row.ok && row.bound->holds;
      } else {
        row.bound_skipped = true;
      }
    }
    rows.push_back(row);
  }

  auto es = open_csv(config, "errors.csv");
  es << kSchemaLine;
  write_error_csv_header(es);
  for (const auto& r : rows) write_error_csv_row(es, r.instance, r.format, r.error);
  auto ts = open_csv(config, "theorem.csv");
  ts << kSchemaLine << "instance,lhs,rhs,holds\n";
  for (const auto& r : rows) {
    if (r.bound) ts << r.instance << ',' << r.bound->lhs << ',' << r.bound->rhs << ',' << (r.bound->holds ? "true" : "false") << '\n';
    else if (r.bound_skipped) ts << r.instance << ",,,skipped: instance exceeds dense capacity\n";
  }
  return rows;
}

} // namespace uhm::bench
