#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uhm/verification.hpp"

namespace uhm::bench {

enum class GeometryKind { sphere, knot, file };
enum class FormatSel { h, uh, both };

struct RunConfig {
  GeometryKind geometry = GeometryKind::sphere;
  std::size_t n = 2000;
  std::uint64_t seed = 1;
  std::filesystem::path points; ///< input for GeometryKind::file
  KernelKind kernel = KernelKind::laplace;
  double kappa_h = 0.0; ///< wavenumber times mesh width; resolved against the point spacing
  double eta = 10.0;
  Criterion criterion = Criterion::weak;
  std::size_t n_min = 30;
  double eps = 1e-4;
  FormatSel format = FormatSel::both;
  std::size_t workers = 0; ///< 0: hardware concurrency
  std::filesystem::path out_dir = ".";
  std::size_t repeats = 10; ///< matvec samples; 0 skips timing
  std::size_t power_iters = 50;
  bool estimate_error = false;

  /// Throws invalid_argument on the first bad field.
  void validate() const;
};

std::string to_string(GeometryKind g);
std::string to_string(FormatSel f);
std::string to_string(KernelKind k);
std::string to_string(Criterion c);
GeometryKind parse_geometry(const std::string& s);
FormatSel parse_format(const std::string& s);
KernelKind parse_kernel(const std::string& s);
Criterion parse_criterion(const std::string& s);

/// Geometry, trees and entry oracle of one configuration.
struct Instance {
  Geometry geometry;
  std::shared_ptr<const ClusterTree> tree;
  std::shared_ptr<const BlockClusterTree> bct;
  KernelSpec kernel;
  double spacing = 0.0; ///< largest nearest-neighbour distance
  std::unique_ptr<EntryOracle> oracle;
};

Instance make_instance(const RunConfig& config);
Geometry make_geometry(const RunConfig& config);

struct MetricsRow {
  RunConfig config;
  std::string format;
  double kappa = 0.0;
  StorageReport storage;
  std::size_t aca_calls = 0;
  std::size_t admissible_blocks = 0;
  double build_s = 0.0;
  std::optional<double> matvec_mean_s;
  std::optional<double> matvec_min_s;
  std::optional<double> rel_spec_err;
  bool invariants_ok = true;
};

void write_metrics_header(std::ostream& os);
void write_metrics_row(std::ostream& os, const MetricsRow& row);

struct Built {
  Instance instance;
  std::optional<HMatrix> h;
  std::optional<UniformHMatrix> uh;
  std::vector<MetricsRow> rows;
};

/// Builds the selected formats. H uses ACA at eps and recompression at
/// eps/10; UH is built directly with ACA eps/3, basis eps/3, recompression
/// eps/10. Storage bounds and the exactly-once ACA count are checked.
Built build_formats(const RunConfig& config);

/// Reference operator for error estimates: the dense oracle matrix up to
/// `dense_limit` points, an H-matrix at 1e-3 * eps above.
struct Reference {
  std::optional<Matrix> dense;
  std::optional<HMatrix> accurate;
  LinearOperator op;
};
std::unique_ptr<Reference> make_reference(const Instance& instance, const RunConfig& config,
                                          std::size_t dense_limit = 2000);

std::vector<MetricsRow> cmd_build(const RunConfig& config);

struct MatvecTiming {
  std::string format;
  std::size_t samples = 0;
  double mean_s = 0.0;
  double min_s = 0.0;
  bool reproducible = true; ///< all repeats produced the identical vector
};

struct MatvecReport {
  std::vector<MatvecTiming> timings;
  std::optional<double> h_over_uh; ///< mean H time / mean UH time
};

/// One warm-up product, then `repeats` timed products on a seeded vector.
MatvecTiming time_matvec(const std::string& format, const std::function<Vector(const Vector&)>& product,
                         std::size_t n, std::size_t repeats, std::uint64_t seed);

MatvecReport cmd_matvec(const RunConfig& config);

enum class SweepAxis { eta, eps, n };
SweepAxis parse_axis(const std::string& s);

struct SweepFit {
  std::string format;
  double slope_vs_n = 0.0;
  double slope_vs_nlogn = 0.0;
};

struct SweepResult {
  std::vector<MetricsRow> rows;
  std::vector<SweepFit> fits; ///< axis n only
};

/// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);

SweepResult cmd_sweep(const RunConfig& config, SweepAxis axis, const std::vector<double>& values);

struct VerifyRow {
  std::string instance;
  std::string format;
  ErrorReport error;
  std::optional<BoundCheck> bound; ///< uh only, small instances
  bool bound_skipped = false;
  bool ok = true;
};

/// Spectral error of each selected format and, for uh at n <= 800, the exact
/// global bound check on the compressed H-matrix.
std::vector<VerifyRow> cmd_verify(const RunConfig& config);

std::string instance_name(const RunConfig& config);

} // namespace uhm::bench
