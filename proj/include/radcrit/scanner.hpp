#pragma once

// Phase-diagram scan over (N, β, λ) for -Δu = (1 + λ r^β) u^{2*-1}.

#include <functional>
#include <iosfwd>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "radcrit/functionals.hpp"
#include "radcrit/pohozaev.hpp"
#include "radcrit/radial_ode.hpp"

namespace radcrit {

struct Tolerances {
  double dirichlet = 1e-10;  // |u(1; d*)|
  double residual = 1e-6;    // accepted ODE residual for Existence
  HeightRange d_range{};
  int points_per_decade = 64;
};

struct ScanRecord {
  enum class Classification { Existence, NonexistenceCertified, NonexistenceEvidence, Unknown };

  std::size_t index = 0;
  int n = 3;
  double beta = 0.0;
  double lambda = 0.0;
  Classification classification = Classification::Unknown;
  double d_star = std::numeric_limits<double>::quiet_NaN();
  double energy = std::numeric_limits<double>::quiet_NaN();
  double boundary_slope = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::optional<Certificate> certificate;
  std::string summary;  // scan trace summary or diagnostics
  double seconds = 0.0;
};

std::string_view to_string(ScanRecord::Classification c);
ScanRecord::Classification classification_from_string(std::string_view s);

// Energy of a profile sampled onto the graded mesh with cubic Hermite data.
DiscreteRadialFunction profile_to_function(const RadialProfile& profile, std::vector<double> mesh = graded_mesh());
double profile_energy(const RadialProfile& profile);

// Certificate, then shooting, then scan evidence; errors become Unknown.
ScanRecord classify_point(int n, double beta, double lambda, const Tolerances& tol = {});

struct GridAxis {
  double min = 0.0;
  double max = 0.0;
  int count = 1;
  bool log = false;
  std::vector<double> values() const;
};

struct ScanConfig {
  std::vector<int> dimensions{3};
  GridAxis beta{1.0, 1.0, 1, false};
  GridAxis lambda{1.0, 1.0, 1, false};
  Tolerances tolerances;
  std::string csv_path;
  std::string json_path;
  int jobs = 1;
  std::uint64_t seed = 1;
  bool cross_check = true;  // run the solver at certified points too

  void validate() const;
};

ScanConfig scan_config_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ScanConfig& c);
ScanConfig load_scan_config(const std::string& path);

using ProgressFn = std::function<void(std::size_t done, std::size_t total)>;

// Records sorted by grid index (N outer, then β, then λ). Throws
// ConsistencyError if a certified point also has a Dirichlet solution.
std::vector<ScanRecord> scan_grid(const ScanConfig& config, const ProgressFn& progress = {});
std::vector<ScanRecord> scan_grid_serial(const ScanConfig& config, const ProgressFn& progress = {});

void write_csv(const std::vector<ScanRecord>& records, std::ostream& out);
nlohmann::json to_json(const ScanRecord& r);
ScanRecord record_from_json(const nlohmann::json& j);
std::vector<ScanRecord> records_from_json(const nlohmann::json& j);

enum class ReportFormat { Csv, Json };
ReportFormat report_format_from_string(std::string_view s);
void emit_report(const std::vector<ScanRecord>& records, ReportFormat format, const std::string& path);

// [largest certified-or-evidence λ, smallest Existence λ] at fixed (N, β).
struct ThresholdBracket {
  double below = std::numeric_limits<double>::quiet_NaN();
  double above = std::numeric_limits<double>::quiet_NaN();
};
ThresholdBracket empirical_threshold(const std::vector<ScanRecord>& records, int n, double beta);

}  // namespace radcrit
