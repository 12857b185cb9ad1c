#include "radcrit/scanner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>

#include "radcrit/errors.hpp"

namespace radcrit {

std::string_view to_string(ScanRecord::Classification c) {
  switch (c) {
    case ScanRecord::Classification::Existence: return "Existence";
    case ScanRecord::Classification::NonexistenceCertified: return "NonexistenceCertified";
    case ScanRecord::Classification::NonexistenceEvidence: return "NonexistenceEvidence";
    case ScanRecord::Classification::Unknown: break;
  }
  return "Unknown";
}

ScanRecord::Classification classification_from_string(std::string_view s) {
  if (s == "Existence") return ScanRecord::Classification::Existence;
  if (s == "NonexistenceCertified") return ScanRecord::Classification::NonexistenceCertified;
  if (s == "NonexistenceEvidence") return ScanRecord::Classification::NonexistenceEvidence;
  if (s == "Unknown") return ScanRecord::Classification::Unknown;
  throw FormatError("unknown classification: " + std::string(s));
}

DiscreteRadialFunction profile_to_function(const RadialProfile& p, std::vector<double> mesh) {
  if (!p.covers_unit_interval()) throw DomainError("profile must cover [0,1]");
  const int n = p.spec.dimension;
  return DiscreteRadialFunction::from_function(n, std::move(mesh), [&](double r) {
    if (r >= 1.0) return 0.0;
    const auto it = std::upper_bound(p.r.begin(), p.r.end(), r);
    const auto i = static_cast<std::size_t>(it - p.r.begin()) - 1;
    const double h = p.r[i + 1] - p.r[i];
    const double t = (r - p.r[i]) / h;
    const double t2 = t * t;
    const double t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * p.u[i] + (t3 - 2 * t2 + t) * h * p.du[i] + (-2 * t3 + 3 * t2) * p.u[i + 1] +
           (t3 - t2) * h * p.du[i + 1];
  });
}

double profile_energy(const RadialProfile& p) { return energy(p.spec, profile_to_function(p)); }

namespace {

DirichletOptions dirichlet_options(const Tolerances& tol) {
  DirichletOptions o;
  o.points_per_decade = tol.points_per_decade;
  return o;
}

std::string trace_summary(const DirichletSearch& s) {
  std::size_t zeros = 0;
  std::size_t diverged = 0;
  double r_min = std::numeric_limits<double>::infinity();
  for (const auto& x : s.samples) {
    if (x.status == ShotSample::Status::FirstZero) {
      ++zeros;
      r_min = std::min(r_min, x.radius);
    }
    if (x.status == ShotSample::Status::Diverged) ++diverged;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "shots=%zu first_zero=%zu diverged=%zu min_R=%.6g brackets=%zu", s.samples.size(),
                zeros, diverged, r_min, s.brackets.size());
  return buf;
}

}  // namespace

ScanRecord classify_point(int n, double beta, double lambda, const Tolerances& tol) {
  const auto t0 = std::chrono::steady_clock::now();
  ScanRecord rec;
  rec.n = n;
  rec.beta = beta;
  rec.lambda = lambda;
  try {
    const double q = (n + 2.0) / (n - 2.0);
    auto cert = certify_nonexistence(n, beta, lambda, q);
    if (cert.certified()) {
      rec.classification = ScanRecord::Classification::NonexistenceCertified;
      rec.summary = cert.verdict;
      rec.certificate = std::move(cert);
    } else {
      const auto spec = ProblemSpec::variable_coefficient(n, beta, lambda);
      const auto search = find_dirichlet_solution(spec, tol.d_range, tol.dirichlet, dirichlet_options(tol));
      rec.summary = trace_summary(search);
      if (search.found()) {
        const auto& p = *search.solution;
        rec.d_star = search.d_star;
        rec.boundary_slope = p.boundary_slope;
        rec.residual = search.ode_residual;
        rec.energy = profile_energy(p);
        rec.classification = search.ode_residual < tol.residual ? ScanRecord::Classification::Existence
                                                                : ScanRecord::Classification::Unknown;
        if (rec.classification == ScanRecord::Classification::Unknown) rec.summary += " residual above tolerance";
      } else {
        rec.classification = ScanRecord::Classification::NonexistenceEvidence;
      }
    }
  } catch (const std::exception& e) {
    rec.classification = ScanRecord::Classification::Unknown;
    rec.summary = std::string("solver error: ") + e.what();
  }
  rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return rec;
}

std::vector<double> GridAxis::values() const {
  if (count < 1) throw PreconditionError("grid axis needs count >= 1");
  if (count == 1) return {min};
  std::vector<double> v(static_cast<std::size_t>(count));
  const double l0 = log ? std::log10(min) : 0.0;
  const double l1 = log ? std::log10(max) : 0.0;
  for (int i = 0; i < count; ++i) {
    const double t = static_cast<double>(i) / (count - 1);
    v[static_cast<std::size_t>(i)] = log ? std::pow(10.0, l0 + (l1 - l0) * t) : min + (max - min) * t;
  }
  v.front() = min;
  v.back() = max;
  return v;
}

void ScanConfig::validate() const {
  if (dimensions.empty()) throw PreconditionError("scan needs at least one dimension");
  for (int n : dimensions)
    if (n < 3) throw DomainError("dimension must be at least 3");
  for (const GridAxis* a : {&beta, &lambda}) {
    if (a->count < 1) throw PreconditionError("grid counts must be positive");
    if (!std::isfinite(a->min) || !std::isfinite(a->max) || a->max < a->min)
      throw PreconditionError("grid bounds must be finite with min <= max");
    if (a->log && !(a->min > 0.0)) throw PreconditionError("log grid needs min > 0");
  }
  if (beta.min < 0.0) throw DomainError("beta must be nonnegative");
  if (!(tolerances.dirichlet > 0.0) || !(tolerances.residual > 0.0)) throw PreconditionError("tolerances must be positive");
  if (!(tolerances.d_range.lo > 0.0) || !(tolerances.d_range.hi > tolerances.d_range.lo))
    throw PreconditionError("d-range must satisfy 0 < lo < hi");
  if (tolerances.points_per_decade < 1) throw PreconditionError("points_per_decade must be positive");
  if (jobs < 1) throw PreconditionError("jobs must be positive");
}

namespace {

GridAxis axis_from_json(const nlohmann::json& j) {
  GridAxis a;
  if (j.is_number()) {
    a.min = a.max = j.get<double>();
    a.count = 1;
    return a;
  }
  a.min = j.at("min").get<double>();
  a.max = j.value("max", a.min);
  a.count = j.value("count", 1);
  const std::string spacing = j.value("spacing", "linear");
  if (spacing != "linear" && spacing != "log") throw FormatError("spacing must be linear or log");
  a.log = spacing == "log";
  return a;
}

nlohmann::json axis_to_json(const GridAxis& a) {
  return {{"min", a.min}, {"max", a.max}, {"count", a.count}, {"spacing", a.log ? "log" : "linear"}};
}

}  // namespace

ScanConfig scan_config_from_json(const nlohmann::json& j) {
  try {
    ScanConfig c;
    if (j.contains("dimensions")) c.dimensions = j.at("dimensions").get<std::vector<int>>();
    if (j.contains("beta")) c.beta = axis_from_json(j.at("beta"));
    if (j.contains("lambda")) c.lambda = axis_from_json(j.at("lambda"));
    if (j.contains("tolerances")) {
      const auto& t = j.at("tolerances");
      c.tolerances.dirichlet = t.value("dirichlet", c.tolerances.dirichlet);
      c.tolerances.residual = t.value("residual", c.tolerances.residual);
      c.tolerances.points_per_decade = t.value("points_per_decade", c.tolerances.points_per_decade);
    }
    if (j.contains("d_range")) {
      const auto r = j.at("d_range").get<std::vector<double>>();
      if (r.size() != 2) throw FormatError("d_range must have two entries");
      c.tolerances.d_range = {r[0], r[1]};
    }
    if (j.contains("outputs")) {
      c.csv_path = j.at("outputs").value("csv", "");
      c.json_path = j.at("outputs").value("json", "");
    }
    c.jobs = j.value("jobs", c.jobs);
    c.seed = j.value("seed", c.seed);
    c.cross_check = j.value("cross_check", c.cross_check);
    c.validate();
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed scan config: ") + e.what());
  }
}

nlohmann::json to_json(const ScanConfig& c) {
  return {{"dimensions", c.dimensions},
          {"beta", axis_to_json(c.beta)},
          {"lambda", axis_to_json(c.lambda)},
          {"tolerances",
           {{"dirichlet", c.tolerances.dirichlet},
            {"residual", c.tolerances.residual},
            {"points_per_decade", c.tolerances.points_per_decade}}},
          {"d_range", {c.tolerances.d_range.lo, c.tolerances.d_range.hi}},
          {"outputs", {{"csv", c.csv_path}, {"json", c.json_path}}},
          {"jobs", c.jobs},
          {"seed", c.seed},
          {"cross_check", c.cross_check}};
}

ScanConfig load_scan_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scan config: " + path);
  try {
    return scan_config_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw FormatError(std::string("scan config is not valid JSON: ") + e.what());
  }
}

namespace {

struct GridPoint {
  int n;
  double beta;
  double lambda;
};

std::vector<GridPoint> grid_points(const ScanConfig& c) {
  std::vector<GridPoint> pts;
  const auto betas = c.beta.values();
  const auto lambdas = c.lambda.values();
  for (int n : c.dimensions)
    for (double b : betas)
      for (double l : lambdas) pts.push_back({n, b, l});
  return pts;
}

ScanRecord evaluate(const ScanConfig& c, const GridPoint& g, std::size_t index) {
  ScanRecord rec = classify_point(g.n, g.beta, g.lambda, c.tolerances);
  rec.index = index;
  if (c.cross_check && rec.classification == ScanRecord::Classification::NonexistenceCertified) {
    const auto spec = ProblemSpec::variable_coefficient(g.n, g.beta, g.lambda);
    DirichletOptions o;
    o.points_per_decade = c.tolerances.points_per_decade;
    const auto s = find_dirichlet_solution(spec, c.tolerances.d_range, c.tolerances.dirichlet, o);
    if (s.found()) {
      char buf[200];
      std::snprintf(buf, sizeof buf, "certified point N=%d beta=%.17g lambda=%.17g has a Dirichlet solution d*=%.17g",
                    g.n, g.beta, g.lambda, s.d_star);
      throw ConsistencyError(buf);
    }
  }
  return rec;
}

}  // namespace

std::vector<ScanRecord> scan_grid_serial(const ScanConfig& config, const ProgressFn& progress) {
  config.validate();
  const auto pts = grid_points(config);
  std::vector<ScanRecord> out;
  out.reserve(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    out.push_back(evaluate(config, pts[i], i));
    if (progress) progress(i + 1, pts.size());
  }
  return out;
}

std::vector<ScanRecord> scan_grid(const ScanConfig& config, const ProgressFn& progress) {
  config.validate();
  const auto pts = grid_points(config);
  std::vector<ScanRecord> out(pts.size());
  std::exception_ptr failure;
  std::size_t done = 0;
  const auto np = static_cast<std::ptrdiff_t>(pts.size());
#pragma omp parallel for schedule(dynamic, 1) num_threads(config.jobs)
  for (std::ptrdiff_t i = 0; i < np; ++i) {
    const auto k = static_cast<std::size_t>(i);
    try {
      out[k] = evaluate(config, pts[k], k);
    } catch (...) {
#pragma omp critical(radcrit_scan_failure)
      if (!failure) failure = std::current_exception();
    }
#pragma omp critical(radcrit_scan_progress)
    {
      ++done;
      if (progress) progress(done, pts.size());
    }
  }
  if (failure) std::rethrow_exception(failure);
  return out;
}

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json num_json(double v) { return std::isnan(v) ? nlohmann::json(nullptr) : nlohmann::json(v); }

double num_from_json(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.at(key).get<double>();
}

}  // namespace

void write_csv(const std::vector<ScanRecord>& records, std::ostream& out) {
  out << "N,beta,lambda,classification,d_star,energy,boundary_slope,certificate_kind,residual\n";
  for (const auto& r : records) {
    out << r.n << ',' << num(r.beta) << ',' << num(r.lambda) << ',' << to_string(r.classification) << ','
        << num(r.d_star) << ',' << num(r.energy) << ',' << num(r.boundary_slope) << ','
        << (r.certificate ? to_string(r.certificate->kind) : std::string_view("None")) << ',' << num(r.residual)
        << '\n';
  }
}

nlohmann::json to_json(const ScanRecord& r) {
  return {{"index", r.index},
          {"N", r.n},
          {"beta", r.beta},
          {"lambda", r.lambda},
          {"classification", to_string(r.classification)},
          {"d_star", num_json(r.d_star)},
          {"energy", num_json(r.energy)},
          {"boundary_slope", num_json(r.boundary_slope)},
          {"residual", num_json(r.residual)},
          {"certificate", r.certificate ? to_json(*r.certificate) : nlohmann::json(nullptr)},
          {"summary", r.summary}};
}

ScanRecord record_from_json(const nlohmann::json& j) {
  try {
    ScanRecord r;
    r.index = j.value("index", std::size_t{0});
    r.n = j.at("N").get<int>();
    r.beta = j.at("beta").get<double>();
    r.lambda = j.at("lambda").get<double>();
    r.classification = classification_from_string(j.at("classification").get<std::string>());
    r.d_star = num_from_json(j, "d_star");
    r.energy = num_from_json(j, "energy");
    r.boundary_slope = num_from_json(j, "boundary_slope");
    r.residual = num_from_json(j, "residual");
    if (j.contains("certificate") && !j.at("certificate").is_null())
      r.certificate = certificate_from_json(j.at("certificate"));
    r.summary = j.value("summary", "");
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed scan record: ") + e.what());
  }
}

std::vector<ScanRecord> records_from_json(const nlohmann::json& j) {
  const auto& arr = j.is_object() && j.contains("records") ? j.at("records") : j;
  if (!arr.is_array()) throw FormatError("scan report must be an array of records");
  std::vector<ScanRecord> out;
  for (const auto& x : arr) out.push_back(record_from_json(x));
  return out;
}

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "csv") return ReportFormat::Csv;
  if (s == "json") return ReportFormat::Json;
  throw FormatError("format must be csv or json");
}

void emit_report(const std::vector<ScanRecord>& records, ReportFormat format, const std::string& path) {
  if (records.empty()) throw PreconditionError("no records to emit");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write report: " + path);
  if (format == ReportFormat::Csv) {
    write_csv(records, out);
  } else {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& r : records) arr.push_back(to_json(r));
    out << arr.dump(2) << '\n';
  }
  out.flush();
  if (!out) throw IoError("failed while writing report: " + path);
}

ThresholdBracket empirical_threshold(const std::vector<ScanRecord>& records, int n, double beta) {
  ThresholdBracket b;
  for (const auto& r : records) {
    if (r.n != n || r.beta != beta) continue;
    if (r.classification == ScanRecord::Classification::Existence) {
      if (std::isnan(b.above) || r.lambda < b.above) b.above = r.lambda;
    } else if (r.classification == ScanRecord::Classification::NonexistenceCertified ||
               r.classification == ScanRecord::Classification::NonexistenceEvidence) {
      if (std::isnan(b.below) || r.lambda > b.below) b.below = r.lambda;
    }
  }
  return b;
}

}  // namespace radcrit
