#include "qkd/detector_model.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <string>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "qkd/error.hpp"

namespace qkd {

namespace {

constexpr double kGridTolerance = 1e-6;

std::size_t wrap_index(long index, std::size_t n) {
  const auto m = static_cast<long>(n);
  return static_cast<std::size_t>(((index % m) + m) % m);
}

long grid_steps(double value, double step, const char* what) {
  const double ratio = value / step;
  const double rounded = std::round(ratio);
  if (std::abs(ratio - rounded) > kGridTolerance) {
    throw ValidationError(fmt::format("{} {} ps is not a multiple of the {} ps grid", what, value,
                                      step));
  }
  return static_cast<long>(rounded);
}

double gate_profile(GateShape shape, double distance_ps, double fwhm_ps) {
  const double d = std::abs(distance_ps);
  if (shape.kind == GateShapeKind::Gaussian) {
    return std::exp(-4.0 * std::numbers::ln2 * d * d / (fwhm_ps * fwhm_ps));
  }
  const double flat = 0.5 * (1.0 - shape.rolloff) * fwhm_ps;
  const double edge = 0.5 * (1.0 + shape.rolloff) * fwhm_ps;
  if (d <= flat) return 1.0;
  if (d >= edge) return 0.0;
  return 0.5 * (1.0 + std::cos(std::numbers::pi * (d - flat) / (shape.rolloff * fwhm_ps)));
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

double parse_double(const std::string& field, std::size_t line_no) {
  const std::string t = trim(field);
  double value = 0.0;
  const auto* begin = t.data();
  const auto* end = t.data() + t.size();
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (t.empty() || ec != std::errc{} || ptr != end) {
    throw ParseError(fmt::format("line {}: cannot parse '{}' as a number", line_no, field));
  }
  return value;
}

}  // namespace

long integer_ratio(double a, double b) {
  const double ratio = a / b;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > kGridTolerance * rounded) return 0;
  return static_cast<long>(rounded);
}

GateEfficiencyCurve::GateEfficiencyCurve(std::vector<double> samples, double dt_ps,
                                         double period_ps, double dark_prob)
    : samples_(std::move(samples)), dt_ps_(dt_ps), period_ps_(period_ps), dark_prob_(dark_prob) {
  if (!(dt_ps_ > 0.0) || !(period_ps_ > 0.0)) {
    throw ValidationError("curve grid step and period must be positive");
  }
  if (samples_.empty()) throw ValidationError("curve has no samples");
  const double span = static_cast<double>(samples_.size()) * dt_ps_;
  if (std::abs(span - period_ps_) > 1e-9 * period_ps_) {
    throw ValidationError(fmt::format("{} bins x {} ps != period {} ps", samples_.size(), dt_ps_,
                                      period_ps_));
  }
  for (double s : samples_) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw ValidationError(fmt::format("efficiency {} outside [0, 1]", s));
    }
  }
  if (!(dark_prob_ >= 0.0 && dark_prob_ < 1.0)) {
    throw ValidationError(fmt::format("dark-count probability {} outside [0, 1)", dark_prob_));
  }
}

std::size_t GateEfficiencyCurve::bin_at(double time_ps) const {
  return wrap_index(grid_steps(time_ps, dt_ps_, "arrival time"), samples_.size());
}

DetectorPair::DetectorPair(GateEfficiencyCurve a0, GateEfficiencyCurve a1)
    : apd0(std::move(a0)), apd1(std::move(a1)) {
  if (apd0.size() != apd1.size() || apd0.dt_ps() != apd1.dt_ps() ||
      apd0.period_ps() != apd1.period_ps()) {
    throw ValidationError("detector curves must share grid step and period");
  }
}

GateEfficiencyCurve make_gate_curve(GateShape shape, double center_ps, double fwhm_ps,
                                    double peak, double dt_ps, double period_ps,
                                    double dark_prob) {
  if (!(fwhm_ps > 0.0)) throw ValidationError("gate FWHM must be positive");
  if (!(peak >= 0.0 && peak <= 1.0)) {
    throw ValidationError(fmt::format("peak efficiency {} outside [0, 1]", peak));
  }
  if (shape.kind == GateShapeKind::RaisedCosine && !(shape.rolloff >= 0.0 && shape.rolloff <= 1.0)) {
    throw ValidationError("raised-cosine rolloff must lie in [0, 1]");
  }
  const long n = integer_ratio(period_ps, dt_ps);
  if (n == 0) {
    throw ValidationError(
        fmt::format("period {} ps is not an integer number of {} ps bins", period_ps, dt_ps));
  }
  const long center_bin = static_cast<long>(std::floor(center_ps / dt_ps + kGridTolerance));
  std::vector<double> samples(static_cast<std::size_t>(n));
  for (long j = 0; j < n; ++j) {
    long offset = wrap_index(j - center_bin, static_cast<std::size_t>(n));
    if (2 * offset > n) offset -= n;
    const double value = peak * gate_profile(shape, static_cast<double>(offset) * dt_ps, fwhm_ps);
    samples[static_cast<std::size_t>(j)] = value;
  }
  return {std::move(samples), dt_ps, period_ps, dark_prob};
}

GateEfficiencyCurve shift_curve(const GateEfficiencyCurve& curve, double delta_ps) {
  const long k = grid_steps(delta_ps, curve.dt_ps(), "shift");
  const std::size_t n = curve.size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    out[j] = curve[wrap_index(static_cast<long>(j) - k, n)];
  }
  return {std::move(out), curve.dt_ps(), curve.period_ps(), curve.dark_prob()};
}

DetectorPair logical_curves(const DetectorPair& pair, DemodulationMode mode) {
  if (mode == DemodulationMode::TwoState) return pair;
  std::vector<double> mean(pair.size());
  for (std::size_t j = 0; j < mean.size(); ++j) mean[j] = 0.5 * (pair.apd0[j] + pair.apd1[j]);
  const double dark = 0.5 * (pair.apd0.dark_prob() + pair.apd1.dark_prob());
  GateEfficiencyCurve logical(std::move(mean), pair.dt_ps(), pair.period_ps(), dark);
  return {logical, logical};
}

GateEfficiencyCurve resample(const GateEfficiencyCurve& curve, double dt_new_ps) {
  if (!(dt_new_ps > 0.0)) throw ValidationError("resample step must be positive");
  const std::size_t n = curve.size();
  if (const long k = integer_ratio(dt_new_ps, curve.dt_ps()); k != 0) {
    if (n % static_cast<std::size_t>(k) != 0) {
      throw ValidationError(
          fmt::format("{} bins cannot be decimated by {} without changing the period", n, k));
    }
    std::vector<double> out(n / static_cast<std::size_t>(k));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = curve[i * static_cast<std::size_t>(k)];
    return {std::move(out), dt_new_ps, curve.period_ps(), curve.dark_prob()};
  }
  if (const long m = integer_ratio(curve.dt_ps(), dt_new_ps); m != 0) {
    const auto mm = static_cast<std::size_t>(m);
    std::vector<double> out(n * mm);
    for (std::size_t i = 0; i < out.size(); ++i) {
      const std::size_t lo = i / mm;
      const double frac = static_cast<double>(i % mm) / static_cast<double>(mm);
      const double a = curve[lo];
      const double b = curve[(lo + 1) % n];
      out[i] = a + frac * (b - a);
    }
    return {std::move(out), dt_new_ps, curve.period_ps(), curve.dark_prob()};
  }
  throw ValidationError(fmt::format("cannot resample {} ps grid to {} ps: ratio is not integral",
                                    curve.dt_ps(), dt_new_ps));
}

DetectorPair resample(const DetectorPair& pair, double dt_new_ps) {
  return {resample(pair.apd0, dt_new_ps), resample(pair.apd1, dt_new_ps)};
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  auto p = csv_path;
  p.replace_extension(".json");
  return p;
}

DetectorPair load_curves_csv(const std::filesystem::path& path, double dark0, double dark1) {
  std::ifstream in(path);
  if (!in) throw ParseError(fmt::format("cannot open curve file {}", path.string()));

  std::string line;
  if (!std::getline(in, line) || trim(line) != "time_ps,eta0,eta1") {
    throw ParseError(fmt::format("{}: expected header 'time_ps,eta0,eta1'", path.string()));
  }
  std::vector<double> times;
  std::vector<double> eta0;
  std::vector<double> eta1;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    for (std::string f; std::getline(ss, f, ',');) fields.push_back(f);
    if (fields.size() != 3) {
      throw ParseError(fmt::format("line {}: expected 3 fields, got {}", line_no, fields.size()));
    }
    times.push_back(parse_double(fields[0], line_no));
    eta0.push_back(parse_double(fields[1], line_no));
    eta1.push_back(parse_double(fields[2], line_no));
    for (double eta : {eta0.back(), eta1.back()}) {
      if (!(eta >= 0.0 && eta <= 1.0)) {
        throw ValidationError(fmt::format("line {}: efficiency {} outside [0, 1]", line_no, eta));
      }
    }
  }
  if (times.size() < 2) throw ParseError("curve file needs at least two rows");
  if (times.front() != 0.0) throw ParseError("time column must start at 0");
  const double dt = times[1] - times[0];
  if (!(dt > 0.0)) throw ParseError("time column must be strictly ascending");
  for (std::size_t i = 0; i < times.size(); ++i) {
    const double expected = static_cast<double>(i) * dt;
    if (std::abs(times[i] - expected) > kGridTolerance * dt * static_cast<double>(times.size())) {
      throw ParseError(fmt::format("non-uniform time grid at row {} (t={} ps, expected {} ps)",
                                   i + 1, times[i], expected));
    }
  }
  const double period = static_cast<double>(times.size()) * dt;

  if (const auto meta_path = sidecar_path(path); std::filesystem::exists(meta_path)) {
    std::ifstream meta_in(meta_path);
    nlohmann::json meta;
    try {
      meta = nlohmann::json::parse(meta_in);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(fmt::format("{}: {}", meta_path.string(), e.what()));
    }
    dark0 = meta.value("dark0", dark0);
    dark1 = meta.value("dark1", dark1);
    if (meta.contains("period_ps") && std::abs(meta["period_ps"].get<double>() - period) > 1e-6) {
      throw ParseError(fmt::format("sidecar period {} ps disagrees with {} rows of {} ps",
                                   meta["period_ps"].get<double>(), times.size(), dt));
    }
  }
  return {GateEfficiencyCurve(std::move(eta0), dt, period, dark0),
          GateEfficiencyCurve(std::move(eta1), dt, period, dark1)};
}

void save_curves_csv(const DetectorPair& pair, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw ParseError(fmt::format("cannot write {}", path.string()));
  out << "time_ps,eta0,eta1\n";
  for (std::size_t j = 0; j < pair.size(); ++j) {
    out << fmt::format("{:.9g},{:.9g},{:.9g}\n", static_cast<double>(j) * pair.dt_ps(),
                       pair.apd0[j], pair.apd1[j]);
  }
  nlohmann::json meta = {{"dt_ps", pair.dt_ps()},
                         {"period_ps", pair.period_ps()},
                         {"dark0", pair.apd0.dark_prob()},
                         {"dark1", pair.apd1.dark_prob()}};
  std::ofstream(sidecar_path(path)) << meta.dump(2) << '\n';
}

}  // namespace qkd
