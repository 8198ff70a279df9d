#include "hom/harness.hpp"

#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "hom/analytics.hpp"
#include "hom/config_io.hpp"
#include "hom/source_mc.hpp"

namespace hom::harness {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

int thread_cap_from_env() {
  const char* raw = std::getenv("HOMBENCH_THREADS");
  if (raw == nullptr) return 0;
  int value = 0;
  const char* end = raw + std::char_traits<char>::length(raw);
  const auto [ptr, ec] = std::from_chars(raw, end, value);
  if (ec != std::errc{} || ptr != end || value < 1) return 0;
  return value;
}

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, ptr);
}

std::uint64_t parse_count(const std::string& text) {
  const char* first = text.data();
  const char* last = first + text.size();
  std::uint64_t as_int = 0;
  auto [p1, e1] = std::from_chars(first, last, as_int);
  if (e1 == std::errc{} && p1 == last) {
    if (as_int == 0) throw InvalidParameter("count must be positive: " + text);
    return as_int;
  }
  double as_double = 0.0;
  auto [p2, e2] = std::from_chars(first, last, as_double);
  if (e2 != std::errc{} || p2 != last || !(as_double >= 1.0) || as_double > 1.8e19 ||
      std::floor(as_double) != as_double)
    throw InvalidParameter("not a positive integer count: " + text);
  return static_cast<std::uint64_t>(as_double);
}

std::string scan_csv(std::span<const ScanPoint> totals,
                     std::span<const std::vector<ScanPoint>> repeats) {
  const bool with_spread = repeats.size() > 1;
  std::string s = "delay_ps,gates,singles_a,singles_b,coincidences";
  s += with_spread ? ",mean,stddev\n" : "\n";
  for (std::size_t j = 0; j < totals.size(); ++j) {
    const ScanPoint& t = totals[j];
    s += format_number(t.delay_ps) + ',' + std::to_string(t.gates) + ',' +
         std::to_string(t.singles_a) + ',' + std::to_string(t.singles_b) + ',' +
         std::to_string(t.coincidences);
    if (with_spread) {
      const double n = static_cast<double>(repeats.size());
      double mean = 0.0;
      for (const auto& run : repeats) mean += static_cast<double>(run.at(j).coincidences);
      mean /= n;
      double ss = 0.0;
      for (const auto& run : repeats) {
        const double d = static_cast<double>(run.at(j).coincidences) - mean;
        ss += d * d;
      }
      s += ',' + format_number(mean) + ',' + format_number(std::sqrt(ss / (n - 1.0)));
    }
    s += '\n';
  }
  return s;
}

namespace {

// nlohmann writes non-finite doubles as null; keep them readable instead.
ojson number_json(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

}  // namespace

ojson fit_to_json(const FitResult& fit) {
  ojson j;
  j["converged"] = fit.converged;
  j["degenerate"] = fit.degenerate;
  j["iterations"] = fit.iterations;
  j["message"] = fit.message;
  j["baseline"] = number_json(fit.params.baseline);
  j["visibility"] = number_json(fit.params.visibility);
  j["sigma_ps"] = number_json(fit.params.sigma_ps);
  j["center_ps"] = number_json(fit.params.center_ps);
  ojson errs = ojson::array();
  for (double e : fit.std_errors) errs.push_back(number_json(e));
  j["std_errors"] = errs;
  j["chi_squared"] = number_json(fit.chi_squared);
  j["dof"] = fit.dof;
  return j;
}

CountsTable read_counts_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidParameter("counts CSV is empty");
  auto split = [](const std::string& row) {
    std::vector<std::string> cells;
    std::stringstream ss(row);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
      while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
      cells.push_back(cell);
    }
    return cells;
  };
  const auto header = split(line);
  auto column = [&](std::initializer_list<const char*> names) -> std::optional<std::size_t> {
    for (const char* name : names)
      for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    return std::nullopt;
  };
  const auto delay_col = column({"delay_ps"});
  const auto count_col = column({"coincidences", "counts"});
  if (!delay_col || !count_col)
    throw InvalidParameter("counts CSV needs columns delay_ps and coincidences (or counts)");

  CountsTable table;
  int row_no = 1;
  while (std::getline(in, line)) {
    ++row_no;
    if (line.empty() || line == "\r") continue;
    const auto cells = split(line);
    auto cell_value = [&](std::size_t k) {
      if (k >= cells.size())
        throw InvalidParameter("counts CSV row " + std::to_string(row_no) + " is short");
      const std::string& c = cells[k];
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
      if (ec != std::errc{} || ptr != c.data() + c.size() || !std::isfinite(v))
        throw InvalidParameter("counts CSV row " + std::to_string(row_no) + ": bad number '" +
                               c + "'");
      return v;
    };
    table.delays.push_back(cell_value(*delay_col));
    table.counts.push_back(cell_value(*count_col));
  }
  return table;
}

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::uint64_t seed = 1;
  std::string gates_text;
  std::string out_dir = ".";
  std::string format = "csv";
  bool record_timing = false;
};

void add_common(CLI::App* sub, CommonOptions& o, bool with_gates) {
  sub->add_option("--config", o.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  sub->add_option("--set", o.overrides, "Config override key=value (repeatable, wins over --config)")
      ->take_all();
  sub->add_option("--seed", o.seed, "Master seed");
  if (with_gates) sub->add_option("--gates", o.gates_text, "Gates per point, e.g. 1e6");
  sub->add_option("--out", o.out_dir, "Output directory");
  sub->add_option("--format", o.format, "Summary format on stdout")
      ->check(CLI::IsMember({"csv", "json"}));
  sub->add_flag("--record-timing", o.record_timing, "Add wall-clock duration to the report");
}

ExperimentConfig resolve_config(const CommonOptions& o) {
  ExperimentConfig c = default_config();
  if (!o.config_path.empty()) c = load_config(o.config_path, c);
  for (const auto& assignment : o.overrides) c = apply_override(c, assignment);
  return require_valid(c);
}

std::uint64_t resolve_gates(const CommonOptions& o, std::uint64_t fallback) {
  return o.gates_text.empty() ? fallback : parse_count(o.gates_text);
}

ojson report_header(const char* experiment, const CommonOptions& o, const ExperimentConfig& c) {
  ojson r;
  r["schema_version"] = kSchemaVersion;
  r["tool_version"] = kToolVersion;
  r["experiment"] = experiment;
  r["seed"] = o.seed;
  r["config"] = config_to_json(c);
  return r;
}

void write_text(const fs::path& path, const std::string& text) {
  if (!path.parent_path().empty()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << text;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

void write_report(const fs::path& path, ojson report, const CommonOptions& o,
                  std::chrono::steady_clock::time_point start) {
  if (o.record_timing)
    report["wall_clock_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  write_text(path, report.dump(2) + "\n");
}

/// Prints a flat quantity/value summary in the chosen format.
void emit_summary(std::ostream& out, const ojson& summary, const std::string& format) {
  if (format == "json") {
    out << summary.dump(2) << '\n';
    return;
  }
  out << "quantity,value\n";
  for (const auto& [key, value] : summary.items()) {
    out << key << ',';
    if (value.is_number_float())
      out << format_number(value.get<double>());
    else if (value.is_string())
      out << value.get<std::string>();
    else
      out << value.dump();
    out << '\n';
  }
}

ojson points_json(std::span<const ScanPoint> points) {
  ojson arr = ojson::array();
  for (const auto& p : points)
    arr.push_back({{"delay_ps", p.delay_ps},
                   {"gates", p.gates},
                   {"singles_a", p.singles_a},
                   {"singles_b", p.singles_b},
                   {"coincidences", p.coincidences}});
  return arr;
}

ojson predictions_json(const ExperimentConfig& c) {
  ojson j;
  const auto budget = budget_from_config(c);
  const double v = visibility_prediction(budget);
  j["visibility"] = v;
  j["eta_end_to_end"] = budget.eta;
  j["dark_dt"] = budget.dark_dt;
  j["indistinguishability"] = indistinguishability(c.delay_ps, c.wavepacket.sigma_ps);
  j["dip_min_ratio"] = dip_model(0.0, {1.0, v, c.wavepacket.sigma_ps, c.splitter, 0.0});
  const auto car = car_prediction_hom(c.source.mean_pairs_per_pulse, c).car();
  if (car)
    j["car"] = number_json(*car);
  else
    j["car"] = "no accidentals";
  const auto direct = car_prediction(c.source.mean_pairs_per_pulse, c.channel_s.transmittance,
                                     c.channel_i.transmittance, c.detector_a.dark_prob_per_gate,
                                     c.detector_b.dark_prob_per_gate)
                          .car();
  if (direct)
    j["car_direct"] = number_json(*direct);
  else
    j["car_direct"] = "no accidentals";
  return j;
}

int cmd_predict(const CommonOptions& o, std::ostream& out) {
  const ExperimentConfig c = resolve_config(o);
  ojson summary;
  summary["pairs_per_pulse"] = c.source.mean_pairs_per_pulse;
  const ojson predictions = predictions_json(c);
  for (const auto& [k, v] : predictions.items()) summary[k] = v;
  emit_summary(out, summary, o.format);
  return exit_ok;
}

int cmd_calibrate(const CommonOptions& o, double target_v, std::ostream& out,
                  std::ostream& err) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig base = resolve_config(o);
  const auto budget = budget_from_config(base);
  ExperimentConfig calibrated;
  try {
    calibrated = calibrate_config(base, target_v);
  } catch (const InfeasibleTarget& e) {
    err << "infeasible: target V=" << format_number(target_v)
        << " is outside the achievable range [" << format_number(e.v_min()) << ", "
        << format_number(e.v_max()) << "] for p=" << format_number(budget.p)
        << ", dark_dt=" << format_number(budget.dark_dt) << ", xi=" << format_number(budget.xi)
        << '\n';
    return exit_validation;
  }
  const auto check = budget_from_config(calibrated);

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  save_config(dir / "calibrated_config.json", calibrated);

  ojson report = report_header("calibrate", o, calibrated);
  report["target_visibility"] = target_v;
  report["eta_end_to_end"] = check.eta;
  report["eta_arm"] = calibrated.channel_s.transmittance;
  report["visibility_check"] = visibility_prediction(check);
  write_report(dir / "calibrate.json", report, o, start);

  ojson summary;
  summary["target_visibility"] = target_v;
  summary["eta_end_to_end"] = check.eta;
  summary["eta_arm"] = calibrated.channel_s.transmittance;
  summary["visibility_check"] = visibility_prediction(check);
  emit_summary(out, summary, o.format);
  return exit_ok;
}

struct ScanOptions {
  double delay_min = -6.0;
  double delay_max = 6.0;
  int delay_steps = 21;
  int repeats = 1;
  bool fit_center = false;
};

void add_scan_options(CLI::App* sub, ScanOptions& s) {
  sub->add_option("--delay-min", s.delay_min, "First delay [ps]");
  sub->add_option("--delay-max", s.delay_max, "Last delay [ps]");
  sub->add_option("--delay-steps", s.delay_steps, "Number of delays (>= 4)");
}

std::vector<double> scan_delays(const ScanOptions& s) {
  if (s.delay_steps < 4) throw InvalidParameter("--delay-steps must be at least 4");
  if (!(s.delay_max > s.delay_min)) throw InvalidParameter("--delay-max must exceed --delay-min");
  return linear_delays(s.delay_min, s.delay_max, s.delay_steps);
}

int cmd_dip_scan(const CommonOptions& o, const ScanOptions& s, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig c = resolve_config(o);
  const std::uint64_t gates = resolve_gates(o, 1'000'000);
  const auto delays = scan_delays(s);
  if (s.repeats < 1) throw InvalidParameter("--repeats must be at least 1");
  const Execution exec{thread_cap_from_env(), kernels::Sampler::sparse};

  std::vector<std::vector<ScanPoint>> runs;
  for (int r = 0; r < s.repeats; ++r) {
    const std::uint64_t run_seed =
        s.repeats == 1 ? o.seed : Rng(o.seed, {0x7e9eu, static_cast<std::uint64_t>(r)}).next();
    runs.push_back(run_dip_scan(c, delays, gates, run_seed, exec));
  }
  std::vector<ScanPoint> totals = runs.front();
  for (std::size_t r = 1; r < runs.size(); ++r)
    for (std::size_t j = 0; j < totals.size(); ++j) {
      totals[j].gates += runs[r][j].gates;
      totals[j].singles_a += runs[r][j].singles_a;
      totals[j].singles_b += runs[r][j].singles_b;
      totals[j].coincidences += runs[r][j].coincidences;
    }

  std::optional<FitResult> fit;
  std::string fit_error;
  try {
    FitOptions fo;
    fo.fit_center = s.fit_center;
    fit = fit_dip(totals, c.splitter, std::nullopt, fo);
    if (!fit->converged) fit_error = "fit did not converge: " + fit->message;
  } catch (const InvalidParameter& e) {
    fit_error = e.what();
  }

  const fs::path dir(o.out_dir);
  write_text(dir / "dip_scan.csv", scan_csv(totals, runs));

  ojson report = report_header("dip-scan", o, c);
  report["gates_per_point"] = gates;
  report["repeats"] = s.repeats;
  report["points"] = points_json(totals);
  if (runs.size() > 1) {
    ojson per_run = ojson::array();
    for (const auto& run : runs) per_run.push_back(points_json(run));
    report["repeat_points"] = per_run;
  }
  report["fit"] = fit ? fit_to_json(*fit) : ojson(nullptr);
  report["fit_error"] = fit_error;
  report["predictions"] = predictions_json(c);
  write_report(dir / "dip_scan.json", report, o, start);

  ojson summary;
  summary["points"] = totals.size();
  summary["gates_per_point"] = gates;
  summary["visibility_predicted"] = visibility_prediction(budget_from_config(c));
  if (fit) {
    summary["visibility"] = number_json(fit->params.visibility);
    summary["visibility_err"] = number_json(fit->visibility_error());
    summary["sigma_ps"] = number_json(fit->params.sigma_ps);
    summary["sigma_err_ps"] = number_json(fit->sigma_error());
    summary["baseline"] = number_json(fit->params.baseline);
    summary["converged"] = fit->converged;
  }
  if (!fit_error.empty()) summary["fit_error"] = fit_error;
  emit_summary(out, summary, o.format);
  return fit_error.empty() ? exit_ok : exit_fit;
}

int cmd_sweep(const CommonOptions& o, const ScanOptions& s, const std::vector<double>& p_values,
              std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  if (p_values.empty()) throw InvalidParameter("--p needs at least one value");
  const ExperimentConfig c = resolve_config(o);
  const std::uint64_t gates = resolve_gates(o, 10'000'000);
  const auto delays = scan_delays(s);
  const Execution exec{thread_cap_from_env(), kernels::Sampler::sparse};
  const auto rows = run_visibility_sweep(c, p_values, delays, gates, o.seed, exec);

  std::string csv = "p,v_fit,v_err,sigma_ps,sigma_err_ps,baseline,chi_squared,dof,converged,v_budget\n";
  ojson report = report_header("visibility-sweep", o, c);
  report["gates_per_point"] = gates;
  ojson jrows = ojson::array();
  bool all_ok = true;
  for (const auto& row : rows) {
    const bool ok = row.error.empty();
    all_ok = all_ok && ok;
    csv += format_number(row.p) + ',';
    if (row.fit) {
      const auto& f = *row.fit;
      csv += format_number(f.params.visibility) + ',' + format_number(f.visibility_error()) + ',' +
             format_number(f.params.sigma_ps) + ',' + format_number(f.sigma_error()) + ',' +
             format_number(f.params.baseline) + ',' + format_number(f.chi_squared) + ',' +
             std::to_string(f.dof) + ',';
    } else {
      csv += "nan,nan,nan,nan,nan,nan,0,";
    }
    csv += std::string(ok ? "true" : "false") + ',' + format_number(row.v_predicted) + '\n';

    ojson jr;
    jr["p"] = row.p;
    jr["v_budget"] = row.v_predicted;
    jr["fit"] = row.fit ? fit_to_json(*row.fit) : ojson(nullptr);
    jr["error"] = row.error;
    jr["points"] = points_json(row.points);
    jrows.push_back(jr);
  }
  report["rows"] = jrows;

  const fs::path dir(o.out_dir);
  write_text(dir / "visibility_sweep.csv", csv);
  write_report(dir / "visibility_sweep.json", report, o, start);

  ojson summary;
  for (const auto& row : rows) {
    const std::string key = "v_fit@p=" + format_number(row.p);
    summary[key] = row.fit ? number_json(row.fit->params.visibility) : ojson("failed");
  }
  emit_summary(out, summary, o.format);
  return all_ok ? exit_ok : exit_fit;
}

int cmd_car(const CommonOptions& o, int slots, std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  ExperimentConfig c = resolve_config(o);
  const std::uint64_t gates = resolve_gates(o, 100'000'000);
  const double min_delay = 10.0 * c.wavepacket.sigma_ps;
  const bool auto_offset = std::abs(c.delay_ps) < min_delay;
  if (auto_offset) c.delay_ps = min_delay;

  const Execution exec{thread_cap_from_env(), kernels::Sampler::sparse};
  const CarResult r = run_car(c, gates, slots, o.seed, exec);
  const auto predicted = car_prediction_hom(c.source.mean_pairs_per_pulse, c);

  const fs::path dir(o.out_dir);
  std::string csv = "offset_gates,coincidences\n0," + std::to_string(r.matched_coincidences) + '\n';
  for (std::size_t k = 0; k < r.unmatched_coincidences.size(); ++k)
    csv += std::to_string(k + 1) + ',' + std::to_string(r.unmatched_coincidences[k]) + '\n';
  write_text(dir / "car_slots.csv", csv);

  ojson report = report_header("car", o, c);
  report["delay_auto_offset"] = auto_offset;
  report["delay_ps"] = c.delay_ps;
  report["gates"] = r.gates;
  report["singles_a"] = r.singles_a;
  report["singles_b"] = r.singles_b;
  report["matched_coincidences"] = r.matched_coincidences;
  report["unmatched_coincidences"] = r.unmatched_coincidences;
  report["unmatched_mean"] = r.unmatched_mean;
  report["car"] = r.car;
  report["p_estimate"] = r.p_estimate;
  ojson pred;
  pred["car"] = predicted.car() ? number_json(*predicted.car()) : ojson("no accidentals");
  pred["singles_a"] = predicted.singles_a;
  pred["singles_b"] = predicted.singles_b;
  pred["matched"] = predicted.matched;
  pred["accidental"] = predicted.accidental;
  report["predictions"] = pred;
  write_report(dir / "car.json", report, o, start);

  ojson summary;
  summary["delay_ps"] = c.delay_ps;
  summary["gates"] = r.gates;
  summary["matched_coincidences"] = r.matched_coincidences;
  summary["unmatched_mean"] = r.unmatched_mean;
  summary["car"] = r.car;
  summary["car_predicted"] = pred["car"];
  summary["p_estimate"] = r.p_estimate;
  emit_summary(out, summary, o.format);
  return exit_ok;
}

int cmd_fit(const CommonOptions& o, const std::string& input, bool fit_center,
            std::ostream& out) {
  const auto start = std::chrono::steady_clock::now();
  const ExperimentConfig c = resolve_config(o);
  std::ifstream in(input);
  if (!in) throw std::runtime_error("cannot open " + input);
  const CountsTable table = read_counts_csv(in);

  FitOptions fo;
  fo.fit_center = fit_center;
  const FitResult fit = fit_dip(table.delays, table.counts, c.splitter, std::nullopt, fo);

  ojson report = report_header("fit", o, c);
  report["input"] = input;
  ojson pts = ojson::array();
  for (std::size_t k = 0; k < table.delays.size(); ++k)
    pts.push_back({{"delay_ps", table.delays[k]}, {"counts", table.counts[k]}});
  report["points"] = pts;
  report["fit"] = fit_to_json(fit);
  write_report(fs::path(o.out_dir) / "fit.json", report, o, start);

  ojson summary;
  summary["visibility"] = number_json(fit.params.visibility);
  summary["visibility_err"] = number_json(fit.visibility_error());
  summary["sigma_ps"] = number_json(fit.params.sigma_ps);
  summary["sigma_err_ps"] = number_json(fit.sigma_error());
  summary["baseline"] = number_json(fit.params.baseline);
  if (fit_center) summary["center_ps"] = number_json(fit.params.center_ps);
  summary["chi_squared"] = number_json(fit.chi_squared);
  summary["dof"] = fit.dof;
  summary["converged"] = fit.converged;
  emit_summary(out, summary, o.format);
  return fit.converged ? exit_ok : exit_fit;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Monte Carlo and analytic toolkit for two-photon interference experiments",
               "hombench"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  CommonOptions common;
  ScanOptions scan;
  double target_v = 0.80;
  std::vector<double> p_values;
  int slots = 100;
  std::string fit_input;
  bool fit_center = false;

  auto* predict = app.add_subcommand("predict", "Closed-form visibility, CAR and dip depth");
  add_common(predict, common, false);

  auto* calibrate = app.add_subcommand("calibrate", "Solve for the transmittance giving a target V");
  add_common(calibrate, common, false);
  calibrate->add_option("--target-v", target_v, "Target visibility");

  auto* dip = app.add_subcommand("dip-scan", "Simulate and fit a delay scan");
  add_common(dip, common, true);
  add_scan_options(dip, scan);
  dip->add_option("--repeats", scan.repeats, "Independent runs per point");
  dip->add_flag("--fit-center", scan.fit_center, "Also fit the dip position");

  auto* sweep = app.add_subcommand("visibility-sweep", "Dip scans over pairs per pulse");
  add_common(sweep, common, true);
  add_scan_options(sweep, scan);
  sweep->add_option("--p", p_values, "Pairs per pulse, comma separated")
      ->delimiter(',')
      ->required();

  auto* car = app.add_subcommand("car", "Coincidence-to-accidental ratio off the dip");
  add_common(car, common, true);
  car->add_option("--slots", slots, "Number of unmatched gate offsets")->check(CLI::PositiveNumber);

  auto* fit = app.add_subcommand("fit", "Fit the dip model to a CSV of delay/counts");
  add_common(fit, common, false);
  fit->add_option("input", fit_input, "CSV with delay_ps and coincidences columns")
      ->required()
      ->check(CLI::ExistingFile);
  fit->add_flag("--fit-center", fit_center, "Also fit the dip position");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? exit_ok : exit_validation;
  }

  try {
    if (predict->parsed()) return cmd_predict(common, out);
    if (calibrate->parsed()) return cmd_calibrate(common, target_v, out, err);
    if (dip->parsed()) return cmd_dip_scan(common, scan, out);
    if (sweep->parsed()) return cmd_sweep(common, scan, p_values, out);
    if (car->parsed()) return cmd_car(common, slots, out);
    if (fit->parsed()) return cmd_fit(common, fit_input, fit_center, out);
  } catch (const ConfigError& e) {
    err << "invalid configuration:\n" << e.result().describe() << '\n';
    return exit_validation;
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << '\n';
    return exit_validation;
  } catch (const StatisticsError& e) {
    err << "error: " << e.what() << '\n';
    return exit_runtime;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return exit_runtime;
  }
  return exit_validation;
}

}  // namespace hom::harness
