#include <clocale>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <doctest.h>

#include "hom/analytics.hpp"
#include "hom/config_io.hpp"
#include "hom/harness.hpp"

using namespace hom;
using namespace hom::harness;
namespace fs = std::filesystem;

namespace {

struct CliRun {
  int code = -1;
  std::string out;
  std::string err;
};

CliRun cli(std::vector<std::string> args) {
  args.insert(args.begin(), "hombench");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  CliRun r;
  r.code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("hombench_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// value column of a quantity,value summary
std::string summary_value(const std::string& text, const std::string& key) {
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
    if (line.rfind(key + ",", 0) == 0) return line.substr(key.size() + 1);
  return {};
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream f(p);
  f << text;
}

}  // namespace

TEST_CASE("number formatting is shortest round-trip and locale independent") {
  CHECK(format_number(0.1) == "0.1");
  CHECK(format_number(-6.0) == "-6");
  CHECK(format_number(1e-300) == "1e-300");
  CHECK(std::stod(format_number(0.7999999999999425)) == 0.7999999999999425);
  const char* old = std::setlocale(LC_NUMERIC, nullptr);
  std::string saved = old ? old : "C";
  if (std::setlocale(LC_NUMERIC, "de_DE.UTF-8")) CHECK(format_number(1.5) == "1.5");
  std::setlocale(LC_NUMERIC, saved.c_str());
}

TEST_CASE("count parsing") {
  CHECK(parse_count("1000000") == 1'000'000);
  CHECK(parse_count("1e6") == 1'000'000);
  CHECK(parse_count("2.5e9") == 2'500'000'000ull);
  CHECK_THROWS_AS(parse_count("1.5"), InvalidParameter);
  CHECK_THROWS_AS(parse_count("0"), InvalidParameter);
  CHECK_THROWS_AS(parse_count("-3"), InvalidParameter);
  CHECK_THROWS_AS(parse_count("ten"), InvalidParameter);
}

TEST_CASE("config JSON round trip and error reporting") {
  const ExperimentConfig c = default_config();
  const ExperimentConfig back = config_from_json(nlohmann::json::parse(config_to_json(c).dump()), apparatus_config());
  CHECK(back.source.mean_pairs_per_pulse == c.source.mean_pairs_per_pulse);
  CHECK(back.channel_s.transmittance == c.channel_s.transmittance);
  CHECK(back.splitter.transmittance == doctest::Approx(c.splitter.transmittance).epsilon(1e-15));
  CHECK(back.source.extinction_ratio == doctest::Approx(1000.0).epsilon(1e-14));
  CHECK(back.wavepacket.sigma_ps == c.wavepacket.sigma_ps);

  const auto fw = config_from_json(nlohmann::json{{"fwhm_ps", 4.0}}, c);
  CHECK(fw.wavepacket.sigma_ps == doctest::Approx(1.6986).epsilon(1e-4));
  const auto db = config_from_json(nlohmann::json{{"splitter_t_db", -3.0103}, {"splitter_r_db", -3.0103}}, c);
  CHECK(db.splitter.transmittance == doctest::Approx(0.5).epsilon(1e-4));

  try {
    config_from_json(nlohmann::json{{"pairs_per_pulse", -1.0}, {"bogus", 1}, {"sigma_ps", 1.0}, {"fwhm_ps", 2.0}}, c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string text = e.result().describe();
    CHECK(text.find("bogus") != std::string::npos);
    CHECK(text.find("fwhm_ps") != std::string::npos);
  }
  try {
    config_from_json(nlohmann::json{{"pairs_per_pulse", -1.0}}, c);
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(e.result().describe().find("p<0") != std::string::npos);
  }
  CHECK_THROWS_AS(config_from_json(nlohmann::json{{"eta_signal", "high"}}, c), ConfigError);
  CHECK_THROWS_AS(apply_override(c, "pairs_per_pulse"), ConfigError);
  CHECK(apply_override(c, "pairs_per_pulse=0.07").source.mean_pairs_per_pulse == 0.07);
  CHECK(apply_override(c, "multi_pair_model=coherent").multi_pair == MultiPairModel::coherent);
}

TEST_CASE("counts CSV reader") {
  std::istringstream in("delay_ps,gates,coincidences\n-1,10,5\n0, 10 ,2\r\n\n1,10,6\n");
  const auto t = read_counts_csv(in);
  CHECK(t.delays == std::vector<double>{-1.0, 0.0, 1.0});
  CHECK(t.counts == std::vector<double>{5.0, 2.0, 6.0});
  std::istringstream bad("x,y\n1,2\n");
  CHECK_THROWS_AS(read_counts_csv(bad), InvalidParameter);
  std::istringstream junk("delay_ps,counts\n1,abc\n");
  CHECK_THROWS_AS(read_counts_csv(junk), InvalidParameter);
}

TEST_CASE("predict") {
  auto r = cli({"predict"});
  REQUIRE(r.code == exit_ok);
  CHECK(std::stod(summary_value(r.out, "visibility")) == doctest::Approx(0.80).epsilon(1e-9));

  r = cli({"predict", "--set", "pairs_per_pulse=0", "--set", "extinction_ratio_db=inf", "--set",
           "dark_prob_a=0", "--set", "dark_prob_b=0"});
  REQUIRE(r.code == exit_ok);
  CHECK(std::stod(summary_value(r.out, "visibility")) == 1.0);
  CHECK(summary_value(r.out, "car") == "no accidentals");

  const auto no_demux = cli({"predict", "--set", "extinction_ratio_db=0"});
  REQUIRE(no_demux.code == exit_ok);
  CHECK(std::stod(summary_value(no_demux.out, "visibility")) < 0.5);

  r = cli({"predict", "--format", "json"});
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["visibility"].get<double>() == doctest::Approx(0.8));

  r = cli({"predict", "--set", "pairs_per_pulse=-0.1"});
  CHECK(r.code == exit_validation);
  CHECK(r.err.find("source.mean_pairs_per_pulse") != std::string::npos);
}

TEST_CASE("config file handling") {
  const auto dir = scratch("config");
  write_file(dir / "bad.json", R"({"pairs_per_pulse": 0.02, "colour": "blue"})");
  auto r = cli({"predict", "--config", (dir / "bad.json").string()});
  CHECK(r.code == exit_validation);
  CHECK(r.err.find("colour") != std::string::npos);

  write_file(dir / "partial.json", R"({"pairs_per_pulse": 0.01})");
  r = cli({"predict", "--config", (dir / "partial.json").string()});
  REQUIRE(r.code == exit_ok);
  CHECK(summary_value(r.out, "pairs_per_pulse") == "0.01");

  // flags win over the file
  r = cli({"predict", "--config", (dir / "partial.json").string(), "--set", "pairs_per_pulse=0.05"});
  CHECK(summary_value(r.out, "pairs_per_pulse") == "0.05");

  write_file(dir / "broken.json", "{not json");
  CHECK(cli({"predict", "--config", (dir / "broken.json").string()}).code == exit_validation);
  CHECK(cli({"predict", "--config", (dir / "missing.json").string()}).code == exit_validation);
  CHECK(cli({"no-such-command"}).code == exit_validation);
  CHECK(cli({}).code == exit_validation);
}

TEST_CASE("calibrate") {
  const auto dir = scratch("calibrate");
  auto r = cli({"calibrate", "--out", dir.string()});
  REQUIRE(r.code == exit_ok);
  const auto cal = load_config(dir / "calibrated_config.json", apparatus_config());
  CHECK(std::abs(visibility_prediction(budget_from_config(cal)) - 0.80) < 1e-9);
  const double eta80 = std::stod(summary_value(r.out, "eta_end_to_end"));
  CHECK(eta80 > 0.0);
  CHECK(eta80 < 1.0);

  r = cli({"calibrate", "--out", dir.string(), "--target-v", "0.85"});
  REQUIRE(r.code == exit_ok);
  CHECK(std::stod(summary_value(r.out, "eta_end_to_end")) > eta80);

  r = cli({"calibrate", "--out", (dir / "nested" / "deeper").string()});
  CHECK(r.code == exit_ok);
  CHECK(fs::exists(dir / "nested" / "deeper" / "calibrated_config.json"));

  r = cli({"calibrate", "--out", dir.string(), "--target-v", "0.999"});
  CHECK(r.code == exit_validation);
  CHECK(r.err.find("infeasible") != std::string::npos);
}

TEST_CASE("dip-scan outputs, determinism and repeats") {
  const auto dir = scratch("dip");
  const std::vector<std::string> args{"dip-scan", "--gates", "2e7", "--seed", "77",
                                      "--set", "eta_signal=0.2", "--set", "eta_idler=0.2"};
  auto run_in = [&](const fs::path& out, const char* threads) {
    setenv("HOMBENCH_THREADS", threads, 1);
    auto a = args;
    a.push_back("--out");
    a.push_back(out.string());
    const auto r = cli(a);
    unsetenv("HOMBENCH_THREADS");
    return r;
  };
  const auto r1 = run_in(dir / "a", "1");
  const auto r2 = run_in(dir / "b", "3");
  REQUIRE(r1.code == exit_ok);
  REQUIRE(r2.code == exit_ok);
  CHECK(r1.out == r2.out);
  CHECK(slurp(dir / "a" / "dip_scan.csv") == slurp(dir / "b" / "dip_scan.csv"));
  CHECK(slurp(dir / "a" / "dip_scan.json") == slurp(dir / "b" / "dip_scan.json"));

  const std::string csv = slurp(dir / "a" / "dip_scan.csv");
  CHECK(csv.rfind("delay_ps,gates,singles_a,singles_b,coincidences\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 22);

  const auto report = nlohmann::json::parse(slurp(dir / "a" / "dip_scan.json"));
  CHECK(report["schema_version"] == kSchemaVersion);
  CHECK(report["experiment"] == "dip-scan");
  CHECK(report["seed"] == 77);
  CHECK(report["points"].size() == 21);
  CHECK(report["fit"]["converged"] == true);
  CHECK_FALSE(report.contains("wall_clock_s"));

  // the embedded config and seed reproduce the data
  {
    std::ofstream f(dir / "embedded.json");
    f << report["config"].dump();
  }
  const auto again = cli({"dip-scan", "--gates", "2e7", "--seed", "77", "--config",
                          (dir / "embedded.json").string(), "--out", (dir / "c").string()});
  REQUIRE(again.code == exit_ok);
  CHECK(slurp(dir / "c" / "dip_scan.csv") == csv);

  auto rep = args;
  for (const char* extra : {"--repeats", "3", "--record-timing", "--out"}) rep.push_back(extra);
  rep.push_back((dir / "r").string());
  REQUIRE(cli(rep).code == exit_ok);
  const std::string rcsv = slurp(dir / "r" / "dip_scan.csv");
  CHECK(rcsv.rfind("delay_ps,gates,singles_a,singles_b,coincidences,mean,stddev\n", 0) == 0);
  const auto rreport = nlohmann::json::parse(slurp(dir / "r" / "dip_scan.json"));
  CHECK(rreport["repeat_points"].size() == 3);
  CHECK(rreport["points"][0]["gates"] == 60'000'000);
  CHECK(rreport.contains("wall_clock_s"));

  CHECK(cli({"dip-scan", "--delay-steps", "3", "--out", (dir / "x").string()}).code == exit_validation);
  CHECK(cli({"dip-scan", "--gates", "abc", "--out", (dir / "x").string()}).code == exit_validation);
}

TEST_CASE("dip-scan reports a failed fit with its own exit code") {
  const auto dir = scratch("dipfail");
  // nothing ever clicks: every point is zero
  const auto r = cli({"dip-scan", "--gates", "1000", "--set", "pairs_per_pulse=0", "--set", "dark_prob_a=0",
                      "--set", "dark_prob_b=0", "--out", dir.string()});
  CHECK(r.code == exit_fit);
  const auto report = nlohmann::json::parse(slurp(dir / "dip_scan.json"));
  CHECK_FALSE(report["fit_error"].get<std::string>().empty());
  CHECK(fs::exists(dir / "dip_scan.csv"));
}

TEST_CASE("visibility-sweep") {
  const auto dir = scratch("sweep");
  auto r = cli({"visibility-sweep", "--out", dir.string()});
  CHECK(r.code == exit_validation);

  r = cli({"visibility-sweep", "--p", "0.01,0.1", "--gates", "5e7", "--set", "eta_signal=0.05", "--set",
           "eta_idler=0.05", "--set", "dark_prob_a=1e-5", "--set", "dark_prob_b=1e-5", "--out", dir.string()});
  REQUIRE(r.code == exit_ok);
  const std::string csv = slurp(dir / "visibility_sweep.csv");
  CHECK(csv.rfind("p,v_fit,v_err,sigma_ps,sigma_err_ps,baseline,chi_squared,dof,converged,v_budget\n", 0) == 0);
  const auto report = nlohmann::json::parse(slurp(dir / "visibility_sweep.json"));
  REQUIRE(report["rows"].size() == 2);
  const double v1 = report["rows"][0]["fit"]["visibility"];
  const double v2 = report["rows"][1]["fit"]["visibility"];
  CHECK(v1 > v2);
}

TEST_CASE("car") {
  const auto dir = scratch("car");
  auto r = cli({"car", "--gates", "1e8", "--set", "pairs_per_pulse=0", "--set", "dark_prob_a=2e-3", "--set",
                "dark_prob_b=2e-3", "--slots", "20", "--out", dir.string()});
  REQUIRE(r.code == exit_ok);
  auto report = nlohmann::json::parse(slurp(dir / "car.json"));
  CHECK(report["delay_auto_offset"] == true);
  CHECK(report["delay_ps"].get<double>() == doctest::Approx(10.0 * default_config().wavepacket.sigma_ps));
  CHECK(report["car"].get<double>() == doctest::Approx(1.0).epsilon(0.25));
  CHECK(report["unmatched_coincidences"].size() == 20);
  const std::string slots = slurp(dir / "car_slots.csv");
  CHECK(slots.rfind("offset_gates,coincidences\n0,", 0) == 0);
  CHECK(std::count(slots.begin(), slots.end(), '\n') == 22);

  r = cli({"car", "--gates", "1e8", "--set", "delay_ps=50", "--set", "dark_prob_a=2e-3", "--out", dir.string()});
  REQUIRE(r.code == exit_ok);
  report = nlohmann::json::parse(slurp(dir / "car.json"));
  CHECK(report["delay_auto_offset"] == false);
  CHECK(report["delay_ps"] == 50.0);

  r = cli({"car", "--gates", "1000", "--set", "dark_prob_a=0", "--set", "dark_prob_b=0", "--out", dir.string()});
  CHECK(r.code == exit_runtime);
  CHECK(r.err.find("insufficient statistics") != std::string::npos);
}

TEST_CASE("fit an external CSV") {
  const auto dir = scratch("fit");
  std::ostringstream csv;
  csv << "delay_ps,coincidences\n";
  const DipModelParams truth{1000.0, 0.8, 1.7, default_config().splitter, 0.0};
  for (int k = 0; k <= 20; ++k) {
    const double d = -6.0 + 0.6 * k;
    csv << format_number(d) << ',' << format_number(dip_model(d, truth)) << '\n';
  }
  write_file(dir / "counts.csv", csv.str());
  auto r = cli({"fit", (dir / "counts.csv").string(), "--out", dir.string()});
  REQUIRE(r.code == exit_ok);
  CHECK(std::stod(summary_value(r.out, "visibility")) == doctest::Approx(0.8).epsilon(1e-6));
  CHECK(std::stod(summary_value(r.out, "sigma_ps")) == doctest::Approx(1.7).epsilon(1e-6));
  CHECK(fs::exists(dir / "fit.json"));

  write_file(dir / "nocol.csv", "a,b\n1,2\n");
  CHECK(cli({"fit", (dir / "nocol.csv").string(), "--out", dir.string()}).code == exit_validation);
  CHECK(cli({"fit", (dir / "absent.csv").string()}).code == exit_validation);
}
