#include <cmath>

#include <doctest.h>

#include "hom/model.hpp"

using namespace hom;

namespace {

bool has_violation(const ValidationResult& r, const std::string& text) {
  for (const auto& v : r.violations)
    if (v.message.find(text) != std::string::npos) return true;
  return false;
}

}  // namespace

TEST_CASE("db_to_linear reference values") {
  CHECK(db_to_linear(0.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(db_to_linear(-3.3) == doctest::Approx(0.4677).epsilon(1e-4));
  CHECK(db_to_linear(30.0) == doctest::Approx(1000.0).epsilon(1e-12));
  CHECK(db_to_linear(-3.6) == doctest::Approx(0.4365).epsilon(1e-4));
}

TEST_CASE("db_to_linear turns sums into products") {
  for (double a : {-10.0, -3.3, 0.0, 2.5})
    for (double b : {-7.0, -0.1, 4.0})
      CHECK(db_to_linear(a + b) == doctest::Approx(db_to_linear(a) * db_to_linear(b)).epsilon(1e-12));
}

TEST_CASE("linear_to_db inverts db_to_linear") {
  for (double x : {1e-6, 0.01, 0.4677, 1.0, 1000.0})
    CHECK(db_to_linear(linear_to_db(x)) == doctest::Approx(x).epsilon(1e-12));
  CHECK(std::isinf(linear_to_db(0.0)));
  CHECK_THROWS_AS(linear_to_db(-1.0), InvalidParameter);
}

TEST_CASE("fwhm_to_sigma") {
  CHECK(std::abs(fwhm_to_sigma(4.0) - 1.699) < 1e-3);
  CHECK(fwhm_to_sigma(2.0 * std::sqrt(2.0 * std::log(2.0))) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(std::abs(fwhm_to_sigma(8.0) - 3.398) < 1e-3);
  CHECK(sigma_to_fwhm(fwhm_to_sigma(4.0)) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK_THROWS_AS(fwhm_to_sigma(0.0), InvalidParameter);
}

TEST_CASE("dark probability per window") {
  CHECK(dark_prob_from_rate(544.0, 200e-9) == doctest::Approx(1.088e-4).epsilon(1e-12));
  CHECK(dark_prob_from_rate(0.0, 1e-9) == 0.0);
  CHECK_THROWS_AS(dark_prob_from_rate(-1.0, 1e-9), InvalidParameter);
}

TEST_CASE("beam splitter survival") {
  const BeamSplitter s{0.4677, 0.4365};
  CHECK(s.survival() == doctest::Approx(0.9042));
  CHECK(s.excess_loss() == doctest::Approx(0.0958));
  const BeamSplitter n = s.normalized();
  CHECK(n.survival() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(n.transmittance / n.reflectance == doctest::Approx(0.4677 / 0.4365));
}

TEST_CASE("gate divider") {
  TimingConfig t;
  CHECK(t.gate_divider() == 20);
  t.gate_rate_hz = 3e6;
  CHECK_THROWS_AS(t.gate_divider(), InvalidParameter);
}

TEST_CASE("apparatus config is valid and carries the stated values") {
  const ExperimentConfig c = apparatus_config();
  CHECK(validate(c).ok());
  CHECK(c.source.mean_pairs_per_pulse == 0.03);
  CHECK(c.source.extinction_ratio == doctest::Approx(1000.0));
  CHECK(c.splitter.transmittance == doctest::Approx(0.4677).epsilon(1e-4));
  CHECK(c.splitter.reflectance == doctest::Approx(0.4365).epsilon(1e-4));
  CHECK(c.wavepacket.sigma_ps == doctest::Approx(1.699).epsilon(1e-3));
  CHECK(c.timing.gate_divider() == 20);
  CHECK(c.detector_a.dark_prob_per_gate == doctest::Approx(544.0 / 5e6));
  CHECK(c.detector_b.dark_prob_per_gate == doctest::Approx(1596.0 / 5e6));
}

TEST_CASE("validate reports every violation with its field") {
  ExperimentConfig c = apparatus_config();
  c.splitter = {0.6, 0.6};
  auto r = validate(c);
  CHECK_FALSE(r.ok());
  CHECK(has_violation(r, "T+R>1"));

  c = apparatus_config();
  c.source.mean_pairs_per_pulse = -0.1;
  r = validate(c);
  CHECK(has_violation(r, "p<0"));

  c.source.extinction_ratio = 0.5;
  c.wavepacket.sigma_ps = 0.0;
  c.source.max_pairs = 1;
  r = validate(c);
  CHECK(r.violations.size() >= 4);
  CHECK(has_violation(r, "xi<1"));
  CHECK(has_violation(r, "sigma<=0"));
  CHECK(has_violation(r, "N_max<2"));
  CHECK_THROWS_AS(require_valid(c), ConfigError);
}

TEST_CASE("validate rejects probabilities outside [0, 1]") {
  ExperimentConfig c = apparatus_config();
  c.channel_s.transmittance = 1.5;
  c.detector_b.dark_prob_per_gate = -1e-3;
  const auto r = validate(c);
  CHECK(r.violations.size() == 2);
}
