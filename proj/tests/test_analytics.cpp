#include <cmath>
#include <limits>

#include <doctest.h>

#include "hom/analytics.hpp"
#include "hom/config_io.hpp"

using namespace hom;

namespace {

const BeamSplitter kApparatusSplitter{db_to_linear(-3.3), db_to_linear(-3.6)};

// Hand evaluation of the noise budget, kept separate from the library code.
double budget_v(double p, double eta, double d, double xi) {
  const double leak = std::isinf(xi) ? 0.0 : eta / xi;
  return 1.0 - (2 * p * eta + 4 * d + leak) / (eta + 3 * p * eta + 4 * d + leak);
}

}  // namespace

TEST_CASE("indistinguishability") {
  CHECK(indistinguishability(0.0, 1.7) == 1.0);
  CHECK(indistinguishability(1.7, 1.7) == doctest::Approx(std::exp(-0.5)).epsilon(1e-14));
  CHECK(indistinguishability(1.7, 1.7) == doctest::Approx(0.6065).epsilon(1e-4));
  CHECK(indistinguishability(20.0, 1.7) < 1e-30);
  CHECK(indistinguishability(-1.0, 1.7) == indistinguishability(1.0, 1.7));
  CHECK(overlap_amplitude(1.3, 1.7) * overlap_amplitude(1.3, 1.7) ==
        doctest::Approx(indistinguishability(1.3, 1.7)).epsilon(1e-14));
  CHECK_THROWS_AS(indistinguishability(0.0, 0.0), InvalidParameter);
}

TEST_CASE("dip model reference points") {
  DipModelParams m{1000.0, 0.8, 1.7, {0.5, 0.5}, 0.0};
  CHECK(dip_model(0.0, m) == doctest::Approx(200.0).epsilon(1e-12));
  CHECK(dip_model(1e3, m) == doctest::Approx(1000.0).epsilon(1e-14));

  m = {1000.0, 1.0, 1.7, kApparatusSplitter, 0.0};
  const double t = kApparatusSplitter.transmittance;
  const double r = kApparatusSplitter.reflectance;
  const double expected = 1000.0 * (1.0 - 2 * r * t / (r * r + t * t));
  CHECK(dip_model(0.0, m) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(dip_model(0.0, m) == doctest::Approx(2.381).epsilon(1e-3));
  CHECK(splitter_contrast(kApparatusSplitter) == doctest::Approx(0.99762).epsilon(1e-5));
  CHECK(splitter_contrast({0.5, 0.5}) == 1.0);
}

TEST_CASE("dip model gradient matches central differences") {
  const DipModelParams base{950.0, 0.77, 1.62, kApparatusSplitter, 0.3};
  for (double x : {-5.0, -1.1, 0.0, 0.4, 2.5}) {
    const auto g = dip_model_gradient(x, base);
    const double h = 1e-6;
    auto diff = [&](auto set) {
      DipModelParams up = base, dn = base;
      set(up, h);
      set(dn, -h);
      return (dip_model(x, up) - dip_model(x, dn)) / (2 * h);
    };
    CHECK(g[0] == doctest::Approx(diff([](DipModelParams& p, double e) { p.baseline += e; })).epsilon(1e-6));
    CHECK(g[1] == doctest::Approx(diff([](DipModelParams& p, double e) { p.visibility += e; })).epsilon(1e-6));
    CHECK(g[2] == doctest::Approx(diff([](DipModelParams& p, double e) { p.sigma_ps += e; })).epsilon(1e-6));
    CHECK(g[3] == doctest::Approx(diff([](DipModelParams& p, double e) { p.center_ps += e; })).epsilon(1e-6));
  }
}

TEST_CASE("visibility budget reference values") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(visibility_prediction({0.0, 0.01, 0.0, inf}) == 1.0);
  CHECK(visibility_prediction({0.03, 0.01, 1e-4, 1000.0}) == doctest::Approx(0.9107).epsilon(1e-4));
  CHECK(visibility_prediction({0.03, 0.01, 1e-4, 1000.0}) ==
        doctest::Approx(budget_v(0.03, 0.01, 1e-4, 1000.0)).epsilon(1e-14));
  // no demultiplexing: every photon also leaks
  CHECK(visibility_prediction({0.03, 0.01, 1e-4, 1.0}) <
        visibility_prediction({0.03, 0.01, 1e-4, 1000.0}) - 0.3);
}

TEST_CASE("visibility budget monotonicity") {
  for (double eta : {0.001, 0.01, 0.1}) {
    double prev = 2.0;
    for (double p : {0.0, 0.01, 0.02, 0.05, 0.1, 0.3}) {
      const double v = visibility_prediction({p, eta, 1e-4, 1000.0});
      CHECK(v < prev);
      prev = v;
    }
  }
  for (double p : {0.01, 0.05}) {
    double prev = -1.0;
    for (double eta : {1e-4, 1e-3, 1e-2, 0.1, 1.0}) {
      const double v = visibility_prediction({p, eta, 1e-4, 1000.0});
      CHECK(v > prev);
      prev = v;
    }
  }
}

TEST_CASE("budget reduction of a two-arm config") {
  ExperimentConfig c = apparatus_config();
  c.channel_s.transmittance = 0.02;
  c.channel_i.transmittance = 0.04;
  const auto b = budget_from_config(c);
  CHECK(b.eta == doctest::Approx(0.03 * c.splitter.survival()));
  CHECK(b.dark_dt == doctest::Approx((544.0 + 1596.0) / 2.0 / 5e6));
  CHECK(b.p == 0.03);
  CHECK(b.xi == doctest::Approx(1000.0));
}

TEST_CASE("calibration is self-consistent and monotone") {
  const double d = (544.0 + 1596.0) / 2.0 / 5e6;
  const double eta80 = calibrate_eta(0.80, 0.03, d, 1000.0);
  CHECK(eta80 > 0.0);
  CHECK(eta80 < 1.0);
  CHECK(std::abs(budget_v(0.03, eta80, d, 1000.0) - 0.80) < 1e-9);
  const double eta85 = calibrate_eta(0.85, 0.03, d, 1000.0);
  CHECK(eta85 > eta80);

  // p -> 0 ceiling is 1 - 1/(1 + xi) for the leakage term alone
  CHECK_THROWS_AS(calibrate_eta(0.999, 0.03, d, 1000.0), InfeasibleTarget);
  try {
    calibrate_eta(0.99, 0.03, d, 1000.0);
    FAIL("expected InfeasibleTarget");
  } catch (const InfeasibleTarget& e) {
    CHECK(e.v_max() < 0.99);
    CHECK(e.v_max() == doctest::Approx(budget_v(0.03, 1.0, d, 1000.0)).epsilon(1e-9));
  }

  const ExperimentConfig c = calibrate_config(apparatus_config(), 0.80);
  CHECK(visibility_prediction(budget_from_config(c)) == doctest::Approx(0.80).epsilon(1e-9));
  CHECK(c.channel_s.transmittance == c.channel_i.transmittance);
  CHECK(default_config().channel_s.transmittance == c.channel_s.transmittance);
}

TEST_CASE("CAR prediction, direct routing") {
  const auto dark_only = car_prediction(0.0, 0.1, 0.1, 1e-3, 2e-3);
  REQUIRE(dark_only.car());
  CHECK(*dark_only.car() == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dark_only.true_coincidence() == doctest::Approx(0.0).scale(1e-12));

  const auto ref = car_prediction(0.03, 0.01, 0.01, 1e-4, 1e-4);
  REQUIRE(ref.car());
  CHECK(*ref.car() == doctest::Approx(19.742).epsilon(1e-4));

  const auto ideal = car_prediction(0.0, 0.1, 0.1, 0.0, 0.0);
  CHECK(ideal.no_accidentals());
  CHECK_FALSE(ideal.car());

  // accidentals grow as p^2 while true coincidences grow as p
  CHECK(*car_prediction(0.01, 0.01, 0.01, 1e-5, 1e-5).car() >
        *car_prediction(0.05, 0.01, 0.01, 1e-5, 1e-5).car());
}

TEST_CASE("CAR prediction behind the splitter") {
  ExperimentConfig c = apparatus_config();
  c.splitter = {0.5, 0.5};
  c.source.extinction_ratio = std::numeric_limits<double>::infinity();
  c.detector_a.dark_prob_per_gate = 0.0;
  c.detector_b.dark_prob_per_gate = 0.0;
  // one pair of distinguishable photons on a 50:50 coupler: P(AB) = eta^2 / 2 per pair
  const auto pred = car_prediction_hom(1e-6, c);
  const double eta = c.channel_s.transmittance;
  CHECK(pred.matched / 1e-6 == doctest::Approx(eta * eta / 2).epsilon(1e-4));
  CHECK(pred.singles_a / 1e-6 == doctest::Approx(eta - eta * eta / 4).epsilon(1e-4));

  const ExperimentConfig cal = calibrate_config(apparatus_config(), 0.80);
  const auto hom_pred = car_prediction_hom(0.03, cal);
  REQUIRE(hom_pred.car());
  CHECK(*hom_pred.car() > 1.0);
}

TEST_CASE("visibility from counts") {
  CHECK(visibility_from_counts(500.0, 500.0, kApparatusSplitter) == 0.0);
  CHECK(visibility_from_counts(0.0, 500.0, {0.5, 0.5}) == 1.0);
  for (double v : {0.1, 0.5, 0.8, 1.0}) {
    const DipModelParams m{1234.0, v, 1.7, kApparatusSplitter, 0.0};
    const double back = visibility_from_counts(dip_model(0.0, m), dip_model(1e6, m), kApparatusSplitter);
    CHECK(std::abs(back - v) < 1e-12);
  }
}
