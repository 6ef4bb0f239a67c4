#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "movsrc/metrics.hpp"
#include "movsrc/scenarios.hpp"
#include "oracles.hpp"

using namespace movsrc;

namespace {

SourceModel shifted(const SourceModel& model, double dx, double dy, double dq) {
  SourceModel out;
  for (const Source& s : model.sources) {
    const auto grid = s.grid();
    std::vector<double> xs, ys, qs;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      xs.push_back(s.x.values()[j] + dx);
      ys.push_back(s.y.values()[j] + dy);
      qs.push_back(s.intensity.values()[j] + dq);
    }
    const std::vector<double> g(grid.begin(), grid.end());
    out.sources.emplace_back(SampledFunction(g, xs, Extrapolation::Clamp), SampledFunction(g, ys, Extrapolation::Clamp),
                             SampledFunction(g, qs, Extrapolation::Zero));
  }
  return out;
}

double min_pair_distance(const SensorArray& a) {
  double best = 1e300;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = i + 1; j < a.size(); ++j) best = std::min(best, (a.positions[i] - a.positions[j]).norm());
  }
  return best;
}

}  // namespace

TEST_CASE("hemisphere sensors") {
  const SensorArray s = sphere_sensors(424, 3.0, SensorRegion::Hemisphere);
  CHECK(s.size() == 424);
  CHECK(s.radius == 3.0);
  CHECK(s.region == SensorRegion::Hemisphere);
  std::size_t upper_cap = 0;
  for (const Point3& p : s.positions) {
    CHECK(std::abs(p.norm() - 3.0) <= 1e-12 * 3.0);
    CHECK(p.z() > 0.0);
    if (p.z() > 1.5) ++upper_cap;
  }
  // The cap z > R/2 holds half of the hemisphere's area.
  CHECK(std::abs(static_cast<double>(upper_cap) - 212.0) <= 10.0);
  // Equal-area spacing is about sqrt(area / n); no two sensors crowd together.
  CHECK(min_pair_distance(s) >= 0.4 * std::sqrt(18.0 * oracle::pi / 424.0));
}

TEST_CASE("quarter-sphere sensors") {
  const SensorArray s = sphere_sensors(213, 3.0, SensorRegion::QuarterSphere);
  CHECK(s.size() == 213);
  for (const Point3& p : s.positions) {
    CHECK(std::abs(p.norm() - 3.0) <= 1e-12 * 3.0);
    CHECK(p.z() > 0.0);
    CHECK(p.y() > 0.0);
  }
  CHECK(min_pair_distance(s) >= 0.4 * std::sqrt(9.0 * oracle::pi / 213.0));
}

TEST_CASE("a single sensor sits at the region centre") {
  const SensorArray hemi = sphere_sensors(1, 3.0, SensorRegion::Hemisphere);
  CHECK((hemi.positions[0] - Point3(0.0, 0.0, 3.0)).norm() <= 1e-12);
  const SensorArray quarter = sphere_sensors(1, 2.0, SensorRegion::QuarterSphere);
  CHECK((quarter.positions[0] - Point3(0.0, std::sqrt(2.0), std::sqrt(2.0))).norm() <= 1e-12);
}

TEST_CASE("sensor layouts are deterministic and scale with the radius") {
  const SensorArray a = sphere_sensors(100, 1.0, SensorRegion::Hemisphere);
  const SensorArray b = sphere_sensors(100, 1.0, SensorRegion::Hemisphere);
  const SensorArray c = sphere_sensors(100, 2.5, SensorRegion::Hemisphere);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.positions[i] == b.positions[i]);
    CHECK((c.positions[i] - 2.5 * a.positions[i]).norm() <= 1e-14);
  }
  CHECK_THROWS_AS(sphere_sensors(0, 3.0, SensorRegion::Hemisphere), std::invalid_argument);
  CHECK_THROWS_AS(sphere_sensors(5, -1.0, SensorRegion::Hemisphere), std::invalid_argument);
  CHECK_THROWS_AS(sphere_sensors(5, 3.0, SensorRegion::Custom), std::invalid_argument);
}

TEST_CASE("case 1 configuration") {
  const Scenario sc = build_case(1);
  CHECK(sc.name == "case1");
  CHECK(sc.cfg.c == 1.0);
  CHECK(sc.cfg.T == 20.0);
  CHECK(sc.cfg.T0 == 15.0);
  CHECK(sc.sensors.size() == 424);
  CHECK(sc.hyper.kappa_p == 1.0);
  CHECK(sc.hyper.ell_p == 15.0);
  CHECK(sc.hyper.beta == 100.0);
  CHECK(sc.hyper.delta == 0.0025);
  CHECK(sc.times.size() == kDefaultTimeCount);
  CHECK(sc.times.back() == 20.0);
  CHECK(max_speed(sc.truth, sc.cfg).max_speed == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(sc.truth.sources[0].intensity(7.0) == 1.0);
  CaseOverrides o;
  o.velocity = std::array<double, 2>{0.0, 0.15};
  o.ell = 2.0;
  const Scenario turned = build_case("case1", o);
  CHECK(turned.truth.sources[0].position(10.0).y() == doctest::Approx(1.5));
  CHECK(turned.hyper.ell_q == 2.0);
}

TEST_CASE("case 2 configuration") {
  const Scenario sc = build_case(2);
  const Source& s = sc.truth.sources[0];
  CHECK(s.position(0.0).norm() <= 1e-15);
  CHECK(s.intensity(0.0) == 0.0);
  CHECK(s.intensity(15.0) == doctest::Approx(0.01).epsilon(1e-9));
  CHECK(s.x(5.0) == doctest::Approx(std::cos(1.5) - 1.0).epsilon(1e-14));
  CHECK(sc.hyper.ell_p == 5.0);
  CHECK(sc.hyper.ell_q == 5.0);
}

TEST_CASE("case 3 configuration") {
  const Scenario sc = build_case(3);
  CHECK(sc.cfg.T == 40.0);
  CHECK(sc.cfg.T0 == 35.0);
  CHECK(sc.hyper.kappa_p == 1.2);
  CHECK(sc.hyper.ell_p == 4.0);
  const Source& s = sc.truth.sources[0];
  CHECK((s.position(35.0) - s.position(0.0)).norm() <= 1e-9);
  // Initial heading is +y.
  CHECK(s.velocity(0.0).y() > 0.0);
  CHECK(std::abs(s.velocity(0.0).x()) < 0.05 * s.velocity(0.0).y());
  CHECK_FALSE(sc.closed_curve);

  CaseOverrides o;
  o.region = SensorRegion::QuarterSphere;
  o.closed_curve = true;
  const Scenario half = build_case(3, o);
  CHECK(half.sensors.size() == 213);
  CHECK(half.closed_curve);
  const LatentPriors priors = build_latent_priors(half);
  const auto& px = priors.functions[0];
  CHECK(std::abs(px.gram()(0, 0) - 2.0 * px.gram()(0, 99) + px.gram()(99, 99)) <= 1e-10);
}

TEST_CASE("case 4 configuration") {
  const Scenario sc = build_case(4);
  REQUIRE(sc.truth.sources.size() == 2);
  const Point3 end = sc.truth.sources[0].position(15.0);
  CHECK(end.x() == doctest::Approx(-3.0).epsilon(1e-12));
  CHECK(std::abs(end.y()) <= 1e-12);
  CHECK(sc.truth.sources[1].position(0.0).x() == doctest::Approx(1.5));
  CHECK(sc.truth.sources[1].intensity(3.0) == 1.0);
  CHECK(sc.cfg.T == 20.0);
  CHECK(sc.cfg.T0 == 15.0);
  CHECK(build_latent_priors(sc).functions.size() == 6);
}

TEST_CASE("every case is subsonic with sensors above the source plane") {
  for (int id = 1; id <= 4; ++id) {
    CAPTURE(id);
    const Scenario sc = build_case(id);
    CHECK(max_speed(sc.truth, sc.cfg).subsonic);
    for (const Point3& p : sc.sensors.positions) CHECK(p.z() > 0.0);
    CHECK(sc.truth.sources[0].grid().size() == 4 * (sc.latent_size - 1) + 1);
  }
}

TEST_CASE("invalid cases and overrides") {
  CHECK_THROWS_AS(build_case(5), std::invalid_argument);
  CHECK_THROWS_AS(build_case("case9"), std::invalid_argument);
  CHECK_THROWS_AS(build_case("line"), std::invalid_argument);
  CaseOverrides slow;
  slow.c = 0.1;  // case 2 moves at 0.3, now supersonic
  CHECK_THROWS_AS(build_case(2, slow), std::invalid_argument);
  CaseOverrides times;
  times.T0 = 25.0;
  CHECK_THROWS_AS(build_case(1, times), std::invalid_argument);
}

TEST_CASE("error metrics on exact and offset estimates") {
  const Scenario sc = build_case(4);
  const auto grid = sc.latent_grid();
  CHECK(trajectory_error(sc.truth, sc.truth, grid) == 0.0);
  CHECK(intensity_error(sc.truth, sc.truth, grid) == 0.0);
  CHECK(trajectory_error(shifted(sc.truth, 0.3, 0.0, 0.0), sc.truth, grid) == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(trajectory_error(shifted(sc.truth, 0.3, -0.4, 0.0), sc.truth, grid) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(intensity_error(shifted(sc.truth, 0.0, 0.0, -0.2), sc.truth, grid) == doctest::Approx(0.2).epsilon(1e-12));
  // Rigid translation of both leaves the trajectory error unchanged.
  const SourceModel est = shifted(sc.truth, 0.1, 0.2, 0.05);
  CHECK(trajectory_error(shifted(est, 1.0, -2.0, 0.0), shifted(sc.truth, 1.0, -2.0, 0.0), grid) ==
        doctest::Approx(trajectory_error(est, sc.truth, grid)).epsilon(1e-12));
}

TEST_CASE("metrics reject grids the models do not cover") {
  const Scenario sc = build_case(1);
  const auto longer = uniform_grid(0.0, 20.0, 50);
  CHECK_THROWS_AS(trajectory_error(sc.truth, sc.truth, longer), std::invalid_argument);
  CHECK_THROWS_AS(intensity_error(sc.truth, sc.truth, std::vector<double>{}), std::invalid_argument);
  CHECK_THROWS_AS(trajectory_error(build_case(4).truth, sc.truth, sc.latent_grid()), std::invalid_argument);
}

TEST_CASE("wavefield error of the truth and of a silent estimate") {
  CaseOverrides o;
  o.n_sensors = 50;
  const Scenario sc = build_case(2, o);
  const MeasurementSet data = simulate_measurements(sc);
  CHECK(wavefield_error(sc.truth, data, sc.cfg) == 0.0);
  const SourceModel silent = shifted(sc.truth, 0.0, 0.0, 0.0);
  SourceModel zero;
  for (const Source& s : silent.sources) {
    const std::vector<double> g(s.grid().begin(), s.grid().end());
    zero.sources.emplace_back(s.x, s.y, SampledFunction(g, std::vector<double>(g.size(), 0.0), Extrapolation::Zero));
  }
  const double rms = std::sqrt(data.field.squaredNorm() / static_cast<double>(data.field.size()));
  CHECK(wavefield_error(zero, data, sc.cfg) == doctest::Approx(rms).epsilon(1e-14));
}
