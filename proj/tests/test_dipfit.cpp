#include "icabench/dipfit.hpp"

#include "icabench/io.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace icabench;
using namespace icabench::testing;

namespace {

Dipole random_dipole(Rng& rng, const HeadModel& head, double max_ecc) {
  Dipole d;
  for (;;) {
    d.position_mm =
        Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian()) * 30.0;
    if (d.position_mm.norm() < max_ecc * head.inner_radius()) break;
  }
  d.moment = Eigen::Vector3d(rng.gaussian(), rng.gaussian(), rng.gaussian());
  if (d.moment.norm() < 0.1) d.moment = Eigen::Vector3d(1.0, 0.0, 0.0);
  return d;
}

}  // namespace

TEST_CASE("zero moment projects to an all-zero map") {
  const HeadModel head;
  const Montage montage = make_spiral_montage(32, head);
  Dipole d;
  d.position_mm = Eigen::Vector3d(10.0, -5.0, 30.0);
  d.moment.setZero();
  const Vector map = forward_potential(d, montage, head);
  CHECK(map.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("axial symmetry: rings of electrodes see equal potentials") {
  const HeadModel head;
  Montage montage;
  const double r = head.outer_radius();
  // Two rings at fixed polar angles around the z axis.
  int id = 0;
  for (double theta : {0.4, 1.1}) {
    for (int k = 0; k < 8; ++k) {
      const double phi = 2.0 * M_PI * k / 8.0;
      Electrode e;
      e.label = "R" + std::to_string(id++);
      e.position_mm = r * Eigen::Vector3d(std::sin(theta) * std::cos(phi),
                                          std::sin(theta) * std::sin(phi), std::cos(theta));
      montage.electrodes.push_back(e);
    }
  }
  Dipole d;
  d.position_mm = Eigen::Vector3d(0.0, 0.0, 40.0);
  d.moment = Eigen::Vector3d(0.0, 0.0, 2.5);  // radial dipole on the axis
  const Vector map = forward_potential(d, montage, head);
  for (int ring = 0; ring < 2; ++ring) {
    for (int k = 1; k < 8; ++k) {
      CHECK(std::abs(map[8 * ring + k] - map[8 * ring]) < 1e-10);
    }
  }
}

TEST_CASE("forward model is linear in the moment") {
  const HeadModel head;
  const Montage montage = make_spiral_montage(24, head);
  const ForwardModel fm(head, montage);
  Rng rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    const Dipole base = random_dipole(rng, head, 0.8);
    Dipole d1 = base, d2 = base, mix = base;
    d1.moment = Eigen::Vector3d(1.0, 0.0, 0.0);
    d2.moment = Eigen::Vector3d(0.0, 1.0, -1.0);
    const double a = 2.5, b = -0.75;
    mix.moment = a * d1.moment + b * d2.moment;
    const Vector combined = fm.potential(mix);
    const Vector superposed = a * fm.potential(d1) + b * fm.potential(d2);
    CHECK((combined - superposed).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("equal conductivities collapse to the homogeneous-sphere closed form") {
  HeadModel head;
  head.conductivities = {0.33, 0.33, 0.33, 0.33};
  const Montage montage = make_spiral_montage(48, head);
  const ForwardModel fm(head, montage);
  Rng rng(99);
  for (int trial = 0; trial < 20; ++trial) {
    const Dipole d = random_dipole(rng, head, 0.9);
    const Vector series = fm.potential(d);

    Vector closed(montage.size());
    for (Eigen::Index e = 0; e < montage.size(); ++e) {
      const Eigen::Vector3d p =
          montage.electrodes[static_cast<std::size_t>(e)].position_mm;
      closed[e] = homogeneous_sphere_potential(d.position_mm, d.moment, p,
                                               head.outer_radius(), 0.33);
    }
    closed.array() -= closed.mean();
    CHECK((series - closed).norm() / closed.norm() < 1e-6);
  }
}

TEST_CASE("dipole outside the innermost shell is a domain error") {
  const HeadModel head;
  const Montage montage = make_spiral_montage(16, head);
  Dipole d;
  d.position_mm = Eigen::Vector3d(0.0, 0.0, 72.0);
  d.moment = Eigen::Vector3d(1.0, 0.0, 0.0);
  CHECK_THROWS_AS(forward_potential(d, montage, head), ValidationError);
}

TEST_CASE("series non-convergence suggests a higher max_degree") {
  const HeadModel head;
  const Montage montage = make_spiral_montage(16, head);
  Dipole d;
  d.position_mm = Eigen::Vector3d(0.0, 0.0, 70.5);  // eccentricity 0.993
  d.moment = Eigen::Vector3d(1.0, 0.0, 0.0);
  try {
    forward_potential(d, montage, head, 30);
    FAIL("expected NumericalError");
  } catch (const NumericalError& e) {
    CHECK(std::string(e.what()).find("max_degree") != std::string::npos);
  }
}

TEST_CASE("montage electrodes must sit near the scalp") {
  const HeadModel head;
  Montage montage = make_spiral_montage(16, head);
  montage.electrodes[3].position_mm *= 1.2;  // 20% off the scalp radius
  Dipole d;
  d.position_mm = Eigen::Vector3d(0.0, 0.0, 30.0);
  d.moment = Eigen::Vector3d(1.0, 0.0, 0.0);
  CHECK_THROWS_AS(forward_potential(d, montage, head), ValidationError);
  // Excluding the stray electrode lifts the constraint.
  montage.exclude.insert(montage.electrodes[3].label);
  CHECK_NOTHROW(forward_potential(d, montage, head));
}

TEST_CASE("fit recovers noiseless dipoles to sub-mm accuracy") {
  const HeadModel head;
  const Montage montage = make_spiral_montage(48, head);
  const ForwardModel fm(head, montage);
  Rng rng(31337);
  for (int trial = 0; trial < 5; ++trial) {
    const Dipole truth = random_dipole(rng, head, 0.85);
    const Vector map = fm.potential(truth);
    const DipoleFit fit = fit_dipole(map, montage, head);
    CHECK((fit.dipole.position_mm - truth.position_mm).norm() < 1.0);
    CHECK(fit.rv < 1e-6);
    CHECK_FALSE(fit.boundary);
  }
}

TEST_CASE("rv and position are invariant to map scaling") {
  const HeadModel head;
  const Montage montage = make_spiral_montage(48, head);
  const ForwardModel fm(head, montage);
  Rng rng(4242);
  Dipole truth = random_dipole(rng, head, 0.7);
  Vector map = fm.potential(truth);
  map += 0.05 * map.norm() / std::sqrt(static_cast<double>(map.size())) *
         iid_gaussian(map.size(), 5);  // make rv nontrivial

  const DipoleFit base = fit_dipole(map, montage, head);

  // Powers of two scale every intermediate exactly: bit-identical results.
  for (double c : {2.0, -0.5}) {
    const DipoleFit scaled = fit_dipole(c * map, montage, head);
    CHECK(scaled.rv == base.rv);
    CHECK(scaled.dipole.position_mm == base.dipole.position_mm);
    CHECK((scaled.dipole.moment - c * base.dipole.moment).norm() == 0.0);
  }
  // Arbitrary scales agree to rounding.
  const DipoleFit scaled3 = fit_dipole(3.0 * map, montage, head);
  CHECK(std::abs(scaled3.rv - base.rv) < 1e-9);
  CHECK((scaled3.dipole.position_mm - base.dipole.position_mm).norm() < 1e-3);
}

TEST_CASE("noisy maps keep rv and position inside the statistical envelope") {
  const HeadModel head;
  const Montage montage = make_spiral_montage(48, head);
  const ForwardModel fm(head, montage);
  Rng rng(808);
  int trials = 0;
  for (; trials < 100; ++trials) {
    // Sources under the electrode cap; maps of dipoles far below the cap
    // edge are weakly constrained by any EEG-style montage.
    Dipole truth = random_dipole(rng, head, 0.75);
    while (truth.position_mm.z() < 0.0) {
      truth = random_dipole(rng, head, 0.75);
    }
    Vector map = fm.potential(truth);
    Vector noise = iid_gaussian(map.size(), 9000 + static_cast<std::uint64_t>(trials));
    noise *= 0.1 * map.norm() / noise.norm();
    map += noise;
    const DipoleFit fit = fit_dipole(map, montage, head);
    CHECK(fit.rv >= 0.005);
    CHECK(fit.rv <= 0.05);
    CHECK((fit.dipole.position_mm - truth.position_mm).norm() < 8.0);
  }
}

TEST_CASE("all-zero maps have undefined rv") {
  const HeadModel head;
  const Montage montage = make_spiral_montage(24, head);
  const Vector map = Vector::Zero(montage.size());
  CHECK_THROWS_AS(fit_dipole(map, montage, head), NumericalError);
}

TEST_CASE("dipolarity: exact dipole projections are 100% near-dipolar") {
  const HeadModel head;
  const int n = 8;
  const Montage montage = make_spiral_montage(n, head);
  const ForwardModel fm(head, montage);
  Rng rng(21);

  Decomposition dec;
  dec.algorithm_id = "synthetic";
  Matrix a(n, 4);
  for (int c = 0; c < 4; ++c) {
    a.col(c) = fm.potential(random_dipole(rng, head, 0.6));
  }
  dec.a = a;
  dec.w = Matrix::Zero(4, n);  // unused by dipolarity

  const DipolarityReport report = dipolarity(dec, montage, head);
  CHECK(report.nd_at(0.05) == 100.0);
  CHECK(report.failed_components.empty());

  // nd_percent is non-decreasing in the threshold.
  for (std::size_t k = 1; k < report.nd_percent.size(); ++k) {
    CHECK(report.nd_percent[k] >= report.nd_percent[k - 1]);
  }
}

TEST_CASE("dipolarity: random maps are rarely near-dipolar") {
  const HeadModel head;
  const int n = 24;
  const Montage montage = make_spiral_montage(n, head);
  Decomposition dec;
  dec.algorithm_id = "noise";
  Rng rng(5150);
  dec.a = rng.gaussian_matrix(n, 10);
  dec.w = Matrix::Zero(10, n);
  const DipolarityReport report = dipolarity(dec, montage, head);
  CHECK(report.nd_at(0.05) < 10.0);
}

TEST_CASE("dipolarity accepts maps over the non-excluded montage subset") {
  const HeadModel head;
  Montage montage = make_spiral_montage(10, head);
  montage.exclude.insert(montage.electrodes[0].label);
  montage.exclude.insert(montage.electrodes[1].label);
  const auto active = montage.active_indices();
  REQUIRE(active.size() == 8);

  Montage reduced;
  for (auto i : active) {
    reduced.electrodes.push_back(montage.electrodes[static_cast<std::size_t>(i)]);
  }
  const ForwardModel fm(head, reduced);
  Rng rng(3);
  Decomposition dec;
  dec.algorithm_id = "synthetic";
  Matrix a(8, 2);
  for (int c = 0; c < 2; ++c) {
    a.col(c) = fm.potential(random_dipole(rng, head, 0.5));
  }
  dec.a = a;
  dec.w = Matrix::Zero(2, 8);

  const DipolarityReport report = dipolarity(dec, montage, head);
  CHECK(report.nd_at(0.05) == 100.0);

  // A montage that matches neither way is rejected.
  Montage wrong = make_spiral_montage(12, head);
  CHECK_THROWS_AS(dipolarity(dec, wrong, head), ValidationError);
}

TEST_CASE("head model and montage files round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "icabench_dipfit_tests";
  fs::create_directories(dir);

  HeadModel head;
  head.radii_mm = {70.0, 73.0, 80.0, 88.0};
  head.conductivities = {0.3, 0.004, 1.1, 0.3};
  save_headmodel_json(head, dir / "head.json");
  const HeadModel back = load_headmodel_json(dir / "head.json");
  CHECK(back.radii_mm == head.radii_mm);
  CHECK(back.conductivities == head.conductivities);

  const Montage montage = make_spiral_montage(16, head);
  save_montage_csv(montage, dir / "montage.csv");
  const Montage mback = load_montage_csv(dir / "montage.csv");
  REQUIRE(mback.size() == montage.size());
  for (Eigen::Index i = 0; i < montage.size(); ++i) {
    CHECK(mback.electrodes[static_cast<std::size_t>(i)].label ==
          montage.electrodes[static_cast<std::size_t>(i)].label);
    CHECK((mback.electrodes[static_cast<std::size_t>(i)].position_mm -
           montage.electrodes[static_cast<std::size_t>(i)].position_mm)
              .norm() == 0.0);
  }

  HeadModel bad;
  bad.radii_mm = {71.0, 70.0, 79.0, 85.0};
  CHECK_THROWS_AS(bad.validate(), ValidationError);
}
