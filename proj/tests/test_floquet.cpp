#include <algorithm>
#include <cmath>
#include <sstream>

#include <doctest.h>

#include "crosc/error.hpp"
#include "crosc/floquet.hpp"
#include "crosc/tdse.hpp"
#include "crosc/units.hpp"
#include "oracles.hpp"

using namespace crosc;

TEST_SUITE("floquet") {
  TEST_CASE("assembly matches the definition and the flat index map") {
    const AtomModel atom = ladder5_model();
    const LaserField f = monochromatic(0.37, 0.05);
    const FloquetMatrix fm(atom, f, {-6, 4});
    CHECK(fm.dimension() == 55);
    const Eigen::MatrixXcd ref = oracle::floquet_matrix(atom, 0.37, 0.05, -6, 4);
    CHECK((fm.matrix() - ref).cwiseAbs().maxCoeff() == 0.0);
    CHECK(fm.flat({2, -2}) == 4 * 5 + 2);
    CHECK(fm.index_at(22) == FloquetIndex{2, -2});
    CHECK_FALSE(fm.contains({0, 5}));
    CHECK_THROWS_AS(fm.flat({0, 5}), InvalidInput);
    const Eigen::MatrixXcd v = fm.coupling();
    CHECK(v.diagonal().cwiseAbs().maxCoeff() == 0.0);
    CHECK((fm.matrix() - v).isDiagonal());
    const FloquetMatrix same = assemble_floquet(atom, f, -6, 4);
    CHECK(same.matrix() == fm.matrix());
  }

  TEST_CASE("window and field validation") {
    const AtomModel atom = ladder5_model();
    CHECK_THROWS_AS(FloquetMatrix(atom, monochromatic(0.3, 0.01), {2, 1}), InvalidInput);
    CHECK_THROWS_AS(FloquetMatrix(atom, monochromatic(0.3, 0.01), {-100, 100}, 500), InvalidInput);
    LaserField g = monochromatic(0.3, 0.01);
    g.envelope = EnvelopeKind::kGaussian;
    g.fwhm = 100.0;
    CHECK_THROWS_AS(FloquetMatrix(atom, g, {-2, 2}), InvalidInput);
    const PhotonWindow w = default_window(2);
    CHECK(w.k_min == -6);
    CHECK(w.k_max == 4);
  }

  TEST_CASE("zero field gives E_n + k omega") {
    const AtomModel atom = ladder5_model();
    const FloquetMatrix fm(atom, monochromatic(0.37, 0.0), {-3, 3});
    const FloquetEigensystem es = diagonalize_floquet(fm);
    std::vector<double> expect;
    for (int k = -3; k <= 3; ++k)
      for (const auto& lv : atom.levels()) expect.push_back(lv.energy.real() + k * 0.37);
    std::sort(expect.begin(), expect.end());
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(es.quasienergies(static_cast<Eigen::Index>(i)).real() == doctest::Approx(expect[i]).epsilon(1e-13));
    }
  }

  TEST_CASE("lossless model: real quasienergies and bi-orthonormal eigenvectors") {
    const AtomModel atom = two_level_model(0.0, 0.5, 1.0);
    const FloquetMatrix fm(atom, monochromatic(0.45, 0.02), {-12, 12});
    const FloquetEigensystem es = diagonalize_floquet(fm);
    CHECK(es.quasienergies.imag().cwiseAbs().maxCoeff() < 1e-12);
    CHECK(biorthonormality_defect(es) < 1e-10);
    CHECK(relative_residual(fm, es) < 1e-12);
    for (Eigen::Index j = 1; j < es.quasienergies.size(); ++j) {
      CHECK(es.quasienergies(j).real() >= es.quasienergies(j - 1).real());
    }
  }

  TEST_CASE("central quasienergies repeat with period omega") {
    const AtomModel atom = ladder5_model();
    const double omega = 0.37;
    const FloquetMatrix fm(atom, monochromatic(omega, units::intensity_to_field(1e13)), {-14, 14});
    const FloquetEigensystem es = diagonalize_floquet(fm);
    const Eigen::VectorXcd& q = es.quasienergies;
    // Quasienergies of ground-dominated states near k = 0 and k = 1.
    auto closest = [&](cd target) {
      Eigen::Index best = 0;
      (q.array() - target).abs().minCoeff(&best);
      return q(best);
    };
    const cd g0 = closest(atom.level(0).energy);
    const cd g1 = closest(atom.level(0).energy + omega);
    CHECK(std::abs(g1 - g0 - omega) < 1e-9);
  }

  TEST_CASE("Floquet propagator reproduces the TDSE amplitude") {
    const AtomModel atom = ladder5_model();
    const double omega = 0.379;
    const LaserField f = monochromatic(omega, units::intensity_to_field(3e13));
    const FloquetMatrix fm(atom, f, {-16, 14});
    const FloquetEigensystem es = diagonalize_floquet(fm);
    PropagatorConfig cfg;
    cfg.t_max = 20.0 * f.period();
    cfg.steps_per_cycle_min = 2000;
    const TdseResult r = propagate(atom, f, cfg, 0, 2);
    const std::size_t stride = r.series.size() / 37;
    std::vector<double> times;
    for (std::size_t i = 0; i < r.series.size(); i += stride) times.push_back(r.series.times[i]);
    const auto amps = floquet_transition_series(es, {0, 0}, 2, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      CHECK(std::norm(amps[k]) == doctest::Approx(r.series.pop_excited[k * stride]).epsilon(1e-6).scale(1e-6));
      CHECK(std::abs(floquet_transition_amplitude(es, {0, 0}, 2, times[k]) - amps[k]) < 1e-13);
    }
    // Single photon component at t = 0 is the overlap <b,k|a,0> = 0.
    CHECK(std::abs(floquet_component(es, {0, 0}, {2, -2}, 0.0)) < 1e-12);
    CHECK(std::abs(floquet_component(es, {0, 0}, {0, 0}, 0.0) - 1.0) < 1e-12);
  }

  TEST_CASE("triplet dump lists every nonzero entry") {
    const AtomModel atom = two_level_model();
    const FloquetMatrix fm(atom, monochromatic(0.5, 0.1), {-1, 1});
    std::ostringstream os;
    write_triplets(fm, os);
    std::istringstream in(os.str());
    int rows = 0;
    long r = 0, c = 0;
    double re = 0, im = 0;
    while (in >> r >> c >> re >> im) {
      CHECK(fm.matrix()(r, c) == cd(re, im));
      ++rows;
    }
    CHECK(rows == (fm.matrix().array() != cd(0.0)).count());
  }
}
