#include <cmath>
#include <filesystem>
#include <fstream>

#include <doctest.h>

#include "crosc/atom_model.hpp"
#include "crosc/error.hpp"
#include "crosc/softcore.hpp"
#include "crosc/units.hpp"

using namespace crosc;
using nlohmann::json;

namespace {

// Numerov shooting for -psi''/2 + V psi = E psi on [0, L] from the origin.
// Even states start with psi(0) = 1, psi'(0) = 0; odd with psi(0) = 0, psi'(0) = 1.
struct Numerov {
  double a2;
  double length = 40.0;
  int steps = 40000;

  std::vector<double> shoot(double e, bool odd) const {
    const double h = length / steps;
    auto k2 = [&](double x) { return 2.0 * (e + 1.0 / std::sqrt(x * x + a2)); };
    std::vector<double> psi(steps + 1);
    psi[0] = odd ? 0.0 : 1.0;
    // Taylor start: psi(h) from psi'' = -k2 psi at the origin.
    psi[1] = odd ? h * (1.0 - h * h * k2(0.0) / 6.0) : 1.0 - 0.5 * h * h * k2(0.0);
    for (int i = 1; i < steps; ++i) {
      const double x0 = (i - 1) * h, x1 = i * h, x2 = (i + 1) * h;
      const double f0 = 1.0 + h * h * k2(x0) / 12.0;
      const double f1 = 1.0 - 5.0 * h * h * k2(x1) / 12.0;
      const double f2 = 1.0 + h * h * k2(x2) / 12.0;
      psi[i + 1] = (2.0 * f1 * psi[i] - f0 * psi[i - 1]) / f2;
      if (std::abs(psi[i + 1]) > 1e50) {
        psi.resize(i + 2);
        break;
      }
    }
    return psi;
  }

  double eigenvalue(double lo, double hi, bool odd) const {
    auto tail = [&](double e) { return shoot(e, odd).back(); };
    double flo = tail(lo);
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      const double fm = tail(mid);
      if ((fm > 0) == (flo > 0)) {
        lo = mid;
        flo = fm;
      } else {
        hi = mid;
      }
    }
    return 0.5 * (lo + hi);
  }
};

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("crosc_test_" + name)).string();
}

}  // namespace

TEST_SUITE("atom_model") {
  TEST_CASE("unit conversions") {
    CHECK(units::intensity_to_field(3.50944758e16) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(units::field_to_intensity(units::intensity_to_field(1e14)) == doctest::Approx(1e14).epsilon(1e-14));
    CHECK(units::ev_to_au(27.211386245988) == doctest::Approx(1.0));
    CHECK(units::au_to_fs(units::fs_to_au(80.0)) == doctest::Approx(80.0));
    CHECK(units::fs_to_au(1.0) == doctest::Approx(41.341).epsilon(1e-4));
  }

  TEST_CASE("two-level fixture round-trips through JSON") {
    const AtomModel atom = two_level_model(0.0, 0.5, 1.0);
    const AtomModel back = parse_atom_model(atom_model_to_json(atom));
    REQUIRE(back.size() == 2);
    CHECK(back.level(1).energy == atom.level(1).energy);
    CHECK(back.dipole() == atom.dipole());
    CHECK(back.metadata() == atom.metadata());
    const std::string path = temp_path("two.json");
    save_atom_model(atom, path);
    CHECK(load_atom_model(path).dipole() == atom.dipole());
  }

  TEST_CASE("schema and invariant violations are rejected") {
    json doc = atom_model_to_json(ladder5_model());
    SUBCASE("missing field") {
      doc["levels"][0].erase("re");
      CHECK_THROWS_AS(parse_atom_model(doc), InvalidInput);
    }
    SUBCASE("positive imaginary energy") {
      doc["levels"][2]["im"] = 1e-6;
      CHECK_THROWS_WITH_AS(parse_atom_model(doc), doctest::Contains("negative width"), InvalidInput);
    }
    SUBCASE("conflicting dipole entries") {
      doc["dipole"].push_back({{"i", 1}, {"j", 0}, {"re", 0.2}, {"im", 0.0}});
      CHECK_THROWS_WITH_AS(parse_atom_model(doc), doctest::Contains("complex-symmetric"), InvalidInput);
    }
    SUBCASE("index out of range") {
      doc["dipole"].push_back({{"i", 9}, {"j", 0}, {"re", 0.2}, {"im", 0.0}});
      CHECK_THROWS_AS(parse_atom_model(doc), InvalidInput);
    }
    SUBCASE("duplicate label") {
      doc["levels"][1]["label"] = "ground";
      CHECK_THROWS_AS(parse_atom_model(doc), InvalidInput);
    }
    SUBCASE("malformed file") {
      const std::string path = temp_path("bad.json");
      std::ofstream(path) << "{ not json";
      CHECK_THROWS_AS(load_atom_model(path), InvalidInput);
    }
  }

  TEST_CASE("non-symmetric dipole matrix is rejected by the constructor") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 1) = 1.0;
    d(1, 0) = 1.0 + 1e-9;
    CHECK_THROWS_AS(AtomModel({{"a", 0.0, 0}, {"b", 0.5, 1}}, d), InvalidInput);
  }

  TEST_CASE("shift and dipole phase leave structure intact") {
    const AtomModel atom = ladder5_model();
    const AtomModel s = atom.shifted(0.3);
    CHECK(s.level(2).energy == atom.level(2).energy + 0.3);
    const AtomModel p = atom.with_dipole_phase(0.7);
    CHECK(std::abs(p.dipole()(2, 4) - 4.0 * std::polar(1.0, 0.7)) < 1e-15);
    CHECK(selection_rule_violations(atom).empty());
    CHECK(atom.index_of("ryd_f") == 4);
    CHECK_THROWS_AS(atom.index_of("nope"), InvalidInput);
  }

  TEST_CASE("selection-rule check flags equal-parity couplings") {
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
    d(0, 1) = d(1, 0) = 0.5;
    const AtomModel atom({{"a", 0.0, 0}, {"b", 0.5, 2}}, d);
    const auto v = selection_rule_violations(atom);
    REQUIRE(v.size() == 1);
    CHECK(v[0].magnitude == doctest::Approx(0.5));
  }

  TEST_CASE("laser field spec") {
    const LaserField f = parse_laser_field(
        json{{"omega_ev", 11.8017}, {"intensity_wcm2", 1e14}, {"envelope", {{"gaussian", {{"fwhm_fs", 80.0}}}}}});
    CHECK(f.omega == doctest::Approx(11.8017 / 27.211386245988));
    CHECK(f.e0 == doctest::Approx(std::sqrt(1e14 / 3.50944758e16)));
    CHECK(f.envelope == EnvelopeKind::kGaussian);
    CHECK(f.intensity_envelope(0.5 * f.fwhm) == doctest::Approx(0.5));
    CHECK(f.intensity_envelope(0.0) == doctest::Approx(1.0));
    CHECK(f.field_envelope(0.5 * f.fwhm) == doctest::Approx(std::sqrt(0.5)));
    CHECK(f.period() == doctest::Approx(2.0 * M_PI / f.omega));
    CHECK_THROWS_AS(parse_laser_field(json{{"omega_au", -1.0}, {"e0_au", 0.1}}), InvalidInput);
    CHECK_THROWS_AS(parse_laser_field(json{{"omega_au", 0.3}}), InvalidInput);
    const LaserField m = monochromatic(0.3, 0.05, 0.2);
    CHECK(m.field_at(1.0) == doctest::Approx(0.05 * std::cos(0.3 + 0.2)));
  }

  TEST_CASE("soft-core spectrum matches Numerov shooting (a^2 = 2)") {
    GridSpec grid;
    grid.extent = 60.0;
    grid.points = 1200;
    grid.softening = 2.0;
    grid.cap_start = 55.0;
    grid.cap_strength = 1e-3;
    const AtomModel atom = build_softcore_model(grid, 4);
    const Numerov numerov{2.0};
    const double e0 = numerov.eigenvalue(-0.7, -0.3, false);
    const double e1 = numerov.eigenvalue(-0.3, -0.15, true);
    CHECK(e0 == doctest::Approx(-0.5).epsilon(1e-4));  // known ground state of the a^2 = 2 model
    CHECK(atom.level(0).energy.real() == doctest::Approx(e0).epsilon(1e-6));
    CHECK(atom.level(1).energy.real() == doctest::Approx(e1).epsilon(1e-6));
    CHECK(atom.level(0).symmetry == 0);
    CHECK(atom.level(1).symmetry == 1);
    CHECK(atom.level(0).label == "e0");
    CHECK(atom.level(1).label == "o1");

    // <0|x|1> from the Numerov wavefunctions on the half line.
    const auto even = numerov.shoot(e0, false);
    const auto odd = numerov.shoot(e1, true);
    const double h = numerov.length / numerov.steps;
    const std::size_t cut = static_cast<std::size_t>(25.0 / h);
    double n0 = 0, n1 = 0, x01 = 0;
    for (std::size_t i = 0; i <= cut; ++i) {
      const double wgt = (i == 0 || i == cut) ? 0.5 * h : h;
      n0 += wgt * even[i] * even[i];
      n1 += wgt * odd[i] * odd[i];
      x01 += wgt * i * h * even[i] * odd[i];
    }
    // Both halves contribute equally for opposite parities.
    const double d01 = x01 / std::sqrt(n0 * n1);
    CHECK(std::abs(atom.dipole()(0, 1)) == doctest::Approx(std::abs(d01)).epsilon(1e-4));
    CHECK(std::abs(atom.dipole()(0, 2)) == 0.0);
  }

  TEST_CASE("soft-core absorber treatments") {
    GridSpec grid;
    grid.extent = 60.0;
    grid.points = 400;
    grid.cap_start = 30.0;
    const AtomModel first = build_softcore_model(grid, 20);
    const AtomModel exact = build_softcore_model(grid, 20, AbsorberTreatment::kExact);
    for (std::size_t k = 0; k < 20; ++k) {
      CHECK(first.level(k).energy.imag() <= 0.0);
      CHECK(exact.level(k).energy.imag() <= AtomModel::kWidthSignTolerance);
    }
    // Deeply bound states barely see the absorber.
    CHECK(first.level(0).width() < 1e-8);
    CHECK(std::abs(exact.level(0).energy - first.level(0).energy) < 1e-8);
    CHECK(selection_rule_violations(exact).empty());
    CHECK(exact.dipole().isApprox(exact.dipole().transpose(), 1e-14));
    CHECK(first.metadata().at("absorber") == "first-order");
    CHECK(exact.metadata().at("absorber") == "exact");
  }

  TEST_CASE("grid validation") {
    GridSpec g;
    g.cap_start = 150.0;
    CHECK_THROWS_AS(build_softcore_model(g, 10), InvalidInput);
    GridSpec ok;
    ok.points = 100;
    CHECK_THROWS_AS(build_softcore_model(ok, 101), InvalidInput);
    CHECK(absorber(ok, 0.0) == 0.0);
    CHECK(absorber(ok, ok.extent) == doctest::Approx(ok.cap_strength));
  }

  TEST_CASE("helium-like preset") {
    const AtomModel he = helium_like_model();
    CHECK(he.size() == 100);
    CHECK(he.level(0).label == "1s2");
    CHECK(he.level(2).label == "1s3d");
    CHECK(he.level(0).energy.real() == doctest::Approx(-0.9028).epsilon(1e-4));
  }
}
