#include <algorithm>
#include <cmath>
#include <sstream>

#include <doctest.h>

#include "crosc/error.hpp"
#include "crosc/scan.hpp"

using namespace crosc;

namespace {

PartitionPolicy ladder_policy() {
  PartitionPolicy p;
  p.ground_level = 0;
  p.excited_level = 2;
  p.order = 2;
  return p;
}

ParamGrid ladder_grid(int nw = 10, int ni = 10) {
  return {linspace(0.372, 0.386, nw), linspace(2e13, 1.2e14, ni)};
}

const HeffGrid& shared_grid() {
  static const HeffGrid g = scan_heff(ladder5_model(), ladder_grid(), ladder_policy(), 2);
  return g;
}

}  // namespace

TEST_SUITE("scan") {
  TEST_CASE("grid validation and linspace") {
    CHECK(linspace(1.0, 2.0, 5)[3] == doctest::Approx(1.75));
    CHECK(linspace(1.0, 2.0, 5).back() == 2.0);
    CHECK_THROWS_AS(linspace(0.0, 1.0, 0), InvalidInput);
    ParamGrid g{{0.3, 0.2}, {1e13}};
    CHECK_THROWS_AS(g.validate(), InvalidInput);
    ParamGrid cubic{{0.1, 0.2, 0.3}, {1e13}};
    cubic.validate();
    CHECK_THROWS_AS(cubic.validate(true), InvalidInput);
    ParamGrid negative{{0.1}, {-1.0}};
    CHECK_THROWS_AS(negative.validate(), InvalidInput);
  }

  TEST_CASE("worker count does not change the result") {
    const ParamGrid grid = ladder_grid(6, 5);
    const HeffGrid one = scan_heff(ladder5_model(), grid, ladder_policy(), 1);
    const HeffGrid four = scan_heff(ladder5_model(), grid, ladder_policy(), 4);
    CHECK(heff_grid_to_json(one).dump() == heff_grid_to_json(four).dump());
    std::ostringstream a, b;
    write_regime_csv(a, regime_map(one));
    write_regime_csv(b, regime_map(four));
    CHECK(a.str() == b.str());
    CHECK_THROWS_AS(scan_heff(ladder5_model(), grid, ladder_policy(), 0), InvalidInput);
  }

  TEST_CASE("nodes equal single-point evaluations") {
    const HeffGrid& g = shared_grid();
    CHECK(g.failures() == 0);
    const EffhamBundle b = effham_at(ladder5_model(), ladder_policy(), g.grid.omegas[3], g.grid.intensities[7]);
    CHECK(g.node(3, 7).h1.matrix == b.h1.matrix);
    CHECK(g.node(3, 7).pole_distance > 0.0);
  }

  TEST_CASE("held-out points: cubic interpolation error below 1e-3") {
    const HeffGrid& g = shared_grid();
    const HeffInterpolator interp(g);
    double worst = 0.0;
    for (int i = 0; i + 1 < 10; i += 2) {
      for (int j = 0; j + 1 < 10; j += 3) {
        const double w = 0.5 * (g.grid.omegas[i] + g.grid.omegas[i + 1]);
        const double x = 0.5 * (g.grid.intensities[j] + g.grid.intensities[j + 1]);
        const EffhamBundle direct = effham_at(ladder5_model(), ladder_policy(), w, x);
        // Compare without the common diagonal offset, which is set by omega alone.
        const Eigen::Matrix2cd shift = direct.h1.e_ref * Eigen::Matrix2cd::Identity();
        const Eigen::Matrix2cd ref = direct.h1.matrix - shift;
        const Eigen::Matrix2cd got = interp.heff(w, x).matrix - shift;
        worst = std::max(worst, (got - ref).norm() / ref.norm());
        const CRAmplitudes cr = interp.cr(w, x);
        const CRAmplitudes cr_ref = cr_amplitudes(direct.chi, direct.chi.partition);
        CHECK(std::abs(cr.lambda_sum - cr_ref.lambda_sum) < 1e-3 * std::abs(cr_ref.lambda_sum));
      }
    }
    CHECK(worst < 1e-3);
    CHECK_THROWS_AS(interp.heff(0.3, 5e13), InvalidInput);
    CHECK(interpolate_heff(g, g.grid.omegas[2], g.grid.intensities[2]).matrix.isApprox(g.node(2, 2).h1.matrix, 1e-14));
  }

  TEST_CASE("balanced frequency zeroes the real detuning") {
    const double w = find_balanced_omega(ladder5_model(), ladder_policy(), 1e14, 0.375);
    const EffhamBundle b = effham_at(ladder5_model(), ladder_policy(), w, 1e14);
    CHECK(std::abs((b.h1.matrix(0, 0) - b.h1.matrix(1, 1)).real()) < 1e-11);
    CHECK(w == doctest::Approx(0.379185).epsilon(1e-5));
  }

  TEST_CASE("dressed resonance is stationary and brackets a width") {
    const HeffGrid& g = shared_grid();
    const HeffInterpolator interp(g);
    const Resonance r = dressed_resonance(interp, 8e13);
    const double h = 1e-7;
    const double d = (peak_excited_population(interp, r.omega_max + h, 8e13) -
                      peak_excited_population(interp, r.omega_max - h, 8e13)) / (2 * h);
    // Dimensionless slope |dP/domega| * width / P at the maximum.
    CHECK(std::abs(d) * r.width / r.max_pop < 1e-6);
    CHECK(r.max_pop >= peak_excited_population(interp, r.omega_max + 1e-5, 8e13));
    CHECK(r.width > 0.0);
    CHECK(r.width < 0.01);
    // Resonance frequency grows with intensity (AC Stark shift of the ladder).
    CHECK(dressed_resonance(interp, 1.1e14).omega_max > dressed_resonance(interp, 4e13).omega_max);
  }

  TEST_CASE("resonance on the grid boundary is an error") {
    const ParamGrid grid{linspace(0.383, 0.39, 5), linspace(8e13, 1.2e14, 4)};
    const HeffGrid g = scan_heff(ladder5_model(), grid, ladder_policy(), 2);
    CHECK_THROWS_AS(dressed_resonance(g, 1e14), NumericalError);
  }

  TEST_CASE("validity mask and regime map") {
    const ParamGrid grid = ladder_grid(4, 4);
    const HeffGrid masked = scan_heff(ladder5_model(), grid, ladder_policy(), 1, {1e-9, 0.0});
    CHECK(masked.failures() == 16);
    CHECK(masked.nodes[0].error.find("linear correction") != std::string::npos);
    CHECK_THROWS_AS(HeffInterpolator{masked}, NumericalError);
    const auto cells = regime_map(masked);
    CHECK(std::isnan(cells[5].zeta));
    CHECK_FALSE(cells[5].valid);

    const auto good = regime_map(scan_heff(ladder5_model(), grid, ladder_policy(), 1));
    REQUIRE(good.size() == 16);
    for (const auto& c : good) {
      CHECK(c.valid);
      CHECK(c.zeta >= 0.0);
      CHECK(c.max_pop <= 1.0);
      CHECK(c.m_max >= 0.0);
    }
    CHECK(good[1].intensity > good[0].intensity);
    CHECK(good[4].omega > good[0].omega);
  }

  TEST_CASE("dumps and surfaces round-trip") {
    const HeffGrid& g = shared_grid();
    const HeffGrid back = heff_grid_from_json(heff_grid_to_json(g));
    CHECK(back.grid.omegas == g.grid.omegas);
    CHECK(back.nodes.size() == g.nodes.size());
    CHECK(back.node(4, 4).h1.matrix == g.node(4, 4).h1.matrix);
    CHECK(back.node(4, 4).cr.lambda_m4 == g.node(4, 4).cr.lambda_m4);
    CHECK(dressed_resonance(back, 7e13).omega_max == dressed_resonance(g, 7e13).omega_max);

    std::ostringstream os;
    const auto cells = regime_map(g);
    write_regime_csv(os, cells);
    std::istringstream is(os.str());
    const auto cells_back = read_regime_csv(is);
    REQUIRE(cells_back.size() == cells.size());
    CHECK(cells_back[17].zeta == cells[17].zeta);
    CHECK(cells_back[17].m_max == cells[17].m_max);

    const std::vector<Resonance> rows{dressed_resonance(g, 5e13)};
    std::ostringstream rs;
    write_resonance_csv(rs, rows);
    std::istringstream ri(rs.str());
    const auto rows_back = read_resonance_csv(ri);
    CHECK(rows_back[0].omega_max == rows[0].omega_max);
    CHECK(rows_back[0].width == rows[0].width);
    CHECK_THROWS_AS(heff_grid_from_json(nlohmann::json{{"omegas_au", {0.1}}}), InvalidInput);
  }

  TEST_CASE("ridge map") {
    const RidgeMap m = ridge_map(shared_grid(), {4e13, 9e13}, 5000.0, 50);
    CHECK(m.ridge.size() == 2);
    CHECK(m.times.size() == 50);
    CHECK(m.pop_excited[1].size() == 50);
    CHECK(m.pop_excited[0][0] < 1e-20);
    std::ostringstream os;
    write_ridge_csv(os, m);
    const std::string text = os.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 101);
  }
}
