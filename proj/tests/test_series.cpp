#include <cmath>
#include <sstream>

#include <doctest.h>

#include "crosc/error.hpp"
#include "crosc/series.hpp"

using namespace crosc;

namespace {

PopulationSeries sample(const std::string& source, bool envelopes) {
  PopulationSeries s;
  s.source = source;
  for (int i = 0; i < 5; ++i) {
    s.times.push_back(0.1 * i + 1.0 / 3.0);
    s.pop_ground.push_back(1.0 - 0.01 * i);
    s.pop_excited.push_back(0.01 * i + 1e-17);
    s.norm.push_back(1.0 - 1e-3 * i);
    if (envelopes) {
      s.envelope_lo.push_back(0.5 * s.pop_excited.back());
      s.envelope_hi.push_back(2.0 * s.pop_excited.back());
    }
  }
  return s;
}

}  // namespace

TEST_SUITE("series") {
  TEST_CASE("CSV round-trip is exact and keeps sources apart") {
    const std::vector<PopulationSeries> in{sample("tdse", false), sample("effham", true)};
    std::ostringstream os;
    write_series_csv(os, in);
    CHECK(os.str().rfind("t_au,t_fs,pop_ground,pop_excited,env_lo,env_hi,norm,source\n", 0) == 0);
    std::istringstream is(os.str());
    const auto back = read_series_csv(is);
    REQUIRE(back.size() == 2);
    for (std::size_t k = 0; k < 2; ++k) {
      CHECK(back[k].source == in[k].source);
      CHECK(back[k].times == in[k].times);
      CHECK(back[k].pop_excited == in[k].pop_excited);
      CHECK(back[k].norm == in[k].norm);
      CHECK(back[k].envelope_hi == in[k].envelope_hi);
    }
    CHECK_FALSE(back[0].has_envelopes());
  }

  TEST_CASE("validation catches broken series") {
    PopulationSeries s = sample("x", true);
    s.validate();
    SUBCASE("envelope does not bracket") {
      s.envelope_hi[2] = 0.5 * s.pop_excited[2];
      CHECK_THROWS_AS(s.validate(), InvalidInput);
    }
    SUBCASE("times not increasing") {
      s.times[3] = s.times[2];
      CHECK_THROWS_AS(s.validate(), InvalidInput);
    }
    SUBCASE("ragged") {
      s.norm.pop_back();
      CHECK_THROWS_AS(s.validate(), InvalidInput);
    }
    SUBCASE("negative population") {
      s.pop_ground[0] = -1e-3;
      CHECK_THROWS_AS(s.validate(), InvalidInput);
    }
  }

  TEST_CASE("reader rejects malformed input") {
    std::istringstream bad_header("t,x\n1,2\n");
    CHECK_THROWS_AS(read_series_csv(bad_header), InvalidInput);
    std::istringstream bad_number("t_au,t_fs,pop_ground,pop_excited,env_lo,env_hi,norm,source\n0,0,1,abc,,,1,tdse\n");
    CHECK_THROWS_AS(read_series_csv(bad_number), InvalidInput);
    std::istringstream ragged("a,b\n1,2\n3\n");
    CHECK_THROWS_AS(read_csv_table(ragged), InvalidInput);
  }

  TEST_CASE("number formatting round-trips doubles") {
    for (double v : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300}) CHECK(parse_csv_number(format_number(v)) == v);
    CHECK(std::isnan(parse_csv_number(format_number(std::nan("")))));
    CHECK_THROWS_AS(parse_csv_number(""), InvalidInput);
    CHECK_THROWS_AS(parse_csv_number("1.0x"), InvalidInput);
  }
}
