#include "crosc/series.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>

#include "crosc/error.hpp"
#include "crosc/units.hpp"

namespace crosc {

namespace {

constexpr double kEnvelopeSlack = 1e-9;
constexpr const char* kHeader = "t_au,t_fs,pop_ground,pop_excited,env_lo,env_hi,norm,source";

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, std::size_t line) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw InvalidInput("series CSV line " + std::to_string(line) + ": bad number '" + s + "'");
  }
  return v;
}

}  // namespace

std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void PopulationSeries::validate() const {
  const std::size_t n = times.size();
  if (pop_ground.size() != n || pop_excited.size() != n || norm.size() != n) {
    throw InvalidInput("population series columns have different lengths");
  }
  if (envelope_lo.size() != envelope_hi.size() || (!envelope_lo.empty() && envelope_lo.size() != n)) {
    throw InvalidInput("population series envelopes are ragged");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (i > 0 && !(times[i] > times[i - 1])) throw InvalidInput("series times must increase strictly");
    if (pop_ground[i] < 0.0 || pop_excited[i] < 0.0) throw InvalidInput("negative population in series");
    if (has_envelopes() && (pop_excited[i] < envelope_lo[i] - kEnvelopeSlack ||
                            pop_excited[i] > envelope_hi[i] + kEnvelopeSlack)) {
      throw InvalidInput("pop_excited escapes its envelope at t = " + format_number(times[i]));
    }
  }
}

void write_series_csv(std::ostream& out, const std::vector<PopulationSeries>& series) {
  out << kHeader << '\n';
  for (const PopulationSeries& s : series) {
    for (std::size_t i = 0; i < s.size(); ++i) {
      out << format_number(s.times[i]) << ',' << format_number(units::au_to_fs(s.times[i])) << ','
          << format_number(s.pop_ground[i]) << ',' << format_number(s.pop_excited[i]) << ',';
      if (s.has_envelopes()) out << format_number(s.envelope_lo[i]) << ',' << format_number(s.envelope_hi[i]);
      else out << ',';
      out << ',' << format_number(s.norm[i]) << ',' << s.source << '\n';
    }
  }
}

void write_series_csv(const std::string& path, const std::vector<PopulationSeries>& series) {
  std::ofstream out(path);
  if (!out) throw InvalidInput("cannot write " + path);
  write_series_csv(out, series);
}

std::vector<PopulationSeries> read_series_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kHeader) throw InvalidInput("series CSV: unexpected header");
  std::vector<PopulationSeries> out;
  std::map<std::string, std::size_t> slot;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split(line);
    if (f.size() != 8) throw InvalidInput("series CSV line " + std::to_string(lineno) + ": expected 8 fields");
    auto [it, fresh] = slot.try_emplace(f[7], out.size());
    if (fresh) {
      out.emplace_back();
      out.back().source = f[7];
    }
    PopulationSeries& s = out[it->second];
    s.times.push_back(parse_number(f[0], lineno));
    s.pop_ground.push_back(parse_number(f[2], lineno));
    s.pop_excited.push_back(parse_number(f[3], lineno));
    if (!f[4].empty() || !f[5].empty()) {
      s.envelope_lo.push_back(parse_number(f[4], lineno));
      s.envelope_hi.push_back(parse_number(f[5], lineno));
    }
    s.norm.push_back(parse_number(f[6], lineno));
  }
  for (const auto& s : out) s.validate();
  return out;
}

CsvTable read_csv_table(std::istream& in) {
  CsvTable t;
  std::string line;
  if (!std::getline(in, line) || line.empty()) throw InvalidInput("CSV: missing header");
  t.header = split(line);
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto f = split(line);
    if (f.size() != t.header.size()) {
      throw InvalidInput("CSV line " + std::to_string(lineno) + ": expected " + std::to_string(t.header.size()) +
                         " fields");
    }
    t.rows.push_back(std::move(f));
  }
  return t;
}

double parse_csv_number(const std::string& field) {
  double v = 0.0;
  const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
  if (field.empty() || res.ec != std::errc() || res.ptr != field.data() + field.size()) {
    throw InvalidInput("CSV: bad number '" + field + "'");
  }
  return v;
}

std::vector<PopulationSeries> read_series_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("cannot open " + path);
  return read_series_csv(in);
}

}  // namespace crosc
