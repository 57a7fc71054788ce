#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace crosc {

/// Time-stamped ground/excited populations, optional CR envelopes and the
/// total norm. `source` tags where the rows came from (tdse, effham, ...).
struct PopulationSeries {
  std::vector<double> times;
  std::vector<double> pop_ground;
  std::vector<double> pop_excited;
  std::vector<double> envelope_lo;  // empty when absent
  std::vector<double> envelope_hi;
  std::vector<double> norm;
  std::string source;

  std::size_t size() const { return times.size(); }
  bool has_envelopes() const { return !envelope_lo.empty(); }
  /// Throws InvalidInput on ragged columns, non-increasing times, negative
  /// populations or envelopes that fail to bracket pop_excited (1e-9 slack).
  void validate() const;
};

/// Columns t_au,t_fs,pop_ground,pop_excited,env_lo,env_hi,norm,source. Missing
/// envelopes are written as empty fields.
void write_series_csv(std::ostream& out, const std::vector<PopulationSeries>& series);
void write_series_csv(const std::string& path, const std::vector<PopulationSeries>& series);
/// Splits rows back into one series per source, in order of first appearance.
std::vector<PopulationSeries> read_series_csv(std::istream& in);
std::vector<PopulationSeries> read_series_csv(const std::string& path);

/// Plain comma-separated table: a header row plus string fields.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};
/// Throws InvalidInput on ragged rows or a missing header.
CsvTable read_csv_table(std::istream& in);
/// Strict number parse (accepts nan/inf as written by format_number).
double parse_csv_number(const std::string& field);

/// "%.17g" formatting shared by every CSV writer.
std::string format_number(double v);

}  // namespace crosc
