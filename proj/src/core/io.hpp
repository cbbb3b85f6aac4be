#pragma once

// Plain-text artifacts: field dumps, result CSVs, and PGM heatmaps. Every
// number is written with 12 significant digits so seeded runs are
// byte-identical.

#include <iosfwd>
#include <string>
#include <vector>

#include "core/analysis.hpp"
#include "core/newton.hpp"
#include "core/operators.hpp"

namespace plab {

std::string fmt12(double v);

// field dump: header "nx ny h", then row-major values top row first,
// "nan" on inactive cells
void write_field(std::ostream& out, const Mask& mask, const Field& u);
void write_field_file(const std::string& path, const Mask& mask, const Field& u);

struct FieldDump {
  int nx = 0, ny = 0;
  double h = 0.0;
  std::vector<double> values;  // row-major, top row first, NaN inactive
};
FieldDump read_field_file(const std::string& path);

// field values matched back onto a mask; the dump must have the same lattice
// and active pattern
Field field_from_dump(const Mask& mask, const FieldDump& dump);

// multistart results: index,converged,classification,constant_value,energy,
// residual,stability_index,positive,min_u,max_u
void write_reports_csv(std::ostream& out, const std::vector<SolveReport>& reports);
void write_reports_csv(std::ostream& out, const std::vector<const SolveReport*>& reports);
void write_reports_csv_file(const std::string& path, const std::vector<SolveReport>& reports);

// sweep: epsilon,c_epsilon,distinct_count,has_nonconstant,threshold_ratio
void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_sweep_csv_file(const std::string& path, const std::vector<SweepRow>& rows);

// 8-bit binary PGM (text header + raster), linear min..max scaling,
// inactive cells black; a constant field renders mid-gray
void write_pgm_file(const std::string& path, const FieldDump& dump);
void write_pgm_file(const std::string& path, const Mask& mask, const Field& u);

}  // namespace plab
