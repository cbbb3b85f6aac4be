#include "core/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include "core/errors.hpp"

namespace plab {

std::string fmt12(double v) {
  if (std::isnan(v)) return "nan";
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void write_field(std::ostream& out, const Mask& mask, const Field& u) {
  if (u.size() != static_cast<std::size_t>(mask.cell_count()))
    throw InvalidArgument("write_field: field does not match the mask");
  out << mask.nx() << ' ' << mask.ny() << ' ' << fmt12(mask.spacing()) << '\n';
  for (int j = mask.ny() - 1; j >= 0; --j) {
    for (int i = 0; i < mask.nx(); ++i) {
      std::int32_t c = mask.cell_index(i, j);
      out << (c >= 0 ? fmt12(u[c]) : "nan");
      out << (i + 1 == mask.nx() ? '\n' : ' ');
    }
  }
}

void write_field_file(const std::string& path, const Mask& mask, const Field& u) {
  std::ofstream f(path);
  if (!f) throw IoError("write_field: cannot open '" + path + "'");
  write_field(f, mask, u);
  if (!f) throw IoError("write_field: write to '" + path + "' failed");
}

FieldDump read_field_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("read_field: cannot open '" + path + "'");
  FieldDump d;
  if (!(f >> d.nx >> d.ny >> d.h) || d.nx < 1 || d.ny < 1 || !(d.h > 0.0))
    throw IoError("read_field: bad header in '" + path + "' (want: nx ny h)");
  d.values.resize(static_cast<std::size_t>(d.nx) * d.ny);
  for (double& v : d.values) {
    std::string tok;
    if (!(f >> tok)) throw IoError("read_field: truncated dump '" + path + "'");
    if (tok == "nan" || tok == "-nan") {
      v = std::numeric_limits<double>::quiet_NaN();
    } else {
      try {
        std::size_t pos = 0;
        v = std::stod(tok, &pos);
        if (pos != tok.size()) throw std::invalid_argument(tok);
      } catch (const std::exception&) {
        throw IoError("read_field: bad value '" + tok + "' in '" + path + "'");
      }
    }
  }
  return d;
}

Field field_from_dump(const Mask& mask, const FieldDump& dump) {
  if (dump.nx != mask.nx() || dump.ny != mask.ny())
    throw InvalidArgument("field_from_dump: lattice size mismatch");
  if (std::abs(dump.h - mask.spacing()) > 1e-9 * mask.spacing())
    throw InvalidArgument("field_from_dump: cell size mismatch");
  Field u = constant_field(mask, 0.0);
  for (int j = 0; j < mask.ny(); ++j)
    for (int i = 0; i < mask.nx(); ++i) {
      // dumps store the top row first
      double v = dump.values[static_cast<std::size_t>(mask.ny() - 1 - j) * mask.nx() + i];
      std::int32_t c = mask.cell_index(i, j);
      if (c >= 0) {
        if (std::isnan(v))
          throw InvalidArgument("field_from_dump: nan on an active cell");
        u[c] = v;
      } else if (!std::isnan(v)) {
        throw InvalidArgument("field_from_dump: value on an inactive cell");
      }
    }
  return u;
}

namespace {

const char* classification_name(const SolveReport& r) {
  return r.constant ? "constant" : "nonconstant";
}

}  // namespace

void write_reports_csv(std::ostream& out, const std::vector<const SolveReport*>& reports) {
  out << "index,converged,classification,constant_value,energy,residual,"
         "stability_index,positive,min_u,max_u\n";
  int idx = 0;
  for (const SolveReport* rp : reports) {
    const SolveReport& r = *rp;
    double cval = r.constant ? r.constant_value : std::numeric_limits<double>::quiet_NaN();
    out << idx++ << ',' << (r.converged ? 1 : 0) << ',' << classification_name(r) << ','
        << fmt12(cval) << ',' << fmt12(r.energy) << ',' << fmt12(r.residual_norm) << ','
        << fmt12(r.stability_index) << ',' << (r.positive ? 1 : 0) << ',' << fmt12(r.min_u)
        << ',' << fmt12(r.max_u) << '\n';
  }
}

void write_reports_csv(std::ostream& out, const std::vector<SolveReport>& reports) {
  std::vector<const SolveReport*> ptrs;
  ptrs.reserve(reports.size());
  for (const SolveReport& r : reports) ptrs.push_back(&r);
  write_reports_csv(out, ptrs);
}

void write_reports_csv_file(const std::string& path, const std::vector<SolveReport>& reports) {
  std::ofstream f(path);
  if (!f) throw IoError("write_reports_csv: cannot open '" + path + "'");
  write_reports_csv(f, reports);
  if (!f) throw IoError("write_reports_csv: write to '" + path + "' failed");
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "epsilon,c_epsilon,distinct_count,has_nonconstant,threshold_ratio\n";
  for (const SweepRow& r : rows)
    out << fmt12(r.epsilon) << ',' << fmt12(r.c_epsilon) << ',' << r.distinct_count << ','
        << (r.has_nonconstant ? 1 : 0) << ',' << fmt12(r.threshold_ratio) << '\n';
}

void write_sweep_csv_file(const std::string& path, const std::vector<SweepRow>& rows) {
  std::ofstream f(path);
  if (!f) throw IoError("write_sweep_csv: cannot open '" + path + "'");
  write_sweep_csv(f, rows);
  if (!f) throw IoError("write_sweep_csv: write to '" + path + "' failed");
}

namespace {

void write_pgm_raster(const std::string& path, int w, int h,
                      const std::vector<unsigned char>& bytes) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("write_pgm: cannot open '" + path + "'");
  f << "P5\n" << w << ' ' << h << "\n255\n";
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write_pgm: write to '" + path + "' failed");
}

}  // namespace

void write_pgm_file(const std::string& path, const FieldDump& dump) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : dump.values)
    if (!std::isnan(v)) {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
  if (!(lo <= hi)) throw InvalidArgument("write_pgm: dump has no active cells");
  std::vector<unsigned char> bytes(dump.values.size(), 0);
  double span = hi - lo;
  for (std::size_t k = 0; k < dump.values.size(); ++k) {
    double v = dump.values[k];
    if (std::isnan(v)) continue;  // inactive stays black
    bytes[k] = span > 0.0
                   ? static_cast<unsigned char>(std::lround(255.0 * (v - lo) / span))
                   : static_cast<unsigned char>(128);
  }
  write_pgm_raster(path, dump.nx, dump.ny, bytes);
}

void write_pgm_file(const std::string& path, const Mask& mask, const Field& u) {
  FieldDump d;
  d.nx = mask.nx();
  d.ny = mask.ny();
  d.h = mask.spacing();
  d.values.assign(static_cast<std::size_t>(d.nx) * d.ny, std::numeric_limits<double>::quiet_NaN());
  for (int j = 0; j < mask.ny(); ++j)
    for (int i = 0; i < mask.nx(); ++i)
      if (std::int32_t c = mask.cell_index(i, j); c >= 0)
        d.values[static_cast<std::size_t>(mask.ny() - 1 - j) * mask.nx() + i] = u[c];
  write_pgm_file(path, d);
}

}  // namespace plab
