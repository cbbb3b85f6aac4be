#pragma once

// Masked cell-centered Cartesian grids for bounded 2-D domains with zero-flux
// boundaries. A mask is the set of lattice cells whose centers fall inside the
// requested shape (staircase geometry, no cut cells). The active set is always
// edge-connected; builders reject anything else, so downstream code may assume
// a single component.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace plab {

enum class ShapeTag { rectangle, disk, annulus, lshape, custom };

const char* shape_tag_name(ShapeTag tag);

struct ShapeSpec {
  ShapeTag tag = ShapeTag::rectangle;
  double width = 1.0, height = 1.0;     // rectangle
  double radius = 1.0;                  // disk
  double r_inner = 0.5, r_outer = 1.0;  // annulus
  double side = 1.0;                    // lshape: side x side square minus its upper-right quadrant

  // "rect:WxH", "square", "disk:r=R", "annulus:rin=A,rout=B", "lshape:s=S";
  // bare names take the defaults above.
  static ShapeSpec parse(const std::string& text);
  std::string describe() const;
};

// One interior face between two adjacent active cells, compact indices a < b.
struct Face {
  std::int32_t a, b;
};

class Mask {
 public:
  static Mask build(const ShapeSpec& shape, double h);

  // Explicit cell map, mainly for tests and tiny hand-made domains.
  static Mask from_cells(int nx, int ny, double h, const std::vector<std::uint8_t>& active,
                         ShapeTag tag = ShapeTag::custom, double x0 = 0.0, double y0 = 0.0);

  int nx() const { return nx_; }
  int ny() const { return ny_; }
  double spacing() const { return h_; }
  ShapeTag tag() const { return tag_; }

  int cell_count() const { return static_cast<int>(cells_.size()); }
  const std::vector<Face>& faces() const { return faces_; }
  double area() const { return static_cast<double>(cell_count()) * h_ * h_; }

  bool active(int i, int j) const {
    return i >= 0 && j >= 0 && i < nx_ && j < ny_ && index_[lattice(i, j)] >= 0;
  }
  // compact index of lattice cell (i, j), -1 when inactive or out of range
  std::int32_t cell_index(int i, int j) const {
    if (i < 0 || j < 0 || i >= nx_ || j >= ny_) return -1;
    return index_[lattice(i, j)];
  }
  std::pair<int, int> cell_coords(std::int32_t c) const { return cells_[c]; }

  double cell_x(std::int32_t c) const { return x0_ + (cells_[c].first + 0.5) * h_; }
  double cell_y(std::int32_t c) const { return y0_ + (cells_[c].second + 0.5) * h_; }
  double origin_x() const { return x0_; }
  double origin_y() const { return y0_; }

  // number of active neighbors of each cell (face degree)
  const std::vector<int>& degree() const { return degree_; }

  // Active cell maximizing the face-graph distance to the nearest cell with a
  // missing neighbor. A good default spot for compactly supported profiles.
  std::int32_t deepest_cell() const;

  // Active cell whose center is nearest to (x, y); -1 if none is active.
  std::int32_t nearest_cell(double x, double y) const;

  // plain-text dump: header "nx ny h", then one row per line, 1/0 per cell,
  // top row (largest y) first
  void dump(std::ostream& out) const;
  void dump_file(const std::string& path) const;

 private:
  Mask() = default;
  std::size_t lattice(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }
  void finalize(const char* what);  // builds faces/degree, checks connectivity

  int nx_ = 0, ny_ = 0;
  double h_ = 0.0;
  double x0_ = 0.0, y0_ = 0.0;
  ShapeTag tag_ = ShapeTag::custom;
  std::vector<std::int32_t> index_;          // lattice -> compact, -1 inactive
  std::vector<std::pair<int, int>> cells_;   // compact -> lattice (i, j)
  std::vector<Face> faces_;
  std::vector<int> degree_;
};

}  // namespace plab
