#include "core/mask.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <queue>
#include <sstream>

#include "core/errors.hpp"

namespace plab {

const char* shape_tag_name(ShapeTag tag) {
  switch (tag) {
    case ShapeTag::rectangle: return "rectangle";
    case ShapeTag::disk: return "disk";
    case ShapeTag::annulus: return "annulus";
    case ShapeTag::lshape: return "lshape";
    case ShapeTag::custom: return "custom";
  }
  return "?";
}

namespace {

double parse_number(const std::string& s, const std::string& ctx) {
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw InvalidArgument("shape spec: cannot parse number '" + s + "' in '" + ctx + "'");
  }
}

// split "k1=v1,k2=v2" into pairs
std::vector<std::pair<std::string, std::string>> parse_kv(const std::string& body, const std::string& ctx) {
  std::vector<std::pair<std::string, std::string>> out;
  std::stringstream ss(body);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos)
      throw InvalidArgument("shape spec: expected key=value, got '" + item + "' in '" + ctx + "'");
    out.emplace_back(item.substr(0, eq), item.substr(eq + 1));
  }
  return out;
}

}  // namespace

ShapeSpec ShapeSpec::parse(const std::string& text) {
  std::string name = text, body;
  if (auto colon = text.find(':'); colon != std::string::npos) {
    name = text.substr(0, colon);
    body = text.substr(colon + 1);
  }
  ShapeSpec s;
  if (name == "rect" || name == "rectangle" || name == "square") {
    s.tag = ShapeTag::rectangle;
    if (!body.empty()) {
      // accept "WxH" or "w=..,h=.."
      if (auto x = body.find('x'); x != std::string::npos && body.find('=') == std::string::npos) {
        s.width = parse_number(body.substr(0, x), text);
        s.height = parse_number(body.substr(x + 1), text);
      } else {
        for (auto& [k, v] : parse_kv(body, text)) {
          if (k == "w") s.width = parse_number(v, text);
          else if (k == "h") s.height = parse_number(v, text);
          else throw InvalidArgument("shape spec: unknown key '" + k + "' in '" + text + "'");
        }
      }
    }
  } else if (name == "disk") {
    s.tag = ShapeTag::disk;
    if (!body.empty()) {
      for (auto& [k, v] : parse_kv(body, text)) {
        if (k == "r") s.radius = parse_number(v, text);
        else throw InvalidArgument("shape spec: unknown key '" + k + "' in '" + text + "'");
      }
    }
  } else if (name == "annulus") {
    s.tag = ShapeTag::annulus;
    if (!body.empty()) {
      for (auto& [k, v] : parse_kv(body, text)) {
        if (k == "rin") s.r_inner = parse_number(v, text);
        else if (k == "rout") s.r_outer = parse_number(v, text);
        else throw InvalidArgument("shape spec: unknown key '" + k + "' in '" + text + "'");
      }
    }
  } else if (name == "lshape") {
    s.tag = ShapeTag::lshape;
    if (!body.empty()) {
      for (auto& [k, v] : parse_kv(body, text)) {
        if (k == "s") s.side = parse_number(v, text);
        else throw InvalidArgument("shape spec: unknown key '" + k + "' in '" + text + "'");
      }
    }
  } else {
    throw InvalidArgument("shape spec: unknown shape '" + name + "'");
  }
  return s;
}

std::string ShapeSpec::describe() const {
  char buf[128];
  switch (tag) {
    case ShapeTag::rectangle:
      std::snprintf(buf, sizeof buf, "rect:%gx%g", width, height);
      break;
    case ShapeTag::disk:
      std::snprintf(buf, sizeof buf, "disk:r=%g", radius);
      break;
    case ShapeTag::annulus:
      std::snprintf(buf, sizeof buf, "annulus:rin=%g,rout=%g", r_inner, r_outer);
      break;
    case ShapeTag::lshape:
      std::snprintf(buf, sizeof buf, "lshape:s=%g", side);
      break;
    case ShapeTag::custom:
      std::snprintf(buf, sizeof buf, "custom");
      break;
  }
  return buf;
}

Mask Mask::build(const ShapeSpec& shape, double h) {
  if (!(h > 0.0)) throw InvalidArgument("mask: cell size h must be positive");

  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  switch (shape.tag) {
    case ShapeTag::rectangle:
      if (!(shape.width > 0) || !(shape.height > 0))
        throw InvalidArgument("mask: rectangle sides must be positive");
      xmax = shape.width;
      ymax = shape.height;
      break;
    case ShapeTag::disk:
      if (!(shape.radius > 0)) throw InvalidArgument("mask: disk radius must be positive");
      xmin = ymin = -shape.radius;
      xmax = ymax = shape.radius;
      break;
    case ShapeTag::annulus:
      if (!(shape.r_inner > 0) || !(shape.r_outer > 0))
        throw InvalidArgument("mask: annulus radii must be positive");
      if (!(shape.r_inner < shape.r_outer))
        throw InvalidArgument("mask: annulus needs r_inner < r_outer");
      xmin = ymin = -shape.r_outer;
      xmax = ymax = shape.r_outer;
      break;
    case ShapeTag::lshape:
      if (!(shape.side > 0)) throw InvalidArgument("mask: lshape side must be positive");
      xmax = ymax = shape.side;
      break;
    case ShapeTag::custom:
      throw InvalidArgument("mask: custom shapes go through from_cells");
  }

  Mask m;
  m.h_ = h;
  m.tag_ = shape.tag;
  m.nx_ = static_cast<int>(std::ceil((xmax - xmin) / h - 1e-12));
  m.ny_ = static_cast<int>(std::ceil((ymax - ymin) / h - 1e-12));
  if (m.nx_ < 1 || m.ny_ < 1) throw InvalidArgument("mask: shape smaller than one cell");
  // center radial shapes on the origin so the lattice stays symmetric
  if (shape.tag == ShapeTag::disk || shape.tag == ShapeTag::annulus) {
    m.x0_ = -0.5 * m.nx_ * h;
    m.y0_ = -0.5 * m.ny_ * h;
  } else {
    m.x0_ = xmin;
    m.y0_ = ymin;
  }

  auto inside = [&shape](double x, double y) -> bool {
    switch (shape.tag) {
      case ShapeTag::rectangle:
        return x > 0 && x < shape.width && y > 0 && y < shape.height;
      case ShapeTag::disk:
        return x * x + y * y < shape.radius * shape.radius;
      case ShapeTag::annulus: {
        double r2 = x * x + y * y;
        return r2 > shape.r_inner * shape.r_inner && r2 < shape.r_outer * shape.r_outer;
      }
      case ShapeTag::lshape:
        return x > 0 && x < shape.side && y > 0 && y < shape.side &&
               !(x > 0.5 * shape.side && y > 0.5 * shape.side);
      case ShapeTag::custom:
        return false;
    }
    return false;
  };

  m.index_.assign(static_cast<std::size_t>(m.nx_) * m.ny_, -1);
  for (int j = 0; j < m.ny_; ++j)
    for (int i = 0; i < m.nx_; ++i) {
      double x = m.x0_ + (i + 0.5) * h;
      double y = m.y0_ + (j + 0.5) * h;
      if (inside(x, y)) {
        m.index_[m.lattice(i, j)] = static_cast<std::int32_t>(m.cells_.size());
        m.cells_.emplace_back(i, j);
      }
    }
  m.finalize(shape.describe().c_str());
  return m;
}

Mask Mask::from_cells(int nx, int ny, double h, const std::vector<std::uint8_t>& active,
                      ShapeTag tag, double x0, double y0) {
  if (nx < 1 || ny < 1 || !(h > 0.0)) throw InvalidArgument("mask: bad lattice dimensions");
  if (active.size() != static_cast<std::size_t>(nx) * ny)
    throw InvalidArgument("mask: active map size does not match nx*ny");
  Mask m;
  m.nx_ = nx;
  m.ny_ = ny;
  m.h_ = h;
  m.x0_ = x0;
  m.y0_ = y0;
  m.tag_ = tag;
  m.index_.assign(active.size(), -1);
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i)
      if (active[m.lattice(i, j)]) {
        m.index_[m.lattice(i, j)] = static_cast<std::int32_t>(m.cells_.size());
        m.cells_.emplace_back(i, j);
      }
  m.finalize("custom cell map");
  return m;
}

void Mask::finalize(const char* what) {
  if (cells_.empty())
    throw InvalidArgument(std::string("mask: '") + what + "' produced no active cells (h too coarse?)");

  degree_.assign(cells_.size(), 0);
  faces_.clear();
  for (std::int32_t c = 0; c < cell_count(); ++c) {
    auto [i, j] = cells_[c];
    // right and top neighbor only, so each adjacent pair is listed once
    if (std::int32_t r = cell_index(i + 1, j); r >= 0) {
      faces_.push_back({c, r});
      ++degree_[c];
      ++degree_[r];
    }
    if (std::int32_t t = cell_index(i, j + 1); t >= 0) {
      faces_.push_back({c, t});
      ++degree_[c];
      ++degree_[t];
    }
  }

  // connectivity: BFS over faces from cell 0
  std::vector<std::vector<std::int32_t>> adj(cells_.size());
  for (const Face& f : faces_) {
    adj[f.a].push_back(f.b);
    adj[f.b].push_back(f.a);
  }
  std::vector<char> seen(cells_.size(), 0);
  std::queue<std::int32_t> q;
  q.push(0);
  seen[0] = 1;
  int reached = 1;
  while (!q.empty()) {
    std::int32_t c = q.front();
    q.pop();
    for (std::int32_t n : adj[c])
      if (!seen[n]) {
        seen[n] = 1;
        ++reached;
        q.push(n);
      }
  }
  if (reached != cell_count()) {
    std::ostringstream msg;
    msg << "mask: '" << what << "' is disconnected (" << reached << " of " << cell_count()
        << " cells reachable from the first active cell); refine h or fix the shape";
    throw InvalidArgument(msg.str());
  }
}

std::int32_t Mask::deepest_cell() const {
  // multi-source BFS in the face graph, sources = cells missing a neighbor
  std::vector<std::vector<std::int32_t>> adj(cells_.size());
  for (const Face& f : faces_) {
    adj[f.a].push_back(f.b);
    adj[f.b].push_back(f.a);
  }
  std::vector<int> dist(cells_.size(), -1);
  std::queue<std::int32_t> q;
  for (std::int32_t c = 0; c < cell_count(); ++c)
    if (degree_[c] < 4) {
      dist[c] = 0;
      q.push(c);
    }
  std::int32_t best = 0;
  while (!q.empty()) {
    std::int32_t c = q.front();
    q.pop();
    if (dist[c] > dist[best]) best = c;
    for (std::int32_t n : adj[c])
      if (dist[n] < 0) {
        dist[n] = dist[c] + 1;
        q.push(n);
      }
  }
  return best;
}

std::int32_t Mask::nearest_cell(double x, double y) const {
  std::int32_t best = -1;
  double best_d2 = 0;
  for (std::int32_t c = 0; c < cell_count(); ++c) {
    double dx = cell_x(c) - x, dy = cell_y(c) - y;
    double d2 = dx * dx + dy * dy;
    if (best < 0 || d2 < best_d2) {
      best = c;
      best_d2 = d2;
    }
  }
  return best;
}

void Mask::dump(std::ostream& out) const {
  char head[64];
  std::snprintf(head, sizeof head, "%d %d %.12g\n", nx_, ny_, h_);
  out << head;
  for (int j = ny_ - 1; j >= 0; --j) {
    for (int i = 0; i < nx_; ++i) {
      out << (index_[lattice(i, j)] >= 0 ? '1' : '0');
      out << (i + 1 == nx_ ? '\n' : ' ');
    }
  }
}

void Mask::dump_file(const std::string& path) const {
  std::ofstream f(path);
  if (!f) throw IoError("mask: cannot open '" + path + "' for writing");
  dump(f);
  if (!f) throw IoError("mask: write to '" + path + "' failed");
}

}  // namespace plab
