#include "prim/shape_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>

namespace prim {

namespace {

std::string lower_extension(const std::filesystem::path& path) {
  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return ext;
}

void finish_report(const TriangleMesh& mesh, MeshLoadReport* report) {
  if (!report) return;
  report->degenerate_faces.clear();
  const double diag = mesh.bounds().sizes().norm();
  const double tol = 1e-14 * std::max(diag * diag, 1e-300);
  for (std::size_t f = 0; f < mesh.faces.size(); ++f) {
    if (mesh.face_area(f) <= tol) report->degenerate_faces.push_back(f);
  }
}

void add_polygon(TriangleMesh& mesh, const std::vector<int>& poly, MeshLoadReport* report) {
  if (poly.size() < 3) throw Error(ErrorCode::ParseError, "face with fewer than 3 vertices");
  for (std::size_t k = 1; k + 1 < poly.size(); ++k) {
    mesh.faces.emplace_back(poly[0], poly[k], poly[k + 1]);
  }
  if (report && poly.size() > 3) ++report->polygons_triangulated;
}

}  // namespace

// ---------------------------------------------------------------------------
// TriangleMesh

void TriangleMesh::validate() const {
  if (faces.empty()) throw Error(ErrorCode::EmptyMesh, "mesh has no faces");
  const int n = static_cast<int>(vertices.size());
  for (const auto& f : faces) {
    for (int k = 0; k < 3; ++k) {
      if (f[k] < 0 || f[k] >= n) {
        throw Error(ErrorCode::ParseError, "face index " + std::to_string(f[k]) +
                                               " out of range for " + std::to_string(n) +
                                               " vertices");
      }
    }
  }
}

AlignedBox3d TriangleMesh::bounds() const { return bounds_of(vertices); }

double TriangleMesh::face_area(std::size_t f) const {
  const auto& t = faces[f];
  return 0.5 * (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]).norm();
}

Vector3d TriangleMesh::face_normal(std::size_t f) const {
  const auto& t = faces[f];
  const Vector3d n = (vertices[t[1]] - vertices[t[0]]).cross(vertices[t[2]] - vertices[t[0]]);
  const double len = n.norm();
  return len > 0 ? Vector3d(n / len) : Vector3d::Zero();
}

double TriangleMesh::surface_area() const {
  double total = 0;
  for (std::size_t f = 0; f < faces.size(); ++f) total += face_area(f);
  return total;
}

void TriangleMesh::append(const TriangleMesh& other) {
  const int offset = static_cast<int>(vertices.size());
  vertices.insert(vertices.end(), other.vertices.begin(), other.vertices.end());
  for (const auto& f : other.faces) faces.emplace_back(f.array() + offset);
}

// ---------------------------------------------------------------------------
// Mesh IO

TriangleMesh read_off(std::istream& in, MeshLoadReport* report) {
  std::deque<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  if (tokens.empty() || tokens.front().rfind("OFF", 0) != 0) {
    throw Error(ErrorCode::ParseError, "missing OFF header");
  }
  // Some exporters glue the counts to the header ("OFF8 12 0").
  std::string head = tokens.front();
  tokens.pop_front();
  if (head.size() > 3) tokens.push_front(head.substr(3));

  auto next_number = [&](const char* what) -> double {
    if (tokens.empty()) throw Error(ErrorCode::ParseError, std::string("unexpected end of file reading ") + what);
    const std::string tok = tokens.front();
    tokens.pop_front();
    try {
      std::size_t used = 0;
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorCode::ParseError, std::string("bad number '") + tok + "' in " + what);
    }
  };
  auto next_int = [&](const char* what) -> long {
    const double v = next_number(what);
    if (v != std::floor(v)) throw Error(ErrorCode::ParseError, std::string("non-integer ") + what);
    return static_cast<long>(v);
  };

  const long nv = next_int("vertex count");
  const long nf = next_int("face count");
  next_int("edge count");
  if (nv < 0 || nf < 0) throw Error(ErrorCode::ParseError, "negative element count");

  TriangleMesh mesh;
  if (report) *report = {};
  mesh.vertices.reserve(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    const double x = next_number("vertex"), y = next_number("vertex"), z = next_number("vertex");
    mesh.vertices.emplace_back(x, y, z);
  }
  std::vector<int> poly;
  for (long f = 0; f < nf; ++f) {
    const long n = next_int("face arity");
    if (n < 3) throw Error(ErrorCode::ParseError, "face with fewer than 3 vertices");
    poly.clear();
    for (long k = 0; k < n; ++k) {
      const long idx = next_int("face index");
      if (idx < 0 || idx >= nv) {
        throw Error(ErrorCode::ParseError, "face index " + std::to_string(idx) + " out of range for " +
                                               std::to_string(nv) + " vertices");
      }
      poly.push_back(static_cast<int>(idx));
    }
    // Per-face colour values are not supported.
    add_polygon(mesh, poly, report);
  }
  if (mesh.faces.empty()) throw Error(ErrorCode::EmptyMesh, "OFF file declares no faces");
  finish_report(mesh, report);
  return mesh;
}

TriangleMesh read_obj(std::istream& in, MeshLoadReport* report) {
  TriangleMesh mesh;
  if (report) *report = {};
  std::string line;
  std::vector<int> poly;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream ls(line);
    std::string kind;
    if (!(ls >> kind)) continue;
    if (kind == "v") {
      double x, y, z;
      if (!(ls >> x >> y >> z)) throw Error(ErrorCode::ParseError, "bad vertex on line " + std::to_string(line_no));
      mesh.vertices.emplace_back(x, y, z);
    } else if (kind == "f") {
      poly.clear();
      std::string tok;
      while (ls >> tok) {
        const std::string head = tok.substr(0, tok.find('/'));
        long idx = 0;
        try {
          idx = std::stol(head);
        } catch (const std::exception&) {
          throw Error(ErrorCode::ParseError, "bad face index '" + tok + "' on line " + std::to_string(line_no));
        }
        const long n = static_cast<long>(mesh.vertices.size());
        const long resolved = idx < 0 ? n + idx : idx - 1;
        if (idx == 0 || resolved < 0 || resolved >= n) {
          throw Error(ErrorCode::ParseError, "face index " + std::to_string(idx) + " out of range on line " +
                                                 std::to_string(line_no));
        }
        poly.push_back(static_cast<int>(resolved));
      }
      add_polygon(mesh, poly, report);
    }
  }
  if (mesh.faces.empty()) throw Error(ErrorCode::EmptyMesh, "OBJ file has no faces");
  finish_report(mesh, report);
  return mesh;
}

TriangleMesh load_mesh(const std::filesystem::path& path, MeshLoadReport* report) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  const std::string ext = lower_extension(path);
  if (ext == ".off") return read_off(in, report);
  if (ext == ".obj") return read_obj(in, report);
  throw Error(ErrorCode::ParseError, "unsupported mesh format: " + path.string());
}

void write_off(std::ostream& out, const TriangleMesh& mesh) {
  out << "OFF\n" << mesh.vertices.size() << ' ' << mesh.faces.size() << " 0\n";
  char buf[96];
  for (const auto& v : mesh.vertices) {
    std::snprintf(buf, sizeof(buf), "%.17g %.17g %.17g\n", v.x(), v.y(), v.z());
    out << buf;
  }
  for (const auto& f : mesh.faces) out << "3 " << f[0] << ' ' << f[1] << ' ' << f[2] << '\n';
}

void save_off(const std::filesystem::path& path, const TriangleMesh& mesh) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_off(out, mesh);
}

TriangleMesh box_mesh(const OrientedBoxd& box) {
  TriangleMesh mesh;
  const auto c = box.corners();
  mesh.vertices.assign(c.begin(), c.end());
  // Corner index bits: 4 -> +x, 2 -> +y, 1 -> +z (local frame).
  const int quads[6][4] = {{0, 1, 3, 2}, {4, 6, 7, 5}, {0, 4, 5, 1},
                           {2, 3, 7, 6}, {0, 2, 6, 4}, {1, 5, 7, 3}};
  for (const auto& q : quads) {
    Eigen::Vector3i t0(q[0], q[1], q[2]);
    Eigen::Vector3i t1(q[0], q[2], q[3]);
    const Vector3d centroid = (c[q[0]] + c[q[1]] + c[q[2]] + c[q[3]]) / 4.0;
    const Vector3d n = (c[q[1]] - c[q[0]]).cross(c[q[2]] - c[q[0]]);
    if (n.dot(centroid - box.center) < 0) {
      std::swap(t0[1], t0[2]);
      std::swap(t1[1], t1[2]);
    }
    mesh.faces.push_back(t0);
    mesh.faces.push_back(t1);
  }
  return mesh;
}

// ---------------------------------------------------------------------------
// Voxel grids

bool GridSpec::same_lattice(const GridSpec& other, double tol) const {
  const double scale = std::max({1.0, side(), other.side()});
  return resolution == other.resolution && std::abs(voxel_size - other.voxel_size) <= tol * scale &&
         (origin - other.origin).cwiseAbs().maxCoeff() <= tol * scale;
}

GridSpec GridSpec::bounding_cube(const AlignedBox3d& box, int resolution, double padding) {
  if (resolution < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
  if (box.isEmpty()) throw Error(ErrorCode::DegenerateBounds, "empty bounds");
  const double extent = box.sizes().maxCoeff();
  if (!(extent > 0)) throw Error(ErrorCode::DegenerateBounds, "bounds have zero extent");
  GridSpec spec;
  spec.resolution = resolution;
  const double side = extent * (1.0 + padding);
  spec.voxel_size = side / resolution;
  spec.origin = box.center() - Vector3d::Constant(side / 2.0);
  return spec;
}

VoxelGrid::VoxelGrid(const GridSpec& spec) : spec_(spec) {
  if (spec.resolution < 1) throw Error(ErrorCode::InvalidArgument, "resolution must be positive");
  if (!(spec.voxel_size > 0)) throw Error(ErrorCode::InvalidArgument, "voxel_size must be positive");
  const std::size_t r = static_cast<std::size_t>(spec.resolution);
  occupancy_.assign(r * r * r, 0);
}

bool VoxelGrid::occupied_at(const Vector3d& p) const {
  const Vector3d q = (p - spec_.origin) / spec_.voxel_size;
  const int r = spec_.resolution;
  const int i = static_cast<int>(std::floor(q.x()));
  const int j = static_cast<int>(std::floor(q.y()));
  const int k = static_cast<int>(std::floor(q.z()));
  if (i < 0 || j < 0 || k < 0 || i >= r || j >= r || k >= r) return false;
  return at(i, j, k);
}

std::size_t VoxelGrid::count() const {
  return static_cast<std::size_t>(std::count(occupancy_.begin(), occupancy_.end(), std::uint8_t{1}));
}

namespace {

// Cell index range [lo, hi] (inclusive) covering the coordinate interval [a, b].
std::pair<int, int> cell_range(double a, double b, double origin, double h, int n) {
  int lo = static_cast<int>(std::floor((a - origin) / h));
  int hi = static_cast<int>(std::floor((b - origin) / h));
  return {std::clamp(lo, 0, n - 1), std::clamp(hi, 0, n - 1)};
}

void flood_fill_interior(VoxelGrid& grid) {
  const int r = grid.resolution();
  std::vector<std::uint8_t> outside(grid.size(), 0);
  std::vector<std::size_t> stack;
  auto push = [&](int i, int j, int k) {
    const std::size_t idx = grid.index(i, j, k);
    if (!grid[idx] && !outside[idx]) {
      outside[idx] = 1;
      stack.push_back(idx);
    }
  };
  for (int a = 0; a < r; ++a) {
    for (int b = 0; b < r; ++b) {
      push(0, a, b);
      push(r - 1, a, b);
      push(a, 0, b);
      push(a, r - 1, b);
      push(a, b, 0);
      push(a, b, r - 1);
    }
  }
  const std::size_t rr = static_cast<std::size_t>(r);
  while (!stack.empty()) {
    const std::size_t idx = stack.back();
    stack.pop_back();
    const int i = static_cast<int>(idx % rr);
    const int j = static_cast<int>((idx / rr) % rr);
    const int k = static_cast<int>(idx / (rr * rr));
    if (i > 0) push(i - 1, j, k);
    if (i + 1 < r) push(i + 1, j, k);
    if (j > 0) push(i, j - 1, k);
    if (j + 1 < r) push(i, j + 1, k);
    if (k > 0) push(i, j, k - 1);
    if (k + 1 < r) push(i, j, k + 1);
  }
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (!outside[idx]) grid.set(idx, true);
  }
}

}  // namespace

VoxelGrid voxelize(const TriangleMesh& mesh, const GridSpec& lattice, FillMode fill) {
  mesh.validate();
  VoxelGrid grid(lattice);
  const int r = lattice.resolution;
  const double h = lattice.voxel_size;
  const Vector3d half = Vector3d::Constant(h / 2.0);
  for (const auto& f : mesh.faces) {
    const Vector3d& a = mesh.vertices[f[0]];
    const Vector3d& b = mesh.vertices[f[1]];
    const Vector3d& c = mesh.vertices[f[2]];
    const Vector3d lo = a.cwiseMin(b).cwiseMin(c);
    const Vector3d hi = a.cwiseMax(b).cwiseMax(c);
    if ((hi.array() < lattice.origin.array()).any() ||
        (lo.array() > (lattice.origin.array() + lattice.side())).any()) {
      continue;
    }
    const auto [i0, i1] = cell_range(lo.x(), hi.x(), lattice.origin.x(), h, r);
    const auto [j0, j1] = cell_range(lo.y(), hi.y(), lattice.origin.y(), h, r);
    const auto [k0, k1] = cell_range(lo.z(), hi.z(), lattice.origin.z(), h, r);
    for (int k = k0; k <= k1; ++k) {
      for (int j = j0; j <= j1; ++j) {
        for (int i = i0; i <= i1; ++i) {
          if (grid.at(i, j, k)) continue;
          if (triangle_aabb_overlap(lattice.cell_center(i, j, k), half, a, b, c)) grid.set(i, j, k, true);
        }
      }
    }
  }
  if (fill == FillMode::Solid) flood_fill_interior(grid);
  return grid;
}

VoxelGrid voxelize(const TriangleMesh& mesh, int resolution, FillMode fill) {
  if (resolution < 2) throw Error(ErrorCode::InvalidArgument, "voxelize requires resolution >= 2");
  mesh.validate();
  return voxelize(mesh, GridSpec::bounding_cube(mesh.bounds(), resolution), fill);
}

VoxelGrid rasterize_boxes(const std::vector<OrientedBoxd>& boxes, const GridSpec& lattice, BoxRaster rule) {
  VoxelGrid grid(lattice);
  const int r = lattice.resolution;
  const double h = lattice.voxel_size;
  const Vector3d half = Vector3d::Constant(h / 2.0);
  for (const auto& box : boxes) {
    const AlignedBox3d bb = box.aabb();
    const auto [j0, j1] = cell_range(bb.min().y() - h, bb.max().y() + h, lattice.origin.y(), h, r);
    const auto [k0, k1] = cell_range(bb.min().z() - h, bb.max().z() + h, lattice.origin.z(), h, r);
    if (rule == BoxRaster::CellCenter) {
      for (int k = k0; k <= k1; ++k) {
        for (int j = j0; j <= j1; ++j) {
          const Vector3d c = lattice.cell_center(0, j, k);
          const auto interval = line_interval(box, Vector3d(0.0, c.y(), c.z()), 0);
          if (!interval) continue;
          const auto [first, last] = sample_range(lattice.origin.x(), h, r, interval->first, interval->second);
          for (int i = first; i < last; ++i) grid.set(i, j, k, true);
        }
      }
    } else {
      const auto [i0, i1] = cell_range(bb.min().x() - h, bb.max().x() + h, lattice.origin.x(), h, r);
      for (int k = k0; k <= k1; ++k) {
        for (int j = j0; j <= j1; ++j) {
          for (int i = i0; i <= i1; ++i) {
            if (grid.at(i, j, k)) continue;
            if (box_aabb_overlap(box, lattice.cell_center(i, j, k), half)) grid.set(i, j, k, true);
          }
        }
      }
    }
  }
  return grid;
}

// ---------------------------------------------------------------------------
// Voxel file format

void write_voxels(std::ostream& out, const VoxelGrid& grid) {
  char buf[128];
  out << "PRIMVOX 1\n";
  out << "resolution " << grid.resolution() << '\n';
  std::snprintf(buf, sizeof(buf), "origin %.17g %.17g %.17g\n", grid.origin().x(), grid.origin().y(),
                grid.origin().z());
  out << buf;
  std::snprintf(buf, sizeof(buf), "voxel_size %.17g\n", grid.voxel_size());
  out << buf;

  std::vector<std::size_t> runs;
  bool value = false;
  std::size_t run = 0;
  for (std::size_t idx = 0; idx < grid.size(); ++idx) {
    if (grid[idx] == value) {
      ++run;
    } else {
      runs.push_back(run);
      value = !value;
      run = 1;
    }
  }
  runs.push_back(run);
  out << "runs " << runs.size() << '\n';
  for (std::size_t i = 0; i < runs.size(); ++i) {
    out << runs[i] << ((i + 1) % 16 == 0 || i + 1 == runs.size() ? '\n' : ' ');
  }
}

VoxelGrid read_voxels(std::istream& in) {
  auto expect = [&](const char* key) {
    std::string tok;
    if (!(in >> tok) || tok != key) throw Error(ErrorCode::ParseError, std::string("voxel file: expected ") + key);
  };
  expect("PRIMVOX");
  int version = 0;
  if (!(in >> version) || version != 1) throw Error(ErrorCode::ParseError, "voxel file: unsupported version");
  GridSpec spec;
  expect("resolution");
  if (!(in >> spec.resolution) || spec.resolution < 1) throw Error(ErrorCode::ParseError, "voxel file: bad resolution");
  expect("origin");
  if (!(in >> spec.origin.x() >> spec.origin.y() >> spec.origin.z()))
    throw Error(ErrorCode::ParseError, "voxel file: bad origin");
  expect("voxel_size");
  if (!(in >> spec.voxel_size) || !(spec.voxel_size > 0)) throw Error(ErrorCode::ParseError, "voxel file: bad voxel_size");
  expect("runs");
  std::size_t n = 0;
  if (!(in >> n)) throw Error(ErrorCode::ParseError, "voxel file: bad run count");
  VoxelGrid grid(spec);
  std::size_t pos = 0;
  bool value = false;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t run = 0;
    if (!(in >> run)) throw Error(ErrorCode::ParseError, "voxel file: truncated runs");
    if (pos + run > grid.size()) throw Error(ErrorCode::ParseError, "voxel file: runs exceed grid size");
    for (std::size_t k = 0; k < run; ++k) grid.set(pos + k, value);
    pos += run;
    value = !value;
  }
  if (pos != grid.size()) throw Error(ErrorCode::ParseError, "voxel file: runs do not cover grid");
  return grid;
}

void save_voxels(const std::filesystem::path& path, const VoxelGrid& grid) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_voxels(out, grid);
}

VoxelGrid load_voxels(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_voxels(in);
}

// ---------------------------------------------------------------------------
// Point clouds

void PointCloud::append(const PointCloud& other) {
  points.insert(points.end(), other.points.begin(), other.points.end());
  normals.insert(normals.end(), other.normals.begin(), other.normals.end());
}

void PointCloud::validate(double tol) const {
  if (points.size() != normals.size()) throw Error(ErrorCode::InvalidArgument, "points/normals size mismatch");
  for (const auto& n : normals) {
    if (std::abs(n.norm() - 1.0) > tol) throw Error(ErrorCode::InvalidArgument, "normal is not unit length");
  }
}

PointCloud sample_surface_points(const TriangleMesh& mesh, int count, std::uint64_t seed) {
  if (count < 1) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
  mesh.validate();
  std::vector<double> areas(mesh.faces.size());
  for (std::size_t f = 0; f < areas.size(); ++f) areas[f] = mesh.face_area(f);
  if (!(std::accumulate(areas.begin(), areas.end(), 0.0) > 0)) {
    throw Error(ErrorCode::EmptyMesh, "mesh has zero surface area");
  }
  std::mt19937_64 rng(seed);
  std::discrete_distribution<std::size_t> pick(areas.begin(), areas.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PointCloud cloud;
  cloud.points.reserve(count);
  cloud.normals.reserve(count);
  for (int s = 0; s < count; ++s) {
    const std::size_t f = pick(rng);
    const double r1 = std::sqrt(unit(rng));
    const double r2 = unit(rng);
    const auto& t = mesh.faces[f];
    const Vector3d p = (1.0 - r1) * mesh.vertices[t[0]] + r1 * (1.0 - r2) * mesh.vertices[t[1]] +
                       r1 * r2 * mesh.vertices[t[2]];
    cloud.push_back(p, mesh.face_normal(f));
  }
  return cloud;
}

CanonicalFrame canonical_frame(const std::vector<Vector3d>& points) {
  if (points.size() < 4) throw Error(ErrorCode::DegenerateCloud, "need at least 4 points");
  const double n = static_cast<double>(points.size());
  Vector3d centroid = Vector3d::Zero();
  for (const auto& p : points) centroid += p;
  centroid /= n;
  Matrix3d cov = Matrix3d::Zero();
  for (const auto& p : points) {
    const Vector3d d = p - centroid;
    cov += d * d.transpose();
  }
  cov /= n;
  Eigen::SelfAdjointEigenSolver<Matrix3d> eig(cov);
  const Vector3d values = eig.eigenvalues();  // ascending
  if (!(values[2] > 0) || values[0] <= 1e-12 * values[2]) {
    throw Error(ErrorCode::DegenerateCloud, "covariance has rank < 3");
  }
  Matrix3d rot;
  for (int k = 0; k < 3; ++k) rot.row(k) = eig.eigenvectors().col(2 - k).transpose();

  std::array<bool, 3> tied{};
  for (int k = 0; k < 3; ++k) {
    double m3 = 0, scale = 0;
    for (const auto& p : points) {
      const double t = rot.row(k).dot(p - centroid);
      m3 += t * t * t;
      scale += std::abs(t * t * t);
    }
    tied[k] = std::abs(m3) <= 1e-9 * scale;
    if (!tied[k] && m3 < 0) rot.row(k) = -rot.row(k);
  }
  if (rot.determinant() < 0) {
    for (int k = 2; k >= 0; --k) {
      if (tied[k]) {
        rot.row(k) = -rot.row(k);
        break;
      }
    }
  }

  Vector3d lo = Vector3d::Constant(std::numeric_limits<double>::infinity());
  Vector3d hi = -lo;
  for (const auto& p : points) {
    const Vector3d q = rot * (p - centroid);
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const double longest = (hi - lo).maxCoeff();

  CanonicalFrame frame;
  frame.rotation = rot;
  frame.centroid = centroid;
  frame.scale = 1.0 / longest;
  frame.transform.linear() = frame.scale * rot;
  frame.transform.translation() = -frame.scale * (rot * centroid);
  return frame;
}

PointCloud transform_cloud(const PointCloud& cloud, const Eigen::Affine3d& t) {
  PointCloud out;
  out.points.reserve(cloud.size());
  out.normals.reserve(cloud.size());
  const Matrix3d normal_map = t.linear().inverse().transpose();
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    out.points.push_back(t * cloud.points[i]);
    out.normals.push_back((normal_map * cloud.normals[i]).normalized());
  }
  return out;
}

TriangleMesh transform_mesh(const TriangleMesh& mesh, const Eigen::Affine3d& t) {
  TriangleMesh out = mesh;
  for (auto& v : out.vertices) v = t * v;
  if (t.linear().determinant() < 0) {
    for (auto& f : out.faces) std::swap(f[1], f[2]);
  }
  return out;
}

std::pair<PointCloud, CanonicalFrame> canonical_align(const PointCloud& cloud) {
  CanonicalFrame frame = canonical_frame(cloud.points);
  return {transform_cloud(cloud, frame.transform), frame};
}

}  // namespace prim
