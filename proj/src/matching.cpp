#include "prim/matching.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace prim {

ShapeDescriptor shape_descriptor(const VoxelGrid& grid, std::string shape_id) {
  constexpr int cells = kDescriptorCells;
  constexpr int sub = 4;
  ShapeDescriptor out;
  out.shape_id = std::move(shape_id);
  out.vector = Eigen::VectorXd::Zero(cells * cells * cells);

  const int r = grid.resolution();
  std::vector<Vector3d> occupied;
  for (int k = 0; k < r; ++k)
    for (int j = 0; j < r; ++j)
      for (int i = 0; i < r; ++i)
        if (grid.at(i, j, k)) occupied.push_back(grid.cell_center(i, j, k));
  if (occupied.empty()) return out;

  Vector3d centroid = Vector3d::Zero();
  for (const auto& p : occupied) centroid += p;
  centroid /= static_cast<double>(occupied.size());
  Matrix3d rotation = Matrix3d::Identity();  // rows: canonical axes
  try {
    const CanonicalFrame frame = canonical_frame(occupied);
    rotation = frame.rotation;
    centroid = frame.centroid;
  } catch (const Error& e) {
    if (e.code() != ErrorCode::DegenerateCloud) throw;
  }
  {
    // Isotropic shapes have no preferred axes; keep the grid's.
    Matrix3d cov = Matrix3d::Zero();
    for (const auto& p : occupied) cov += (p - centroid) * (p - centroid).transpose();
    const Vector3d values = Eigen::SelfAdjointEigenSolver<Matrix3d>(cov).eigenvalues();
    if (values[2] - values[0] <= 1e-6 * values[2]) rotation = Matrix3d::Identity();
  }

  Vector3d lo = Vector3d::Constant(std::numeric_limits<double>::infinity());
  Vector3d hi = -lo;
  for (const auto& p : occupied) {
    const Vector3d q = rotation * (p - centroid);
    lo = lo.cwiseMin(q);
    hi = hi.cwiseMax(q);
  }
  const double half = 0.5 * grid.voxel_size();
  lo.array() -= half;
  hi.array() += half;
  const Vector3d step = (hi - lo) / (cells * sub);

  for (int ck = 0; ck < cells; ++ck)
    for (int cj = 0; cj < cells; ++cj)
      for (int ci = 0; ci < cells; ++ci) {
        int hits = 0;
        for (int sk = 0; sk < sub; ++sk)
          for (int sj = 0; sj < sub; ++sj)
            for (int si = 0; si < sub; ++si) {
              const Vector3d idx(ci * sub + si + 0.5, cj * sub + sj + 0.5, ck * sub + sk + 0.5);
              const Vector3d q = lo + idx.cwiseProduct(step);
              if (grid.occupied_at(centroid + rotation.transpose() * q)) ++hits;
            }
        out.vector[ci + cells * (cj + cells * ck)] = hits / double(sub * sub * sub);
      }
  return out;
}

std::vector<std::string> knn_shapes(const ShapeDescriptor& query, const std::vector<ShapeDescriptor>& dataset,
                                    int k) {
  if (k < 1) throw Error(ErrorCode::InvalidArgument, "k must be >= 1");
  std::vector<std::pair<double, const std::string*>> ranked;
  for (const auto& d : dataset) {
    if (d.shape_id == query.shape_id) continue;
    if (d.vector.size() != query.vector.size())
      throw Error(ErrorCode::InvalidArgument, "descriptor length mismatch for " + d.shape_id);
    ranked.emplace_back((d.vector - query.vector).squaredNorm(), &d.shape_id);
  }
  if (static_cast<int>(ranked.size()) < k)
    throw Error(ErrorCode::InsufficientDataset,
                "need " + std::to_string(k) + " other shapes, have " + std::to_string(ranked.size()));
  std::sort(ranked.begin(), ranked.end(), [](const auto& a, const auto& b) {
    if (a.first != b.first) return a.first < b.first;
    return *a.second < *b.second;
  });
  std::vector<std::string> out;
  for (int i = 0; i < k; ++i) out.push_back(*ranked[i].second);
  return out;
}

std::vector<ShapeDescriptor> read_features(std::istream& in) {
  std::vector<ShapeDescriptor> out;
  std::string line;
  int line_no = 0;
  long dim = -1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream ss(line);
    ShapeDescriptor d;
    if (!(ss >> d.shape_id)) continue;
    std::vector<double> values;
    std::string token;
    while (ss >> token) {
      try {
        std::size_t used = 0;
        values.push_back(std::stod(token, &used));
        if (used != token.size()) throw std::invalid_argument(token);
      } catch (const std::exception&) {
        throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": bad value '" + token + "'");
      }
    }
    if (values.empty()) throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": no values");
    if (dim >= 0 && static_cast<long>(values.size()) != dim)
      throw Error(ErrorCode::ParseError, "line " + std::to_string(line_no) + ": inconsistent dimension");
    dim = static_cast<long>(values.size());
    d.vector = Eigen::Map<Eigen::VectorXd>(values.data(), dim);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<ShapeDescriptor> load_features(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_features(in);
}

void write_features(std::ostream& out, const std::vector<ShapeDescriptor>& descriptors) {
  const auto old = out.precision(17);
  for (const auto& d : descriptors) {
    out << d.shape_id;
    for (Eigen::Index i = 0; i < d.vector.size(); ++i) out << ' ' << d.vector[i];
    out << '\n';
  }
  out.precision(old);
}

double MatchingResult::total() const {
  double s = 0;
  for (const auto& m : matches) s += m.weight;
  return s;
}

MatchingResult bipartite_match(const Eigen::MatrixXd& weights) {
  if (!weights.allFinite()) throw Error(ErrorCode::NonFiniteWeight, "matching weights must be finite");
  const int rows = static_cast<int>(weights.rows());
  const int cols = static_cast<int>(weights.cols());
  MatchingResult result;
  result.z_p.assign(rows, 0.0);
  result.z_q.assign(cols, 0.0);
  if (rows == 0 || cols == 0) {
    for (int p = 0; p < rows; ++p) result.exposed_left.push_back(p);
    for (int q = 0; q < cols; ++q) result.exposed_right.push_back(q);
    return result;
  }
  const int n = std::max(rows, cols);
  auto cost = [&](int i, int j) { return (i < rows && j < cols) ? weights(i, j) : 0.0; };

  // Shortest augmenting paths with potentials u (rows) and v (columns), 1-based;
  // column 0 is the virtual root.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
  std::vector<int> match_col(n + 1, 0), way(n + 1, 0);
  std::vector<char> used(n + 1);
  for (int i = 1; i <= n; ++i) {
    match_col[0] = i;
    int j0 = 0;
    std::fill(minv.begin(), minv.end(), inf);
    std::fill(used.begin(), used.end(), 0);
    do {
      used[j0] = 1;
      const int i0 = match_col[j0];
      double delta = inf;
      int j1 = 0;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) minv[j] = cur, way[j] = j0;
        if (minv[j] < delta) delta = minv[j], j1 = j;
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match_col[j0] != 0);
    do {
      const int j1 = way[j0];
      match_col[j0] = match_col[j1];
      j0 = j1;
    } while (j0);
  }

  std::vector<int> row_to_col(n, -1);
  for (int j = 1; j <= n; ++j) row_to_col[match_col[j] - 1] = j - 1;
  for (int p = 0; p < rows; ++p) result.z_p[p] = u[p + 1];
  for (int q = 0; q < cols; ++q) result.z_q[q] = v[q + 1];
  std::vector<char> right_matched(cols, 0);
  for (int p = 0; p < rows; ++p) {
    const int q = row_to_col[p];
    if (q < cols) {
      result.matches.push_back({p, q, weights(p, q)});
      right_matched[q] = 1;
    } else {
      result.exposed_left.push_back(p);
    }
  }
  for (int q = 0; q < cols; ++q) {
    if (!right_matched[q]) result.exposed_right.push_back(q);
  }
  return result;
}

std::vector<std::vector<CoocEntry>> build_cooccurrence(
    const std::vector<OrientedBoxd>& proposals, const std::vector<std::vector<OrientedBoxd>>& neighbor_primitives,
    int iou_resolution) {
  std::vector<std::vector<CoocEntry>> table(proposals.size());
  for (std::size_t nb = 0; nb < neighbor_primitives.size(); ++nb) {
    const auto& prims = neighbor_primitives[nb];
    if (prims.empty() || proposals.empty()) continue;
    Eigen::MatrixXd iou(proposals.size(), prims.size());
    for (std::size_t i = 0; i < proposals.size(); ++i)
      for (std::size_t j = 0; j < prims.size(); ++j) iou(i, j) = cuboid_iou(proposals[i], prims[j], iou_resolution);
    const MatchingResult m = bipartite_match(-iou);
    for (const auto& e : m.matches) {
      // A zero-IoU pairing carries no evidence; treat the proposal as exposed.
      if (iou(e.p, e.q) <= 0) continue;
      table[e.p].push_back({static_cast<int>(nb), e.q, iou(e.p, e.q)});
    }
  }
  return table;
}

std::vector<std::vector<CoocEntry>> build_cooccurrence(
    const ShapeContext& ctx, const std::vector<std::vector<OrientedBoxd>>& neighbor_primitives, int iou_resolution) {
  std::vector<OrientedBoxd> canonical;
  canonical.reserve(ctx.proposals.size());
  for (const auto& b : ctx.proposals) canonical.push_back(transform_box(b, ctx.canonical.transform));
  return build_cooccurrence(canonical, neighbor_primitives, iou_resolution);
}

}  // namespace prim
