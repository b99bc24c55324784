#include "prim/codec.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>

namespace prim {

void PrimitiveParams::validate() const {
  if (!dims.allFinite() || (dims.array() <= 0).any()) throw Error(ErrorCode::InvalidArgument, "dims must be > 0");
  if (!(likelihood >= 0 && likelihood <= 1)) throw Error(ErrorCode::InvalidArgument, "likelihood must be in [0,1]");
  if (!translation.allFinite() || !rotation.allFinite() || !is_rotation(rotation, 1e-6))
    throw Error(ErrorCode::InvalidArgument, "rotation must be orthonormal with determinant +1");
}

OrientedBoxd PrimitiveParams::box() const {
  OrientedBoxd b;
  b.center = translation;
  b.axes = rotation;
  b.extents = dims / 2.0;
  return b;
}

std::array<double, 16> PrimitiveParams::flat() const {
  std::array<double, 16> v{};
  for (int k = 0; k < 3; ++k) {
    v[k] = dims[k];
    v[3 + k] = translation[k];
  }
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v[6 + 3 * r + c] = rotation(r, c);
  v[15] = likelihood;
  return v;
}

PrimitiveParams PrimitiveParams::from_flat(const std::array<double, 16>& v) {
  PrimitiveParams p;
  for (int k = 0; k < 3; ++k) {
    p.dims[k] = v[k];
    p.translation[k] = v[3 + k];
  }
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) p.rotation(r, c) = v[6 + 3 * r + c];
  p.likelihood = v[15];
  return p;
}

void PrimitiveSet::validate(int max_count) const {
  if (primitives.empty() || static_cast<int>(primitives.size()) > max_count)
    throw Error(ErrorCode::InvalidArgument, "primitive count must be in [1, " + std::to_string(max_count) + "]");
  for (const auto& p : primitives) p.validate();
}

std::vector<OrientedBoxd> PrimitiveSet::boxes() const {
  std::vector<OrientedBoxd> out;
  for (const auto& p : primitives) out.push_back(p.box());
  return out;
}

double energy_to_likelihood(double energy) {
  if (energy > 0) {
    const double e = std::exp(-energy);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(energy));
}

PrimitiveSet encode(const std::vector<OrientedBoxd>& boxes, const std::vector<double>& energies, int max_count) {
  if (boxes.empty()) throw Error(ErrorCode::EmptyInput, "no boxes to encode");
  if (energies.size() != boxes.size()) throw Error(ErrorCode::InvalidArgument, "one energy per box required");
  std::vector<int> order(boxes.size());
  std::iota(order.begin(), order.end(), 0);
  if (static_cast<int>(order.size()) > max_count) {
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return energies[a] < energies[b]; });
    order.resize(max_count);
    std::sort(order.begin(), order.end());
  }
  PrimitiveSet set;
  for (int i : order) {
    const OrientedBoxd& b = boxes[i];
    PrimitiveParams p;
    p.dims = 2.0 * b.extents;
    p.translation = b.center;
    p.rotation = b.axes;
    p.likelihood = energy_to_likelihood(energies[i]);
    p.validate();
    set.primitives.push_back(p);
  }
  return set;
}

std::vector<int> included_primitives(const PrimitiveSet& set, DecodeMode mode, std::uint64_t seed) {
  std::vector<int> out;
  std::mt19937_64 rng(seed);
  for (std::size_t i = 0; i < set.primitives.size(); ++i) {
    const double l = set.primitives[i].likelihood;
    const bool keep = mode == DecodeMode::Expected ? l >= 0.5 : std::bernoulli_distribution(l)(rng);
    if (keep) out.push_back(static_cast<int>(i));
  }
  return out;
}

VoxelGrid decode(const PrimitiveSet& set, const GridSpec& lattice, DecodeMode mode, std::uint64_t seed,
                 BoxRaster rule) {
  if (lattice.resolution < 8) throw Error(ErrorCode::InvalidArgument, "decode needs resolution >= 8");
  std::vector<OrientedBoxd> boxes;
  for (int i : included_primitives(set, mode, seed)) boxes.push_back(set.primitives[i].box());
  return rasterize_boxes(boxes, lattice, rule);
}

VoxelGrid decode(const PrimitiveSet& set, int resolution, DecodeMode mode, std::uint64_t seed) {
  if (set.primitives.empty()) throw Error(ErrorCode::EmptyInput, "empty primitive set");
  AlignedBox3d bounds = set.primitives.front().box().aabb();
  for (const auto& p : set.primitives) bounds.extend(p.box().aabb());
  return decode(set, GridSpec::bounding_cube(bounds, resolution, 0.0), mode, seed);
}

std::vector<OrientedBoxd> roundtrip(const std::vector<OrientedBoxd>& boxes) {
  return encode(boxes, std::vector<double>(boxes.size(), 0.0), static_cast<int>(boxes.size())).boxes();
}

double voxel_iou(const VoxelGrid& a, const VoxelGrid& b) {
  if (!a.spec().same_lattice(b.spec())) throw Error(ErrorCode::ResolutionMismatch, "grids are not registered");
  std::size_t inter = 0, uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    inter += a[i] && b[i];
    uni += a[i] || b[i];
  }
  return uni ? static_cast<double>(inter) / static_cast<double>(uni) : 1.0;
}

double roundtrip_iou(const std::vector<OrientedBoxd>& boxes, int resolution) {
  if (boxes.empty()) throw Error(ErrorCode::EmptyInput, "no boxes");
  AlignedBox3d bounds = boxes.front().aabb();
  for (const auto& b : boxes) bounds.extend(b.aabb());
  const GridSpec lattice = GridSpec::bounding_cube(bounds, resolution);
  // Energy 0 gives likelihood 0.5, so expected mode keeps every primitive.
  const PrimitiveSet set = encode(boxes, std::vector<double>(boxes.size(), 0.0), static_cast<int>(boxes.size()));
  return voxel_iou(decode(set, lattice), rasterize_boxes(boxes, lattice));
}

void write_primitives(std::ostream& out, const PrimitiveSet& set) {
  nlohmann::ordered_json j;
  j["primitives"] = nlohmann::ordered_json::array();
  for (const auto& p : set.primitives) {
    const auto v = p.flat();
    nlohmann::ordered_json e;
    e["dims"] = {v[0], v[1], v[2]};
    e["translation"] = {v[3], v[4], v[5]};
    e["rotation"] = std::vector<double>(v.begin() + 6, v.begin() + 15);
    e["likelihood"] = v[15];
    j["primitives"].push_back(e);
  }
  out << j.dump(2) << '\n';
}

PrimitiveSet read_primitives(std::istream& in) {
  PrimitiveSet set;
  try {
    const auto j = nlohmann::json::parse(in);
    for (const auto& e : j.at("primitives")) {
      std::array<double, 16> v{};
      const auto dims = e.at("dims").get<std::vector<double>>();
      const auto t = e.at("translation").get<std::vector<double>>();
      const auto r = e.at("rotation").get<std::vector<double>>();
      if (dims.size() != 3 || t.size() != 3 || r.size() != 9)
        throw Error(ErrorCode::ParseError, "primitive arrays must have 3, 3 and 9 entries");
      std::copy(dims.begin(), dims.end(), v.begin());
      std::copy(t.begin(), t.end(), v.begin() + 3);
      std::copy(r.begin(), r.end(), v.begin() + 6);
      v[15] = e.at("likelihood").get<double>();
      const PrimitiveParams p = PrimitiveParams::from_flat(v);
      p.validate();
      set.primitives.push_back(p);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return set;
}

void save_primitives(const std::filesystem::path& path, const PrimitiveSet& set) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_primitives(out, set);
}

PrimitiveSet load_primitives(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
  return read_primitives(in);
}

}  // namespace prim
