#pragma once

#include "prim/shape_io.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

namespace prim {

// One primitive as 15 shape scalars plus an existence likelihood.
struct PrimitiveParams {
  Vector3d dims = Vector3d::Ones();          // full side lengths along the box axes
  Vector3d translation = Vector3d::Zero();   // box centre
  Matrix3d rotation = Matrix3d::Identity();  // columns are the box axes
  double likelihood = 1.0;

  // Throws InvalidArgument unless dims > 0, likelihood in [0,1] and rotation is
  // a proper rotation within 1e-6.
  void validate() const;
  OrientedBoxd box() const;
  // dims, translation, rotation (row-major), likelihood.
  std::array<double, 16> flat() const;
  static PrimitiveParams from_flat(const std::array<double, 16>& values);
};

inline constexpr int kMaxPrimitives = 6;

struct PrimitiveSet {
  std::vector<PrimitiveParams> primitives;

  void validate(int max_count = kMaxPrimitives) const;
  std::vector<OrientedBoxd> boxes() const;
};

double energy_to_likelihood(double energy);

// Keeps the max_count lowest-energy boxes (original order preserved) and maps
// energy e to likelihood 1 / (1 + exp(e)). Throws EmptyInput.
PrimitiveSet encode(const std::vector<OrientedBoxd>& boxes, const std::vector<double>& energies,
                    int max_count = kMaxPrimitives);

enum class DecodeMode { Expected, Sampled };

// Expected mode keeps primitives with likelihood >= 0.5; sampled mode draws
// each from a Bernoulli(likelihood) seeded by `seed`.
std::vector<int> included_primitives(const PrimitiveSet& set, DecodeMode mode, std::uint64_t seed);

VoxelGrid decode(const PrimitiveSet& set, const GridSpec& lattice, DecodeMode mode = DecodeMode::Expected,
                 std::uint64_t seed = 0, BoxRaster rule = BoxRaster::CellCenter);
// Lattice: tight bounding cube of all primitives.
VoxelGrid decode(const PrimitiveSet& set, int resolution, DecodeMode mode = DecodeMode::Expected,
                 std::uint64_t seed = 0);

// Boxes after encode/decode at the parameter level.
std::vector<OrientedBoxd> roundtrip(const std::vector<OrientedBoxd>& boxes);
// Voxel IoU of decode(encode(boxes)) against direct rasterisation of the boxes.
double roundtrip_iou(const std::vector<OrientedBoxd>& boxes, int resolution = 64);

double voxel_iou(const VoxelGrid& a, const VoxelGrid& b);

// {"primitives": [{"dims": [3], "translation": [3], "rotation": [9], "likelihood": x}, ...]}
void write_primitives(std::ostream& out, const PrimitiveSet& set);
PrimitiveSet read_primitives(std::istream& in);
void save_primitives(const std::filesystem::path& path, const PrimitiveSet& set);
PrimitiveSet load_primitives(const std::filesystem::path& path);

}  // namespace prim
