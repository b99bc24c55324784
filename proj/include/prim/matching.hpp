#pragma once

#include "prim/potentials.hpp"
#include "prim/shape_io.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace prim {

struct ShapeDescriptor {
  std::string shape_id;
  Eigen::VectorXd vector;
};

inline constexpr int kDescriptorCells = 8;

// Occupancy fractions of the canonically aligned shape pooled onto an 8^3
// lattice spanning its canonical bounds (4^3 sub-samples per cell). Empty grid
// gives the zero vector; rank-deficient shapes keep the grid's own axes.
ShapeDescriptor shape_descriptor(const VoxelGrid& grid, std::string shape_id = {});

// k nearest descriptors by Euclidean distance, skipping the query's id; ties
// go to the smaller id. Throws InsufficientDataset when fewer than k others.
std::vector<std::string> knn_shapes(const ShapeDescriptor& query, const std::vector<ShapeDescriptor>& dataset,
                                    int k);

// "shape_id v1 ... vD" per line; blank lines and '#' comments are skipped.
std::vector<ShapeDescriptor> read_features(std::istream& in);
std::vector<ShapeDescriptor> load_features(const std::filesystem::path& path);
void write_features(std::ostream& out, const std::vector<ShapeDescriptor>& descriptors);

struct Match {
  int p = 0, q = 0;
  double weight = 0;
};

struct MatchingResult {
  std::vector<Match> matches;  // sorted by p
  std::vector<double> z_p, z_q;
  std::vector<int> exposed_left, exposed_right;

  double total() const;
};

// Minimum-weight assignment by the primal-dual (Hungarian) method. Rectangular
// inputs are padded with zero-weight dummies; nodes matched to a dummy are
// exposed. Duals satisfy z_p + z_q <= w_pq with equality on every match.
MatchingResult bipartite_match(const Eigen::MatrixXd& weights);

// t_i for each proposal: for every neighbour, proposals matched (w = -IoU) to a
// neighbour primitive with positive IoU. All boxes must already be in their
// shapes' canonical frames.
std::vector<std::vector<CoocEntry>> build_cooccurrence(
    const std::vector<OrientedBoxd>& proposals, const std::vector<std::vector<OrientedBoxd>>& neighbor_primitives,
    int iou_resolution = 64);

// Same, mapping the context's proposals through ctx.canonical first.
std::vector<std::vector<CoocEntry>> build_cooccurrence(
    const ShapeContext& ctx, const std::vector<std::vector<OrientedBoxd>>& neighbor_primitives,
    int iou_resolution = 64);

}  // namespace prim
