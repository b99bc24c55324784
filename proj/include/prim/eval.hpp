#pragma once

#include "prim/shape_io.hpp"

#include <vector>

namespace prim {

struct VoxelMetrics {
  double recall = 0, precision = 0, accuracy = 0, f_measure = 0;
  long tp = 0, fp = 0, fn = 0, tn = 0;
  // False when the ratio's denominator was zero (value then reported as 0).
  bool recall_defined = false, precision_defined = false, f_measure_defined = false;
};

// Harmonic mean; 0 when precision + recall is 0.
double f_measure(double precision, double recall);

// Occupied = positive. Accuracy counts true negatives. Throws
// ResolutionMismatch unless both grids share a lattice.
VoxelMetrics voxel_metrics(const VoxelGrid& predicted, const VoxelGrid& truth);

enum class EvalFrame { Canonical, Model };

struct EvalOptions {
  int resolution = 50;
  FillMode truth_fill = FillMode::Hollow;
  BoxRaster primitive_raster = BoxRaster::CellOverlap;
  EvalFrame frame = EvalFrame::Canonical;
  int frame_samples = 20000;  // surface samples defining the canonical frame
};

struct EvalGrids {
  VoxelGrid predicted, truth;
};

// Both grids on the bounding cube of the shape (in the chosen frame).
EvalGrids evaluation_grids(const TriangleMesh& shape, const std::vector<OrientedBoxd>& primitives,
                           const EvalOptions& options = {});
VoxelMetrics evaluate_shape(const TriangleMesh& shape, const std::vector<OrientedBoxd>& primitives,
                            const EvalOptions& options = {});

// Frame from area-weighted surface samples (fixed seed), shared by evaluation
// and co-occurrence.
CanonicalFrame shape_canonical_frame(const TriangleMesh& shape, int samples = 20000);

}  // namespace prim
