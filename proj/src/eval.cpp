#include "prim/eval.hpp"

#include "prim/codec.hpp"

namespace prim {

double f_measure(double precision, double recall) {
  const double s = precision + recall;
  return s > 0 ? 2.0 * precision * recall / s : 0.0;
}

VoxelMetrics voxel_metrics(const VoxelGrid& predicted, const VoxelGrid& truth) {
  if (predicted.resolution() != truth.resolution() || !predicted.spec().same_lattice(truth.spec()))
    throw Error(ErrorCode::ResolutionMismatch, "predicted and truth grids are not registered");
  VoxelMetrics m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    const bool p = predicted[i], t = truth[i];
    if (p && t) ++m.tp;
    else if (p) ++m.fp;
    else if (t) ++m.fn;
    else ++m.tn;
  }
  const long total = m.tp + m.fp + m.fn + m.tn;
  if (m.tp + m.fn > 0) {
    m.recall = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fn);
    m.recall_defined = true;
  }
  if (m.tp + m.fp > 0) {
    m.precision = static_cast<double>(m.tp) / static_cast<double>(m.tp + m.fp);
    m.precision_defined = true;
  }
  if (total > 0) m.accuracy = static_cast<double>(m.tp + m.tn) / static_cast<double>(total);
  if (m.precision + m.recall > 0) {
    m.f_measure = f_measure(m.precision, m.recall);
    m.f_measure_defined = true;
  }
  return m;
}

CanonicalFrame shape_canonical_frame(const TriangleMesh& shape, int samples) {
  return canonical_frame(sample_surface_points(shape, samples, 0).points);
}

EvalGrids evaluation_grids(const TriangleMesh& shape, const std::vector<OrientedBoxd>& primitives,
                           const EvalOptions& options) {
  shape.validate();
  TriangleMesh mesh = shape;
  std::vector<OrientedBoxd> boxes = primitives;
  if (options.frame == EvalFrame::Canonical) {
    const CanonicalFrame frame = shape_canonical_frame(shape, options.frame_samples);
    mesh = transform_mesh(shape, frame.transform);
    for (auto& b : boxes) b = transform_box(b, frame.transform);
  }
  const GridSpec lattice = GridSpec::bounding_cube(mesh.bounds(), options.resolution);
  EvalGrids g;
  g.truth = voxelize(mesh, lattice, options.truth_fill);
  if (boxes.empty()) {
    g.predicted = VoxelGrid(lattice);
  } else {
    // Every selected primitive is decoded as present.
    const PrimitiveSet set = encode(boxes, std::vector<double>(boxes.size(), 0.0), static_cast<int>(boxes.size()));
    g.predicted = decode(set, lattice, DecodeMode::Expected, 0, options.primitive_raster);
  }
  return g;
}

VoxelMetrics evaluate_shape(const TriangleMesh& shape, const std::vector<OrientedBoxd>& primitives,
                            const EvalOptions& options) {
  const EvalGrids g = evaluation_grids(shape, primitives, options);
  return voxel_metrics(g.predicted, g.truth);
}

}  // namespace prim
