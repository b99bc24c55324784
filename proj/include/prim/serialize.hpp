#pragma once

#include "prim/potentials.hpp"

#include <filesystem>
#include <iosfwd>
#include <vector>

namespace prim {

// {"boxes": [{"center": [3], "axes": [[3],[3],[3]] (one axis per row),
//             "extents": [3], "source_regions": [...]}]}
void write_boxes_json(std::ostream& out, const std::vector<OrientedBoxd>& boxes);
std::vector<OrientedBoxd> read_boxes_json(std::istream& in);

// Cached per-shape costs: everything the solver needs, without clouds or grid.
void write_context_bundle(std::ostream& out, const ShapeContext& ctx);
ShapeContext read_context_bundle(std::istream& in);

// Boxes as closed OBJ meshes, one object per box.
void write_boxes_obj(std::ostream& out, const std::vector<OrientedBoxd>& boxes);
void save_boxes_obj(const std::filesystem::path& path, const std::vector<OrientedBoxd>& boxes);

}  // namespace prim
