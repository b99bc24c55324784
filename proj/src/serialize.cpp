#include "prim/serialize.hpp"

#include "prim/shape_io.hpp"

#include <json.hpp>

#include <fstream>

namespace prim {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

ordered_json vec(const Vector3d& v) { return {v.x(), v.y(), v.z()}; }

Vector3d to_vec(const json& j) {
  if (!j.is_array() || j.size() != 3) throw Error(ErrorCode::ParseError, "expected a 3-vector");
  return Vector3d(j[0].get<double>(), j[1].get<double>(), j[2].get<double>());
}

ordered_json box_json(const OrientedBoxd& b) {
  ordered_json e;
  e["center"] = vec(b.center);
  e["axes"] = {vec(b.axes.col(0)), vec(b.axes.col(1)), vec(b.axes.col(2))};
  e["extents"] = vec(b.extents);
  e["source_regions"] = b.source_regions;
  return e;
}

OrientedBoxd box_from_json(const json& e) {
  OrientedBoxd b;
  b.center = to_vec(e.at("center"));
  const auto& axes = e.at("axes");
  if (!axes.is_array() || axes.size() != 3) throw Error(ErrorCode::ParseError, "axes must have three rows");
  for (int k = 0; k < 3; ++k) b.axes.col(k) = to_vec(axes[k]);
  b.extents = to_vec(e.at("extents"));
  if (e.contains("source_regions")) b.source_regions = e.at("source_regions").get<std::vector<int>>();
  if (!is_rotation(b.axes, 1e-6)) throw Error(ErrorCode::ParseError, "box axes are not a rotation");
  if ((b.extents.array() <= 0).any()) throw Error(ErrorCode::ParseError, "box extents must be positive");
  return b;
}

template <typename F>
auto parse_guard(F&& f) {
  try {
    return f();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
}

}  // namespace

void write_boxes_json(std::ostream& out, const std::vector<OrientedBoxd>& boxes) {
  ordered_json j;
  j["boxes"] = ordered_json::array();
  for (const auto& b : boxes) j["boxes"].push_back(box_json(b));
  out << j.dump(2) << '\n';
}

std::vector<OrientedBoxd> read_boxes_json(std::istream& in) {
  return parse_guard([&] {
    const json j = json::parse(in);
    std::vector<OrientedBoxd> out;
    for (const auto& e : j.at("boxes")) out.push_back(box_from_json(e));
    return out;
  });
}

void write_context_bundle(std::ostream& out, const ShapeContext& ctx) {
  ordered_json j;
  j["shape_id"] = ctx.shape_id;
  j["diagonal"] = ctx.diagonal;
  j["proposals"] = ordered_json::array();
  for (const auto& b : ctx.proposals) j["proposals"].push_back(box_json(b));
  j["unary"] = ordered_json::array();
  for (const auto& c : ctx.unary) j["unary"].push_back(std::vector<double>(c.data(), c.data() + 6));
  j["regions"] = ordered_json::array();
  for (const auto& r : ctx.regions) {
    ordered_json e;
    e["id"] = r.id;
    e["view_id"] = r.view_id;
    e["area"] = r.area;
    e["mean_normal"] = vec(r.mean_normal);
    e["point_count"] = r.point_indices.size();
    j["regions"].push_back(e);
  }
  j["coverage_costs"] = ctx.coverage_costs;
  j["overlap"] = ordered_json::array();
  for (const auto& p : ctx.overlap) j["overlap"].push_back({p.i, p.j, p.cost});
  j["region_boxes"] = ctx.region_boxes;
  j["cooc"] = ordered_json::array();
  for (const auto& t : ctx.cooc) {
    ordered_json list = ordered_json::array();
    for (const auto& e : t) list.push_back({{"neighbor", e.neighbor}, {"primitive", e.primitive}, {"iou", e.iou}});
    j["cooc"].push_back(list);
  }
  out << j.dump(1) << '\n';
}

ShapeContext read_context_bundle(std::istream& in) {
  ShapeContext ctx = parse_guard([&] {
    const json j = json::parse(in);
    ShapeContext c;
    c.shape_id = j.at("shape_id").get<std::string>();
    c.diagonal = j.at("diagonal").get<double>();
    for (const auto& e : j.at("proposals")) c.proposals.push_back(box_from_json(e));
    for (const auto& e : j.at("unary")) {
      const auto v = e.get<std::vector<double>>();
      if (v.size() != 6) throw Error(ErrorCode::ParseError, "unary entries need 6 costs");
      c.unary.push_back(Eigen::Map<const Vector6d>(v.data()));
    }
    for (const auto& e : j.at("regions")) {
      SegmentedRegion r;
      r.id = e.at("id").get<int>();
      r.view_id = e.at("view_id").get<int>();
      r.area = e.at("area").get<double>();
      r.mean_normal = to_vec(e.at("mean_normal"));
      c.regions.push_back(r);
    }
    c.coverage_costs = j.at("coverage_costs").get<std::vector<double>>();
    for (const auto& e : j.at("overlap")) c.overlap.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<double>()});
    c.region_boxes = j.at("region_boxes").get<std::vector<std::vector<int>>>();
    for (const auto& t : j.at("cooc")) {
      std::vector<CoocEntry> list;
      for (const auto& e : t)
        list.push_back({e.at("neighbor").get<int>(), e.at("primitive").get<int>(), e.at("iou").get<double>()});
      c.cooc.push_back(std::move(list));
    }
    return c;
  });
  ctx.validate();
  return ctx;
}

void write_boxes_obj(std::ostream& out, const std::vector<OrientedBoxd>& boxes) {
  const auto old = out.precision(17);
  std::size_t base = 1;
  for (std::size_t b = 0; b < boxes.size(); ++b) {
    const TriangleMesh m = box_mesh(boxes[b]);
    out << "o box_" << b << '\n';
    for (const auto& v : m.vertices) out << "v " << v.x() << ' ' << v.y() << ' ' << v.z() << '\n';
    for (const auto& f : m.faces) out << "f " << base + f[0] << ' ' << base + f[1] << ' ' << base + f[2] << '\n';
    base += m.vertices.size();
  }
  out.precision(old);
}

void save_boxes_obj(const std::filesystem::path& path, const std::vector<OrientedBoxd>& boxes) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  write_boxes_obj(out, boxes);
}

}  // namespace prim
