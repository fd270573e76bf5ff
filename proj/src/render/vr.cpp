#include "cylsfm/render/vr.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "cylsfm/core/error.hpp"
#include "cylsfm/core/parallel.hpp"

namespace cylsfm {

namespace {

constexpr double kNear = 1e-6;
constexpr double kEdgeEps = 1e-9;

struct ScreenVertex {
  double x = 0.0;
  double y = 0.0;
  double depth = 0.0;  // depth-test value, positive
};

struct Target {
  RenderResult* out;
  int width;
  int height;
};

// Fills the pixels whose centers lie inside the screen triangle, keeping the
// nearest sample. Weights are divided by depth for perspective correctness.
void raster_triangle(const Target& t, const std::array<ScreenVertex, 3>& v,
                     const std::array<const Eigen::Vector3d*, 3>& color) {
  const double area = (v[1].x - v[0].x) * (v[2].y - v[0].y) - (v[2].x - v[0].x) * (v[1].y - v[0].y);
  if (std::abs(area) < 1e-14) return;
  const double min_x = std::min({v[0].x, v[1].x, v[2].x});
  const double max_x = std::max({v[0].x, v[1].x, v[2].x});
  const double min_y = std::min({v[0].y, v[1].y, v[2].y});
  const double max_y = std::max({v[0].y, v[1].y, v[2].y});
  const int c0 = std::max(0, static_cast<int>(std::ceil(min_x - kEdgeEps)));
  const int c1 = std::min(t.width - 1, static_cast<int>(std::floor(max_x + kEdgeEps)));
  const int r0 = std::max(0, static_cast<int>(std::ceil(min_y - kEdgeEps)));
  const int r1 = std::min(t.height - 1, static_cast<int>(std::floor(max_y + kEdgeEps)));
  RenderResult& out = *t.out;
  for (int r = r0; r <= r1; ++r)
    for (int c = c0; c <= c1; ++c) {
      std::array<double, 3> b{};
      for (int k = 0; k < 3; ++k) {
        const ScreenVertex& p = v[(k + 1) % 3];
        const ScreenVertex& q = v[(k + 2) % 3];
        b[k] = ((q.x - p.x) * (r - p.y) - (c - p.x) * (q.y - p.y)) / area;
      }
      if (b[0] < -kEdgeEps || b[1] < -kEdgeEps || b[2] < -kEdgeEps) continue;
      double inv = 0.0;
      std::array<double, 3> w{};
      for (int k = 0; k < 3; ++k) {
        w[k] = b[k] / v[k].depth;
        inv += w[k];
      }
      const double depth = 1.0 / inv;
      if (out.valid(r, c) != 0.0 && out.depth(r, c) <= depth) continue;
      out.depth(r, c) = depth;
      out.valid(r, c) = 1.0;
      for (int ch = 0; ch < 3; ++ch)
        out.image(r, c, ch) = (w[0] * (*color[0])[ch] + w[1] * (*color[1])[ch] + w[2] * (*color[2])[ch]) * depth;
    }
}

RenderResult blank(int rows, int cols) {
  return {Tensor(rows, cols, 3), Tensor(rows, cols, 1), Tensor(rows, cols, 1)};
}

std::vector<Eigen::Vector3d> to_eye(const Mesh& mesh, const Pose6& eye) {
  const RigidTransform world_to_eye = pose_to_transform(eye).inverse();
  std::vector<Eigen::Vector3d> p(mesh.vertices.size());
  for (std::size_t k = 0; k < p.size(); ++k) p[k] = world_to_eye.apply(mesh.vertices[k].position);
  return p;
}

void render_pinhole(const Mesh& mesh, const std::vector<Eigen::Vector3d>& pts, const PinholeCamera& cam,
                    RenderResult& out) {
  const Target t{&out, cam.width, cam.height};
  for (const auto& tri : mesh.triangles) {
    std::array<ScreenVertex, 3> sv;
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      const Eigen::Vector3d& p = pts[static_cast<std::size_t>(tri[k])];
      if (p.z() <= kNear) {
        ok = false;
        break;
      }
      sv[k] = {cam.f * p.x() / p.z() + cam.cx, cam.f * p.y() / p.z() + cam.cy, p.z()};
    }
    if (!ok) continue;
    raster_triangle(t, sv, {&mesh.vertices[tri[0]].color, &mesh.vertices[tri[1]].color, &mesh.vertices[tri[2]].color});
  }
}

void render_cylindrical(const Mesh& mesh, const std::vector<Eigen::Vector3d>& pts, const CylCamera& cam,
                        RenderResult& out) {
  const Target t{&out, cam.width, cam.height};
  const double px_per_rad = cam.width / cam.theta_span;
  const double period = kTwoPi * px_per_rad;  // one full turn in pixels
  const double mid = cam.theta_start + 0.5 * cam.theta_span;
  for (const auto& tri : mesh.triangles) {
    std::array<ScreenVertex, 3> sv;
    bool ok = true;
    for (int k = 0; k < 3; ++k) {
      const auto q = try_cyl_project(pts[static_cast<std::size_t>(tri[k])], kNear);
      if (!q) {
        ok = false;
        break;
      }
      // Azimuth relative to the camera's middle, in (-pi, pi].
      const double rel = wrap_angle(q->theta - mid);
      sv[k] = {(rel + 0.5 * cam.theta_span) * px_per_rad - 0.5, (q->h / cam.h_max + 1.0) * 0.5 * cam.height - 0.5,
               q->d};
    }
    if (!ok) continue;
    // Unwrap so the triangle is contiguous, relative to its first vertex.
    for (int k = 1; k < 3; ++k) {
      if (sv[k].x - sv[0].x > 0.5 * period) sv[k].x -= period;
      if (sv[0].x - sv[k].x > 0.5 * period) sv[k].x += period;
    }
    const std::array<const Eigen::Vector3d*, 3> col{&mesh.vertices[tri[0]].color, &mesh.vertices[tri[1]].color,
                                                    &mesh.vertices[tri[2]].color};
    raster_triangle(t, sv, col);
    if (!cam.wraps()) continue;
    // A triangle hanging over either end also appears at the other end.
    const double lo = std::min({sv[0].x, sv[1].x, sv[2].x});
    const double hi = std::max({sv[0].x, sv[1].x, sv[2].x});
    if (lo < -0.5 || hi > cam.width - 0.5) {
      const double shift = lo < -0.5 ? period : -period;
      auto moved = sv;
      for (auto& s : moved) s.x += shift;
      raster_triangle(t, moved, col);
    }
  }
}

}  // namespace

Mesh build_mesh(const Tensor& pano, const Tensor& depth, const CylCamera& cam) {
  cam.validate();
  require(pano.rows() == cam.height && pano.cols() == cam.width && pano.channels() == 3, ErrorCode::ShapeMismatch,
          "panorama does not match the camera");
  require(depth.rows() == cam.height && depth.cols() == cam.width && depth.channels() == 1,
          ErrorCode::ShapeMismatch, "depth does not match the camera");
  Mesh m;
  m.vertices.resize(static_cast<std::size_t>(cam.width) * cam.height);
  for (int j = 0; j < cam.height; ++j)
    for (int i = 0; i < cam.width; ++i) {
      const double d = depth(j, i);
      require(d > 0.0 && std::isfinite(d), ErrorCode::NonPositiveDepth, "mesh depth must be positive");
      Vertex& v = m.vertices[static_cast<std::size_t>(j) * cam.width + i];
      v.position = d * cyl_ray(i, j, cam);
      v.color = Eigen::Vector3d(pano(j, i, 0), pano(j, i, 1), pano(j, i, 2));
    }
  const int cols = cam.wraps() ? cam.width : cam.width - 1;
  for (int j = 0; j + 1 < cam.height; ++j)
    for (int i = 0; i < cols; ++i) {
      const int i1 = (i + 1) % cam.width;
      const int a = j * cam.width + i, b = j * cam.width + i1;
      const int c = (j + 1) * cam.width + i, d = (j + 1) * cam.width + i1;
      m.triangles.push_back({a, b, c});
      m.triangles.push_back({b, d, c});
    }
  return m;
}

void write_ply(const std::filesystem::path& path, const Mesh& mesh) {
  std::ofstream out(path, std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
  out << "ply\nformat ascii 1.0\nelement vertex " << mesh.vertices.size()
      << "\nproperty float x\nproperty float y\nproperty float z\n"
         "property uchar red\nproperty uchar green\nproperty uchar blue\nelement face "
      << mesh.triangles.size() << "\nproperty list uchar int vertex_indices\nend_header\n";
  char buf[128];
  for (const Vertex& v : mesh.vertices) {
    auto byte = [](double c) { return static_cast<int>(std::lround(std::clamp(c, 0.0, 1.0) * 255.0)); };
    std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g %d %d %d\n", v.position.x(), v.position.y(), v.position.z(),
                  byte(v.color.x()), byte(v.color.y()), byte(v.color.z()));
    out << buf;
  }
  for (const auto& t : mesh.triangles) out << "3 " << t[0] << ' ' << t[1] << ' ' << t[2] << '\n';
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
}

RenderResult render_view(const Mesh& mesh, const Pose6& eye, const VirtualCamera& camera) {
  const std::vector<Eigen::Vector3d> pts = to_eye(mesh, eye);
  if (const auto* pc = std::get_if<PinholeCamera>(&camera)) {
    pc->validate();
    RenderResult out = blank(pc->height, pc->width);
    render_pinhole(mesh, pts, *pc, out);
    return out;
  }
  const CylCamera& cc = std::get<CylCamera>(camera);
  cc.validate();
  RenderResult out = blank(cc.height, cc.width);
  render_cylindrical(mesh, pts, cc, out);
  return out;
}

StereoPair render_ods(const Mesh& mesh, double radius, const CylCamera& cam) {
  cam.validate();
  require(radius > 0.0, ErrorCode::BadArgument, "eye circle radius must be positive");
  double nearest = std::numeric_limits<double>::infinity();
  for (const Vertex& v : mesh.vertices)
    nearest = std::min(nearest, std::hypot(v.position.x(), v.position.z()));
  require(radius < nearest, ErrorCode::EyeInsideGeometry, "eye circle reaches the scene geometry");
  StereoPair pair{Tensor(cam.height, cam.width, 3), Tensor(cam.height, cam.width, 3), radius};
  const double col_span = cam.theta_span / cam.width;
  parallel_for(static_cast<std::size_t>(cam.width), [&](std::size_t col) {
    const int c = static_cast<int>(col);
    const double theta = pix_to_cyl(c, 0, cam).theta;
    CylCamera column = cam;
    column.width = 1;
    column.theta_span = col_span;
    column.theta_start = cam.theta_start + col_span * c;
    const Eigen::Vector3d tangent(std::cos(theta), 0.0, -std::sin(theta));
    for (int side : {-1, 1}) {
      Pose6 eye;
      eye.t = side * radius * tangent;
      const RenderResult r = render_view(mesh, eye, column);
      Tensor& dst = side > 0 ? pair.right : pair.left;
      for (int j = 0; j < cam.height; ++j)
        for (int k = 0; k < 3; ++k) dst(j, c, k) = r.image(j, 0, k);
    }
  });
  return pair;
}

Tensor anaglyph(const StereoPair& pair) {
  require(pair.left.same_shape(pair.right) && pair.left.channels() == 3, ErrorCode::ShapeMismatch,
          "stereo panoramas must be RGB images of one size");
  auto luma = [](const Tensor& t, int r, int c) { return 0.299 * t(r, c, 0) + 0.587 * t(r, c, 1) + 0.114 * t(r, c, 2); };
  Tensor out(pair.left.rows(), pair.left.cols(), 3);
  for (int r = 0; r < out.rows(); ++r)
    for (int c = 0; c < out.cols(); ++c) {
      const double right = luma(pair.right, r, c);
      out(r, c, 0) = luma(pair.left, r, c);
      out(r, c, 1) = right;
      out(r, c, 2) = right;
    }
  return out;
}

}  // namespace cylsfm
