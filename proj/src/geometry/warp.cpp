#include "omniview/geometry/warp.hpp"

#include <limits>

namespace ov::geo {

PointSet unproject(const std::vector<float>& depth, int height, int width, const Camera& camera) {
    camera.validate();
    if (depth.size() != std::size_t(height) * width)
        throw ContractError("unproject: depth size does not match dimensions");

    PointSet out;
    out.points.reserve(depth.size());
    out.pixel_index.reserve(depth.size());
    for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
            double z = depth[std::size_t(i) * width + j];
            if (!(z > 0) || !std::isfinite(z))
                throw InvalidInputError("unproject: depth must be finite and > 0");
            double u = (j + 0.5) / width;
            double v = (i + 0.5) / height;
            // z-depth convention: camera-frame point is linear in depth
            Vec3 p_cam{(u - 0.5) / camera.fx * z, (v - 0.5) / camera.fy * z, z};
            out.points.push_back(camera.cam_to_world(p_cam));
            out.pixel_index.push_back(std::uint32_t(i) * width + j);
        }
    }
    return out;
}

Projected reproject(const std::vector<Vec3>& points, const Camera& camera, int height, int width) {
    camera.validate();
    Projected out;
    const std::size_t n = points.size();
    out.px.resize(n);
    out.py.resize(n);
    out.z.resize(n);
    out.valid.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const Vec3& p = points[k];
        if (!std::isfinite(p.x) || !std::isfinite(p.y) || !std::isfinite(p.z))
            throw InvalidInputError("reproject: non-finite point");
        Vec3 c = camera.world_to_cam(p);
        out.z[k] = c.z;
        if (c.z <= 1e-6) {
            out.valid[k] = 0;
            out.px[k] = out.py[k] = 0;
            continue;
        }
        out.valid[k] = 1;
        double u = camera.fx * (c.x / c.z) + 0.5;  // normalized [0,1]
        double v = camera.fy * (c.y / c.z) + 0.5;
        out.px[k] = u * width - 0.5;   // continuous pixel coordinates
        out.py[k] = v * height - 0.5;  // (pixel centers at integers)
    }
    return out;
}

WarpedImage rasterize_points(const Projected& proj, const std::vector<float>& colors,
                             const std::vector<std::uint32_t>& pixel_index, int height, int width) {
    if (proj.px.size() != pixel_index.size())
        throw ContractError("rasterize_points: projected/pixel_index size mismatch");

    WarpedImage img;
    img.height = height;
    img.width = width;
    img.rgb.assign(std::size_t(height) * width * 3, 0.f);
    img.mask.assign(std::size_t(height) * width, 0.f);
    std::vector<double> zbuf(std::size_t(height) * width, std::numeric_limits<double>::infinity());

    for (std::size_t k = 0; k < proj.px.size(); ++k) {
        if (!proj.valid[k]) continue;
        long jx = std::lround(proj.px[k]);
        long iy = std::lround(proj.py[k]);
        if (jx < 0 || jx >= width || iy < 0 || iy >= height) continue;
        std::size_t dst = std::size_t(iy) * width + jx;
        if (proj.z[k] < zbuf[dst]) {
            zbuf[dst] = proj.z[k];
            std::size_t src = pixel_index[k];
            img.rgb[dst * 3 + 0] = colors[src * 3 + 0];
            img.rgb[dst * 3 + 1] = colors[src * 3 + 1];
            img.rgb[dst * 3 + 2] = colors[src * 3 + 2];
            img.mask[dst] = 1.f;
        }
    }
    return img;
}

}  // namespace ov::geo
