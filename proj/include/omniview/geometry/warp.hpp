#pragma once

#include <vector>

#include "omniview/geometry/camera.hpp"

namespace ov::geo {

// World points unprojected from a depth map, one per pixel in row-major
// order; pixel_index carries the source pixel so callers can look colors up.
struct PointSet {
    std::vector<Vec3> points;
    std::vector<std::uint32_t> pixel_index;
};

// Depth is z-depth along the optical axis (camera-frame z), not ray length.
// All depths must be finite and > 0.
PointSet unproject(const std::vector<float>& depth, int height, int width, const Camera& camera);

// Continuous image-plane samples for a set of world points.
struct Projected {
    std::vector<double> px;       // continuous column coordinate
    std::vector<double> py;      // continuous row coordinate
    std::vector<double> z;       // camera-frame z
    std::vector<std::uint8_t> valid;  // 0 when behind the camera (z <= 1e-6)
};

Projected reproject(const std::vector<Vec3>& points, const Camera& camera, int height, int width);

// Z-buffer rasterization of projected samples carrying RGB; nearest z wins.
// Output: rgb [H,W,3] (0 where nothing landed) and mask [H,W] (1 = covered).
struct WarpedImage {
    int height = 0;
    int width = 0;
    std::vector<float> rgb;
    std::vector<float> mask;
};

WarpedImage rasterize_points(const Projected& proj, const std::vector<float>& colors,
                             const std::vector<std::uint32_t>& pixel_index, int height, int width);

}  // namespace ov::geo
