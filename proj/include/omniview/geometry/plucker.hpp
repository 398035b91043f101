#pragma once

#include <vector>

#include "omniview/geometry/camera.hpp"

namespace ov::geo {

// Per-pixel 6-channel ray encoding r = (o x d, d): channels 0..2 hold the
// moment m = o x d, channels 3..5 the unit world-frame direction d.
struct PluckerMap {
    int height = 0;
    int width = 0;
    std::vector<double> values;  // [H, W, 6] row-major

    double at(int i, int j, int c) const { return values[(std::size_t(i) * width + j) * 6 + c]; }
    double& at(int i, int j, int c) { return values[(std::size_t(i) * width + j) * 6 + c]; }
};

// Ray through each pixel center under the pinhole model; directions are
// unit-normalized in the world frame before the cross product.
PluckerMap plucker_map(const Camera& camera, int height, int width);

}  // namespace ov::geo
