#pragma once

#include <cstdint>
#include <vector>

#include "omniview/geometry/camera.hpp"
#include "omniview/worldgen/scene.hpp"

namespace ov::world {

// One rendered view. rgb is [H,W,3] row-major in [0,1], depth is z-depth
// (camera-frame z, not ray distance), hit_id is the object index or -1 for
// a wall hit. Rays from inside a closed room always hit something.
struct RenderedView {
    int height = 0, width = 0;
    std::vector<float> rgb;
    std::vector<float> depth;
    std::vector<std::int16_t> hit_id;

    float* rgb_at(int i, int j) { return rgb.data() + (static_cast<std::size_t>(i) * width + j) * 3; }
    const float* rgb_at(int i, int j) const {
        return rgb.data() + (static_cast<std::size_t>(i) * width + j) * 3;
    }
};

struct RayHit {
    double t = 0.0;   // ray parameter (distance along unit direction)
    Vec3 normal;      // outward surface normal at the hit
    int object = -1;  // -1 for room walls
    bool ok = false;
};

// Nearest intersection of the ray with scene geometry. Object hits use the
// slab method from outside; the room contributes its interior faces.
RayHit cast_ray(const Scene& scene, const Vec3& origin, const Vec3& dir);

// Flat-shaded render: albedo * |<normal, ray dir>|; walls are gray 0.7.
// Throws InvalidInputError if the camera origin is inside an object or
// outside the room.
RenderedView render_view(const Scene& scene, const geo::Camera& camera, int height, int width);

}  // namespace ov::world
