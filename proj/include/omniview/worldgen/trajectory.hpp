#pragma once

#include <vector>

#include "omniview/geometry/camera.hpp"
#include "omniview/worldgen/scene.hpp"

namespace ov::world {

// Samples a smooth orbit of `frames` poses inside the free space of the
// scene. Cameras pan around the room center at varying radius and height
// while the look-at target drifts, so consecutive views overlap but are not
// identical. Positions colliding with objects are lifted toward the ceiling
// band, which scene sampling keeps free. Invariants: every position is in
// free space, consecutive positions are at most 0.3 * room diagonal apart.
std::vector<geo::Camera> sample_trajectory(const Scene& scene, int frames, std::uint64_t seed);

}  // namespace ov::world
