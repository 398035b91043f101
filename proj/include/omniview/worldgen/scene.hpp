#pragma once

#include <array>
#include <string>
#include <vector>

#include "omniview/geometry/camera.hpp"

namespace ov::world {

using geo::Vec3;

// Fixed 8-color palette; color words double as answer tokens.
inline constexpr int kPaletteSize = 8;
inline constexpr std::array<std::array<float, 3>, 8> kPalette = {{
    {0.85f, 0.10f, 0.10f},  // red
    {0.10f, 0.70f, 0.15f},  // green
    {0.15f, 0.25f, 0.90f},  // blue
    {0.90f, 0.85f, 0.10f},  // yellow
    {0.60f, 0.15f, 0.75f},  // purple
    {0.95f, 0.55f, 0.10f},  // orange
    {0.10f, 0.80f, 0.80f},  // cyan
    {0.95f, 0.50f, 0.70f},  // pink
}};
const char* color_word(int color_id);

inline constexpr int kShapeCount = 4;
const char* shape_word(int shape_id);  // cube, box, slab, pillar

struct Aabb {
    Vec3 lo, hi;
    Vec3 center() const { return (lo + hi) * 0.5; }
    Vec3 half() const { return (hi - lo) * 0.5; }
    bool contains(const Vec3& p) const {
        return p.x >= lo.x && p.x <= hi.x && p.y >= lo.y && p.y <= hi.y && p.z >= lo.z && p.z <= hi.z;
    }
    bool overlaps(const Aabb& o) const {
        return lo.x < o.hi.x && hi.x > o.lo.x && lo.y < o.hi.y && hi.y > o.lo.y && lo.z < o.hi.z &&
               hi.z > o.lo.z;
    }
};

struct SceneObject {
    Vec3 center;
    Vec3 half;      // half-extents
    int color_id = 0;
    int shape_id = 0;
    Aabb box() const { return Aabb{center - half, center + half}; }
};

// A closed axis-aligned room with K non-overlapping colored cuboids.
// Object colors are pairwise distinct so color words identify objects.
struct Scene {
    Aabb room;  // interior volume; walls are the box faces seen from inside
    std::vector<SceneObject> objects;
    std::uint64_t seed = 0;

    double diagonal() const { return (room.hi - room.lo).norm(); }
    bool in_free_space(const Vec3& p, double object_margin = 0.0) const;
};

// Deterministic in seed. Placements are rejection-sampled; throws
// GenerationError after 1000 failed placement retries.
Scene sample_scene(std::uint64_t seed);

// Templated description, e.g. "a room with a red cube and a blue box".
std::string make_caption(const Scene& scene);

}  // namespace ov::world
