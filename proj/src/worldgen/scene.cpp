#include "omniview/worldgen/scene.hpp"

#include <cmath>

#include "omniview/common.hpp"

namespace ov::world {

const char* color_word(int color_id) {
    static const char* kWords[kPaletteSize] = {"red",    "green",  "blue", "yellow",
                                               "purple", "orange", "cyan", "pink"};
    if (color_id < 0 || color_id >= kPaletteSize) throw InvalidInputError("color_word: bad id");
    return kWords[color_id];
}

const char* shape_word(int shape_id) {
    static const char* kWords[kShapeCount] = {"cube", "box", "slab", "pillar"};
    if (shape_id < 0 || shape_id >= kShapeCount) throw InvalidInputError("shape_word: bad id");
    return kWords[shape_id];
}

bool Scene::in_free_space(const Vec3& p, double object_margin) const {
    if (!room.contains(p)) return false;
    for (const auto& obj : objects) {
        Aabb grown{obj.center - obj.half - Vec3{object_margin, object_margin, object_margin},
                   obj.center + obj.half + Vec3{object_margin, object_margin, object_margin}};
        if (grown.contains(p)) return false;
    }
    return true;
}

namespace {

Vec3 shape_half_extents(int shape_id, double base, Rng& rng) {
    switch (shape_id) {
        case 0:  // cube
            return {base, base, base};
        case 1:  // box: independent extents, none extreme
            return {base * rng.uniform(0.6, 1.4), base * rng.uniform(0.6, 1.4),
                    base * rng.uniform(0.6, 1.4)};
        case 2:  // slab: flat in y
            return {base * rng.uniform(1.0, 1.8), base * 0.25, base * rng.uniform(1.0, 1.8)};
        default:  // pillar: tall in y
            return {base * 0.5, base * rng.uniform(1.6, 2.4), base * 0.5};
    }
}

}  // namespace

Scene sample_scene(std::uint64_t seed) {
    Rng rng(mix_seed(seed, 0x5ce7e5));
    Scene scene;
    scene.seed = seed;

    double wx = rng.uniform(6.0, 10.0);
    double wy = rng.uniform(3.0, 4.5);
    double wz = rng.uniform(6.0, 10.0);
    scene.room = Aabb{{-wx / 2, 0.0, -wz / 2}, {wx / 2, wy, wz / 2}};

    int count = 2 + static_cast<int>(rng.uniform_int(5));  // K in [2,6]

    // Distinct colors via a partial shuffle of the palette.
    std::array<int, kPaletteSize> colors;
    for (int i = 0; i < kPaletteSize; ++i) colors[i] = i;
    rng.shuffle(colors.begin(), colors.end());

    // Objects stay below the ceiling band (y <= 0.6*wy) so cameras always
    // have free space near the ceiling.
    double y_cap = 0.6 * wy;
    int retries = 0;
    for (int k = 0; k < count; ++k) {
        SceneObject obj;
        obj.color_id = colors[static_cast<std::size_t>(k)];
        for (;;) {
            if (++retries > 1000) throw GenerationError("sample_scene: placement retries exhausted");
            obj.shape_id = static_cast<int>(rng.uniform_int(kShapeCount));
            double base = rng.uniform(0.25, 0.55);
            obj.half = shape_half_extents(obj.shape_id, base, rng);
            if (2 * obj.half.y > y_cap) obj.half.y = y_cap / 2 * 0.95;
            obj.center = {rng.uniform(scene.room.lo.x + obj.half.x + 0.2, scene.room.hi.x - obj.half.x - 0.2),
                          obj.half.y,  // resting on the floor
                          rng.uniform(scene.room.lo.z + obj.half.z + 0.2, scene.room.hi.z - obj.half.z - 0.2)};
            Aabb grown{obj.center - obj.half - Vec3{0.15, 0.0, 0.15},
                       obj.center + obj.half + Vec3{0.15, 0.0, 0.15}};
            bool clear = true;
            for (const auto& other : scene.objects)
                if (grown.overlaps(other.box())) { clear = false; break; }
            if (clear) break;
        }
        scene.objects.push_back(obj);
    }
    return scene;
}

std::string make_caption(const Scene& scene) {
    std::string out = "a room with";
    for (std::size_t i = 0; i < scene.objects.size(); ++i) {
        const auto& obj = scene.objects[i];
        if (i > 0) out += i + 1 == scene.objects.size() ? " and" : "";
        out += " a ";
        out += color_word(obj.color_id);
        out += " ";
        out += shape_word(obj.shape_id);
    }
    return out;
}

}  // namespace ov::world
