#include "omniview/worldgen/trajectory.hpp"

#include <cmath>

#include "omniview/common.hpp"

namespace ov::world {

namespace {

constexpr double kPi = 3.14159265358979323846;

geo::Camera look_at_camera(const Vec3& eye, const Vec3& target, double fx, double fy) {
    Vec3 forward = (target - eye).normalized();
    // Camera axes: +z forward, +y down, +x right. With world up = +y, the
    // right axis is forward x up_world normalized, and down completes it.
    Vec3 up_world{0.0, 1.0, 0.0};
    if (std::abs(forward.dot(up_world)) > 0.999) up_world = Vec3{1.0, 0.0, 0.0};
    Vec3 right = forward.cross(up_world).normalized();
    Vec3 down = forward.cross(right);
    std::array<std::array<double, 3>, 3> m = {{{right.x, down.x, forward.x},
                                               {right.y, down.y, forward.y},
                                               {right.z, down.z, forward.z}}};
    return geo::Camera::make(geo::Quat::from_matrix(m), eye, fx, fy);
}

}  // namespace

std::vector<geo::Camera> sample_trajectory(const Scene& scene, int frames, std::uint64_t seed) {
    if (frames < 1) throw InvalidInputError("sample_trajectory: frames must be >= 1");
    Rng rng(mix_seed(seed, 0x7fa9));

    const Vec3 room_c = scene.room.center();
    const Vec3 room_h = scene.room.half();
    const double wy = scene.room.hi.y - scene.room.lo.y;

    // Orbit parameters: radius fraction of the room footprint, slow pan with
    // a random arc, eye height inside the upper half, drifting target.
    double radius = rng.uniform(0.45, 0.8) * std::min(room_h.x, room_h.z);
    double theta0 = rng.uniform(0.0, 2.0 * kPi);
    double arc = rng.uniform(0.6, 1.6) * kPi * (rng.uniform() < 0.5 ? -1.0 : 1.0);
    // Cap the per-frame angular step so consecutive positions stay within
    // the 0.3 * diagonal bound (chord length <= radius * step angle).
    if (frames > 1) {
        double step_cap = 0.2 * scene.diagonal() / radius;
        double step = std::abs(arc) / (frames - 1);
        if (step > step_cap) arc *= step_cap / step;
    }
    double eye_y0 = scene.room.lo.y + rng.uniform(0.45, 0.7) * wy;
    double eye_y1 = scene.room.lo.y + rng.uniform(0.45, 0.7) * wy;
    double fx = rng.uniform(0.8, 1.2);
    double fy = fx;

    // Target drifts between two points in the lower half of the room, where
    // the objects are.
    auto sample_target = [&]() {
        return Vec3{room_c.x + rng.uniform(-0.3, 0.3) * room_h.x,
                    scene.room.lo.y + rng.uniform(0.15, 0.4) * wy,
                    room_c.z + rng.uniform(-0.3, 0.3) * room_h.z};
    };
    Vec3 target0 = sample_target();
    Vec3 target1 = sample_target();

    const double ceiling_y = scene.room.lo.y + 0.8 * wy;  // above the object cap of 0.6*wy
    const double margin = 0.05;

    std::vector<geo::Camera> cams;
    cams.reserve(static_cast<std::size_t>(frames));
    for (int f = 0; f < frames; ++f) {
        double s = frames == 1 ? 0.0 : static_cast<double>(f) / (frames - 1);
        double theta = theta0 + arc * s;
        Vec3 eye{room_c.x + radius * std::cos(theta), eye_y0 + (eye_y1 - eye_y0) * s,
                 room_c.z + radius * std::sin(theta)};
        // Clamp into the room interior.
        eye.x = std::min(std::max(eye.x, scene.room.lo.x + margin), scene.room.hi.x - margin);
        eye.y = std::min(std::max(eye.y, scene.room.lo.y + margin), scene.room.hi.y - margin);
        eye.z = std::min(std::max(eye.z, scene.room.lo.z + margin), scene.room.hi.z - margin);
        // Objects never reach the ceiling band, so lifting resolves overlap.
        if (!scene.in_free_space(eye, margin)) eye.y = ceiling_y;
        if (!scene.in_free_space(eye, margin))
            throw GenerationError("sample_trajectory: no free position");

        Vec3 target = target0 + (target1 - target0) * s;
        if ((target - eye).norm() < 1e-6) target.z += 0.5;
        cams.push_back(look_at_camera(eye, target, fx, fy));
    }

    double max_step = 0.3 * scene.diagonal();
    for (std::size_t f = 1; f < cams.size(); ++f) {
        double d = (cams[f].translation - cams[f - 1].translation).norm();
        if (d > max_step) throw ContractError("sample_trajectory: consecutive step too large");
    }
    return cams;
}

}  // namespace ov::world
