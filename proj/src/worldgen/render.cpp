#include "omniview/worldgen/render.hpp"

#include <cmath>
#include <limits>

#include "omniview/common.hpp"

namespace ov::world {

namespace {

// Slab-method ray/AABB test for a ray starting outside the box. Writes the
// entry distance and the axis of the entry face.
bool slab_enter(const Aabb& box, const Vec3& origin, const Vec3& dir, double& t_enter, int& axis,
                double& sign) {
    double t_lo = -std::numeric_limits<double>::infinity();
    double t_hi = std::numeric_limits<double>::infinity();
    int enter_axis = -1;
    double enter_sign = 0.0;
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
    const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-300) {
            if (o[a] < lo[a] || o[a] > hi[a]) return false;
            continue;
        }
        double inv = 1.0 / d[a];
        double t0 = (lo[a] - o[a]) * inv;
        double t1 = (hi[a] - o[a]) * inv;
        double s = -1.0;  // entering through the lo face: outward normal points -axis
        if (t0 > t1) {
            std::swap(t0, t1);
            s = 1.0;
        }
        if (t0 > t_lo) {
            t_lo = t0;
            enter_axis = a;
            enter_sign = s;
        }
        t_hi = std::min(t_hi, t1);
        if (t_lo > t_hi) return false;
    }
    if (t_lo <= 0.0 || enter_axis < 0) return false;
    t_enter = t_lo;
    axis = enter_axis;
    sign = enter_sign;
    return true;
}

// Exit distance of a ray starting inside the box (the room). The outward
// normal of the wall as seen from inside points back toward the interior.
bool slab_exit(const Aabb& box, const Vec3& origin, const Vec3& dir, double& t_exit, int& axis,
               double& sign) {
    double t_hi = std::numeric_limits<double>::infinity();
    int exit_axis = -1;
    double exit_sign = 0.0;
    const double o[3] = {origin.x, origin.y, origin.z};
    const double d[3] = {dir.x, dir.y, dir.z};
    const double lo[3] = {box.lo.x, box.lo.y, box.lo.z};
    const double hi[3] = {box.hi.x, box.hi.y, box.hi.z};
    for (int a = 0; a < 3; ++a) {
        if (std::abs(d[a]) < 1e-300) continue;
        double inv = 1.0 / d[a];
        double t0 = (lo[a] - o[a]) * inv;
        double t1 = (hi[a] - o[a]) * inv;
        double s = 1.0;  // leaving through the hi face: interior-facing normal is -axis... sign tracks face
        if (t0 > t1) {
            std::swap(t0, t1);
            s = -1.0;
        }
        if (t1 < t_hi) {
            t_hi = t1;
            exit_axis = a;
            exit_sign = s;
        }
    }
    if (exit_axis < 0 || !std::isfinite(t_hi) || t_hi <= 0.0) return false;
    t_exit = t_hi;
    axis = exit_axis;
    // Interior face normal points back into the room.
    sign = -exit_sign;
    return true;
}

Vec3 axis_normal(int axis, double sign) {
    Vec3 n{0, 0, 0};
    if (axis == 0) n.x = sign;
    else if (axis == 1) n.y = sign;
    else n.z = sign;
    return n;
}

}  // namespace

RayHit cast_ray(const Scene& scene, const Vec3& origin, const Vec3& dir) {
    RayHit best;
    double t_wall;
    int axis;
    double sign;
    if (slab_exit(scene.room, origin, dir, t_wall, axis, sign)) {
        best.ok = true;
        best.t = t_wall;
        best.normal = axis_normal(axis, sign);
        best.object = -1;
    }
    for (std::size_t k = 0; k < scene.objects.size(); ++k) {
        double t;
        if (slab_enter(scene.objects[k].box(), origin, dir, t, axis, sign) &&
            (!best.ok || t < best.t)) {
            best.ok = true;
            best.t = t;
            best.normal = axis_normal(axis, sign);
            best.object = static_cast<int>(k);
        }
    }
    return best;
}

RenderedView render_view(const Scene& scene, const geo::Camera& camera, int height, int width) {
    if (height <= 0 || width <= 0) throw InvalidInputError("render_view: bad image size");
    Vec3 origin = camera.translation;
    if (!scene.room.contains(origin)) throw InvalidInputError("render_view: camera outside room");
    for (const auto& obj : scene.objects)
        if (obj.box().contains(origin)) throw InvalidInputError("render_view: camera inside object");

    RenderedView view;
    view.height = height;
    view.width = width;
    view.rgb.assign(static_cast<std::size_t>(height) * width * 3, 0.0f);
    view.depth.assign(static_cast<std::size_t>(height) * width, 0.0f);
    view.hit_id.assign(static_cast<std::size_t>(height) * width, -1);

    for (int i = 0; i < height; ++i) {
        for (int j = 0; j < width; ++j) {
            Vec3 dir = camera.pixel_ray(i, j, height, width);
            RayHit hit = cast_ray(scene, origin, dir);
            if (!hit.ok) throw ContractError("render_view: ray escaped closed room");
            double shade = std::abs(hit.normal.dot(dir));
            std::size_t p = static_cast<std::size_t>(i) * width + j;
            float* rgb = view.rgb.data() + p * 3;
            if (hit.object >= 0) {
                const auto& c = kPalette[static_cast<std::size_t>(
                    scene.objects[static_cast<std::size_t>(hit.object)].color_id)];
                rgb[0] = static_cast<float>(c[0] * shade);
                rgb[1] = static_cast<float>(c[1] * shade);
                rgb[2] = static_cast<float>(c[2] * shade);
            } else {
                float g = static_cast<float>(0.7 * shade);
                rgb[0] = rgb[1] = rgb[2] = g;
            }
            // Ray distance to z-depth: z = t * cos(angle to optical axis).
            view.depth[p] = static_cast<float>(hit.t * camera.pixel_ray_cos(i, j, height, width));
            view.hit_id[p] = static_cast<std::int16_t>(hit.object);
        }
    }
    return view;
}

}  // namespace ov::world
