#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "omniview/common.hpp"
#include "omniview/geometry/camera.hpp"
#include "omniview/geometry/plucker.hpp"
#include "omniview/geometry/warp.hpp"

using namespace ov;
using namespace ov::geo;

namespace {

Quat random_unit_quat(Rng& rng) {
    Quat q{rng.normal(), rng.normal(), rng.normal(), rng.normal()};
    double n = q.norm();
    return {q.w / n, q.x / n, q.y / n, q.z / n};
}

Camera random_camera(Rng& rng) {
    return Camera::make(random_unit_quat(rng),
                        {rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)},
                        rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0));
}

Vec3 matvec(const std::array<std::array<double, 3>, 3>& m, const Vec3& v) {
    return {m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z};
}

}  // namespace

TEST_CASE("vec3 cross products match hand values") {
    Vec3 x{1, 0, 0}, y{0, 1, 0}, z{0, 0, 1};
    Vec3 xy = x.cross(y);
    CHECK(xy.x == 0);
    CHECK(xy.y == 0);
    CHECK(xy.z == 1);
    Vec3 a{2, 3, 4}, b{5, 6, 7};
    Vec3 c = a.cross(b);  // (3*7-4*6, 4*5-2*7, 2*6-3*5) = (-3, 6, -3)
    CHECK(c.x == -3);
    CHECK(c.y == 6);
    CHECK(c.z == -3);
    CHECK(a.dot(c) == doctest::Approx(0).epsilon(1e-12));
    CHECK(z.dot(xy) == 1);
}

TEST_CASE("quaternion rotation agrees with its rotation matrix") {
    Rng rng(101);
    for (int n = 0; n < 1000; ++n) {
        Quat q = random_unit_quat(rng);
        Vec3 v{rng.uniform(-3, 3), rng.uniform(-3, 3), rng.uniform(-3, 3)};
        Vec3 via_quat = q.rotate(v);
        Vec3 via_mat = matvec(q.to_matrix(), v);
        CHECK((via_quat - via_mat).norm() < 1e-12);
        CHECK(via_quat.norm() == doctest::Approx(v.norm()).epsilon(1e-10));
    }
}

TEST_CASE("quaternion round trips through its matrix") {
    Rng rng(102);
    for (int n = 0; n < 1000; ++n) {
        Quat q = random_unit_quat(rng);
        if (q.w < 0) q = {-q.w, -q.x, -q.y, -q.z};
        Quat back = Quat::from_matrix(q.to_matrix());
        CHECK(std::abs(back.w - q.w) < 1e-9);
        CHECK(std::abs(back.x - q.x) < 1e-9);
        CHECK(std::abs(back.y - q.y) < 1e-9);
        CHECK(std::abs(back.z - q.z) < 1e-9);
    }
}

TEST_CASE("axis-angle quarter turn about z sends x to y") {
    Quat q = Quat::from_axis_angle({0, 0, 1}, M_PI / 2);
    Vec3 r = q.rotate({1, 0, 0});
    CHECK(r.x == doctest::Approx(0).epsilon(1e-12));
    CHECK(r.y == doctest::Approx(1).epsilon(1e-12));
    CHECK(r.z == doctest::Approx(0).epsilon(1e-12));
}

TEST_CASE("camera construction canonicalizes and validates") {
    Camera c = Camera::make({-1, 0, 0, 0}, {0, 0, 0}, 1.0, 1.0);
    CHECK(c.rotation.w == 1.0);  // sign flipped to qw >= 0
    CHECK_THROWS_AS(Camera::make({0, 0, 0, 0}, {0, 0, 0}, 1, 1), InvalidInputError);
    CHECK_THROWS_AS(Camera::make({1, 0, 0, 0}, {0, 0, 0}, -1, 1), InvalidInputError);
    CHECK_THROWS_AS(Camera::make({1, 0, 0, 0}, {0, 0, 0}, 1, 0), InvalidInputError);
    double nan = std::nan("");
    CHECK_THROWS_AS(Camera::make({1, 0, 0, 0}, {nan, 0, 0}, 1, 1), InvalidInputError);
}

TEST_CASE("world/camera transforms invert each other") {
    Rng rng(103);
    for (int n = 0; n < 1000; ++n) {
        Camera c = random_camera(rng);
        Vec3 p{rng.uniform(-10, 10), rng.uniform(-10, 10), rng.uniform(-10, 10)};
        Vec3 back = c.world_to_cam(c.cam_to_world(p));
        CHECK((back - p).norm() < 1e-9);
        Vec3 back2 = c.cam_to_world(c.world_to_cam(p));
        CHECK((back2 - p).norm() < 1e-9);
    }
}

TEST_CASE("center pixel ray is the optical axis") {
    Rng rng(104);
    for (int n = 0; n < 100; ++n) {
        Camera c = random_camera(rng);
        // Odd image size puts a pixel center exactly at the principal point.
        Vec3 d = c.pixel_ray(5, 5, 11, 11);
        Vec3 axis = c.rotation.rotate({0, 0, 1});
        CHECK((d - axis).norm() < 1e-12);
        CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("pixel rays match a from-scratch pinhole model") {
    Rng rng(105);
    for (int n = 0; n < 1000; ++n) {
        Camera c = random_camera(rng);
        int height = 2 + static_cast<int>(rng.uniform_int(30));
        int width = 2 + static_cast<int>(rng.uniform_int(30));
        int i = static_cast<int>(rng.uniform_int(height));
        int j = static_cast<int>(rng.uniform_int(width));
        // Independent construction through the rotation matrix.
        double u = (j + 0.5) / width, v = (i + 0.5) / height;
        Vec3 cam_dir{(u - 0.5) / c.fx, (v - 0.5) / c.fy, 1.0};
        Vec3 expect = matvec(c.rotation.to_matrix(), cam_dir.normalized());
        Vec3 got = c.pixel_ray(i, j, height, width);
        CHECK((got - expect).norm() < 1e-12);
    }
}

TEST_CASE("ray cosine converts ray length to z-depth") {
    Rng rng(106);
    for (int n = 0; n < 1000; ++n) {
        Camera c = random_camera(rng);
        int height = 2 + static_cast<int>(rng.uniform_int(20));
        int width = 2 + static_cast<int>(rng.uniform_int(20));
        int i = static_cast<int>(rng.uniform_int(height));
        int j = static_cast<int>(rng.uniform_int(width));
        double t = rng.uniform(0.5, 10.0);
        Vec3 p_world = c.translation + c.pixel_ray(i, j, height, width) * t;
        double z = c.world_to_cam(p_world).z;
        CHECK(t * c.pixel_ray_cos(i, j, height, width) == doctest::Approx(z).epsilon(1e-10));
    }
}

TEST_CASE("plucker map stores moment and unit direction") {
    Rng rng(107);
    Camera c = random_camera(rng);
    PluckerMap pm = plucker_map(c, 7, 9);
    CHECK(pm.height == 7);
    CHECK(pm.width == 9);
    for (int i = 0; i < 7; ++i) {
        for (int j = 0; j < 9; ++j) {
            Vec3 m{pm.at(i, j, 0), pm.at(i, j, 1), pm.at(i, j, 2)};
            Vec3 d{pm.at(i, j, 3), pm.at(i, j, 4), pm.at(i, j, 5)};
            CHECK(d.norm() == doctest::Approx(1.0).epsilon(1e-12));
            CHECK(std::abs(m.dot(d)) < 1e-12);
            Vec3 expect_m = c.translation.cross(c.pixel_ray(i, j, 7, 9));
            CHECK((m - expect_m).norm() < 1e-12);
        }
    }
    CHECK_THROWS_AS(plucker_map(c, 0, 4), InvalidInputError);
}

TEST_CASE("plucker moment is invariant to sliding the origin along the ray") {
    Rng rng(108);
    for (int n = 0; n < 200; ++n) {
        Camera c = random_camera(rng);
        Vec3 d = c.pixel_ray(1, 2, 5, 5);
        Vec3 m0 = c.translation.cross(d);
        Vec3 slid = c.translation + d * rng.uniform(-4, 4);
        Vec3 m1 = slid.cross(d);
        CHECK((m0 - m1).norm() < 1e-9);
    }
}

TEST_CASE("unproject then reproject recovers the pixel") {
    Rng rng(109);
    for (int n = 0; n < 50; ++n) {
        Camera c = random_camera(rng);
        int height = 4 + static_cast<int>(rng.uniform_int(12));
        int width = 4 + static_cast<int>(rng.uniform_int(12));
        std::vector<float> depth(static_cast<std::size_t>(height) * width);
        for (auto& d : depth) d = static_cast<float>(rng.uniform(0.5, 8.0));
        PointSet ps = unproject(depth, height, width, c);
        REQUIRE(ps.points.size() == depth.size());
        Projected proj = reproject(ps.points, c, height, width);
        for (std::size_t k = 0; k < proj.px.size(); ++k) {
            REQUIRE(proj.valid[k]);
            int i = static_cast<int>(k) / width, j = static_cast<int>(k) % width;
            CHECK(proj.px[k] == doctest::Approx(j).epsilon(1e-4));
            CHECK(proj.py[k] == doctest::Approx(i).epsilon(1e-4));
            CHECK(proj.z[k] == doctest::Approx(depth[k]).epsilon(1e-5));
        }
    }
}

TEST_CASE("unprojected points land where the ray says") {
    Rng rng(110);
    for (int n = 0; n < 200; ++n) {
        Camera c = random_camera(rng);
        int height = 3, width = 4;
        std::vector<float> depth(12);
        for (auto& d : depth) d = static_cast<float>(rng.uniform(0.5, 8.0));
        PointSet ps = unproject(depth, height, width, c);
        for (int i = 0; i < height; ++i)
            for (int j = 0; j < width; ++j) {
                std::size_t k = static_cast<std::size_t>(i) * width + j;
                double cosang = c.pixel_ray_cos(i, j, height, width);
                Vec3 expect = c.translation + c.pixel_ray(i, j, height, width) * (depth[k] / cosang);
                CHECK((ps.points[k] - expect).norm() < 1e-5);
            }
    }
}

TEST_CASE("unproject rejects non-positive depth") {
    Camera c = Camera::make({1, 0, 0, 0}, {0, 0, 0}, 1, 1);
    std::vector<float> depth(4, 1.0f);
    depth[2] = 0.0f;
    CHECK_THROWS_AS(unproject(depth, 2, 2, c), InvalidInputError);
    depth[2] = -1.0f;
    CHECK_THROWS_AS(unproject(depth, 2, 2, c), InvalidInputError);
}

TEST_CASE("points behind the camera are invalid on reprojection") {
    Camera c = Camera::make({1, 0, 0, 0}, {0, 0, 0}, 1, 1);
    Projected proj = reproject({Vec3{0, 0, -2}, Vec3{0, 0, 2}}, c, 8, 8);
    CHECK_FALSE(proj.valid[0]);
    CHECK(proj.valid[1]);
}

TEST_CASE("rasterization keeps the nearest point per pixel") {
    Camera c = Camera::make({1, 0, 0, 0}, {0, 0, 0}, 1, 1);
    // Two points on the same center ray at different depths.
    std::vector<Vec3> pts{{0, 0, 4}, {0, 0, 2}};
    Projected proj = reproject(pts, c, 9, 9);
    std::vector<float> colors{1.0f, 0.5f, 0.25f, 0.9f, 0.1f, 0.2f};
    std::vector<std::uint32_t> pixel_index{0, 1};
    WarpedImage img = rasterize_points(proj, colors, pixel_index, 9, 9);
    CHECK(img.mask[4 * 9 + 4] == 1);
    CHECK(img.rgb[(4 * 9 + 4) * 3 + 0] == 0.9f);  // nearer point wins
    CHECK(img.rgb[(4 * 9 + 4) * 3 + 1] == 0.1f);
    int covered = 0;
    for (auto m : img.mask) covered += m;
    CHECK(covered == 1);
}

TEST_CASE("huber matches hand-computed branch values") {
    PoseVector a, b;
    CHECK(huber(a, a, 1.0) == 0.0);
    b.v = a.v;
    b.v[4] += 0.5;  // quadratic branch: 0.5 * 0.5^2 = 0.125
    CHECK(huber(b, a, 1.0) == doctest::Approx(0.125).epsilon(1e-12));
    b.v = a.v;
    b.v[4] += 2.0;  // linear branch: 1 * (2 - 0.5) = 1.5
    CHECK(huber(b, a, 1.0) == doctest::Approx(1.5).epsilon(1e-12));
    b.v = a.v;
    b.v[5] -= 0.05;  // delta 0.1, quadratic: 0.5 * 0.0025
    CHECK(huber(b, a, 0.1) == doctest::Approx(0.00125).epsilon(1e-12));
    b.v = a.v;
    b.v[5] -= 1.0;  // delta 0.1, linear: 0.1 * (1 - 0.05)
    CHECK(huber(b, a, 0.1) == doctest::Approx(0.095).epsilon(1e-12));
    b.v = a.v;
    b.v[0] += 0.3;
    b.v[8] += 0.4;  // sums across components: 0.045 + 0.08
    CHECK(huber(b, a, 1.0) == doctest::Approx(0.125).epsilon(1e-12));
    CHECK_THROWS_AS(huber(a, b, 0.0), InvalidInputError);
}

TEST_CASE("pose error matches constructed perturbations") {
    Rng rng(111);
    for (int n = 0; n < 500; ++n) {
        Camera base = random_camera(rng);
        double deg = rng.uniform(1.0, 179.0);
        Vec3 axis = Vec3{rng.normal(), rng.normal(), rng.normal()}.normalized();
        Quat delta = Quat::from_axis_angle(axis, deg * M_PI / 180.0);
        // Compose: R_pred = R_delta * R_base.
        Quat q = base.rotation;
        Quat pred_q{delta.w * q.w - delta.x * q.x - delta.y * q.y - delta.z * q.z,
                    delta.w * q.x + delta.x * q.w + delta.y * q.z - delta.z * q.y,
                    delta.w * q.y - delta.x * q.z + delta.y * q.w + delta.z * q.x,
                    delta.w * q.z + delta.x * q.y - delta.y * q.x + delta.z * q.w};
        Camera pred = Camera::make(pred_q, base.translation + Vec3{3, 0, -4}, base.fx + 0.25,
                                   base.fy - 0.1);
        PoseError e = pose_error(pred, base);
        CHECK(e.rotation_deg == doctest::Approx(deg).epsilon(1e-6));
        CHECK(e.translation == doctest::Approx(5.0).epsilon(1e-9));
        CHECK(e.focal == doctest::Approx(0.35).epsilon(1e-9));
    }
}

TEST_CASE("pose error treats q and -q as the same rotation") {
    Camera a = Camera::make({0.8, 0.6, 0, 0}, {0, 0, 0}, 1, 1);
    PoseError e = pose_error(a, a);
    CHECK(e.rotation_deg == doctest::Approx(0.0).epsilon(1e-9));
}

TEST_CASE("pose vector round trips") {
    Rng rng(112);
    for (int n = 0; n < 500; ++n) {
        Camera c = random_camera(rng);
        Camera back = PoseVector::from_camera(c).to_camera();
        // acos near 1 amplifies rounding: identical rotations can read as
        // ~1e-6 degrees apart.
        PoseError e = pose_error(back, c);
        CHECK(e.rotation_deg < 1e-5);
        CHECK(e.translation < 1e-12);
        CHECK(e.focal < 1e-12);
    }
}

TEST_CASE("f32 camera form round trips within float precision") {
    Rng rng(113);
    for (int n = 0; n < 500; ++n) {
        Camera c = random_camera(rng);
        auto f = camera_to_f32(c);
        Camera back = camera_from_f32(f);
        // Second pass is byte-stable once values are f32.
        auto f2 = camera_to_f32(back);
        Camera back2 = camera_from_f32(f2);
        // f32 rounding of a unit quaternion costs up to ~0.05 degrees once
        // acos amplification near dot = 1 is accounted for.
        PoseError drift = pose_error(back2, back);
        CHECK(drift.rotation_deg < 0.05);
        CHECK(drift.translation < 1e-5);
        PoseError e = pose_error(back, c);
        CHECK(e.rotation_deg < 0.1);
        CHECK(e.translation < 1e-5);
        CHECK(e.focal < 1e-5);
    }
}
