#pragma once

#include <array>
#include <cmath>

#include "omniview/common.hpp"

namespace ov::geo {

struct Vec3 {
    double x = 0, y = 0, z = 0;

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    Vec3 operator-() const { return {-x, -y, -z}; }
    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    Vec3 cross(const Vec3& o) const {
        return {y * o.z - z * o.y, z * o.x - x * o.z, x * o.y - y * o.x};
    }
    double norm() const { return std::sqrt(dot(*this)); }
    Vec3 normalized() const {
        double n = norm();
        if (n <= 0) throw InvalidInputError("cannot normalize zero vector");
        return {x / n, y / n, z / n};
    }
};

// Unit quaternion, scalar-first. Stored canonicalized (qw >= 0).
struct Quat {
    double w = 1, x = 0, y = 0, z = 0;

    double norm() const { return std::sqrt(w * w + x * x + y * y + z * z); }

    // Rotate v by this quaternion (sandwich product, no matrix).
    Vec3 rotate(const Vec3& v) const {
        // q * (0,v) * conj(q), expanded
        Vec3 u{x, y, z};
        Vec3 t = u.cross(v) * 2.0;
        return v + t * w + u.cross(t);
    }

    std::array<std::array<double, 3>, 3> to_matrix() const {
        double xx = x * x, yy = y * y, zz = z * z;
        double wx = w * x, wy = w * y, wz = w * z;
        double xy = x * y, xz = x * z, yz = y * z;
        return {{{1 - 2 * (yy + zz), 2 * (xy - wz), 2 * (xz + wy)},
                 {2 * (xy + wz), 1 - 2 * (xx + zz), 2 * (yz - wx)},
                 {2 * (xz - wy), 2 * (yz + wx), 1 - 2 * (xx + yy)}}};
    }

    static Quat from_matrix(const std::array<std::array<double, 3>, 3>& m);
    static Quat from_axis_angle(const Vec3& axis, double radians);
};

// 9-value camera parameterization: camera-to-world rotation (unit quaternion,
// qw >= 0), camera center in world units, and focal lengths normalized by
// image width/height. Principal point is fixed at the image center.
//
// Camera frame convention: +x right, +y down, +z forward (optical axis).
struct Camera {
    Quat rotation;      // camera-to-world
    Vec3 translation;   // camera center, world frame
    double fx = 1.0;    // focal / width
    double fy = 1.0;    // focal / height

    // Canonicalizes (qw >= 0, re-normalizes only when drifted) and validates.
    static Camera make(Quat q, Vec3 t, double fx, double fy);

    bool finite() const;
    void validate() const;

    // world = R * cam + t
    Vec3 cam_to_world(const Vec3& p) const { return rotation.rotate(p) + translation; }
    Vec3 world_to_cam(const Vec3& p) const {
        Quat c{rotation.w, -rotation.x, -rotation.y, -rotation.z};
        return c.rotate(p - translation);
    }

    // Unit world-frame ray direction through the center of pixel (row i, col j).
    Vec3 pixel_ray(int i, int j, int height, int width) const;

    // z-component of the unit camera-frame ray through pixel (i, j); converts
    // distance-along-ray into z-depth.
    double pixel_ray_cos(int i, int j, int height, int width) const;
};

// Flat 9-value form (qw,qx,qy,qz,tx,ty,tz,fx,fy); the regression target for
// the pose head and the serialization order used on disk.
struct PoseVector {
    std::array<double, 9> v{1, 0, 0, 0, 0, 0, 0, 1, 1};

    static PoseVector from_camera(const Camera& c) {
        return PoseVector{{c.rotation.w, c.rotation.x, c.rotation.y, c.rotation.z, c.translation.x,
                           c.translation.y, c.translation.z, c.fx, c.fy}};
    }
    Camera to_camera() const {
        return Camera::make(Quat{v[0], v[1], v[2], v[3]}, Vec3{v[4], v[5], v[6]}, v[7], v[8]);
    }
};

// Element-wise Huber summed over the 9 pose components:
// 0.5 r^2 for |r| <= delta, delta (|r| - 0.5 delta) otherwise.
double huber(const PoseVector& pred, const PoseVector& gt, double delta);

// Scalar Huber on one residual.
inline double huber_residual(double r, double delta) {
    double a = std::abs(r);
    return a <= delta ? 0.5 * r * r : delta * (a - 0.5 * delta);
}

struct PoseError {
    double rotation_deg = 0;  // geodesic: 2 * acos(|<q_pred, q_gt>|)
    double translation = 0;   // L2
    double focal = 0;         // L1
};

PoseError pose_error(const Camera& pred, const Camera& gt);

// On-disk form: 9 little-endian f32 in PoseVector order. Reading goes back
// through Camera::make, which re-normalizes the f32-rounded quaternion.
std::array<float, 9> camera_to_f32(const Camera& c);
Camera camera_from_f32(const std::array<float, 9>& v);

}  // namespace ov::geo
