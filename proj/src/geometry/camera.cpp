#include "omniview/geometry/camera.hpp"

namespace ov::geo {

Quat Quat::from_matrix(const std::array<std::array<double, 3>, 3>& m) {
    // Shepperd's method: pick the largest diagonal combination for stability.
    double tr = m[0][0] + m[1][1] + m[2][2];
    Quat q;
    if (tr > 0) {
        double s = std::sqrt(tr + 1.0) * 2;
        q.w = 0.25 * s;
        q.x = (m[2][1] - m[1][2]) / s;
        q.y = (m[0][2] - m[2][0]) / s;
        q.z = (m[1][0] - m[0][1]) / s;
    } else if (m[0][0] > m[1][1] && m[0][0] > m[2][2]) {
        double s = std::sqrt(1.0 + m[0][0] - m[1][1] - m[2][2]) * 2;
        q.w = (m[2][1] - m[1][2]) / s;
        q.x = 0.25 * s;
        q.y = (m[0][1] + m[1][0]) / s;
        q.z = (m[0][2] + m[2][0]) / s;
    } else if (m[1][1] > m[2][2]) {
        double s = std::sqrt(1.0 + m[1][1] - m[0][0] - m[2][2]) * 2;
        q.w = (m[0][2] - m[2][0]) / s;
        q.x = (m[0][1] + m[1][0]) / s;
        q.y = 0.25 * s;
        q.z = (m[1][2] + m[2][1]) / s;
    } else {
        double s = std::sqrt(1.0 + m[2][2] - m[0][0] - m[1][1]) * 2;
        q.w = (m[1][0] - m[0][1]) / s;
        q.x = (m[0][2] + m[2][0]) / s;
        q.y = (m[1][2] + m[2][1]) / s;
        q.z = 0.25 * s;
    }
    if (q.w < 0) q = Quat{-q.w, -q.x, -q.y, -q.z};
    return q;
}

Quat Quat::from_axis_angle(const Vec3& axis, double radians) {
    Vec3 a = axis.normalized();
    double h = radians * 0.5;
    double s = std::sin(h);
    return Quat{std::cos(h), a.x * s, a.y * s, a.z * s};
}

Camera Camera::make(Quat q, Vec3 t, double fx, double fy) {
    double n2 = q.w * q.w + q.x * q.x + q.y * q.y + q.z * q.z;
    if (!std::isfinite(n2) || n2 <= 0) throw InvalidInputError("camera: degenerate quaternion");
    // Re-normalize only when outside tolerance; keeps already-canonical
    // values bit-stable through round trips.
    if (std::abs(n2 - 1.0) > 1e-9) {
        double n = std::sqrt(n2);
        q.w /= n;
        q.x /= n;
        q.y /= n;
        q.z /= n;
    }
    if (q.w < 0) {
        q.w = -q.w;
        q.x = -q.x;
        q.y = -q.y;
        q.z = -q.z;
    }
    Camera c{q, t, fx, fy};
    c.validate();
    return c;
}

bool Camera::finite() const {
    return std::isfinite(rotation.w) && std::isfinite(rotation.x) && std::isfinite(rotation.y) &&
           std::isfinite(rotation.z) && std::isfinite(translation.x) && std::isfinite(translation.y) &&
           std::isfinite(translation.z) && std::isfinite(fx) && std::isfinite(fy);
}

void Camera::validate() const {
    if (!finite()) throw InvalidInputError("camera: non-finite field");
    if (fx <= 0 || fy <= 0) throw InvalidInputError("camera: focal components must be > 0");
    double n = rotation.norm();
    if (std::abs(n - 1.0) > 1e-9) throw InvalidInputError("camera: quaternion not unit");
    if (rotation.w < 0) throw InvalidInputError("camera: quaternion not canonical (qw < 0)");
}

Vec3 Camera::pixel_ray(int i, int j, int height, int width) const {
    double u = (j + 0.5) / width;
    double v = (i + 0.5) / height;
    Vec3 d_cam{(u - 0.5) / fx, (v - 0.5) / fy, 1.0};
    return rotation.rotate(d_cam.normalized());
}

double Camera::pixel_ray_cos(int i, int j, int height, int width) const {
    double u = (j + 0.5) / width;
    double v = (i + 0.5) / height;
    Vec3 d_cam{(u - 0.5) / fx, (v - 0.5) / fy, 1.0};
    return 1.0 / d_cam.norm();
}

double huber(const PoseVector& pred, const PoseVector& gt, double delta) {
    if (delta <= 0) throw InvalidInputError("huber: delta must be > 0");
    double total = 0;
    for (int k = 0; k < 9; ++k) total += huber_residual(pred.v[k] - gt.v[k], delta);
    return total;
}

PoseError pose_error(const Camera& pred, const Camera& gt) {
    double dot = pred.rotation.w * gt.rotation.w + pred.rotation.x * gt.rotation.x +
                 pred.rotation.y * gt.rotation.y + pred.rotation.z * gt.rotation.z;
    dot = std::min(1.0, std::abs(dot));
    PoseError e;
    e.rotation_deg = 2.0 * std::acos(dot) * 180.0 / 3.14159265358979323846;
    e.translation = (pred.translation - gt.translation).norm();
    e.focal = std::abs(pred.fx - gt.fx) + std::abs(pred.fy - gt.fy);
    return e;
}

std::array<float, 9> camera_to_f32(const Camera& c) {
    PoseVector p = PoseVector::from_camera(c);
    std::array<float, 9> out{};
    for (int k = 0; k < 9; ++k) out[k] = static_cast<float>(p.v[k]);
    return out;
}

Camera camera_from_f32(const std::array<float, 9>& v) {
    return Camera::make(Quat{v[0], v[1], v[2], v[3]}, Vec3{v[4], v[5], v[6]}, v[7], v[8]);
}

}  // namespace ov::geo
