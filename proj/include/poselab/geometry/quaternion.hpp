#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "poselab/geometry/mat3.hpp"
#include "poselab/geometry/vec3.hpp"

namespace poselab::geometry {

inline constexpr double kDegPerRad = 180.0 / std::numbers::pi;

// Unit-norm orientation, scalar-first (w, x, y, z). Every constructor
// canonicalizes the double cover to the representative with w >= 0 (ties:
// first nonzero of x, y, z >= 0), so regression targets are unique.
class UnitQuaternion {
public:
    static UnitQuaternion identity() { return UnitQuaternion(1, 0, 0, 0); }

    static UnitQuaternion normalized(double w, double x, double y, double z) {
        const double n = std::sqrt(w * w + x * x + y * y + z * z);
        if (!(n > 1e-12))
            throw std::invalid_argument(
                "quaternion: near-zero input (norm " + std::to_string(n) +
                "), degenerate orientation");
        return UnitQuaternion(w / n, x / n, y / n, z / n);
    }

    // axis must be unit length; theta in degrees.
    static UnitQuaternion from_axis_angle(const Vec3& axis, double theta_deg) {
        if (std::abs(axis.norm() - 1.0) > 1e-9)
            throw std::invalid_argument("from_axis_angle: axis norm " +
                                        std::to_string(axis.norm()) +
                                        " is not 1");
        const double half = theta_deg / (2.0 * kDegPerRad);
        const double c = std::cos(half), s = std::sin(half);
        return UnitQuaternion(c, s * axis.x, s * axis.y, s * axis.z);
    }

    // Largest-diagonal (Shepperd) branch selection; stable near 180 degrees.
    // Rejects matrices that are not proper rotations, reporting the measured
    // deviation.
    static UnitQuaternion from_rotation_matrix(const Mat3& r) {
        const double ortho_dev = (r.transposed() * r).max_abs_diff(Mat3::identity());
        if (ortho_dev > 1e-6)
            throw std::invalid_argument(
                "from_rotation_matrix: not orthonormal (max |R^T R - I| = " +
                std::to_string(ortho_dev) + ")");
        const double det_dev = std::abs(r.det() - 1.0);
        if (det_dev > 1e-6)
            throw std::invalid_argument(
                "from_rotation_matrix: reflecting matrix (|det - 1| = " +
                std::to_string(det_dev) + ")");

        const double tr = r(0, 0) + r(1, 1) + r(2, 2);
        double w, x, y, z;
        if (tr >= r(0, 0) && tr >= r(1, 1) && tr >= r(2, 2)) {
            const double s = std::sqrt(tr + 1.0) * 2.0;
            w = 0.25 * s;
            x = (r(2, 1) - r(1, 2)) / s;
            y = (r(0, 2) - r(2, 0)) / s;
            z = (r(1, 0) - r(0, 1)) / s;
        } else if (r(0, 0) >= r(1, 1) && r(0, 0) >= r(2, 2)) {
            const double s = std::sqrt(1.0 + r(0, 0) - r(1, 1) - r(2, 2)) * 2.0;
            w = (r(2, 1) - r(1, 2)) / s;
            x = 0.25 * s;
            y = (r(0, 1) + r(1, 0)) / s;
            z = (r(0, 2) + r(2, 0)) / s;
        } else if (r(1, 1) >= r(2, 2)) {
            const double s = std::sqrt(1.0 + r(1, 1) - r(0, 0) - r(2, 2)) * 2.0;
            w = (r(0, 2) - r(2, 0)) / s;
            x = (r(0, 1) + r(1, 0)) / s;
            y = 0.25 * s;
            z = (r(1, 2) + r(2, 1)) / s;
        } else {
            const double s = std::sqrt(1.0 + r(2, 2) - r(0, 0) - r(1, 1)) * 2.0;
            w = (r(1, 0) - r(0, 1)) / s;
            x = (r(0, 2) + r(2, 0)) / s;
            y = (r(1, 2) + r(2, 1)) / s;
            z = 0.25 * s;
        }
        return normalized(w, x, y, z);
    }

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    double dot(const UnitQuaternion& o) const {
        return w_ * o.w_ + x_ * o.x_ + y_ * o.y_ + z_ * o.z_;
    }

    UnitQuaternion conjugate() const { return UnitQuaternion(w_, -x_, -y_, -z_); }

    // Hamilton product, renormalized.
    UnitQuaternion operator*(const UnitQuaternion& o) const {
        return normalized(
            w_ * o.w_ - x_ * o.x_ - y_ * o.y_ - z_ * o.z_,
            w_ * o.x_ + x_ * o.w_ + y_ * o.z_ - z_ * o.y_,
            w_ * o.y_ - x_ * o.z_ + y_ * o.w_ + z_ * o.x_,
            w_ * o.z_ + x_ * o.y_ - y_ * o.x_ + z_ * o.w_);
    }

    Mat3 to_rotation_matrix() const {
        Mat3 r;
        const double xx = x_ * x_, yy = y_ * y_, zz = z_ * z_;
        const double xy = x_ * y_, xz = x_ * z_, yz = y_ * z_;
        const double wx = w_ * x_, wy = w_ * y_, wz = w_ * z_;
        r.m = {1 - 2 * (yy + zz), 2 * (xy - wz),     2 * (xz + wy),
               2 * (xy + wz),     1 - 2 * (xx + zz), 2 * (yz - wx),
               2 * (xz - wy),     2 * (yz + wx),     1 - 2 * (xx + yy)};
        return r;
    }

    Vec3 rotate(const Vec3& v) const { return to_rotation_matrix() * v; }

private:
    UnitQuaternion(double w, double x, double y, double z)
        : w_(w), x_(x), y_(y), z_(z) {
        canonicalize();
    }

    void canonicalize() {
        bool flip = w_ < 0.0;
        if (w_ == 0.0) {
            if (x_ != 0.0)
                flip = x_ < 0.0;
            else if (y_ != 0.0)
                flip = y_ < 0.0;
            else
                flip = z_ < 0.0;
        }
        if (flip) {
            w_ = -w_;
            x_ = -x_;
            y_ = -y_;
            z_ = -z_;
        }
        // squash negative zeros so canonical representatives compare equal
        if (w_ == 0.0) w_ = 0.0;
        if (x_ == 0.0) x_ = 0.0;
        if (y_ == 0.0) y_ = 0.0;
        if (z_ == 0.0) z_ = 0.0;
    }

    double w_, x_, y_, z_;
};

// 2*acos(|a.b|) in degrees; symmetric, zero for q vs -q, range [0, 180].
// Evaluated through the chord identity 4*asin(min(|a-b|, |a+b|)/2), which is
// the same function but keeps precision near zero where acos(1 - eps)
// cannot resolve angles below ~1e-6 degrees.
inline double angular_distance_deg(const UnitQuaternion& a,
                                   const UnitQuaternion& b) {
    const auto sq = [](double v) { return v * v; };
    const double diff = sq(a.w() - b.w()) + sq(a.x() - b.x()) +
                        sq(a.y() - b.y()) + sq(a.z() - b.z());
    const double sum = sq(a.w() + b.w()) + sq(a.x() + b.x()) +
                       sq(a.y() + b.y()) + sq(a.z() + b.z());
    const double chord = std::sqrt(std::min(diff, sum));
    return 4.0 * std::asin(std::min(1.0, chord / 2.0)) * kDegPerRad;
}

}  // namespace poselab::geometry
