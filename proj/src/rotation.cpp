#include "worldmotion/rotation.hpp"

#include <algorithm>
#include <cmath>

namespace wm {

namespace {

Mat3 skew(const Vec3& v) {
    Mat3 s;
    s << 0.0, -v.z(), v.y(),
         v.z(), 0.0, -v.x(),
         -v.y(), v.x(), 0.0;
    return s;
}

}  // namespace

Mat3 axisAngleToMatrix(const Vec3& axisAngle) {
    const double theta = axisAngle.norm();
    const Mat3 k = skew(axisAngle);
    if (theta < 1e-8) {
        return Mat3::Identity() + k + 0.5 * k * k;
    }
    const double a = std::sin(theta) / theta;
    const double b = (1.0 - std::cos(theta)) / (theta * theta);
    return Mat3::Identity() + a * k + b * k * k;
}

Vec3 matrixToAxisAngle(const Mat3& rotation) {
    const Eigen::Quaterniond q(rotation);
    const Eigen::AngleAxisd aa(q.normalized());
    if (aa.angle() == 0.0) return Vec3::Zero();
    return aa.axis() * aa.angle();
}

Mat3 rotX(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << 1, 0, 0,
         0, c, -s,
         0, s, c;
    return r;
}

Mat3 rotY(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << c, 0, s,
         0, 1, 0,
         -s, 0, c;
    return r;
}

Mat3 rotZ(double angle) {
    const double c = std::cos(angle), s = std::sin(angle);
    Mat3 r;
    r << c, -s, 0,
         s, c, 0,
         0, 0, 1;
    return r;
}

Mat3 headingRotation(double psi) {
    const double c = std::cos(psi), s = std::sin(psi);
    Mat3 r;
    r << c, 0, -s,
         0, 1, 0,
         s, 0, c;
    return r;
}

double yawAbout(const Mat3& rotation, const Vec3& forward) {
    const Vec3 d = rotation * forward;
    if (std::hypot(d.x(), d.z()) < 1e-12) return 0.0;
    // rotY(a) sends +z to (sin a, 0, cos a).
    return std::atan2(d.x(), d.z()) - std::atan2(forward.x(), forward.z());
}

double rotationAngle(const Mat3& rotation) {
    const double c = std::clamp((rotation.trace() - 1.0) * 0.5, -1.0, 1.0);
    // acos loses precision near 0; use the skew part there.
    const Mat3 a = rotation - rotation.transpose();
    const double s = 0.5 * Vec3(a(2, 1), a(0, 2), a(1, 0)).norm();
    return std::atan2(s, c);
}

Mat3 slerp(const Mat3& from, const Mat3& to, double t) {
    const Eigen::Quaterniond a(from), b(to);
    return a.slerp(t, b).normalized().toRotationMatrix();
}

bool isRotation(const Mat3& m, double tol) {
    if (!m.allFinite()) return false;
    if ((m.transpose() * m - Mat3::Identity()).cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(m.determinant() - 1.0) <= tol;
}

}  // namespace wm
