#pragma once

#include "worldmotion/common.hpp"

namespace wm {

/// Rodrigues' formula. Angles below 1e-8 use the second-order series so the
/// result stays smooth through zero.
Mat3 axisAngleToMatrix(const Vec3& axisAngle);

/// Inverse of axisAngleToMatrix; returns an angle in [0, pi].
Vec3 matrixToAxisAngle(const Mat3& rotation);

Mat3 rotX(double angle);
Mat3 rotY(double angle);
Mat3 rotZ(double angle);

/// Yaw rotation built from a motion heading angle. Maps +x onto
/// (cos psi, 0, sin psi); the layout is
///   [ cos  0  -sin ]
///   [  0   1    0  ]
///   [ sin  0   cos ]
Mat3 headingRotation(double psi);

/// Yaw (about +y) of `rotation`, measured by where it sends `forward` in the
/// x-z plane. Returns 0 when the rotated forward axis is vertical.
double yawAbout(const Mat3& rotation, const Vec3& forward);

/// Rotation angle of R in radians.
double rotationAngle(const Mat3& rotation);

/// Geodesic interpolation between two rotations, t in [0, 1].
Mat3 slerp(const Mat3& from, const Mat3& to, double t);

/// Orthonormal with det = +1 to `tol`.
bool isRotation(const Mat3& m, double tol = 1e-9);

}  // namespace wm
