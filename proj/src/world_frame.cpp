#include "worldmotion/world_frame.hpp"

#include "worldmotion/binary_container.hpp"
#include "worldmotion/rotation.hpp"

#include <Eigen/SVD>

#include <cmath>

namespace wm {

Mat3 WorldFrame::basis() const {
    Mat3 b;
    b.row(0) = axisX.transpose();
    b.row(1) = axisY.transpose();
    b.row(2) = axisZ.transpose();
    return b;
}

Vec3 WorldFrame::toFrame(const Vec3& worldPoint) const { return basis() * (worldPoint - origin) / scale; }

Vec3 WorldFrame::fromFrame(const Vec3& framePoint) const {
    return basis().transpose() * (scale * framePoint) + origin;
}

void WorldFrame::validate() const {
    for (const Vec3* a : {&axisX, &axisY, &axisZ}) {
        if (std::abs(a->norm() - 1.0) > 1e-9) throw ValidationError("world frame: axes must be unit length");
    }
    if (std::abs(axisX.dot(axisY)) > 1e-9 || std::abs(axisY.dot(axisZ)) > 1e-9 || std::abs(axisX.dot(axisZ)) > 1e-9) {
        throw ValidationError("world frame: axes must be orthogonal");
    }
    if ((axisX.cross(axisY) - axisZ).norm() > 1e-9) throw ValidationError("world frame: axes must be right-handed");
    if (!(scale > 0.0)) throw ValidationError("world frame: scale must be positive");
}

void CameraModel::validate() const {
    if (!K.allFinite() || !R_w2c.allFinite() || !T_w2c.allFinite()) throw ValidationError("camera: non-finite values");
    if (K(1, 0) != 0.0 || K(2, 0) != 0.0 || K(2, 1) != 0.0) throw ValidationError("camera: K must be upper-triangular");
    if (!(K(0, 0) > 0.0 && K(1, 1) > 0.0)) throw ValidationError("camera: K focal entries must be positive");
    if (K(2, 2) != 1.0) throw ValidationError("camera: K[2][2] must equal 1");
    if (!(f1 > 0.0)) throw ValidationError("camera: f1 must be positive");
    if (!isRotation(R_w2c, 1e-6)) throw ValidationError("camera: R_w2c must be a rotation (orthonormal, det +1)");
    if (width <= 0 || height <= 0) throw ValidationError("camera: width and height must be positive");
}

Vec3 CameraModel::center() const { return -R_w2c.transpose() * T_w2c; }

Vec3 CameraModel::viewDirection() const { return R_w2c.transpose() * Vec3::UnitZ(); }

CameraModel CameraModel::resized(int newWidth, int newHeight) const {
    CameraModel c = *this;
    if (newWidth == width && newHeight == height) return c;
    const double sx = static_cast<double>(newWidth) / width;
    const double sy = static_cast<double>(newHeight) / height;
    c.K.row(0) *= sx;
    c.K.row(1) *= sy;
    c.f1 = f1 * sx;
    c.width = newWidth;
    c.height = newHeight;
    return c;
}

nlohmann::json cameraToJson(const CameraModel& cam) {
    nlohmann::json j = cam.extra;
    std::vector<double> k, r;
    for (int i = 0; i < 3; ++i) {
        for (int c = 0; c < 3; ++c) {
            k.push_back(cam.K(i, c));
            r.push_back(cam.R_w2c(i, c));
        }
    }
    j["K"] = k;
    j["f1"] = cam.f1;
    j["R_w2c"] = r;
    j["T_w2c"] = {cam.T_w2c.x(), cam.T_w2c.y(), cam.T_w2c.z()};
    j["width"] = cam.width;
    j["height"] = cam.height;
    return j;
}

CameraModel cameraFromJson(const nlohmann::json& j, const std::string& origin) {
    auto fail = [&](const std::string& msg) { return ValidationError(origin + ": camera " + msg); };
    if (!j.is_object()) throw fail("must be a JSON object");
    CameraModel cam;
    try {
        const auto k = j.at("K").get<std::vector<double>>();
        const auto r = j.at("R_w2c").get<std::vector<double>>();
        const auto t = j.at("T_w2c").get<std::vector<double>>();
        if (k.size() != 9) throw fail("K must have 9 numbers");
        if (r.size() != 9) throw fail("R_w2c must have 9 numbers");
        if (t.size() != 3) throw fail("T_w2c must have 3 numbers");
        for (int i = 0; i < 3; ++i) {
            for (int c = 0; c < 3; ++c) {
                cam.K(i, c) = k[3 * i + c];
                cam.R_w2c(i, c) = r[3 * i + c];
            }
        }
        cam.T_w2c = Vec3(t[0], t[1], t[2]);
        cam.f1 = j.at("f1").get<double>();
        cam.width = j.at("width").get<int>();
        cam.height = j.at("height").get<int>();
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& key = it.key();
            if (key != "K" && key != "R_w2c" && key != "T_w2c" && key != "f1" && key != "width" && key != "height") {
                cam.extra[key] = it.value();
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw fail(std::string("is malformed: ") + e.what());
    }
    try {
        cam.validate();
    } catch (const ValidationError& e) {
        throw ValidationError(origin + ": " + e.what());
    }
    return cam;
}

std::vector<CameraModel> loadCameras(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(readFileBytes(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    std::vector<CameraModel> cams;
    if (j.is_array()) {
        for (std::size_t i = 0; i < j.size(); ++i) {
            cams.push_back(cameraFromJson(j[i], path.string() + "[" + std::to_string(i) + "]"));
        }
    } else if (j.is_object() && j.contains("frames")) {
        for (std::size_t i = 0; i < j["frames"].size(); ++i) {
            cams.push_back(cameraFromJson(j["frames"][i], path.string() + "[" + std::to_string(i) + "]"));
        }
    } else {
        cams.push_back(cameraFromJson(j, path.string()));
    }
    if (cams.empty()) throw ValidationError(path.string() + ": no cameras");
    return cams;
}

void saveCameras(const std::vector<CameraModel>& cams, const std::filesystem::path& path) {
    nlohmann::json j;
    if (cams.size() == 1) {
        j = cameraToJson(cams.front());
        j["version"] = 1;
    } else {
        j = nlohmann::json::array();
        for (const auto& c : cams) j.push_back(cameraToJson(c));
    }
    writeFileBytes(path, j.dump(1) + "\n");
}

WorldFrame buildWorldFrame(const Vec3& stancePoint, const Vec3& gravityDir, const Vec3& cameraViewDir) {
    if (std::abs(gravityDir.norm() - 1.0) > 1e-6 || std::abs(cameraViewDir.norm() - 1.0) > 1e-6) {
        throw ValidationError("buildWorldFrame: gravity and view directions must be unit vectors");
    }
    const double angle = std::atan2(gravityDir.cross(cameraViewDir).norm(), gravityDir.dot(cameraViewDir));
    if (angle <= 1e-3 || angle >= std::numbers::pi - 1e-3) {
        throw DegenerateError("buildWorldFrame: camera view direction is parallel to gravity");
    }
    WorldFrame f;
    f.origin = stancePoint;
    f.cameraViewDir = cameraViewDir;
    f.axisY = (-gravityDir).normalized();
    f.axisX = f.axisY.cross(cameraViewDir).normalized();
    f.axisZ = f.axisX.cross(f.axisY);
    if (f.axisX.cross(f.axisY).dot(f.axisZ) < 0.0) {
        f.axisX = -f.axisX;
        f.axisZ = f.axisX.cross(f.axisY);
    }
    f.axisZ.normalize();
    f.scale = 1.0;
    f.groundHeight = 0.0;
    return f;
}

RigidTransform estimateRigidTransform(const Points3& src, const Points3& dst, bool withScale) {
    if (src.rows() != dst.rows()) throw ValidationError("estimateRigidTransform: point sets differ in size");
    const Eigen::Index m = src.rows();
    if (m < 3) throw DegenerateError("estimateRigidTransform: need at least 3 correspondences");
    if (!src.allFinite() || !dst.allFinite()) throw ValidationError("estimateRigidTransform: non-finite points");

    const Vec3 muSrc = src.colwise().mean().transpose();
    const Vec3 muDst = dst.colwise().mean().transpose();
    const Eigen::Matrix<double, 3, Eigen::Dynamic> x = (src.rowwise() - muSrc.transpose()).transpose();
    const Eigen::Matrix<double, 3, Eigen::Dynamic> y = (dst.rowwise() - muDst.transpose()).transpose();
    const double n = static_cast<double>(m);

    const Mat3 scatter = x * x.transpose() / n;
    const Eigen::JacobiSVD<Mat3> scatterSvd(scatter);
    const Vec3 sv = scatterSvd.singularValues();
    if (!(sv(0) > 0.0) || sv(1) <= 1e-12 * sv(0)) {
        throw DegenerateError("estimateRigidTransform: source points are collinear or coincident");
    }

    const Mat3 cov = y * x.transpose() / n;
    const Eigen::JacobiSVD<Mat3> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Vec3 d = svd.singularValues();
    if (!(d(0) > 0.0) || d(1) <= 1e-12 * d(0)) {
        throw DegenerateError("estimateRigidTransform: cross-covariance has rank < 2");
    }
    Mat3 s = Mat3::Identity();
    if (svd.matrixU().determinant() * svd.matrixV().determinant() < 0.0) s(2, 2) = -1.0;

    RigidTransform t;
    t.rotation = svd.matrixU() * s * svd.matrixV().transpose();
    if (withScale) {
        const double varSrc = x.squaredNorm() / n;
        t.scale = (d.asDiagonal() * s).trace() / varSrc;
    }
    t.translation = muDst - t.scale * t.rotation * muSrc;

    double sq = 0.0, sum = 0.0;
    for (Eigen::Index i = 0; i < m; ++i) {
        const double r = (t.apply(src.row(i).transpose()) - dst.row(i).transpose()).norm();
        sq += r * r;
        sum += r;
    }
    t.rmsResidual = std::sqrt(sq / n);
    t.meanResidual = sum / n;
    return t;
}

double groundAlignYaw(const WorldFrame& frameA, const WorldFrame& frameB) {
    const Vec3 ya = frameA.axisY.normalized();
    const Vec3 yb = frameB.axisY.normalized();
    const double tilt = std::atan2(ya.cross(yb).norm(), ya.dot(yb));
    if (tilt > 1e-3) throw DegenerateError("groundAlignYaw: frames do not share the up axis");
    const Vec3 za = frameA.axisZ - frameA.axisZ.dot(ya) * ya;
    const Vec3 zb = frameB.axisZ - frameB.axisZ.dot(ya) * ya;
    return std::atan2(za.cross(zb).dot(ya), za.dot(zb));
}

nlohmann::json worldFrameToJson(const WorldFrame& f) {
    auto v = [](const Vec3& x) { return nlohmann::json{x.x(), x.y(), x.z()}; };
    return {{"origin", v(f.origin)}, {"axis_x", v(f.axisX)}, {"axis_y", v(f.axisY)},
            {"axis_z", v(f.axisZ)}, {"scale", f.scale}, {"alignment_yaw", f.alignmentYaw},
            {"ground_height", f.groundHeight}, {"camera_view_dir", v(f.cameraViewDir)}};
}

}  // namespace wm
