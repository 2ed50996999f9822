#pragma once

#include "worldmotion/common.hpp"

#include "json.hpp"

#include <filesystem>
#include <vector>

namespace wm {

/// Ground-aware world frame: origin at the first-frame stance point, y up
/// (against gravity), ground plane at `groundHeight` along y, metric scale.
struct WorldFrame {
    Vec3 origin = Vec3::Zero();
    Vec3 axisX = Vec3::UnitX();
    Vec3 axisY = Vec3::UnitY();
    Vec3 axisZ = Vec3::UnitZ();
    double scale = 1.0;
    double alignmentYaw = 0.0;
    double groundHeight = 0.0;
    Vec3 cameraViewDir = Vec3::UnitZ();

    /// Rows are the axes; maps world coordinates into this frame.
    Mat3 basis() const;
    Vec3 toFrame(const Vec3& worldPoint) const;
    Vec3 fromFrame(const Vec3& framePoint) const;
    void validate() const;
};

/// Pinhole camera. Extrinsics map world to camera coordinates as
/// x_cam = R_w2c * x_world + T_w2c; camera axes are x right, y down, z forward.
struct CameraModel {
    Mat3 K = Mat3::Identity();
    double f1 = 1.0;
    Mat3 R_w2c = Mat3::Identity();
    Vec3 T_w2c = Vec3::Zero();
    int width = 0;
    int height = 0;
    nlohmann::json extra = nlohmann::json::object();

    void validate() const;
    /// Camera centre in world coordinates.
    Vec3 center() const;
    /// Optical axis in world coordinates.
    Vec3 viewDirection() const;
    /// Same camera with the intrinsics rescaled to a different image size.
    CameraModel resized(int newWidth, int newHeight) const;
};

/// Camera JSON: { "K": [9 row-major], "f1", "R_w2c": [9 row-major],
/// "T_w2c": [3], "width", "height" } plus optional "version".
nlohmann::json cameraToJson(const CameraModel& cam);
CameraModel cameraFromJson(const nlohmann::json& j, const std::string& origin = "<json>");
/// A camera file holds one camera object or a list of per-frame cameras.
std::vector<CameraModel> loadCameras(const std::filesystem::path& path);
void saveCameras(const std::vector<CameraModel>& cams, const std::filesystem::path& path);

WorldFrame buildWorldFrame(const Vec3& stancePoint, const Vec3& gravityDir, const Vec3& cameraViewDir);

struct RigidTransform {
    Mat3 rotation = Mat3::Identity();
    Vec3 translation = Vec3::Zero();
    double scale = 1.0;
    double rmsResidual = 0.0;
    double meanResidual = 0.0;

    Vec3 apply(const Vec3& p) const { return scale * (rotation * p) + translation; }
};

/// Least-squares alignment dst_i ≈ s·R·src_i + T (Umeyama). Reflections are
/// suppressed. Throws DegenerateError when fewer than 3 points are given or
/// the centred point sets have rank < 2.
RigidTransform estimateRigidTransform(const Points3& src, const Points3& dst, bool withScale = false);

/// Yaw about the shared up axis that turns frameA's z axis onto frameB's.
double groundAlignYaw(const WorldFrame& frameA, const WorldFrame& frameB);

nlohmann::json worldFrameToJson(const WorldFrame& frame);

}  // namespace wm
