#pragma once

#include "worldmotion/hand_align.hpp"
#include "worldmotion/image_io.hpp"
#include "worldmotion/motion.hpp"
#include "worldmotion/trajectory.hpp"
#include "worldmotion/world_frame.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace wm {

/// Metric depth image plus the focal length of the estimator that made it.
struct DepthMap {
    ImageF metres;
    double f2 = 0.0;  // pixels; 0 = unknown

    /// Depth at `pixel`, bilinear between pixel centres; f2 falls back to
    /// `fallbackF2` when unknown.
    DepthSample sample(const Vec2& pixel, double fallbackF2) const;
};

/// Reads a PFM (metres) or a 16-bit PNG. The sidecar `<name>.json`
/// { "scale_m_per_unit", "f2" } is required for PNG and optional for PFM.
DepthMap loadDepthMap(const std::filesystem::path& path);
void saveDepthMap(const DepthMap& depth, const std::filesystem::path& pfmPath);

/// Outputs of the external estimators for one video.
///
/// Directory layout:
///   bundle.json        { "version": 1, ... }      (required)
///   body.motion.json   MotionSequence             (required)
///   camera.json        one camera or a list        (required)
///   joints_world.bin   container, "joints" [N,J,3] (optional, with joints_cam.bin)
///   joints_cam.bin     container, "joints" [N,J,3]
///   hands.json         hand file                   (optional)
///   depth/*.pfm|*.png  depth maps, sorted by name  (optional)
struct EstimatorBundle {
    std::filesystem::path root;
    MotionSequence body;
    std::optional<std::vector<Points3>> jointsWorld;
    std::optional<std::vector<Points3>> jointsCamera;
    std::vector<CameraModel> cameras;
    std::optional<std::vector<FrameHands>> hands;
    std::vector<std::string> depthFiles;  // relative to root
    nlohmann::json manifest = nlohmann::json::object();

    int frameCount() const { return body.frameCount(); }
    /// Throws ValidationError on inconsistent track lengths.
    void validate() const;
    const CameraModel& camera(int frame = 0) const;
};

EstimatorBundle parseBundle(const std::filesystem::path& dir);
void writeBundle(const EstimatorBundle& bundle, const std::filesystem::path& dir);

std::vector<Points3> readJointTrack(const std::filesystem::path& path);
void writeJointTrack(const std::vector<Points3>& joints, const std::filesystem::path& path);

struct CameraRegistration {
    CameraModel camera;
    RigidTransform transform;
};

/// Camera whose extrinsics register the pooled world joints onto the camera
/// joints. Intrinsics come from the bundle's first camera.
CameraRegistration deriveCameraRegistration(const EstimatorBundle& bundle);

}  // namespace wm
