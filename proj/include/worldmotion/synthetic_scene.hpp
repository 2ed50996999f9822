#pragma once

#include "worldmotion/ingest.hpp"
#include "worldmotion/trajectory.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace wm {

struct WalkOptions {
    int frames = 40;
    int cycleFrames = 40;
    double fps = 30.0;
    double speed = 1.2;            // mean m/s
    double speedVariation = 0.3;   // relative amplitude of the speed oscillation
    Vec3 start = Vec3::Zero();     // root ground footprint of frame 0
    double headingYaw = 0.0;       // direction of travel, 0 = +x, measured like the heading angle
};

/// Periodic walk of the mannequin skeleton: swinging legs and arms, root
/// moving along a straight line with a speed that oscillates once per gait
/// cycle. Frame `cycleFrames` would repeat frame 0 shifted by one stride.
MotionSequence makeWalkingClip(const BodyModelAsset& asset, const WalkOptions& options = {});

/// Pinhole camera at `center` looking at `target` with +y up.
CameraModel makeLookAtCamera(const Vec3& center, const Vec3& target, int width, int height, double focal);

/// Camera z depth of the ground plane y = 0 at every pixel centre (0 above the horizon).
DepthMap groundDepthMap(const CameraModel& cam);

struct SceneOptions {
    int frames = 120;
    int cycleFrames = 40;
    double fps = 30.0;
    Vec3 start = Vec3(-2.4, 0.0, 0.0);
    Vec3 cameraCenter = Vec3(0.0, 1.8, 7.0);
    Vec3 cameraTarget = Vec3(0.0, 0.6, 0.0);
    int width = 512;
    int height = 512;
    double focal = 500.0;
    double arcRadius = 2.5;
    int keypointCount = 7;
    bool withDepth = false;
    bool withHands = false;
    bool withJoints = true;
};

struct SyntheticScene {
    EstimatorBundle bundle;
    std::optional<DepthMap> depth;
    /// Quarter circle on the ground starting at the first stance point,
    /// drawn as pinned keypoints.
    std::vector<Keypoint> keypoints;
    Points3 arcWorld;
};

SyntheticScene makeSyntheticScene(const BodyModelAsset& asset, const SceneOptions& options = {});

/// Writes the bundle (with depth when present) and `trajectory.json` into `dir`.
void writeSyntheticScene(SyntheticScene& scene, const std::filesystem::path& dir);

}  // namespace wm
