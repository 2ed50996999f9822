#pragma once

#include "worldmotion/config.hpp"
#include "worldmotion/ingest.hpp"
#include "worldmotion/motion_bank.hpp"
#include "worldmotion/renderer.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace wm {

/// Everything the edit produced, including the intermediate trajectory.
struct EditResult {
    MotionSequence sequence;
    nlohmann::json report;
    CameraModel camera;          // camera the trajectory was drawn in
    WorldFrame worldFrame;
    Points2 pixels;              // per-frame drawn points
    Points3 drawnPath;           // drawn points on the ground, world space
    SpeedAlignment alignment;    // re-timed ground path
    Headings headings;
    Eigen::VectorXd groundingOffsets;
};

/// Re-routes the bundle's motion (or a substituted clip) along `keypoints`.
///
/// Steps: camera registration when joint tracks exist, world frame, optional
/// clip substitution (looped to the bundle length and given the bundle's
/// shape) or hand merging, unprojection of the drawn path onto the ground,
/// speed alignment, headings, per-frame re-orientation, foot grounding.
EditResult editMotion(const EstimatorBundle& bundle, const BodyModelAsset& asset,
                      const std::vector<Keypoint>& keypoints, const std::optional<MotionClip>& clip,
                      const PipelineConfig& config);

/// Skinned meshes of every frame.
std::vector<Points3> skinSequence(const BodyModelAsset& asset, const MotionSequence& seq, int threads = 0);

/// Faces of both hands, sorted.
std::vector<int> handFaceUnion(const BodyModelAsset& asset);

nlohmann::json renderMotion(const BodyModelAsset& asset, const MotionSequence& seq,
                            const std::vector<CameraModel>& cameras, const std::filesystem::path& outDir,
                            const PipelineConfig& config);

/// Built-in mannequin when `path` is empty.
BodyModelAsset loadAssetOrDefault(const std::filesystem::path& path);

struct EditPaths {
    std::filesystem::path bundle;
    std::filesystem::path trajectory;
    std::filesystem::path asset;
    std::filesystem::path bank;
    std::string clipId;
    std::filesystem::path outSequence;
    std::filesystem::path outReport;
};

/// File-level wrapper: reads inputs, runs editMotion, writes the sequence and report.
EditResult runEdit(const EditPaths& paths, const PipelineConfig& config);

}  // namespace wm
