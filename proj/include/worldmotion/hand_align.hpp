#pragma once

#include "worldmotion/motion.hpp"
#include "worldmotion/world_frame.hpp"

#include <filesystem>
#include <optional>
#include <vector>

namespace wm {

/// Camera-space hand estimate for one side of one frame.
struct HandEstimate {
    HandSide side = HandSide::Left;
    Mat3 orientation = Mat3::Identity();  // global hand orientation, camera space
    Points3 handPose;                     // H×3 axis-angle finger pose
    double confidence = 1.0;

    void validate() const;
};

/// Estimates for both sides of one frame; either may be missing.
struct FrameHands {
    std::array<std::optional<HandEstimate>, 2> sides;
};

/// Hand file: JSON list, one entry per frame:
///   { "left"?: { "R": [9 row-major], "theta": [3H], "conf": c }, "right"?: ... }
nlohmann::json handsToJson(const std::vector<FrameHands>& hands);
std::vector<FrameHands> handsFromJson(const nlohmann::json& j, const std::string& origin = "<json>");
std::vector<FrameHands> loadHands(const std::filesystem::path& path);
void saveHands(const std::vector<FrameHands>& hands, const std::filesystem::path& path);

/// Local wrist rotation that reproduces the hand's world orientation once it
/// is placed under a parent chain with global rotation `parentChain`:
///   parentChain * result = R_w2c^-1 * orientation.
/// Returns nothing when the estimate's confidence is below `threshold`.
std::optional<Mat3> matchHandOrientation(const HandEstimate& hand, const CameraModel& cam, const Mat3& parentChain,
                                         double threshold = 0.5);

struct HandMergeStats {
    int merged = 0;
    int skipped = 0;
};

/// Replace wrist rotations and finger poses with the hand estimates. Frames
/// or sides without a confident estimate keep their values. `cameras` holds
/// either one camera or one per frame.
MotionSequence mergeHands(const MotionSequence& seq, const std::vector<FrameHands>& hands,
                          const BodyModelAsset& asset, const std::vector<CameraModel>& cameras,
                          double threshold = 0.5, HandMergeStats* stats = nullptr);

/// Hand estimates that the body model itself implies for `seq`, as a camera
/// would observe them. Used to check merging end to end.
std::vector<FrameHands> handsFromBody(const MotionSequence& seq, const BodyModelAsset& asset, const CameraModel& cam);

}  // namespace wm
