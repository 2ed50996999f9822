#pragma once

#include "worldmotion/body_model.hpp"

#include <filesystem>
#include <string>
#include <vector>

namespace wm {

/// Per-frame parametric poses plus timing and the coordinate-frame tag.
///
/// JSON schema (shared by bundles, the motion bank and the CLI):
///   { "version": 1, "fps": 30, "frame_count": N, "coordinate_frame": "world",
///     "frames": [ { "gamma": [3], "phi": [3], "theta": [[3] x J_body],
///                   "beta": [S], "theta_h": [[[3] x H], [[3] x H]],
///                   "expression"?: any, "child_factor"?: number } ] }
/// Unknown keys at either level are preserved through a round trip.
struct MotionSequence {
    double fps = 30.0;
    std::string coordinateFrame = "world";
    std::vector<FramePose> frames;
    nlohmann::json extra = nlohmann::json::object();

    int frameCount() const { return static_cast<int>(frames.size()); }
    /// Throws ValidationError if any frame disagrees with `asset`.
    void validateFor(const BodyModelAsset& asset) const;
};

nlohmann::json motionToJson(const MotionSequence& seq);
MotionSequence motionFromJson(const nlohmann::json& j, const std::string& origin = "<json>");

/// Deterministic serialisation: identical sequences give identical bytes.
std::string serializeMotion(const MotionSequence& seq);
MotionSequence loadMotion(const std::filesystem::path& path);
void saveMotion(const MotionSequence& seq, const std::filesystem::path& path);

/// Root joint world position of every frame.
Points3 rootPositions(const BodyModelAsset& asset, const MotionSequence& seq);

}  // namespace wm
