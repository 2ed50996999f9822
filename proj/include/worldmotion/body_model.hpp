#pragma once

#include "worldmotion/common.hpp"

#include "json.hpp"

#include <array>
#include <optional>
#include <span>
#include <vector>

namespace wm {

enum class HandSide { Left = 0, Right = 1 };

/// A skinned parametric body: rest mesh, skeleton, weights and blend shapes.
///
/// Joint layout: the root joint (parent == -1) is driven by the global
/// orientation; `bodyJoints[k]` is driven by row k of the body pose; the
/// per-side `handJoints` lists are driven by the hand pose rows. Joints not
/// listed in any of those (jaw, eyes on the full asset) stay at identity.
struct BodyModelAsset {
    Points3 templateVertices;        // V×3, rest pose, metres
    Faces faces;                     // F×3
    Points3 jointRestPositions;      // J×3
    std::vector<int> jointParents;   // J, root = -1
    Eigen::MatrixXd skinningWeights; // V×J
    /// Shape blend directions, (3V)×S; column s is direction s flattened
    /// vertex-major (x0, y0, z0, x1, ...).
    Eigen::MatrixXd shapeDirections;
    /// Optional pose-dependent correctives, (3V)×(9·(J-1)); the pose feature
    /// is the flattened (R_j - I) of every non-root joint in joint order.
    std::optional<Eigen::MatrixXd> poseDirections;
    /// Optional J×V regressor; when present joints follow the shaped mesh.
    std::optional<Eigen::MatrixXd> jointRegressor;
    std::optional<Points3> childTemplateVertices;
    Points3 semanticVertexColors;    // V×3 in [0, 1]
    std::vector<int> bodyJoints;
    std::array<std::vector<int>, 2> handJoints;
    std::array<int, 2> wristJoints{-1, -1};
    std::vector<int> footVertexIds;
    /// Direction the rest mesh faces.
    Vec3 canonicalForward = Vec3::UnitZ();
    nlohmann::json meta = nlohmann::json::object();

    int vertexCount() const { return static_cast<int>(templateVertices.rows()); }
    int jointCount() const { return static_cast<int>(jointParents.size()); }
    int shapeCount() const { return static_cast<int>(shapeDirections.cols()); }
    int bodyJointCount() const { return static_cast<int>(bodyJoints.size()); }
    int handJointsPerSide() const { return static_cast<int>(handJoints[0].size()); }
    int rootJoint() const;

    /// Throws ValidationError describing the first violated invariant.
    void validate() const;

    /// Vertices whose dominant skinning joint is the given wrist or one of
    /// its descendants.
    std::vector<int> handVertexIds(HandSide side) const;
    /// Faces whose three vertices all belong to handVertexIds(side).
    std::vector<int> handFaceIds(HandSide side) const;
};

/// Parameters of one frame. Expression is carried but never interpreted.
struct FramePose {
    Vec3 translation = Vec3::Zero();
    Vec3 globalOrientation = Vec3::Zero();
    Points3 bodyPose;                 // J_body×3 axis-angle
    Eigen::VectorXd shape;            // S
    std::array<Points3, 2> handPose;  // per side, H×3 axis-angle
    nlohmann::json expression;        // null when absent
    double childFactor = 0.0;
    nlohmann::json extra = nlohmann::json::object();

    /// Zero pose sized for `asset`.
    static FramePose zero(const BodyModelAsset& asset);
    /// Throws ValidationError if dimensions disagree with `asset` or values
    /// are out of range.
    void validateFor(const BodyModelAsset& asset) const;
};

struct JointTransform {
    Mat3 rotation = Mat3::Identity();  // global rotation
    Vec3 position = Vec3::Zero();      // global joint position
};

/// Interpolate toward the child template, then add the shape blend shapes.
Points3 applyShape(const BodyModelAsset& asset, const Eigen::VectorXd& shape, double childFactor);

/// Joint rest positions for an already shaped mesh.
Points3 shapedJointPositions(const BodyModelAsset& asset, const Points3& shapedVertices);

/// Per-joint local rotations (column operators) for `pose`.
std::vector<Mat3> localRotations(const BodyModelAsset& asset, const FramePose& pose);

std::vector<JointTransform> forwardKinematics(const BodyModelAsset& asset, const FramePose& pose);

/// Linear blend skinning of the shaped (and optionally corrected) template.
Points3 skinVertices(const BodyModelAsset& asset, const FramePose& pose);

/// Global rotation of `jointId`: product of local rotations from the root.
Mat3 chainGlobalRotation(const BodyModelAsset& asset, const FramePose& pose, int jointId);

/// Index of `jointId` inside bodyJoints, or -1.
int bodyPoseIndex(const BodyModelAsset& asset, int jointId);

}  // namespace wm
