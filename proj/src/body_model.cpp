#include "worldmotion/body_model.hpp"

#include "worldmotion/rotation.hpp"

#include <cmath>
#include <sstream>

namespace wm {

namespace {

[[noreturn]] void invalid(const std::string& msg) { throw ValidationError("body model: " + msg); }

bool isDescendantOrSelf(const std::vector<int>& parents, int joint, int ancestor) {
    for (int j = joint; j >= 0; j = parents[j]) {
        if (j == ancestor) return true;
    }
    return false;
}

}  // namespace

int BodyModelAsset::rootJoint() const {
    for (int j = 0; j < jointCount(); ++j) {
        if (jointParents[j] < 0) return j;
    }
    return -1;
}

void BodyModelAsset::validate() const {
    const int v = vertexCount();
    const int j = jointCount();
    if (v == 0) invalid("template has no vertices");
    if (j == 0) invalid("skeleton has no joints");
    if (jointRestPositions.rows() != j) {
        invalid("jointRestPositions has " + std::to_string(jointRestPositions.rows()) + " rows, expected " +
                std::to_string(j));
    }
    int roots = 0;
    for (int k = 0; k < j; ++k) {
        const int p = jointParents[k];
        if (p < 0) {
            ++roots;
        } else if (p >= k) {
            invalid("joint " + std::to_string(k) + " has parent " + std::to_string(p) +
                    "; parents must precede children");
        }
    }
    if (roots != 1) invalid("skeleton must have exactly one root, found " + std::to_string(roots));

    if (skinningWeights.rows() != v || skinningWeights.cols() != j) invalid("skinning weights must be V×J");
    for (int i = 0; i < v; ++i) {
        if ((skinningWeights.row(i).array() < 0.0).any()) {
            invalid("negative skinning weight on vertex " + std::to_string(i));
        }
        const double s = skinningWeights.row(i).sum();
        if (std::abs(s - 1.0) > 1e-6) {
            std::ostringstream os;
            os << "skinning weights of vertex " << i << " sum to " << s;
            invalid(os.str());
        }
    }
    if (faces.size() > 0 && (faces.minCoeff() < 0 || faces.maxCoeff() >= v)) invalid("face index out of range");
    if (shapeDirections.size() > 0 && shapeDirections.rows() != 3 * v) invalid("shape directions must be (3V)×S");
    if (poseDirections && (poseDirections->rows() != 3 * v || poseDirections->cols() != 9 * (j - 1))) {
        invalid("pose directions must be (3V)×(9(J-1))");
    }
    if (jointRegressor && (jointRegressor->rows() != j || jointRegressor->cols() != v)) {
        invalid("joint regressor must be J×V");
    }
    if (childTemplateVertices && childTemplateVertices->rows() != v) {
        invalid("child template has " + std::to_string(childTemplateVertices->rows()) + " vertices, expected " +
                std::to_string(v));
    }
    if (semanticVertexColors.rows() != v) invalid("semantic vertex colors must be V×3");
    if (semanticVertexColors.size() > 0 &&
        (semanticVertexColors.minCoeff() < 0.0 || semanticVertexColors.maxCoeff() > 1.0)) {
        invalid("semantic vertex colors must lie in [0, 1]");
    }
    auto checkJoint = [&](int id, const char* what) {
        if (id < 0 || id >= j) invalid(std::string(what) + " joint id out of range");
        if (id == rootJoint()) invalid(std::string(what) + " cannot be the root joint");
    };
    for (int id : bodyJoints) checkJoint(id, "body");
    for (const auto& side : handJoints) {
        for (int id : side) checkJoint(id, "hand");
    }
    if (handJoints[0].size() != handJoints[1].size()) invalid("left and right hands differ in joint count");
    for (int w : wristJoints) {
        if (w < 0) continue;
        checkJoint(w, "wrist");
        if (bodyPoseIndex(*this, w) < 0) invalid("wrist joint must be driven by the body pose");
    }
    for (int id : footVertexIds) {
        if (id < 0 || id >= v) invalid("foot vertex id out of range");
    }
    if (std::abs(canonicalForward.norm() - 1.0) > 1e-6) invalid("canonical forward must be a unit vector");
}

std::vector<int> BodyModelAsset::handVertexIds(HandSide side) const {
    std::vector<int> ids;
    const int wrist = wristJoints[static_cast<int>(side)];
    if (wrist < 0) return ids;
    for (int i = 0; i < vertexCount(); ++i) {
        Eigen::Index dominant = 0;
        skinningWeights.row(i).maxCoeff(&dominant);
        if (isDescendantOrSelf(jointParents, static_cast<int>(dominant), wrist)) ids.push_back(i);
    }
    return ids;
}

std::vector<int> BodyModelAsset::handFaceIds(HandSide side) const {
    std::vector<char> inHand(vertexCount(), 0);
    for (int i : handVertexIds(side)) inHand[i] = 1;
    std::vector<int> ids;
    for (int f = 0; f < faces.rows(); ++f) {
        if (inHand[faces(f, 0)] && inHand[faces(f, 1)] && inHand[faces(f, 2)]) ids.push_back(f);
    }
    return ids;
}

FramePose FramePose::zero(const BodyModelAsset& asset) {
    FramePose pose;
    pose.bodyPose = Points3::Zero(asset.bodyJointCount(), 3);
    pose.shape = Eigen::VectorXd::Zero(asset.shapeCount());
    for (auto& h : pose.handPose) h = Points3::Zero(asset.handJointsPerSide(), 3);
    return pose;
}

void FramePose::validateFor(const BodyModelAsset& asset) const {
    if (bodyPose.rows() != asset.bodyJointCount()) {
        throw ValidationError("pose: body pose has " + std::to_string(bodyPose.rows()) + " joints, asset expects " +
                              std::to_string(asset.bodyJointCount()));
    }
    if (shape.size() != asset.shapeCount()) {
        throw ValidationError("pose: shape has " + std::to_string(shape.size()) + " coefficients, asset expects " +
                              std::to_string(asset.shapeCount()));
    }
    for (const auto& h : handPose) {
        if (h.rows() != asset.handJointsPerSide()) {
            throw ValidationError("pose: hand pose has " + std::to_string(h.rows()) + " joints, asset expects " +
                                  std::to_string(asset.handJointsPerSide()));
        }
        if (!h.allFinite()) throw ValidationError("pose: non-finite hand pose");
    }
    if (!translation.allFinite() || !globalOrientation.allFinite() || !bodyPose.allFinite() || !shape.allFinite()) {
        throw ValidationError("pose: non-finite values");
    }
    if (!(childFactor >= 0.0 && childFactor <= 1.0)) throw ValidationError("pose: child factor must lie in [0, 1]");
}

Points3 applyShape(const BodyModelAsset& asset, const Eigen::VectorXd& shape, double childFactor) {
    if (shape.size() != asset.shapeCount()) {
        throw ValidationError("applyShape: shape has " + std::to_string(shape.size()) + " coefficients, asset expects " +
                              std::to_string(asset.shapeCount()));
    }
    if (!(childFactor >= 0.0 && childFactor <= 1.0)) throw ValidationError("applyShape: child factor outside [0, 1]");
    Points3 shaped = asset.templateVertices;
    if (childFactor > 0.0) {
        if (!asset.childTemplateVertices) throw ValidationError("applyShape: child factor > 0 but asset has no child template");
        shaped = (1.0 - childFactor) * asset.templateVertices + childFactor * (*asset.childTemplateVertices);
    }
    if (shape.size() > 0) {
        const Eigen::VectorXd offsets = asset.shapeDirections * shape;
        shaped += Eigen::Map<const Points3>(offsets.data(), asset.vertexCount(), 3);
    }
    return shaped;
}

Points3 shapedJointPositions(const BodyModelAsset& asset, const Points3& shapedVertices) {
    if (!asset.jointRegressor) return asset.jointRestPositions;
    return *asset.jointRegressor * shapedVertices;
}

int bodyPoseIndex(const BodyModelAsset& asset, int jointId) {
    for (int k = 0; k < asset.bodyJointCount(); ++k) {
        if (asset.bodyJoints[k] == jointId) return k;
    }
    return -1;
}

std::vector<Mat3> localRotations(const BodyModelAsset& asset, const FramePose& pose) {
    pose.validateFor(asset);
    std::vector<Mat3> local(asset.jointCount(), Mat3::Identity());
    local[asset.rootJoint()] = axisAngleToMatrix(pose.globalOrientation);
    for (int k = 0; k < asset.bodyJointCount(); ++k) {
        local[asset.bodyJoints[k]] = axisAngleToMatrix(pose.bodyPose.row(k).transpose());
    }
    for (int side = 0; side < 2; ++side) {
        for (int k = 0; k < asset.handJointsPerSide(); ++k) {
            local[asset.handJoints[side][k]] = axisAngleToMatrix(pose.handPose[side].row(k).transpose());
        }
    }
    return local;
}

namespace {

std::vector<JointTransform> chain(const BodyModelAsset& asset, const std::vector<Mat3>& local,
                                  const Points3& restJoints, const Vec3& translation) {
    std::vector<JointTransform> global(asset.jointCount());
    for (int j = 0; j < asset.jointCount(); ++j) {
        const int p = asset.jointParents[j];
        const Vec3 rest = restJoints.row(j).transpose();
        if (p < 0) {
            global[j].rotation = local[j];
            global[j].position = rest + translation;
        } else {
            const Vec3 offset = rest - restJoints.row(p).transpose();
            global[j].rotation = global[p].rotation * local[j];
            global[j].position = global[p].position + global[p].rotation * offset;
        }
    }
    return global;
}

}  // namespace

std::vector<JointTransform> forwardKinematics(const BodyModelAsset& asset, const FramePose& pose) {
    const auto local = localRotations(asset, pose);
    Points3 restJoints = asset.jointRestPositions;
    if (asset.jointRegressor) restJoints = shapedJointPositions(asset, applyShape(asset, pose.shape, pose.childFactor));
    return chain(asset, local, restJoints, pose.translation);
}

Points3 skinVertices(const BodyModelAsset& asset, const FramePose& pose) {
    const auto local = localRotations(asset, pose);
    Points3 shaped = applyShape(asset, pose.shape, pose.childFactor);
    const Points3 restJoints = shapedJointPositions(asset, shaped);
    const auto global = chain(asset, local, restJoints, pose.translation);

    if (asset.poseDirections) {
        Eigen::VectorXd feature(9 * (asset.jointCount() - 1));
        int at = 0;
        for (int j = 0; j < asset.jointCount(); ++j) {
            if (j == asset.rootJoint()) continue;
            const Mat3 d = local[j] - Mat3::Identity();
            for (int r = 0; r < 3; ++r) {
                for (int c = 0; c < 3; ++c) feature[at++] = d(r, c);
            }
        }
        const Eigen::VectorXd offsets = *asset.poseDirections * feature;
        shaped += Eigen::Map<const Points3>(offsets.data(), asset.vertexCount(), 3);
    }

    // Each joint's skinning transform maps rest space to posed space:
    // x -> R_j (x - J_j) + p_j.
    const int jc = asset.jointCount();
    std::vector<Mat3> rot(jc);
    std::vector<Vec3> trans(jc);
    for (int j = 0; j < jc; ++j) {
        rot[j] = global[j].rotation;
        trans[j] = global[j].position - global[j].rotation * restJoints.row(j).transpose();
    }

    Points3 out(asset.vertexCount(), 3);
    for (int i = 0; i < asset.vertexCount(); ++i) {
        Mat3 blendRot = Mat3::Zero();
        Vec3 blendTrans = Vec3::Zero();
        for (int j = 0; j < jc; ++j) {
            const double w = asset.skinningWeights(i, j);
            if (w == 0.0) continue;
            blendRot += w * rot[j];
            blendTrans += w * trans[j];
        }
        out.row(i) = (blendRot * shaped.row(i).transpose() + blendTrans).transpose();
    }
    return out;
}

Mat3 chainGlobalRotation(const BodyModelAsset& asset, const FramePose& pose, int jointId) {
    if (jointId < 0 || jointId >= asset.jointCount()) {
        throw ValidationError("chainGlobalRotation: joint id " + std::to_string(jointId) + " out of range");
    }
    const auto local = localRotations(asset, pose);
    std::vector<int> path;
    for (int j = jointId; j >= 0; j = asset.jointParents[j]) path.push_back(j);
    Mat3 r = Mat3::Identity();
    for (auto it = path.rbegin(); it != path.rend(); ++it) r = r * local[*it];
    return r;
}

}  // namespace wm
