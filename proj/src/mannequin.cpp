#include "worldmotion/mannequin.hpp"

#include <cmath>
#include <map>
#include <numbers>

namespace wm {

namespace {

using namespace mannequin;

struct Node {
    Vec3 center;
    int joint;        // primary joint of the segment leaving this node
    bool isJointLocation;
    double rx, ry;    // cross-section radii
};

struct Builder {
    std::vector<Vec3> vertices;
    std::vector<std::map<int, double>> weights;
    std::vector<Eigen::Vector3i> faces;
    std::map<int, std::vector<int>> jointRings;  // joint -> ring vertex ids centred on it
    std::vector<int> parents;
    std::vector<int> footVertices;

    int addVertex(const Vec3& p, std::map<int, double> w) {
        vertices.push_back(p);
        weights.push_back(std::move(w));
        return static_cast<int>(vertices.size()) - 1;
    }

    // Sweeps a closed cross-section along the node centres.
    void chain(const std::vector<Node>& nodes, int segments, int subdivisions, double angleOffset,
               bool blendStart, bool capStart, bool capEnd, bool isFoot = false) {
        std::vector<std::vector<int>> rings;
        const int n = static_cast<int>(nodes.size());
        for (int i = 0; i + 1 < n; ++i) {
            const Node& a = nodes[i];
            const Node& b = nodes[i + 1];
            const bool lastSegment = i + 2 == n;
            const int steps = subdivisions + 1;
            for (int k = 0; k < steps + (lastSegment ? 1 : 0); ++k) {
                const double t = static_cast<double>(k) / steps;
                const Vec3 c = a.center + t * (b.center - a.center);
                const double rx = a.rx + t * (b.rx - a.rx);
                const double ry = a.ry + t * (b.ry - a.ry);

                std::map<int, double> w;
                const int primary = a.joint;
                double wPrev = 0.0, wNext = 0.0;
                const int prevJoint = (i == 0) ? parents[primary] : nodes[i - 1].joint;
                const bool canBlendPrev = prevJoint >= 0 && prevJoint != primary && (i > 0 || blendStart);
                if (canBlendPrev && t < 0.35) wPrev = 0.5 * (1.0 - t / 0.35);
                const bool canBlendNext = b.joint != primary;
                if (canBlendNext && t > 0.65) wNext = 0.5 * (t - 0.65) / 0.35;
                w[primary] += 1.0 - wPrev - wNext;
                if (wPrev > 0.0) w[prevJoint] += wPrev;
                if (wNext > 0.0) w[b.joint] += wNext;

                const Vec3 dir = (b.center - a.center).normalized();
                const Vec3 ref = std::abs(dir.dot(Vec3::UnitZ())) < 0.9 ? Vec3::UnitZ() : Vec3::UnitX();
                const Vec3 u = dir.cross(ref).normalized();
                const Vec3 v = dir.cross(u).normalized();
                std::vector<int> ring;
                for (int s = 0; s < segments; ++s) {
                    const double ang = angleOffset + 2.0 * std::numbers::pi * s / segments;
                    Vec3 p = c + rx * std::cos(ang) * u + ry * std::sin(ang) * v;
                    const int id = addVertex(p, w);
                    ring.push_back(id);
                }
                if (k == 0 && a.isJointLocation && !jointRings.count(a.joint)) jointRings[a.joint] = ring;
                if (lastSegment && k == steps && b.isJointLocation && !jointRings.count(b.joint)) {
                    jointRings[b.joint] = ring;
                }
                rings.push_back(std::move(ring));
            }
        }
        for (std::size_t r = 0; r + 1 < rings.size(); ++r) {
            for (int s = 0; s < segments; ++s) {
                const int s2 = (s + 1) % segments;
                const int a0 = rings[r][s], a1 = rings[r][s2], b0 = rings[r + 1][s], b1 = rings[r + 1][s2];
                faces.emplace_back(a0, b0, a1);
                faces.emplace_back(a1, b0, b1);
            }
        }
        auto cap = [&](const std::vector<int>& ring, bool flip) {
            Vec3 c = Vec3::Zero();
            for (int id : ring) c += vertices[id];
            c /= static_cast<double>(ring.size());
            const int center = addVertex(c, weights[ring.front()]);
            for (int s = 0; s < segments; ++s) {
                const int a = ring[s], b = ring[(s + 1) % segments];
                if (flip) {
                    faces.emplace_back(center, b, a);
                } else {
                    faces.emplace_back(center, a, b);
                }
            }
            if (isFoot) footVertices.push_back(center);
        };
        if (capStart) cap(rings.front(), true);
        if (capEnd) cap(rings.back(), false);
        if (isFoot) {
            for (const auto& ring : rings) footVertices.insert(footVertices.end(), ring.begin(), ring.end());
        }
    }
};

// Small deterministic smooth field used for the generic shape directions.
Vec3 shapeField(int s, const Vec3& p) {
    const double a = 3.1 + 1.7 * s, b = 2.3 + 0.9 * s, c = 1.9 + 1.3 * s, d = 0.7 * s;
    return 0.012 * Vec3(std::sin(a * p.x() + b * p.y() + d), std::sin(b * p.y() + c * p.z() + 2.0 * d),
                        std::sin(c * p.z() + a * p.x() + 3.0 * d));
}

}  // namespace

BodyModelAsset makeMannequin() {
    BodyModelAsset asset;
    asset.jointParents = {-1, Pelvis, Pelvis, Pelvis, LeftHip, RightHip, Spine1, LeftKnee, RightKnee, Spine2,
                          LeftAnkle, RightAnkle, Spine3, Spine3, Spine3, Neck, LeftCollar, RightCollar,
                          LeftShoulder, RightShoulder, LeftElbow, RightElbow, LeftWrist, RightWrist};
    Points3 joints(Count, 3);
    joints << 0.0, 0.95, 0.0,     // pelvis
        0.09, 0.90, 0.0,          // left hip
        -0.09, 0.90, 0.0,         // right hip
        0.0, 1.05, 0.0,           // spine1
        0.09, 0.50, 0.0,          // left knee
        -0.09, 0.50, 0.0,         // right knee
        0.0, 1.18, 0.0,           // spine2
        0.09, 0.10, 0.0,          // left ankle
        -0.09, 0.10, 0.0,         // right ankle
        0.0, 1.30, 0.0,           // spine3
        0.09, 0.035, 0.10,        // left foot
        -0.09, 0.035, 0.10,       // right foot
        0.0, 1.50, 0.0,           // neck
        0.07, 1.42, 0.0,          // left collar
        -0.07, 1.42, 0.0,         // right collar
        0.0, 1.62, 0.0,           // head
        0.18, 1.42, 0.0,          // left shoulder
        -0.18, 1.42, 0.0,         // right shoulder
        0.45, 1.42, 0.0,          // left elbow
        -0.45, 1.42, 0.0,         // right elbow
        0.70, 1.42, 0.0,          // left wrist
        -0.70, 1.42, 0.0,         // right wrist
        0.80, 1.42, 0.0,          // left hand
        -0.80, 1.42, 0.0;         // right hand
    asset.jointRestPositions = joints;

    Builder b;
    b.parents = asset.jointParents;
    auto J = [&](int j) -> Vec3 { return joints.row(j).transpose(); };

    // Torso, from just below the pelvis up to the shoulder line.
    b.chain({{Vec3(0, 0.84, 0), Pelvis, false, 0.13, 0.10},
             {J(Pelvis), Pelvis, true, 0.14, 0.10},
             {J(Spine1), Spine1, true, 0.14, 0.095},
             {J(Spine2), Spine2, true, 0.15, 0.10},
             {J(Spine3), Spine3, true, 0.16, 0.105},
             {Vec3(0, 1.45, 0), Spine3, false, 0.12, 0.08}},
            24, 3, 0.0, false, true, true);
    // Neck and head.
    b.chain({{J(Neck), Neck, true, 0.05, 0.05},
             {Vec3(0, 1.56, 0), Head, false, 0.08, 0.08},
             {J(Head), Head, true, 0.105, 0.11},
             {Vec3(0, 1.70, 0), Head, false, 0.095, 0.10},
             {Vec3(0, 1.77, 0), Head, false, 0.05, 0.05}},
            24, 2, 0.0, true, true, true);
    for (int side = 0; side < 2; ++side) {
        const int hip = side == 0 ? LeftHip : RightHip;
        const int knee = side == 0 ? LeftKnee : RightKnee;
        const int ankle = side == 0 ? LeftAnkle : RightAnkle;
        const int foot = side == 0 ? LeftFoot : RightFoot;
        b.chain({{J(hip), hip, true, 0.07, 0.07},
                 {J(knee), knee, true, 0.05, 0.05},
                 {J(ankle), ankle, true, 0.04, 0.04}},
                16, 4, 0.0, true, true, true);
        // Foot: square section swept heel to toe, sole on y = 0.
        const double x = joints(ankle, 0);
        const double r = 0.045 * std::numbers::sqrt2;
        const double h = 0.035 * std::numbers::sqrt2;
        b.chain({{Vec3(x, 0.035, -0.05), ankle, false, h, r},
                 {Vec3(x, 0.035, 0.0), ankle, false, h, r},
                 {J(foot), foot, true, h, r},
                 {Vec3(x, 0.035, 0.16), foot, false, h, r}},
                4, 0, std::numbers::pi / 4.0, false, true, true, true);
    }
    for (int side = 0; side < 2; ++side) {
        const double sx = side == 0 ? 1.0 : -1.0;
        const int collar = side == 0 ? LeftCollar : RightCollar;
        const int shoulder = side == 0 ? LeftShoulder : RightShoulder;
        const int elbow = side == 0 ? LeftElbow : RightElbow;
        const int wrist = side == 0 ? LeftWrist : RightWrist;
        const int hand = side == 0 ? LeftHand : RightHand;
        b.chain({{J(collar), collar, true, 0.05, 0.05},
                 {J(shoulder), shoulder, true, 0.055, 0.055},
                 {J(elbow), elbow, true, 0.045, 0.045},
                 {J(wrist), wrist, true, 0.035, 0.03},
                 {J(hand), hand, true, 0.045, 0.02},
                 {Vec3(sx * 0.92, 1.42, 0.0), hand, false, 0.035, 0.015}},
                16, 3, 0.0, true, true, true);
    }

    const int v = static_cast<int>(b.vertices.size());
    asset.templateVertices.resize(v, 3);
    for (int i = 0; i < v; ++i) asset.templateVertices.row(i) = b.vertices[i].transpose();
    // Snap the soles exactly onto the ground plane.
    for (int id : b.footVertices) {
        if (std::abs(asset.templateVertices(id, 1)) < 1e-9) asset.templateVertices(id, 1) = 0.0;
    }
    asset.faces.resize(static_cast<Eigen::Index>(b.faces.size()), 3);
    for (std::size_t f = 0; f < b.faces.size(); ++f) asset.faces.row(static_cast<Eigen::Index>(f)) = b.faces[f].transpose();

    asset.skinningWeights = Eigen::MatrixXd::Zero(v, Count);
    for (int i = 0; i < v; ++i) {
        double total = 0.0;
        for (const auto& [j, w] : b.weights[i]) total += w;
        for (const auto& [j, w] : b.weights[i]) asset.skinningWeights(i, j) = w / total;
    }

    asset.jointRegressor = Eigen::MatrixXd::Zero(Count, v);
    for (int j = 0; j < Count; ++j) {
        const auto& ring = b.jointRings.at(j);
        for (int id : ring) (*asset.jointRegressor)(j, id) = 1.0 / static_cast<double>(ring.size());
    }

    // Rest joints coincide with the regressed ones.
    asset.jointRestPositions = *asset.jointRegressor * asset.templateVertices;

    // Shape directions: 0 height, 1 girth, 2 torso depth, 3..9 smooth fields.
    constexpr int kShapes = 10;
    asset.shapeDirections = Eigen::MatrixXd::Zero(3 * v, kShapes);
    for (int i = 0; i < v; ++i) {
        const Vec3 p = asset.templateVertices.row(i).transpose();
        asset.shapeDirections.block<3, 1>(3 * i, 0) = Vec3(0.0, 0.06 * p.y(), 0.0);
        asset.shapeDirections.block<3, 1>(3 * i, 1) = Vec3(0.08 * p.x(), 0.0, 0.08 * p.z());
        const bool torso = p.y() > 0.8 && p.y() < 1.5 && std::abs(p.x()) < 0.2;
        asset.shapeDirections.block<3, 1>(3 * i, 2) = torso ? Vec3(0.0, 0.0, 0.1 * p.z()) : Vec3::Zero();
        for (int s = 3; s < kShapes; ++s) asset.shapeDirections.block<3, 1>(3 * i, s) = shapeField(s, p);
    }

    // Child template: shorter and slimmer with a proportionally larger head.
    Points3 child(v, 3);
    const Vec3 headCenter = J(Head);
    for (int i = 0; i < v; ++i) {
        Vec3 p = asset.templateVertices.row(i).transpose();
        const double headWeight = asset.skinningWeights(i, Head);
        p = p + headWeight * 0.3 * (p - headCenter);
        child.row(i) = Vec3(0.7 * p.x(), 0.6 * p.y(), 0.7 * p.z()).transpose();
    }
    asset.childTemplateVertices = child;

    const Eigen::RowVector3d lo = asset.templateVertices.colwise().minCoeff();
    const Eigen::RowVector3d hi = asset.templateVertices.colwise().maxCoeff();
    asset.semanticVertexColors.resize(v, 3);
    for (int i = 0; i < v; ++i) {
        asset.semanticVertexColors.row(i) = (asset.templateVertices.row(i) - lo).cwiseQuotient(hi - lo);
    }

    for (int j = 1; j <= 21; ++j) asset.bodyJoints.push_back(j);
    asset.handJoints[0] = {LeftHand};
    asset.handJoints[1] = {RightHand};
    asset.wristJoints = {LeftWrist, RightWrist};
    for (int id : b.footVertices) {
        if (asset.templateVertices(id, 1) == 0.0) asset.footVertexIds.push_back(id);
    }
    asset.canonicalForward = Vec3::UnitZ();
    asset.meta = {{"name", "mannequin"}, {"units", "meters"}};
    return asset;
}

}  // namespace wm
