#pragma once

#include "worldmotion/body_model.hpp"

namespace wm {

/// Joint ids of the synthetic mannequin. The layout mirrors the body part of
/// the usual 22-joint humanoid skeleton plus one hand joint per side.
namespace mannequin {
enum Joint : int {
    Pelvis = 0, LeftHip, RightHip, Spine1, LeftKnee, RightKnee, Spine2, LeftAnkle, RightAnkle, Spine3,
    LeftFoot, RightFoot, Neck, LeftCollar, RightCollar, Head, LeftShoulder, RightShoulder, LeftElbow,
    RightElbow, LeftWrist, RightWrist, LeftHand, RightHand, Count
};
}  // namespace mannequin

/// A small synthetic skinned humanoid in the asset format: about 2k
/// vertices, 24 joints, 10 shape directions, a child template and a joint
/// regressor. Rest pose is a T-pose standing on y = 0, facing +z.
BodyModelAsset makeMannequin();

}  // namespace wm
