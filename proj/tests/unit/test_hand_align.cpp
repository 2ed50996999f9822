#include "doctest.h"
#include "fixtures.hpp"

#include "worldmotion/hand_align.hpp"
#include "worldmotion/mannequin.hpp"
#include "worldmotion/motion.hpp"
#include "worldmotion/rotation.hpp"
#include "worldmotion/synthetic_scene.hpp"

using namespace wm;

namespace {

MotionSequence posedWalk(int frames, std::uint64_t seed) {
    const auto& a = fixture::mannequin();
    auto seq = makeWalkingClip(a, {.frames = frames});
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-0.5, 0.5);
    for (auto& f : seq.frames) {
        for (Eigen::Index i = 0; i < f.bodyPose.rows(); ++i) f.bodyPose.row(i) += Eigen::RowVector3d(u(rng), u(rng), u(rng));
        for (auto& h : f.handPose) h.setConstant(u(rng));
    }
    return seq;
}

HandEstimate randomHand(std::mt19937_64& rng, HandSide side, int h) {
    HandEstimate e;
    e.side = side;
    e.orientation = fixture::randomRotation(rng);
    e.handPose = Points3::Random(h, 3) * 0.3;
    e.confidence = 0.9;
    return e;
}

}  // namespace

TEST_CASE("orientation matching examples") {
    std::mt19937_64 rng(31);
    const auto cam = fixture::axisCamera(64, 64, 100);
    HandEstimate h = randomHand(rng, HandSide::Left, 1);
    CHECK((*matchHandOrientation(h, cam, Mat3::Identity()) - h.orientation).cwiseAbs().maxCoeff() < 1e-15);
    CHECK(matchHandOrientation(h, cam, h.orientation)->isIdentity(1e-12));
    h.confidence = 0.2;
    CHECK_FALSE(matchHandOrientation(h, cam, Mat3::Identity()).has_value());
    CHECK(matchHandOrientation(h, cam, Mat3::Identity(), 0.1).has_value());
}

TEST_CASE("merged wrist recomposes the world-space hand orientation") {
    const auto& a = fixture::mannequin();
    std::mt19937_64 rng(32);
    const auto seq = posedWalk(30, 33);
    for (int trial = 0; trial < 10; ++trial) {
        auto cam = fixture::randomCamera(rng);
        std::vector<FrameHands> hands(30);
        for (auto& f : hands) {
            f.sides[0] = randomHand(rng, HandSide::Left, a.handJointsPerSide());
            f.sides[1] = randomHand(rng, HandSide::Right, a.handJointsPerSide());
        }
        HandMergeStats stats;
        const auto merged = mergeHands(seq, hands, a, {cam}, 0.5, &stats);
        CHECK(stats.merged == 60);
        CHECK(stats.skipped == 0);
        for (int n = 0; n < 30; ++n) {
            for (int s = 0; s < 2; ++s) {
                const Mat3 world = cam.R_w2c.transpose() * hands[n].sides[s]->orientation;
                const Mat3 got = chainGlobalRotation(a, merged.frames[n], a.wristJoints[s]);
                CHECK((got - world).cwiseAbs().maxCoeff() < 1e-9);
                CHECK(merged.frames[n].handPose[s] == hands[n].sides[s]->handPose);
            }
            // Nothing above the wrists moves.
            CHECK(chainGlobalRotation(a, merged.frames[n], mannequin::LeftElbow)
                      .isApprox(chainGlobalRotation(a, seq.frames[n], mannequin::LeftElbow), 1e-12));
        }
    }
}

TEST_CASE("merging is idempotent and self-consistent") {
    const auto& a = fixture::mannequin();
    std::mt19937_64 rng(34);
    const auto cam = fixture::randomCamera(rng);
    const auto seq = posedWalk(20, 35);
    const auto own = handsFromBody(seq, a, cam);
    const auto merged = mergeHands(seq, own, a, {cam});
    for (int n = 0; n < 20; ++n) {
        CHECK((merged.frames[n].bodyPose - seq.frames[n].bodyPose).cwiseAbs().maxCoeff() < 1e-9);
        for (int s = 0; s < 2; ++s) CHECK((merged.frames[n].handPose[s] - seq.frames[n].handPose[s]).cwiseAbs().maxCoeff() < 1e-12);
    }

    std::vector<FrameHands> hands(20);
    for (auto& f : hands) f.sides[1] = randomHand(rng, HandSide::Right, a.handJointsPerSide());
    const auto once = mergeHands(seq, hands, a, {cam});
    const auto twice = mergeHands(once, hands, a, {cam});
    for (int n = 0; n < 20; ++n) CHECK((once.frames[n].bodyPose - twice.frames[n].bodyPose).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("missing, low-confidence and mismatched hands") {
    const auto& a = fixture::mannequin();
    std::mt19937_64 rng(36);
    const auto cam = fixture::randomCamera(rng);
    const auto seq = posedWalk(6, 37);
    const auto unchanged = mergeHands(seq, {}, a, {cam});
    CHECK(serializeMotion(unchanged) == serializeMotion(seq));

    std::vector<FrameHands> hands(6);
    hands[2].sides[0] = randomHand(rng, HandSide::Left, a.handJointsPerSide());
    hands[3].sides[0] = randomHand(rng, HandSide::Left, a.handJointsPerSide());
    hands[3].sides[0]->confidence = 0.1;
    HandMergeStats stats;
    const auto merged = mergeHands(seq, hands, a, {cam}, 0.5, &stats);
    CHECK(stats.merged == 1);
    CHECK(stats.skipped == 1);
    CHECK(merged.frames[3].bodyPose == seq.frames[3].bodyPose);
    CHECK(merged.frames[1].bodyPose == seq.frames[1].bodyPose);
    CHECK_FALSE(merged.frames[2].bodyPose == seq.frames[2].bodyPose);

    hands.resize(5);
    CHECK_THROWS_WITH_AS(mergeHands(seq, hands, a, {cam}), doctest::Contains("5 hand frames for 6"), ValidationError);
}

TEST_CASE("identity estimates give identity wrist chains") {
    const auto& a = fixture::mannequin();
    const auto cam = fixture::axisCamera(64, 64, 100);
    const auto seq = posedWalk(3, 38);
    std::vector<FrameHands> hands(3);
    for (auto& f : hands) {
        HandEstimate e;
        e.handPose = Points3::Zero(a.handJointsPerSide(), 3);
        f.sides[0] = e;
    }
    const auto merged = mergeHands(seq, hands, a, {cam});
    for (const auto& f : merged.frames) CHECK(chainGlobalRotation(a, f, mannequin::LeftWrist).isIdentity(1e-9));
}

TEST_CASE("hand file round trip and validation") {
    std::mt19937_64 rng(39);
    std::vector<FrameHands> hands(3);
    hands[0].sides[0] = randomHand(rng, HandSide::Left, 2);
    hands[2].sides[1] = randomHand(rng, HandSide::Right, 2);
    fixture::TempDir dir;
    saveHands(hands, dir / "hands.json");
    const auto back = loadHands(dir / "hands.json");
    REQUIRE(back.size() == 3);
    CHECK_FALSE(back[1].sides[0].has_value());
    CHECK(back[0].sides[0]->orientation == hands[0].sides[0]->orientation);
    CHECK(back[2].sides[1]->handPose == hands[2].sides[1]->handPose);

    auto j = handsToJson(hands);
    j[0]["left"]["conf"] = 1.5;
    CHECK_THROWS_AS(handsFromJson(j), ValidationError);
    j = handsToJson(hands);
    j[0]["left"]["R"] = {1, 0, 0, 0, 1, 0, 0, 0, -1};
    CHECK_THROWS_AS(handsFromJson(j), ValidationError);
    j = handsToJson(hands);
    j[0]["left"]["theta"] = {1, 2};
    CHECK_THROWS_AS(handsFromJson(j), ValidationError);
}
