#include "doctest.h"
#include "fixtures.hpp"

#include "worldmotion/asset_io.hpp"
#include "worldmotion/binary_container.hpp"
#include "worldmotion/motion.hpp"
#include "worldmotion/synthetic_scene.hpp"

using namespace wm;

namespace {

void checkSameAsset(const BodyModelAsset& a, const BodyModelAsset& b) {
    CHECK(a.templateVertices == b.templateVertices);
    CHECK(a.faces == b.faces);
    CHECK(a.jointRestPositions == b.jointRestPositions);
    CHECK(a.jointParents == b.jointParents);
    CHECK(a.skinningWeights == b.skinningWeights);
    CHECK(a.shapeDirections == b.shapeDirections);
    CHECK(a.jointRegressor.has_value() == b.jointRegressor.has_value());
    if (a.jointRegressor && b.jointRegressor) CHECK(*a.jointRegressor == *b.jointRegressor);
    CHECK(a.childTemplateVertices.has_value() == b.childTemplateVertices.has_value());
    CHECK(a.semanticVertexColors == b.semanticVertexColors);
    CHECK(a.bodyJoints == b.bodyJoints);
    CHECK(a.handJoints == b.handJoints);
    CHECK(a.wristJoints == b.wristJoints);
    CHECK(a.footVertexIds == b.footVertexIds);
    CHECK(a.canonicalForward == b.canonicalForward);
}

}  // namespace

TEST_CASE("binary asset round trip is lossless") {
    fixture::TempDir dir;
    const auto& a = fixture::mannequin();
    saveAssetBinary(a, dir / "m.wmasset");
    CHECK(BinaryContainer::sniff(dir / "m.wmasset"));
    checkSameAsset(a, loadAsset(dir / "m.wmasset"));
}

TEST_CASE("json asset round trip is lossless") {
    fixture::TempDir dir;
    const auto a = fixture::toyChain();
    saveAssetJson(a, dir / "toy.json");
    CHECK_FALSE(BinaryContainer::sniff(dir / "toy.json"));
    checkSameAsset(a, loadAsset(dir / "toy.json"));
}

TEST_CASE("container keeps unknown header keys and rejects corruption") {
    BinaryContainer c;
    c.meta = {{"name", "x"}};
    c.extraHeader = {{"producer", "test"}};
    const std::vector<double> d{1.5, -2.0, 3.25, 4.0};
    const std::vector<std::int32_t> i{7, 8};
    c.putDoubles("d", {2, 2}, d);
    c.putInts("i", {2}, i);
    const std::string bytes = c.serialize();
    const auto back = BinaryContainer::parse(bytes);
    CHECK(back.doubles("d").f64 == d);
    CHECK(back.doubles("d").shape == std::vector<std::int64_t>{2, 2});
    CHECK(back.ints("i").i32 == i);
    CHECK(back.meta == c.meta);
    CHECK(back.extraHeader == c.extraHeader);
    CHECK(back.serialize() == bytes);
    CHECK_THROWS_AS(back.doubles("i"), ValidationError);
    CHECK_THROWS_AS(back.doubles("missing"), ValidationError);

    std::string bad = bytes;
    bad[0] = 'X';
    CHECK_THROWS_AS(BinaryContainer::parse(bad), ValidationError);
    CHECK_THROWS_AS(BinaryContainer::parse(bytes.substr(0, bytes.size() - 4)), ValidationError);
    CHECK_THROWS_AS(BinaryContainer::parse(bytes.substr(0, 12)), ValidationError);
}

TEST_CASE("missing asset file is an io error") {
    CHECK_THROWS_AS(loadAsset("/nonexistent/asset.bin"), IoError);
}

TEST_CASE("invalid asset json is a validation error") {
    fixture::TempDir dir;
    writeFileBytes(dir / "bad.json", "{\"template_vertices\": 3}");
    CHECK_THROWS_AS(loadAsset(dir / "bad.json"), ValidationError);
    writeFileBytes(dir / "broken.json", "{not json");
    CHECK_THROWS_AS(loadAsset(dir / "broken.json"), ValidationError);
}

TEST_CASE("motion json round trip keeps unknown keys and is deterministic") {
    fixture::TempDir dir;
    const auto& a = fixture::mannequin();
    auto seq = makeWalkingClip(a, {.frames = 12});
    seq.extra["source"] = "unit";
    seq.frames[3].extra["note"] = {1, 2};
    seq.frames[4].expression = {0.1, 0.2};
    seq.frames[5].childFactor = 0.25;
    saveMotion(seq, dir / "a.motion.json");
    const auto back = loadMotion(dir / "a.motion.json");
    CHECK(back.frameCount() == 12);
    CHECK(back.extra["source"] == "unit");
    CHECK(back.frames[3].extra["note"] == nlohmann::json({1, 2}));
    CHECK(back.frames[4].expression == nlohmann::json({0.1, 0.2}));
    CHECK(back.frames[5].childFactor == 0.25);
    for (int n = 0; n < 12; ++n) {
        CHECK(back.frames[n].translation == seq.frames[n].translation);
        CHECK(back.frames[n].bodyPose == seq.frames[n].bodyPose);
    }
    CHECK(serializeMotion(back) == serializeMotion(seq));
    CHECK_NOTHROW(back.validateFor(a));
}

TEST_CASE("motion json rejects malformed frames") {
    auto j = motionToJson(makeWalkingClip(fixture::mannequin(), {.frames = 3}));
    j["frames"][1]["gamma"] = {1, 2};
    CHECK_THROWS_AS(motionFromJson(j), ValidationError);
    j = motionToJson(makeWalkingClip(fixture::mannequin(), {.frames = 3}));
    j["fps"] = -1;
    CHECK_THROWS_AS(motionFromJson(j), ValidationError);
    j = motionToJson(makeWalkingClip(fixture::mannequin(), {.frames = 3}));
    j["frame_count"] = 5;
    CHECK_THROWS_AS(motionFromJson(j), ValidationError);
}
