#pragma once

#include "worldmotion/body_model.hpp"
#include "worldmotion/world_frame.hpp"

#include <filesystem>
#include <random>

namespace fixture {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    explicit TempDir(const std::string& tag = "wm");
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Built once per process.
const wm::BodyModelAsset& mannequin();

/// Three-joint chain along +y with one triangle per bone, for body model tests.
wm::BodyModelAsset toyChain();

wm::Mat3 randomRotation(std::mt19937_64& rng);
wm::Vec3 randomUnit(std::mt19937_64& rng);
wm::Vec3 randomVec(std::mt19937_64& rng, double lo, double hi);

/// Random camera looking roughly at the origin from 3 to 8 m away.
wm::CameraModel randomCamera(std::mt19937_64& rng, int width = 640, int height = 480);

/// Camera at the origin looking down +z with focal f and centred principal point.
wm::CameraModel axisCamera(int width, int height, double focal);

std::string readText(const std::filesystem::path& path);

}  // namespace fixture
