#pragma once

#include "worldmotion/motion.hpp"

#include <filesystem>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

namespace wm {

struct MotionClip {
    std::string id;
    std::vector<std::string> tags;
    MotionSequence sequence;
    bool loopable = true;
    std::string sourceMeta;

    void validate() const;
};

/// Case-insensitive tag match; an empty filter matches every clip. Output is
/// sorted by id.
std::vector<MotionClip> queryClips(const std::vector<MotionClip>& clips, const std::string& tagFilter);

/// Repeat `clip` until it is `n` frames long.
///
/// Horizontal (x, z) root translation is re-anchored at every repeat so the
/// path keeps going: each cycle advances by the clip's net displacement plus
/// one boundary step (the mean of its first and last steps). Height is taken
/// from the source frame. With `blendWindow` > 0, the `blendWindow` frames
/// straddling each seam are replaced by a geodesic interpolation between the
/// untouched frames on either side.
MotionSequence loopClip(const MotionSequence& clip, int n, int blendWindow);

/// Horizontal root displacement that one repeat of `clip` adds in loopClip.
Vec3 loopCycleDisplacement(const MotionSequence& clip);

MotionClip retargetShape(const MotionClip& clip, const Eigen::VectorXd& shape, double childFactor);
MotionSequence retargetShape(const MotionSequence& seq, const Eigen::VectorXd& shape, double childFactor);

/// Directory-backed bank: `<root>/index.json` plus
/// `<root>/clips/<id>.motion.json`. Writers are serialised; readers share.
class MotionBank {
public:
    explicit MotionBank(std::filesystem::path root);

    /// Creates the directory layout when it does not exist yet.
    static MotionBank open(const std::filesystem::path& root);

    const std::filesystem::path& root() const { return root_; }
    void add(const MotionClip& clip, bool replace = false);
    std::vector<MotionClip> list(const std::string& tagFilter = "") const;
    std::optional<MotionClip> find(const std::string& id) const;
    MotionClip get(const std::string& id) const;

private:
    struct Entry {
        std::string id;
        std::vector<std::string> tags;
        bool loopable = true;
        std::string sourceMeta;
        int frameCount = 0;
        double fps = 0.0;
    };
    std::vector<Entry> readIndex() const;
    void writeIndex(const std::vector<Entry>& entries) const;
    MotionClip load(const Entry& e) const;

    std::filesystem::path root_;
    mutable std::shared_mutex mutex_;
};

}  // namespace wm
