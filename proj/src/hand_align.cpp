#include "worldmotion/hand_align.hpp"

#include "worldmotion/binary_container.hpp"
#include "worldmotion/rotation.hpp"

namespace wm {

namespace {

const char* sideName(HandSide s) { return s == HandSide::Left ? "left" : "right"; }

const CameraModel& cameraFor(const std::vector<CameraModel>& cameras, std::size_t frame) {
    if (cameras.empty()) throw ValidationError("mergeHands: no camera given");
    return cameras.size() == 1 ? cameras.front() : cameras.at(frame);
}

}  // namespace

void HandEstimate::validate() const {
    if (!isRotation(orientation, 1e-6)) throw ValidationError("hand orientation must be a rotation");
    if (!(confidence >= 0.0 && confidence <= 1.0)) throw ValidationError("hand confidence must lie in [0, 1]");
    if (!handPose.allFinite()) throw ValidationError("hand pose contains non-finite values");
}

nlohmann::json handsToJson(const std::vector<FrameHands>& hands) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& f : hands) {
        nlohmann::json fj = nlohmann::json::object();
        for (const auto& h : f.sides) {
            if (!h) continue;
            std::vector<double> r;
            for (int i = 0; i < 3; ++i) {
                for (int c = 0; c < 3; ++c) r.push_back(h->orientation(i, c));
            }
            std::vector<double> theta(h->handPose.data(), h->handPose.data() + h->handPose.size());
            fj[sideName(h->side)] = {{"R", r}, {"theta", theta}, {"conf", h->confidence}};
        }
        out.push_back(std::move(fj));
    }
    return out;
}

std::vector<FrameHands> handsFromJson(const nlohmann::json& j, const std::string& origin) {
    if (!j.is_array()) throw ValidationError(origin + ": hand file must be a JSON list of frames");
    std::vector<FrameHands> out;
    try {
        for (std::size_t n = 0; n < j.size(); ++n) {
            const auto& fj = j[n];
            if (!fj.is_object()) throw ValidationError(origin + ": frame " + std::to_string(n) + " must be an object");
            FrameHands f;
            for (HandSide side : {HandSide::Left, HandSide::Right}) {
                const char* key = sideName(side);
                if (!fj.contains(key) || fj[key].is_null()) continue;
                const auto& hj = fj[key];
                const std::string where = origin + ": frame " + std::to_string(n) + " " + key;
                const auto r = hj.at("R").get<std::vector<double>>();
                const auto theta = hj.at("theta").get<std::vector<double>>();
                if (r.size() != 9) throw ValidationError(where + ": R must have 9 numbers");
                if (theta.size() % 3 != 0) throw ValidationError(where + ": theta length must be a multiple of 3");
                HandEstimate h;
                h.side = side;
                for (int i = 0; i < 3; ++i) {
                    for (int c = 0; c < 3; ++c) h.orientation(i, c) = r[3 * i + c];
                }
                h.handPose = Eigen::Map<const Points3>(theta.data(), static_cast<Eigen::Index>(theta.size() / 3), 3);
                h.confidence = hj.value("conf", 1.0);
                try {
                    h.validate();
                } catch (const ValidationError& e) {
                    throw ValidationError(where + ": " + e.what());
                }
                f.sides[static_cast<int>(side)] = std::move(h);
            }
            out.push_back(std::move(f));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(origin + ": malformed hand file: " + e.what());
    }
    return out;
}

std::vector<FrameHands> loadHands(const std::filesystem::path& path) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(readFileBytes(path));
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
    return handsFromJson(j, path.string());
}

void saveHands(const std::vector<FrameHands>& hands, const std::filesystem::path& path) {
    writeFileBytes(path, handsToJson(hands).dump(1) + "\n");
}

std::optional<Mat3> matchHandOrientation(const HandEstimate& hand, const CameraModel& cam, const Mat3& parentChain,
                                         double threshold) {
    if (hand.confidence < threshold) return std::nullopt;
    return parentChain.transpose() * (cam.R_w2c.transpose() * hand.orientation);
}

MotionSequence mergeHands(const MotionSequence& seq, const std::vector<FrameHands>& hands,
                          const BodyModelAsset& asset, const std::vector<CameraModel>& cameras, double threshold,
                          HandMergeStats* stats) {
    if (hands.empty()) return seq;
    if (static_cast<int>(hands.size()) != seq.frameCount()) {
        throw ValidationError("mergeHands: " + std::to_string(hands.size()) + " hand frames for " +
                              std::to_string(seq.frameCount()) + " motion frames");
    }
    HandMergeStats local;
    MotionSequence out = seq;
    for (std::size_t n = 0; n < hands.size(); ++n) {
        FramePose& pose = out.frames[n];
        const CameraModel& cam = cameraFor(cameras, n);
        for (const auto& h : hands[n].sides) {
            if (!h) continue;
            const int side = static_cast<int>(h->side);
            const int wrist = asset.wristJoints[side];
            const int row = bodyPoseIndex(asset, wrist);
            if (row < 0) throw ValidationError("mergeHands: wrist joint is not driven by the body pose");
            const int parent = asset.jointParents[wrist];
            const Mat3 chain = parent < 0 ? Mat3::Identity() : chainGlobalRotation(asset, pose, parent);
            const auto local_ = matchHandOrientation(*h, cam, chain, threshold);
            if (!local_) {
                ++local.skipped;
                continue;
            }
            pose.bodyPose.row(row) = matrixToAxisAngle(*local_).transpose();
            if (h->handPose.rows() != asset.handJointsPerSide()) {
                throw ValidationError("mergeHands: frame " + std::to_string(n) + " has " +
                                      std::to_string(h->handPose.rows()) + " finger joints, asset expects " +
                                      std::to_string(asset.handJointsPerSide()));
            }
            pose.handPose[side] = h->handPose;
            ++local.merged;
        }
    }
    if (stats) *stats = local;
    return out;
}

std::vector<FrameHands> handsFromBody(const MotionSequence& seq, const BodyModelAsset& asset, const CameraModel& cam) {
    std::vector<FrameHands> out;
    for (const auto& pose : seq.frames) {
        FrameHands f;
        for (HandSide side : {HandSide::Left, HandSide::Right}) {
            const int s = static_cast<int>(side);
            HandEstimate h;
            h.side = side;
            h.orientation = cam.R_w2c * chainGlobalRotation(asset, pose, asset.wristJoints[s]);
            h.handPose = pose.handPose[s];
            h.confidence = 1.0;
            f.sides[s] = std::move(h);
        }
        out.push_back(std::move(f));
    }
    return out;
}

}  // namespace wm
