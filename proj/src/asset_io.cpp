#include "worldmotion/asset_io.hpp"

#include "worldmotion/binary_container.hpp"

namespace wm {

namespace {

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

std::vector<double> rowMajor(const Eigen::MatrixXd& m) {
    std::vector<double> out(static_cast<std::size_t>(m.size()));
    Eigen::Map<RowMatrix>(out.data(), m.rows(), m.cols()) = m;
    return out;
}

Eigen::MatrixXd fromRowMajor(const std::vector<double>& data, Eigen::Index rows, Eigen::Index cols) {
    return Eigen::Map<const RowMatrix>(data.data(), rows, cols);
}

// (3V)×S <-> V×3×S row-major.
std::vector<double> blendToRowMajor(const Eigen::MatrixXd& dirs) { return rowMajor(dirs); }

void requireRank(const ContainerArray& a, std::size_t rank, const std::string& name) {
    if (a.shape.size() != rank) throw ValidationError("asset: array '" + name + "' has the wrong rank");
}

Points3 pointsFrom(const BinaryContainer& c, const std::string& name) {
    const auto& a = c.doubles(name);
    requireRank(a, 2, name);
    if (a.shape[1] != 3) throw ValidationError("asset: array '" + name + "' must be N×3");
    return fromRowMajor(a.f64, a.shape[0], 3);
}

std::vector<int> intsFrom(const BinaryContainer& c, const std::string& name) {
    const auto& a = c.ints(name);
    return {a.i32.begin(), a.i32.end()};
}

void putPoints(BinaryContainer& c, const std::string& name, const Eigen::MatrixXd& m) {
    const auto data = rowMajor(m);
    c.putDoubles(name, {m.rows(), m.cols()}, data);
}

void putInts(BinaryContainer& c, const std::string& name, const std::vector<int>& v) {
    std::vector<std::int32_t> data(v.begin(), v.end());
    c.putInts(name, {static_cast<std::int64_t>(v.size())}, data);
}

// JSON helpers: matrices as nested row lists.
nlohmann::json matrixJson(const Eigen::MatrixXd& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrixFromJson(const nlohmann::json& j, Eigen::Index cols, const std::string& name) {
    if (!j.is_array()) throw ValidationError("asset: '" + name + "' must be a list of rows");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || static_cast<Eigen::Index>(j[r].size()) != cols) {
            throw ValidationError("asset: row " + std::to_string(r) + " of '" + name + "' has the wrong length");
        }
        for (Eigen::Index c = 0; c < cols; ++c) m(static_cast<Eigen::Index>(r), c) = j[r][c].get<double>();
    }
    return m;
}

Eigen::MatrixXd matrixFromJsonAnyCols(const nlohmann::json& j, const std::string& name) {
    const Eigen::Index cols = j.empty() ? 0 : static_cast<Eigen::Index>(j.at(0).size());
    return matrixFromJson(j, cols, name);
}

}  // namespace

BodyModelAsset loadAsset(const std::filesystem::path& path) {
    BodyModelAsset asset;
    if (BinaryContainer::sniff(path)) {
        const auto c = BinaryContainer::read(path);
        asset.templateVertices = pointsFrom(c, "template_vertices");
        const int v = asset.vertexCount();
        {
            const auto& f = c.ints("faces");
            requireRank(f, 2, "faces");
            asset.faces = Eigen::Map<const Faces>(f.i32.data(), f.shape[0], 3);
        }
        asset.jointRestPositions = pointsFrom(c, "joint_rest_positions");
        asset.jointParents = intsFrom(c, "joint_parents");
        const int jc = asset.jointCount();
        {
            const auto& w = c.doubles("skinning_weights");
            requireRank(w, 2, "skinning_weights");
            asset.skinningWeights = fromRowMajor(w.f64, w.shape[0], w.shape[1]);
        }
        if (c.has("shape_directions")) {
            const auto& s = c.doubles("shape_directions");
            requireRank(s, 3, "shape_directions");
            if (s.shape[0] != v || s.shape[1] != 3) throw ValidationError("asset: shape_directions must be V×3×S");
            asset.shapeDirections = fromRowMajor(s.f64, 3 * s.shape[0], s.shape[2]);
        } else {
            asset.shapeDirections = Eigen::MatrixXd::Zero(3 * v, 0);
        }
        if (c.has("pose_directions")) {
            const auto& p = c.doubles("pose_directions");
            requireRank(p, 3, "pose_directions");
            asset.poseDirections = fromRowMajor(p.f64, 3 * p.shape[0], p.shape[2]);
        }
        if (c.has("joint_regressor")) {
            const auto& r = c.doubles("joint_regressor");
            requireRank(r, 2, "joint_regressor");
            asset.jointRegressor = fromRowMajor(r.f64, r.shape[0], r.shape[1]);
        }
        if (c.has("child_template_vertices")) asset.childTemplateVertices = pointsFrom(c, "child_template_vertices");
        asset.semanticVertexColors = pointsFrom(c, "semantic_vertex_colors");
        asset.bodyJoints = intsFrom(c, "body_joints");
        asset.handJoints[0] = intsFrom(c, "hand_joints_left");
        asset.handJoints[1] = intsFrom(c, "hand_joints_right");
        const auto wrists = intsFrom(c, "wrist_joints");
        if (wrists.size() != 2) throw ValidationError("asset: wrist_joints must hold two ids");
        asset.wristJoints = {wrists[0], wrists[1]};
        if (c.has("foot_vertex_ids")) asset.footVertexIds = intsFrom(c, "foot_vertex_ids");
        if (c.has("canonical_forward")) {
            const auto& f = c.doubles("canonical_forward");
            if (f.f64.size() != 3) throw ValidationError("asset: canonical_forward must have 3 entries");
            asset.canonicalForward = Vec3(f.f64[0], f.f64[1], f.f64[2]);
        }
        asset.meta = c.meta;
        (void)jc;
    } else {
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(readFileBytes(path));
        } catch (const nlohmann::json::parse_error& e) {
            throw ValidationError(path.string() + ": " + e.what());
        }
        asset = assetFromJson(j);
    }
    asset.validate();
    return asset;
}

void saveAssetBinary(const BodyModelAsset& asset, const std::filesystem::path& path) {
    asset.validate();
    BinaryContainer c;
    c.meta = asset.meta;
    c.meta["kind"] = "body-model";
    putPoints(c, "template_vertices", asset.templateVertices);
    {
        std::vector<std::int32_t> f(static_cast<std::size_t>(asset.faces.size()));
        Eigen::Map<Faces>(f.data(), asset.faces.rows(), 3) = asset.faces;
        c.putInts("faces", {asset.faces.rows(), 3}, f);
    }
    putPoints(c, "joint_rest_positions", asset.jointRestPositions);
    putInts(c, "joint_parents", asset.jointParents);
    putPoints(c, "skinning_weights", asset.skinningWeights);
    if (asset.shapeCount() > 0) {
        c.putDoubles("shape_directions", {asset.vertexCount(), 3, asset.shapeCount()},
                     blendToRowMajor(asset.shapeDirections));
    }
    if (asset.poseDirections) {
        c.putDoubles("pose_directions", {asset.vertexCount(), 3, asset.poseDirections->cols()},
                     blendToRowMajor(*asset.poseDirections));
    }
    if (asset.jointRegressor) putPoints(c, "joint_regressor", *asset.jointRegressor);
    if (asset.childTemplateVertices) putPoints(c, "child_template_vertices", *asset.childTemplateVertices);
    putPoints(c, "semantic_vertex_colors", asset.semanticVertexColors);
    putInts(c, "body_joints", asset.bodyJoints);
    putInts(c, "hand_joints_left", asset.handJoints[0]);
    putInts(c, "hand_joints_right", asset.handJoints[1]);
    putInts(c, "wrist_joints", {asset.wristJoints[0], asset.wristJoints[1]});
    if (!asset.footVertexIds.empty()) putInts(c, "foot_vertex_ids", asset.footVertexIds);
    const std::vector<double> fwd{asset.canonicalForward.x(), asset.canonicalForward.y(), asset.canonicalForward.z()};
    c.putDoubles("canonical_forward", {3}, fwd);
    c.write(path);
}

nlohmann::json assetToJson(const BodyModelAsset& asset) {
    nlohmann::json j;
    j["format"] = "worldmotion-asset";
    j["version"] = 1;
    j["meta"] = asset.meta;
    j["template_vertices"] = matrixJson(asset.templateVertices);
    j["faces"] = matrixJson(asset.faces.cast<double>());
    for (auto& row : j["faces"]) {
        for (auto& x : row) x = static_cast<int>(x.get<double>());
    }
    j["joint_rest_positions"] = matrixJson(asset.jointRestPositions);
    j["joint_parents"] = asset.jointParents;
    j["skinning_weights"] = matrixJson(asset.skinningWeights);
    // Shape directions as S lists of V×3 rows.
    nlohmann::json dirs = nlohmann::json::array();
    for (int s = 0; s < asset.shapeCount(); ++s) {
        const Eigen::VectorXd col = asset.shapeDirections.col(s);
        dirs.push_back(matrixJson(Eigen::Map<const Points3>(col.data(), asset.vertexCount(), 3)));
    }
    j["shape_directions"] = dirs;
    if (asset.poseDirections) {
        nlohmann::json pd = nlohmann::json::array();
        for (Eigen::Index s = 0; s < asset.poseDirections->cols(); ++s) {
            const Eigen::VectorXd col = asset.poseDirections->col(s);
            pd.push_back(matrixJson(Eigen::Map<const Points3>(col.data(), asset.vertexCount(), 3)));
        }
        j["pose_directions"] = pd;
    }
    if (asset.jointRegressor) j["joint_regressor"] = matrixJson(*asset.jointRegressor);
    if (asset.childTemplateVertices) j["child_template_vertices"] = matrixJson(*asset.childTemplateVertices);
    j["semantic_vertex_colors"] = matrixJson(asset.semanticVertexColors);
    j["body_joints"] = asset.bodyJoints;
    j["hand_joints"] = {asset.handJoints[0], asset.handJoints[1]};
    j["wrist_joints"] = {asset.wristJoints[0], asset.wristJoints[1]};
    j["foot_vertex_ids"] = asset.footVertexIds;
    j["canonical_forward"] = {asset.canonicalForward.x(), asset.canonicalForward.y(), asset.canonicalForward.z()};
    return j;
}

BodyModelAsset assetFromJson(const nlohmann::json& j) {
    try {
        if (!j.contains("version")) throw ValidationError("asset: missing version field");
        if (j.at("version").get<int>() != 1) throw ValidationError("asset: unsupported version");
        BodyModelAsset a;
        a.meta = j.value("meta", nlohmann::json::object());
        a.templateVertices = matrixFromJson(j.at("template_vertices"), 3, "template_vertices");
        const int v = a.vertexCount();
        a.faces = matrixFromJson(j.at("faces"), 3, "faces").cast<int>();
        a.jointRestPositions = matrixFromJson(j.at("joint_rest_positions"), 3, "joint_rest_positions");
        a.jointParents = j.at("joint_parents").get<std::vector<int>>();
        a.skinningWeights = matrixFromJson(j.at("skinning_weights"), a.jointCount(), "skinning_weights");
        const auto& dirs = j.value("shape_directions", nlohmann::json::array());
        a.shapeDirections = Eigen::MatrixXd::Zero(3 * v, static_cast<Eigen::Index>(dirs.size()));
        for (std::size_t s = 0; s < dirs.size(); ++s) {
            const Points3 d = matrixFromJson(dirs[s], 3, "shape_directions");
            if (d.rows() != v) throw ValidationError("asset: shape direction " + std::to_string(s) + " must be V×3");
            a.shapeDirections.col(static_cast<Eigen::Index>(s)) = Eigen::Map<const Eigen::VectorXd>(d.data(), 3 * v);
        }
        if (j.contains("pose_directions")) {
            const auto& pd = j["pose_directions"];
            Eigen::MatrixXd m(3 * v, static_cast<Eigen::Index>(pd.size()));
            for (std::size_t s = 0; s < pd.size(); ++s) {
                const Points3 d = matrixFromJson(pd[s], 3, "pose_directions");
                if (d.rows() != v) throw ValidationError("asset: pose direction must be V×3");
                m.col(static_cast<Eigen::Index>(s)) = Eigen::Map<const Eigen::VectorXd>(d.data(), 3 * v);
            }
            a.poseDirections = m;
        }
        if (j.contains("joint_regressor")) a.jointRegressor = matrixFromJsonAnyCols(j["joint_regressor"], "joint_regressor");
        if (j.contains("child_template_vertices")) {
            a.childTemplateVertices = matrixFromJson(j["child_template_vertices"], 3, "child_template_vertices");
        }
        a.semanticVertexColors = matrixFromJson(j.at("semantic_vertex_colors"), 3, "semantic_vertex_colors");
        a.bodyJoints = j.at("body_joints").get<std::vector<int>>();
        const auto hands = j.at("hand_joints");
        if (!hands.is_array() || hands.size() != 2) throw ValidationError("asset: hand_joints must be [left, right]");
        a.handJoints[0] = hands[0].get<std::vector<int>>();
        a.handJoints[1] = hands[1].get<std::vector<int>>();
        const auto wrists = j.at("wrist_joints").get<std::vector<int>>();
        if (wrists.size() != 2) throw ValidationError("asset: wrist_joints must hold two ids");
        a.wristJoints = {wrists[0], wrists[1]};
        a.footVertexIds = j.value("foot_vertex_ids", std::vector<int>{});
        if (j.contains("canonical_forward")) {
            const auto f = j["canonical_forward"].get<std::vector<double>>();
            if (f.size() != 3) throw ValidationError("asset: canonical_forward must have 3 entries");
            a.canonicalForward = Vec3(f[0], f[1], f[2]);
        }
        return a;
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(std::string("asset: malformed JSON asset: ") + e.what());
    }
}

void saveAssetJson(const BodyModelAsset& asset, const std::filesystem::path& path) {
    asset.validate();
    writeFileBytes(path, assetToJson(asset).dump(1) + "\n");
}

}  // namespace wm
