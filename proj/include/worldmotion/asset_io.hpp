#pragma once

#include "worldmotion/body_model.hpp"

#include <filesystem>

namespace wm {

/// Loads either the binary container form or the pure-JSON form, chosen by
/// sniffing the file magic. The result is validated.
BodyModelAsset loadAsset(const std::filesystem::path& path);

void saveAssetBinary(const BodyModelAsset& asset, const std::filesystem::path& path);
void saveAssetJson(const BodyModelAsset& asset, const std::filesystem::path& path);

nlohmann::json assetToJson(const BodyModelAsset& asset);
BodyModelAsset assetFromJson(const nlohmann::json& j);

}  // namespace wm
