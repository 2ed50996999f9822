#pragma once

#include <string>

namespace wm {

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256Hex(const std::string& bytes);

std::string base64Encode(const std::string& bytes);

}  // namespace wm
