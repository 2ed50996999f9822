#pragma once

#include "worldmotion/common.hpp"

#include "json.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace wm {

/// One named array. Exactly one of `f64` / `i32` is populated.
struct ContainerArray {
    enum class DType { Float64, Int32 };
    DType dtype = DType::Float64;
    std::vector<std::int64_t> shape;
    std::vector<double> f64;
    std::vector<std::int32_t> i32;

    std::int64_t elementCount() const;
};

/// Binary container: 8-byte magic "WMCONT01", little-endian uint64 header
/// length, a JSON header (padded with spaces to 8-byte alignment), then the
/// raw little-endian array payloads at the offsets listed in the header.
///
/// Header layout:
///   { "format": "worldmotion-container", "version": 1, "meta": {...},
///     "arrays": [ { "name", "dtype": "<f8" | "<i4", "shape", "offset",
///                   "nbytes" }, ... ] }
/// Unknown header keys are kept in `extraHeader` and written back.
class BinaryContainer {
public:
    nlohmann::json meta = nlohmann::json::object();
    nlohmann::json extraHeader = nlohmann::json::object();

    void putDoubles(const std::string& name, std::vector<std::int64_t> shape, std::span<const double> data);
    void putInts(const std::string& name, std::vector<std::int64_t> shape, std::span<const std::int32_t> data);

    bool has(const std::string& name) const { return arrays_.count(name) > 0; }
    /// Throws ValidationError naming the array when missing or mistyped.
    const ContainerArray& doubles(const std::string& name) const;
    const ContainerArray& ints(const std::string& name) const;
    const std::map<std::string, ContainerArray>& arrays() const { return arrays_; }

    std::string serialize() const;
    static BinaryContainer parse(const std::string& bytes, const std::string& origin = "<memory>");

    void write(const std::filesystem::path& path) const;
    static BinaryContainer read(const std::filesystem::path& path);

    /// True when the first bytes of `path` carry the container magic.
    static bool sniff(const std::filesystem::path& path);

private:
    std::map<std::string, ContainerArray> arrays_;
};

std::string readFileBytes(const std::filesystem::path& path);
void writeFileBytes(const std::filesystem::path& path, const std::string& bytes);

}  // namespace wm
