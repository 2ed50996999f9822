#include "worldmotion/binary_container.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace wm {

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

namespace {

constexpr char kMagic[8] = {'W', 'M', 'C', 'O', 'N', 'T', '0', '1'};

std::int64_t product(const std::vector<std::int64_t>& shape) {
    std::int64_t n = 1;
    for (auto d : shape) n *= d;
    return n;
}

std::size_t align8(std::size_t n) { return (n + 7) & ~std::size_t{7}; }

}  // namespace

std::int64_t ContainerArray::elementCount() const { return product(shape); }

void BinaryContainer::putDoubles(const std::string& name, std::vector<std::int64_t> shape,
                                 std::span<const double> data) {
    if (product(shape) != static_cast<std::int64_t>(data.size())) {
        throw ValidationError("container: array '" + name + "' shape does not match its data");
    }
    ContainerArray a;
    a.dtype = ContainerArray::DType::Float64;
    a.shape = std::move(shape);
    a.f64.assign(data.begin(), data.end());
    arrays_[name] = std::move(a);
}

void BinaryContainer::putInts(const std::string& name, std::vector<std::int64_t> shape,
                              std::span<const std::int32_t> data) {
    if (product(shape) != static_cast<std::int64_t>(data.size())) {
        throw ValidationError("container: array '" + name + "' shape does not match its data");
    }
    ContainerArray a;
    a.dtype = ContainerArray::DType::Int32;
    a.shape = std::move(shape);
    a.i32.assign(data.begin(), data.end());
    arrays_[name] = std::move(a);
}

const ContainerArray& BinaryContainer::doubles(const std::string& name) const {
    auto it = arrays_.find(name);
    if (it == arrays_.end()) throw ValidationError("container: missing array '" + name + "'");
    if (it->second.dtype != ContainerArray::DType::Float64) {
        throw ValidationError("container: array '" + name + "' must be float64");
    }
    return it->second;
}

const ContainerArray& BinaryContainer::ints(const std::string& name) const {
    auto it = arrays_.find(name);
    if (it == arrays_.end()) throw ValidationError("container: missing array '" + name + "'");
    if (it->second.dtype != ContainerArray::DType::Int32) {
        throw ValidationError("container: array '" + name + "' must be int32");
    }
    return it->second;
}

std::string BinaryContainer::serialize() const {
    nlohmann::json header = extraHeader;
    header["format"] = "worldmotion-container";
    header["version"] = 1;
    header["meta"] = meta;
    nlohmann::json list = nlohmann::json::array();
    std::size_t offset = 0;
    for (const auto& [name, a] : arrays_) {
        const bool isFloat = a.dtype == ContainerArray::DType::Float64;
        const std::size_t nbytes = isFloat ? a.f64.size() * 8 : a.i32.size() * 4;
        list.push_back({{"name", name},
                        {"dtype", isFloat ? "<f8" : "<i4"},
                        {"shape", a.shape},
                        {"offset", offset},
                        {"nbytes", nbytes}});
        offset = align8(offset + nbytes);
    }
    header["arrays"] = list;

    std::string text = header.dump();
    text.resize(align8(text.size()), ' ');

    std::string out(kMagic, sizeof(kMagic));
    const std::uint64_t len = text.size();
    out.append(reinterpret_cast<const char*>(&len), sizeof(len));
    out += text;
    const std::size_t dataStart = out.size();
    out.resize(dataStart + offset, '\0');
    for (const auto& entry : list) {
        const auto& a = arrays_.at(entry["name"].get<std::string>());
        const std::size_t at = dataStart + entry["offset"].get<std::size_t>();
        if (a.dtype == ContainerArray::DType::Float64) {
            std::memcpy(out.data() + at, a.f64.data(), a.f64.size() * 8);
        } else {
            std::memcpy(out.data() + at, a.i32.data(), a.i32.size() * 4);
        }
    }
    return out;
}

BinaryContainer BinaryContainer::parse(const std::string& bytes, const std::string& origin) {
    auto fail = [&](const std::string& msg) -> ValidationError {
        return ValidationError(origin + ": " + msg);
    };
    if (bytes.size() < 16 || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
        throw fail("not a worldmotion container (bad magic)");
    }
    std::uint64_t len = 0;
    std::memcpy(&len, bytes.data() + 8, sizeof(len));
    if (len > bytes.size() - 16) throw fail("truncated header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(bytes.begin() + 16, bytes.begin() + 16 + static_cast<std::ptrdiff_t>(len));
    } catch (const nlohmann::json::exception& e) {
        throw fail(std::string("malformed header: ") + e.what());
    }
    if (!header.contains("version")) throw fail("header lacks a version field");
    if (header.value("version", 0) != 1) throw fail("unsupported container version");
    if (!header.contains("arrays") || !header["arrays"].is_array()) throw fail("header lacks an arrays list");

    BinaryContainer c;
    c.meta = header.value("meta", nlohmann::json::object());
    for (auto it = header.begin(); it != header.end(); ++it) {
        if (it.key() != "format" && it.key() != "version" && it.key() != "meta" && it.key() != "arrays") {
            c.extraHeader[it.key()] = it.value();
        }
    }
    const std::size_t dataStart = 16 + len;
    try {
        for (const auto& entry : header["arrays"]) {
            ContainerArray a;
            const std::string name = entry.at("name").get<std::string>();
            const std::string dtype = entry.at("dtype").get<std::string>();
            a.shape = entry.at("shape").get<std::vector<std::int64_t>>();
            for (auto d : a.shape) {
                if (d < 0) throw fail("array '" + name + "' has a negative dimension");
            }
            const auto offset = entry.at("offset").get<std::size_t>();
            const auto nbytes = entry.at("nbytes").get<std::size_t>();
            const auto count = static_cast<std::size_t>(a.elementCount());
            std::size_t elem = 0;
            if (dtype == "<f8") {
                a.dtype = ContainerArray::DType::Float64;
                elem = 8;
            } else if (dtype == "<i4") {
                a.dtype = ContainerArray::DType::Int32;
                elem = 4;
            } else {
                throw fail("array '" + name + "' has unsupported dtype " + dtype);
            }
            if (nbytes != count * elem) throw fail("array '" + name + "' byte count does not match its shape");
            if (dataStart + offset + nbytes > bytes.size()) throw fail("array '" + name + "' runs past end of file");
            const char* src = bytes.data() + dataStart + offset;
            if (elem == 8) {
                a.f64.resize(count);
                std::memcpy(a.f64.data(), src, nbytes);
            } else {
                a.i32.resize(count);
                std::memcpy(a.i32.data(), src, nbytes);
            }
            c.arrays_[name] = std::move(a);
        }
    } catch (const nlohmann::json::exception& e) {
        throw fail(std::string("malformed array entry: ") + e.what());
    }
    return c;
}

void BinaryContainer::write(const std::filesystem::path& path) const { writeFileBytes(path, serialize()); }

BinaryContainer BinaryContainer::read(const std::filesystem::path& path) {
    return parse(readFileBytes(path), path.string());
}

bool BinaryContainer::sniff(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    char buf[8] = {};
    in.read(buf, sizeof(buf));
    return in.gcount() == 8 && std::memcmp(buf, kMagic, 8) == 0;
}

std::string readFileBytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return bytes;
}

void writeFileBytes(const std::filesystem::path& path, const std::string& bytes) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace wm
