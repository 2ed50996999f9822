#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace wm {

/// Interleaved 8-bit image with 1, 3 or 4 channels.
struct Image8 {
    int width = 0;
    int height = 0;
    int channels = 3;
    std::vector<std::uint8_t> data;

    Image8() = default;
    Image8(int w, int h, int c) : width(w), height(h), channels(c), data(static_cast<std::size_t>(w) * h * c, 0) {}
};

/// Single-channel 16-bit image.
struct Image16 {
    int width = 0;
    int height = 0;
    std::vector<std::uint16_t> data;

    Image16() = default;
    Image16(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0) {}
};

/// Single-channel float image, row 0 at the top.
struct ImageF {
    int width = 0;
    int height = 0;
    std::vector<float> data;

    ImageF() = default;
    ImageF(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0f) {}
};

/// PNG encoding is deterministic: fixed compression settings, no time chunk.
std::string encodePng(const Image8& image);
std::string encodePng(const Image16& image);
void writePng(const Image8& image, const std::filesystem::path& path);
void writePng(const Image16& image, const std::filesystem::path& path);

/// Decodes 8-bit grey/RGB/RGBA PNGs.
Image8 decodePng8(const std::string& bytes);
/// Decodes a 16-bit greyscale PNG.
Image16 decodePng16(const std::string& bytes);
Image8 readPng8(const std::filesystem::path& path);
Image16 readPng16(const std::filesystem::path& path);

/// Greyscale PFM ("Pf"), little-endian, rows stored bottom-up.
std::string encodePfm(const ImageF& image);
ImageF decodePfm(const std::string& bytes);
void writePfm(const ImageF& image, const std::filesystem::path& path);
ImageF readPfm(const std::filesystem::path& path);

}  // namespace wm
