#include "worldmotion/image_io.hpp"

#include "worldmotion/binary_container.hpp"
#include "worldmotion/common.hpp"

#include <png.h>

#include <bit>
#include <cmath>
#include <cstring>
#include <sstream>

namespace wm {

namespace {

void pngWrite(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::string*>(png_get_io_ptr(png));
    out->append(reinterpret_cast<const char*>(data), length);
}

void pngFlush(png_structp) {}

[[noreturn]] void pngError(png_structp, png_const_charp msg) { throw ValidationError(std::string("PNG: ") + msg); }

void pngWarning(png_structp, png_const_charp) {}

std::string encode(int width, int height, int colorType, int bitDepth, const std::vector<png_bytep>& rows) {
    if (width <= 0 || height <= 0) throw ValidationError("PNG: image must not be empty");
    std::string out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, pngError, pngWarning);
    if (!png) throw IoError("PNG: cannot allocate writer");
    png_infop info = png_create_info_struct(png);
    try {
        png_set_write_fn(png, &out, pngWrite, pngFlush);
        png_set_compression_level(png, 6);
        png_set_filter(png, 0, PNG_FILTER_NONE | PNG_FILTER_SUB | PNG_FILTER_UP);
        png_set_IHDR(png, info, width, height, bitDepth, colorType, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                     PNG_FILTER_TYPE_DEFAULT);
        png_write_info(png, info);
        if (bitDepth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
        png_write_image(png, const_cast<png_bytepp>(rows.data()));
        png_write_end(png, nullptr);
    } catch (...) {
        png_destroy_write_struct(&png, &info);
        throw;
    }
    png_destroy_write_struct(&png, &info);
    return out;
}

struct ReadState {
    const std::string* bytes;
    std::size_t pos;
};

void pngRead(png_structp png, png_bytep data, png_size_t length) {
    auto* s = static_cast<ReadState*>(png_get_io_ptr(png));
    if (s->pos + length > s->bytes->size()) png_error(png, "truncated data");
    std::memcpy(data, s->bytes->data() + s->pos, length);
    s->pos += length;
}

struct Decoded {
    int width = 0, height = 0, channels = 0, bitDepth = 0;
    std::vector<std::uint8_t> raw;  // rows as stored, 16-bit samples in native order
};

Decoded decode(const std::string& bytes) {
    if (bytes.size() < 8 || png_sig_cmp(reinterpret_cast<png_const_bytep>(bytes.data()), 0, 8) != 0) {
        throw ValidationError("PNG: not a PNG file");
    }
    ReadState state{&bytes, 0};
    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, pngError, pngWarning);
    if (!png) throw IoError("PNG: cannot allocate reader");
    png_infop info = png_create_info_struct(png);
    Decoded d;
    try {
        png_set_read_fn(png, &state, pngRead);
        png_read_info(png, info);
        const int colorType = png_get_color_type(png, info);
        d.bitDepth = png_get_bit_depth(png, info);
        if (colorType == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
        if (colorType == PNG_COLOR_TYPE_GRAY && d.bitDepth < 8) png_set_expand_gray_1_2_4_to_8(png);
        if (d.bitDepth == 16 && std::endian::native == std::endian::little) png_set_swap(png);
        png_read_update_info(png, info);
        d.width = static_cast<int>(png_get_image_width(png, info));
        d.height = static_cast<int>(png_get_image_height(png, info));
        d.channels = png_get_channels(png, info);
        d.bitDepth = png_get_bit_depth(png, info);
        const std::size_t rowBytes = png_get_rowbytes(png, info);
        d.raw.resize(rowBytes * d.height);
        std::vector<png_bytep> rows(d.height);
        for (int y = 0; y < d.height; ++y) rows[y] = d.raw.data() + rowBytes * y;
        png_read_image(png, rows.data());
        png_read_end(png, nullptr);
    } catch (...) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw;
    }
    png_destroy_read_struct(&png, &info, nullptr);
    return d;
}

}  // namespace

std::string encodePng(const Image8& image) {
    int colorType = 0;
    switch (image.channels) {
        case 1: colorType = PNG_COLOR_TYPE_GRAY; break;
        case 3: colorType = PNG_COLOR_TYPE_RGB; break;
        case 4: colorType = PNG_COLOR_TYPE_RGBA; break;
        default: throw ValidationError("PNG: unsupported channel count " + std::to_string(image.channels));
    }
    if (image.data.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
        throw ValidationError("PNG: pixel buffer size does not match image size");
    }
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y) {
        rows[y] = const_cast<png_bytep>(image.data.data() + static_cast<std::size_t>(y) * image.width * image.channels);
    }
    return encode(image.width, image.height, colorType, 8, rows);
}

std::string encodePng(const Image16& image) {
    if (image.data.size() != static_cast<std::size_t>(image.width) * image.height) {
        throw ValidationError("PNG: pixel buffer size does not match image size");
    }
    std::vector<png_bytep> rows(image.height);
    for (int y = 0; y < image.height; ++y) {
        rows[y] = reinterpret_cast<png_bytep>(const_cast<std::uint16_t*>(image.data.data()) +
                                              static_cast<std::size_t>(y) * image.width);
    }
    return encode(image.width, image.height, PNG_COLOR_TYPE_GRAY, 16, rows);
}

void writePng(const Image8& image, const std::filesystem::path& path) { writeFileBytes(path, encodePng(image)); }
void writePng(const Image16& image, const std::filesystem::path& path) { writeFileBytes(path, encodePng(image)); }

Image8 decodePng8(const std::string& bytes) {
    Decoded d = decode(bytes);
    if (d.bitDepth != 8) throw ValidationError("PNG: expected 8-bit samples");
    Image8 img;
    img.width = d.width;
    img.height = d.height;
    img.channels = d.channels;
    img.data = std::move(d.raw);
    return img;
}

Image16 decodePng16(const std::string& bytes) {
    Decoded d = decode(bytes);
    if (d.bitDepth != 16 || d.channels != 1) throw ValidationError("PNG: expected a 16-bit greyscale image");
    Image16 img(d.width, d.height);
    std::memcpy(img.data.data(), d.raw.data(), img.data.size() * sizeof(std::uint16_t));
    return img;
}

Image8 readPng8(const std::filesystem::path& path) {
    try {
        return decodePng8(readFileBytes(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

Image16 readPng16(const std::filesystem::path& path) {
    try {
        return decodePng16(readFileBytes(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

std::string encodePfm(const ImageF& image) {
    if (image.data.size() != static_cast<std::size_t>(image.width) * image.height) {
        throw ValidationError("PFM: pixel buffer size does not match image size");
    }
    std::string out = "Pf\n" + std::to_string(image.width) + " " + std::to_string(image.height) + "\n-1.0\n";
    const std::size_t header = out.size();
    out.resize(header + image.data.size() * 4);
    char* dst = out.data() + header;
    for (int y = image.height - 1; y >= 0; --y) {
        for (int x = 0; x < image.width; ++x) {
            std::uint32_t bits = std::bit_cast<std::uint32_t>(image.data[static_cast<std::size_t>(y) * image.width + x]);
            for (int b = 0; b < 4; ++b) *dst++ = static_cast<char>((bits >> (8 * b)) & 0xFF);
        }
    }
    return out;
}

ImageF decodePfm(const std::string& bytes) {
    std::istringstream in(bytes);
    std::string magic;
    int w = 0, h = 0;
    double scale = 0.0;
    in >> magic >> w >> h >> scale;
    if (!in || magic != "Pf") throw ValidationError("PFM: expected a greyscale 'Pf' header");
    if (w <= 0 || h <= 0) throw ValidationError("PFM: invalid dimensions");
    in.get();
    const std::size_t header = static_cast<std::size_t>(in.tellg());
    const std::size_t need = static_cast<std::size_t>(w) * h * 4;
    if (bytes.size() < header + need) throw ValidationError("PFM: truncated pixel data");
    const bool little = scale < 0.0;
    const double mag = std::abs(scale);
    ImageF img(w, h);
    const auto* src = reinterpret_cast<const unsigned char*>(bytes.data() + header);
    for (int y = h - 1; y >= 0; --y) {
        for (int x = 0; x < w; ++x) {
            std::uint32_t bits = 0;
            for (int b = 0; b < 4; ++b) {
                const int shift = little ? 8 * b : 8 * (3 - b);
                bits |= static_cast<std::uint32_t>(*src++) << shift;
            }
            float v = std::bit_cast<float>(bits);
            if (mag != 1.0 && mag != 0.0) v = static_cast<float>(v * mag);
            img.data[static_cast<std::size_t>(y) * w + x] = v;
        }
    }
    return img;
}

void writePfm(const ImageF& image, const std::filesystem::path& path) { writeFileBytes(path, encodePfm(image)); }

ImageF readPfm(const std::filesystem::path& path) {
    try {
        return decodePfm(readFileBytes(path));
    } catch (const ValidationError& e) {
        throw ValidationError(path.string() + ": " + e.what());
    }
}

}  // namespace wm
