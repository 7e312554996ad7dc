#include "scene/image_io.hpp"

#include <png.h>

#include <csetjmp>
#include <cstdio>
#include <fstream>
#include <memory>
#include <string>
#include <vector>

#include "scene/error.hpp"

namespace scene {

namespace {

struct PngReader {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* file = nullptr;

    explicit PngReader(const std::filesystem::path& path) {
        file = std::fopen(path.c_str(), "rb");
        if (!file) throw DataError("cannot open PNG: " + path.string());
        png_byte sig[8];
        if (std::fread(sig, 1, 8, file) != 8 || png_sig_cmp(sig, 0, 8) != 0) {
            std::fclose(file);
            throw DataError("not a PNG file: " + path.string());
        }
        png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
        info = png ? png_create_info_struct(png) : nullptr;
        if (!png || !info) {
            png_destroy_read_struct(&png, &info, nullptr);
            std::fclose(file);
            throw DataError("libpng initialisation failed");
        }
        png_init_io(png, file);
        png_set_sig_bytes(png, 8);
    }
    ~PngReader() {
        png_destroy_read_struct(&png, &info, nullptr);
        if (file) std::fclose(file);
    }
    PngReader(const PngReader&) = delete;
    PngReader& operator=(const PngReader&) = delete;
};

std::vector<std::uint8_t> read_rows(png_structp png, png_infop info, std::size_t& row_bytes) {
    png_read_update_info(png, info);
    const png_uint_32 h = png_get_image_height(png, info);
    row_bytes = png_get_rowbytes(png, info);
    std::vector<std::uint8_t> data(row_bytes * h);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = data.data() + y * row_bytes;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    return data;
}

void png_vector_write(png_structp png, png_bytep data, png_size_t length) {
    auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
    out->insert(out->end(), data, data + length);
}

void png_vector_flush(png_structp) {}

std::vector<std::uint8_t> encode_png(int width, int height, int bit_depth, int color_type,
                                     const std::vector<std::uint8_t>& raw, std::size_t row_bytes) {
    std::vector<std::uint8_t> out;
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw DataError("libpng initialisation failed");
    }
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw DataError("PNG encoding failed");
    }
    png_set_write_fn(png, &out, png_vector_write, png_vector_flush);
    png_set_IHDR(png, info, static_cast<png_uint_32>(width), static_cast<png_uint_32>(height), bit_depth,
                 color_type, PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    for (int y = 0; y < height; ++y)
        png_write_row(png, const_cast<png_bytep>(raw.data() + static_cast<std::size_t>(y) * row_bytes));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    return out;
}

}  // namespace

RasterImage read_png_rgb(const std::filesystem::path& path) {
    PngReader r(path);
    if (setjmp(png_jmpbuf(r.png))) throw DataError("corrupt PNG: " + path.string());
    png_read_info(r.png, r.info);
    const int w = static_cast<int>(png_get_image_width(r.png, r.info));
    const int h = static_cast<int>(png_get_image_height(r.png, r.info));
    const int color = png_get_color_type(r.png, r.info);
    const int depth = png_get_bit_depth(r.png, r.info);

    if (depth == 16) png_set_strip_16(r.png);
    if (color == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(r.png);
    if (color == PNG_COLOR_TYPE_GRAY && depth < 8) png_set_expand_gray_1_2_4_to_8(r.png);
    if (color == PNG_COLOR_TYPE_GRAY || color == PNG_COLOR_TYPE_GRAY_ALPHA) png_set_gray_to_rgb(r.png);
    if (png_get_valid(r.png, r.info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(r.png);
    png_set_strip_alpha(r.png);

    std::size_t row_bytes = 0;
    auto data = read_rows(r.png, r.info, row_bytes);
    if (row_bytes != static_cast<std::size_t>(w) * 3) throw DataError("unexpected PNG layout: " + path.string());
    return RasterImage(w, h, std::move(data));
}

void write_png_rgb(const std::filesystem::path& path, const RasterImage& image) {
    if (image.empty()) throw ContractError("write_png_rgb: empty image");
    auto bytes = encode_png(image.width(), image.height(), 8, PNG_COLOR_TYPE_RGB, image.bytes(),
                            static_cast<std::size_t>(image.width()) * 3);
    write_file_atomic(path, bytes.data(), bytes.size());
}

RegionMask read_png_mask(const std::filesystem::path& path) {
    PngReader r(path);
    if (setjmp(png_jmpbuf(r.png))) throw DataError("corrupt PNG: " + path.string());
    png_read_info(r.png, r.info);
    const int w = static_cast<int>(png_get_image_width(r.png, r.info));
    const int h = static_cast<int>(png_get_image_height(r.png, r.info));
    const int color = png_get_color_type(r.png, r.info);
    const int depth = png_get_bit_depth(r.png, r.info);
    if (color != PNG_COLOR_TYPE_GRAY || (depth != 16 && depth != 8))
        throw DataError("mask must be a single-channel 8- or 16-bit PNG: " + path.string());

    std::size_t row_bytes = 0;
    auto data = read_rows(r.png, r.info, row_bytes);
    std::vector<std::uint32_t> labels(static_cast<std::size_t>(w) * static_cast<std::size_t>(h));
    for (int y = 0; y < h; ++y) {
        const std::uint8_t* row = data.data() + static_cast<std::size_t>(y) * row_bytes;
        for (int x = 0; x < w; ++x) {
            const std::size_t i = static_cast<std::size_t>(y) * static_cast<std::size_t>(w) + static_cast<std::size_t>(x);
            labels[i] = depth == 16 ? (static_cast<std::uint32_t>(row[2 * x]) << 8) | row[2 * x + 1] : row[x];
        }
    }
    try {
        return RegionMask(w, h, std::move(labels));
    } catch (const ContractError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

void write_png_mask(const std::filesystem::path& path, const RegionMask& mask) {
    if (mask.region_count() > 65536) throw ContractError("write_png_mask: more than 65536 regions");
    const std::size_t row_bytes = static_cast<std::size_t>(mask.width()) * 2;
    std::vector<std::uint8_t> raw(row_bytes * static_cast<std::size_t>(mask.height()));
    for (std::size_t i = 0; i < mask.labels().size(); ++i) {
        raw[2 * i] = static_cast<std::uint8_t>(mask.labels()[i] >> 8);
        raw[2 * i + 1] = static_cast<std::uint8_t>(mask.labels()[i] & 0xff);
    }
    auto bytes = encode_png(mask.width(), mask.height(), 16, PNG_COLOR_TYPE_GRAY, raw, row_bytes);
    write_file_atomic(path, bytes.data(), bytes.size());
}

void write_file_atomic(const std::filesystem::path& path, const void* data, std::size_t size) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot write " + tmp.string());
        out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
        if (!out) throw DataError("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

}  // namespace scene
