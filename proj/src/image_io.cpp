#include "octa/image_io.hpp"

#include <png.h>

#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace octa {

namespace {

// Skips PGM whitespace and '#' comment lines between header tokens.
int next_pgm_token(std::istream& in) {
    int c = in.get();
    while (c != EOF) {
        if (c == '#') {
            while (c != EOF && c != '\n') c = in.get();
        } else if (!std::isspace(c)) {
            return c;
        }
        c = in.get();
    }
    return EOF;
}

long read_pgm_int(std::istream& in) {
    int c = next_pgm_token(in);
    if (c == EOF || !std::isdigit(c)) throw std::runtime_error("PGM: malformed header");
    long v = 0;
    while (c != EOF && std::isdigit(c)) {
        v = v * 10 + (c - '0');
        if (v > 1'000'000'000L) throw std::runtime_error("PGM: header value out of range");
        c = in.get();
    }
    return v;
}

GrayImage load_pgm(const std::filesystem::path& path, double scan_size_um) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    char m0 = 0, m1 = 0;
    in.get(m0);
    in.get(m1);
    if (m0 != 'P' || m1 != '5') throw std::runtime_error("PGM: not a P5 file: " + path.string());

    const long w = read_pgm_int(in);
    const long h = read_pgm_int(in);
    const long maxval = read_pgm_int(in);
    if (w <= 0 || h <= 0) throw std::runtime_error("PGM: zero dimensions in " + path.string());
    if (maxval != 255) throw std::runtime_error("PGM: unsupported bit depth (maxval " +
                                                std::to_string(maxval) + ") in " + path.string());
    // Header ends with exactly one whitespace byte before the raster.
    GrayImage img(static_cast<int>(w), static_cast<int>(h), 0, scan_size_um);
    in.read(reinterpret_cast<char*>(img.pixels.data()), static_cast<std::streamsize>(img.pixel_count()));
    if (in.gcount() != static_cast<std::streamsize>(img.pixel_count()))
        throw std::runtime_error("PGM: truncated raster in " + path.string());
    return img;
}

struct PngReadCloser {
    png_structp png = nullptr;
    png_infop info = nullptr;
    std::FILE* fp = nullptr;
    ~PngReadCloser() {
        if (png) png_destroy_read_struct(&png, info ? &info : nullptr, nullptr);
        if (fp) std::fclose(fp);
    }
};

GrayImage load_png(const std::filesystem::path& path, double scan_size_um) {
    PngReadCloser s;
    s.fp = std::fopen(path.string().c_str(), "rb");
    if (!s.fp) throw std::runtime_error("cannot open " + path.string());

    s.png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!s.png) throw std::runtime_error("PNG: read struct allocation failed");
    s.info = png_create_info_struct(s.png);
    if (!s.info) throw std::runtime_error("PNG: info struct allocation failed");
    if (setjmp(png_jmpbuf(s.png)))
        throw std::runtime_error("PNG: failed to decode " + path.string() +
                                 " as 8-bit grayscale");

    png_init_io(s.png, s.fp);
    png_read_info(s.png, s.info);

    // Normalize everything gray-mappable to one byte per pixel; truly
    // colored pixels abort via the rgb_to_gray error action.
    png_set_palette_to_rgb(s.png);
    png_set_expand_gray_1_2_4_to_8(s.png);
    png_set_strip_16(s.png);
    png_set_strip_alpha(s.png);
    const int color_type = png_get_color_type(s.png, s.info);
    if (color_type == PNG_COLOR_TYPE_RGB || color_type == PNG_COLOR_TYPE_RGB_ALPHA ||
        color_type == PNG_COLOR_TYPE_PALETTE)
        png_set_rgb_to_gray_fixed(s.png, PNG_ERROR_ACTION_ERROR, -1, -1);
    png_read_update_info(s.png, s.info);

    const png_uint_32 w = png_get_image_width(s.png, s.info);
    const png_uint_32 h = png_get_image_height(s.png, s.info);
    if (w == 0 || h == 0) throw std::runtime_error("PNG: zero dimensions in " + path.string());
    if (png_get_rowbytes(s.png, s.info) != w)
        throw std::runtime_error("PNG: not reducible to 8-bit grayscale: " + path.string());

    GrayImage img(static_cast<int>(w), static_cast<int>(h), 0, scan_size_um);
    std::vector<png_bytep> rows(h);
    for (png_uint_32 y = 0; y < h; ++y) rows[y] = img.pixels.data() + img.idx(0, static_cast<int>(y));
    png_read_image(s.png, rows.data());
    png_read_end(s.png, nullptr);
    return img;
}

}  // namespace

GrayImage load_gray(const std::filesystem::path& path, double scan_size_um) {
    std::ifstream probe(path, std::ios::binary);
    if (!probe) throw std::runtime_error("cannot open " + path.string());
    unsigned char magic[2] = {0, 0};
    probe.read(reinterpret_cast<char*>(magic), 2);
    probe.close();

    if (magic[0] == 'P' && magic[1] == '5') return load_pgm(path, scan_size_um);
    if (magic[0] == 0x89 && magic[1] == 'P') return load_png(path, scan_size_um);
    throw std::runtime_error("unsupported image format: " + path.string());
}

void save_gray(const GrayImage& img, const std::filesystem::path& path) {
    img.validate();
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "P5\n" << img.width << " " << img.height << "\n255\n";
    out.write(reinterpret_cast<const char*>(img.pixels.data()),
              static_cast<std::streamsize>(img.pixel_count()));
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

BinaryMask load_mask(const std::filesystem::path& path, double scan_size_um) {
    const GrayImage img = load_gray(path, scan_size_um);
    BinaryMask mask(img.width, img.height, false, img.scan_size_um);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) mask.pixels[i] = img.pixels[i] > 127 ? 1 : 0;
    return mask;
}

void save_mask(const BinaryMask& mask, const std::filesystem::path& path) {
    mask.validate();
    GrayImage img(mask.width, mask.height, 0, mask.scan_size_um);
    for (std::size_t i = 0; i < mask.pixels.size(); ++i) img.pixels[i] = mask.pixels[i] ? 255 : 0;
    save_gray(img, path);
}

}  // namespace octa
