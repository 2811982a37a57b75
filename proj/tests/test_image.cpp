#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include <png.h>

#include "octa/image.hpp"
#include "octa/image_io.hpp"
#include "support/oracles.hpp"

using namespace octa;

namespace {

std::filesystem::path temp_file(const char* name) {
    const auto dir = std::filesystem::temp_directory_path() / "octa_tests";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_png(const std::filesystem::path& path, int w, int h, int color_type,
               const std::vector<std::uint8_t>& data) {
    std::FILE* fp = std::fopen(path.string().c_str(), "wb");
    REQUIRE(fp != nullptr);
    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png_create_info_struct(png);
    REQUIRE(setjmp(png_jmpbuf(png)) == 0);
    png_init_io(png, fp);
    png_set_IHDR(png, info, static_cast<png_uint_32>(w), static_cast<png_uint_32>(h), 8, color_type,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    for (int y = 0; y < h; ++y)
        png_write_row(png, const_cast<png_bytep>(data.data() + static_cast<std::size_t>(y) * w * channels));
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
    std::fclose(fp);
}

}  // namespace

TEST_CASE("pgm load of a hand-written 4-pixel file") {
    const auto path = temp_file("hand.pgm");
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n2 2\n255\n";
        const unsigned char px[4] = {0, 85, 170, 255};
        out.write(reinterpret_cast<const char*>(px), 4);
    }
    const GrayImage img = load_gray(path);
    CHECK(img.width == 2);
    CHECK(img.height == 2);
    CHECK(img.pixels == std::vector<std::uint8_t>{0, 85, 170, 255});
}

TEST_CASE("pgm 510x510 zeros round trip") {
    GrayImage img(510, 510, 0);
    const auto path = temp_file("zeros.pgm");
    save_gray(img, path);
    const GrayImage back = load_gray(path);
    CHECK(back.width == 510);
    CHECK(back.height == 510);
    CHECK(back.pixels == img.pixels);
}

TEST_CASE("pgm save/load round trip is byte identical") {
    std::mt19937_64 rng(42);
    const GrayImage img = oracle::random_image(33, 21, rng);
    const auto p1 = temp_file("rt1.pgm");
    const auto p2 = temp_file("rt2.pgm");
    save_gray(img, p1);
    const GrayImage back = load_gray(p1);
    CHECK(back.pixels == img.pixels);
    save_gray(back, p2);
    CHECK(slurp(p1) == slurp(p2));
}

TEST_CASE("pgm rejects bad input") {
    CHECK_THROWS(load_gray(temp_file("missing_file.pgm")));

    const auto deep = temp_file("deep.pgm");
    {
        std::ofstream out(deep, std::ios::binary);
        out << "P5\n2 2\n65535\n";
        for (int i = 0; i < 8; ++i) out.put(0);
    }
    CHECK_THROWS_WITH_AS(load_gray(deep), doctest::Contains("bit depth"), std::runtime_error);

    const auto empty = temp_file("zero.pgm");
    {
        std::ofstream out(empty, std::ios::binary);
        out << "P5\n0 0\n255\n";
    }
    CHECK_THROWS(load_gray(empty));

    const auto truncated = temp_file("trunc.pgm");
    {
        std::ofstream out(truncated, std::ios::binary);
        out << "P5\n4 4\n255\n";
        out.put(1);
    }
    CHECK_THROWS(load_gray(truncated));
}

TEST_CASE("png grayscale input") {
    std::mt19937_64 rng(7);
    GrayImage img = oracle::random_image(17, 9, rng);
    const auto path = temp_file("gray.png");
    write_png(path, img.width, img.height, PNG_COLOR_TYPE_GRAY, img.pixels);
    const GrayImage back = load_gray(path, 123.0);
    CHECK(back.width == img.width);
    CHECK(back.height == img.height);
    CHECK(back.pixels == img.pixels);
    CHECK(back.scan_size_um == 123.0);
}

TEST_CASE("png truly colored input is rejected") {
    std::vector<std::uint8_t> rgb(4 * 4 * 3);
    for (std::size_t i = 0; i < rgb.size(); i += 3) {
        rgb[i] = 200;
        rgb[i + 1] = 10;
        rgb[i + 2] = 10;
    }
    const auto path = temp_file("color.png");
    write_png(path, 4, 4, PNG_COLOR_TYPE_RGB, rgb);
    CHECK_THROWS(load_gray(path));
}

TEST_CASE("png gray-encoded-as-rgb input is accepted") {
    std::vector<std::uint8_t> rgb(5 * 3 * 3);
    for (std::size_t p = 0; p < 15; ++p)
        rgb[3 * p] = rgb[3 * p + 1] = rgb[3 * p + 2] = static_cast<std::uint8_t>(p * 17);
    const auto path = temp_file("graymap.png");
    write_png(path, 5, 3, PNG_COLOR_TYPE_RGB, rgb);
    const GrayImage img = load_gray(path);
    for (std::size_t p = 0; p < 15; ++p) CHECK(img.pixels[p] == p * 17);
}

TEST_CASE("crop full rect is identity") {
    std::mt19937_64 rng(1);
    const GrayImage img = oracle::random_image(12, 8, rng);
    const GrayImage out = crop(img, {0, 0, 12, 8});
    CHECK(out.pixels == img.pixels);
    CHECK(out.scan_size_um == img.scan_size_um);
}

TEST_CASE("crop extracts the inner block") {
    GrayImage img(4, 4, 0);
    for (int i = 0; i < 16; ++i) img.pixels[static_cast<std::size_t>(i)] = static_cast<std::uint8_t>(i);
    const GrayImage out = crop(img, {1, 1, 2, 2});
    CHECK(out.width == 2);
    CHECK(out.height == 2);
    CHECK(out.pixels == std::vector<std::uint8_t>{5, 6, 9, 10});
}

TEST_CASE("crop rescales scan size by width fraction") {
    GrayImage img(200, 200, 0, 400.0);
    const GrayImage out = crop(img, {10, 10, 50, 50});
    CHECK(out.scan_size_um == doctest::Approx(100.0));
}

TEST_CASE("crop rejects out-of-bounds rects") {
    GrayImage img(4, 4, 0);
    CHECK_THROWS_AS(crop(img, {2, 2, 3, 1}), std::out_of_range);
    CHECK_THROWS_AS(crop(img, {0, 3, 1, 2}), std::out_of_range);
    CHECK_THROWS(crop(img, {0, 0, 0, 1}));
}

TEST_CASE("crop composes") {
    std::mt19937_64 rng(5);
    const GrayImage img = oracle::random_image(20, 20, rng);
    const CropRect r1{3, 4, 12, 10};
    const CropRect r2{2, 1, 5, 6};
    const GrayImage two_step = crop(crop(img, r1), r2);
    const GrayImage one_step = crop(img, {r1.x + r2.x, r1.y + r2.y, r2.w, r2.h});
    CHECK(two_step.pixels == one_step.pixels);
}

TEST_CASE("gaussian blur preserves constant images") {
    GrayImage img(9, 9, 77);
    const GrayImage out = gaussian_blur(img, 5, 1.0);
    for (std::uint8_t p : out.pixels) CHECK(p == 77);
}

TEST_CASE("gaussian blur center weight on a single bright pixel") {
    GrayImage img(9, 9, 0);
    img.at(4, 4) = 255;
    const GrayImage out = gaussian_blur(img, 3, 1.0);
    const double c = 1.0 / (1.0 + 2.0 * std::exp(-0.5));
    CHECK(out.at(4, 4) == std::lround(255.0 * c * c));
}

TEST_CASE("gaussian blur matches dense convolution oracle") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 10; ++trial) {
        const GrayImage img = oracle::random_image(24, 17, rng);
        for (const auto [k, sigma] : {std::pair{3, 1.0}, std::pair{5, 1.3}, std::pair{7, 2.0}}) {
            const GrayImage got = gaussian_blur(img, k, sigma);
            const GrayImage want = oracle::dense_gaussian(img, k, sigma);
            CHECK(got.pixels == want.pixels);

            double mean_in = 0, mean_out = 0;
            for (std::size_t i = 0; i < img.pixels.size(); ++i) {
                mean_in += img.pixels[i];
                mean_out += got.pixels[i];
            }
            CHECK(std::abs(mean_in - mean_out) / static_cast<double>(img.pixel_count()) <= 1.0);
        }
    }
}

TEST_CASE("gaussian blur validates parameters") {
    GrayImage img(4, 4, 0);
    CHECK_THROWS(gaussian_blur(img, 4, 1.0));
    CHECK_THROWS(gaussian_blur(img, 1, 1.0));
    CHECK_THROWS(gaussian_blur(img, 3, 0.0));
}

TEST_CASE("pixel geometry reproduces the stock scan value") {
    const PixelGeometry g = pixel_geometry(200.0, 510);
    const double area_um2 = g.pixel_area_mm2 * 1e6;
    CHECK(area_um2 == doctest::Approx(0.154).epsilon(0.004));  // 3 s.f.
    CHECK(g.pixel_pitch_um == doctest::Approx(200.0 / 510.0));
}

TEST_CASE("pixel geometry unit cases") {
    const PixelGeometry a = pixel_geometry(1000.0, 1000);
    CHECK(a.pixel_pitch_um == doctest::Approx(1.0));
    CHECK(a.pixel_area_mm2 == doctest::Approx(1e-6));

    const PixelGeometry b = pixel_geometry(304.0, 304);
    CHECK(b.pixel_pitch_um == doctest::Approx(1.0));
    CHECK(b.pixel_area_mm2 == doctest::Approx(1e-6));
}

TEST_CASE("pixel geometry quarters area when side pixels double") {
    const PixelGeometry g1 = pixel_geometry(200.0, 255);
    const PixelGeometry g2 = pixel_geometry(200.0, 510);
    CHECK(g2.pixel_area_mm2 == doctest::Approx(g1.pixel_area_mm2 / 4.0));
}

TEST_CASE("pixel geometry rejects non-positive arguments") {
    CHECK_THROWS(pixel_geometry(0.0, 510));
    CHECK_THROWS(pixel_geometry(200.0, 0));
    CHECK_THROWS(pixel_geometry(-1.0, 10));
}

TEST_CASE("mask invariants") {
    BinaryMask m(3, 3, false);
    m.pixels[4] = 2;
    CHECK_THROWS(m.validate());
    m.pixels[4] = 1;
    CHECK_NOTHROW(m.validate());
    CHECK(m.count_true() == 1);
}
