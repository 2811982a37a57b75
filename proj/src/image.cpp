#include "octa/image.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace octa {

GrayImage::GrayImage(int w, int h, std::uint8_t fill, double scan_um)
    : width(w), height(h), scan_size_um(scan_um) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("GrayImage: non-positive dimensions");
    if (scan_um <= 0.0) throw std::invalid_argument("GrayImage: non-positive scan size");
    pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill);
}

void GrayImage::validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("GrayImage: non-positive dimensions");
    if (scan_size_um <= 0.0) throw std::invalid_argument("GrayImage: non-positive scan size");
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("GrayImage: pixel buffer does not match dimensions");
}

BinaryMask::BinaryMask(int w, int h, bool fill, double scan_um)
    : width(w), height(h), scan_size_um(scan_um) {
    if (w <= 0 || h <= 0) throw std::invalid_argument("BinaryMask: non-positive dimensions");
    if (scan_um <= 0.0) throw std::invalid_argument("BinaryMask: non-positive scan size");
    pixels.assign(static_cast<std::size_t>(w) * static_cast<std::size_t>(h), fill ? 1 : 0);
}

std::size_t BinaryMask::count_true() const {
    std::size_t n = 0;
    for (std::uint8_t p : pixels) n += p;
    return n;
}

void BinaryMask::validate() const {
    if (width <= 0 || height <= 0) throw std::invalid_argument("BinaryMask: non-positive dimensions");
    if (scan_size_um <= 0.0) throw std::invalid_argument("BinaryMask: non-positive scan size");
    if (pixels.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height))
        throw std::invalid_argument("BinaryMask: pixel buffer does not match dimensions");
    for (std::uint8_t p : pixels)
        if (p > 1) throw std::invalid_argument("BinaryMask: pixel value outside {0,1}");
}

PixelGeometry pixel_geometry(double scan_size_um, int pixels_per_side) {
    if (scan_size_um <= 0.0) throw std::invalid_argument("pixel_geometry: non-positive scan size");
    if (pixels_per_side <= 0) throw std::invalid_argument("pixel_geometry: non-positive pixel count");
    PixelGeometry g;
    g.pixel_pitch_um = scan_size_um / static_cast<double>(pixels_per_side);
    const double pitch_mm = g.pixel_pitch_um / 1000.0;
    g.pixel_area_mm2 = pitch_mm * pitch_mm;
    return g;
}

GrayImage crop(const GrayImage& img, const CropRect& rect) {
    img.validate();
    if (rect.w <= 0 || rect.h <= 0) throw std::invalid_argument("crop: non-positive extent");
    if (rect.x < 0 || rect.y < 0 || rect.x + rect.w > img.width || rect.y + rect.h > img.height)
        throw std::out_of_range("crop: rectangle exceeds image bounds");

    GrayImage out(rect.w, rect.h, 0, img.scan_size_um * rect.w / img.width);
    for (int y = 0; y < rect.h; ++y)
        for (int x = 0; x < rect.w; ++x)
            out.at(x, y) = img.at(rect.x + x, rect.y + y);
    return out;
}

std::vector<double> gaussian_kernel(int kernel_size, double sigma) {
    if (kernel_size < 3 || kernel_size % 2 == 0)
        throw std::invalid_argument("gaussian_kernel: kernel size must be odd and >= 3");
    if (sigma <= 0.0) throw std::invalid_argument("gaussian_kernel: sigma must be positive");

    const int r = kernel_size / 2;
    std::vector<double> k(static_cast<std::size_t>(kernel_size));
    double sum = 0.0;
    for (int i = -r; i <= r; ++i) {
        const double v = std::exp(-(static_cast<double>(i) * i) / (2.0 * sigma * sigma));
        k[static_cast<std::size_t>(i + r)] = v;
        sum += v;
    }
    for (double& v : k) v /= sum;
    return k;
}

GrayImage gaussian_blur(const GrayImage& img, int kernel_size, double sigma) {
    img.validate();
    const std::vector<double> k = gaussian_kernel(kernel_size, sigma);
    const int r = kernel_size / 2;
    const int w = img.width;
    const int h = img.height;

    // Horizontal pass kept in doubles; rounding happens once after the
    // vertical pass so the result matches a dense 2-D convolution.
    std::vector<double> tmp(img.pixel_count(), 0.0);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += k[static_cast<std::size_t>(i + r)] * img.at(reflect_index(x + i, w), y);
            tmp[img.idx(x, y)] = acc;
        }
    }

    GrayImage out(w, h, 0, img.scan_size_um);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            double acc = 0.0;
            for (int i = -r; i <= r; ++i)
                acc += k[static_cast<std::size_t>(i + r)] * tmp[img.idx(x, reflect_index(y + i, h))];
            long v = std::lround(acc);
            if (v < 0) v = 0;
            if (v > 255) v = 255;
            out.at(x, y) = static_cast<std::uint8_t>(v);
        }
    }
    return out;
}

}  // namespace octa
