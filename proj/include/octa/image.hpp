#pragma once
// Grayscale raster types, physical pixel geometry and the data-cleaning
// operations (crop, Gaussian smoothing) that precede segmentation.

#include <cstddef>
#include <cstdint>
#include <vector>

namespace octa {

// Default field of view of the supported en-face scans.
inline constexpr double kDefaultScanSizeUm = 200.0;
inline constexpr int kDefaultPixelsPerSide = 510;

// 8-bit single-channel raster with physical scan-size metadata.
// Row-major, pixels.size() == width * height.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;
    double scan_size_um = kDefaultScanSizeUm;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0, double scan_um = kDefaultScanSizeUm);

    std::uint8_t at(int x, int y) const { return pixels[idx(x, y)]; }
    std::uint8_t& at(int x, int y) { return pixels[idx(x, y)]; }
    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }
    std::size_t pixel_count() const { return pixels.size(); }

    void validate() const;
};

// Boolean raster; true (stored as 1) marks object/vessel pixels.
struct BinaryMask {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;  // strictly 0 or 1
    double scan_size_um = kDefaultScanSizeUm;

    BinaryMask() = default;
    BinaryMask(int w, int h, bool fill = false, double scan_um = kDefaultScanSizeUm);

    bool test(int x, int y) const { return pixels[idx(x, y)] != 0; }
    void set(int x, int y, bool v) { pixels[idx(x, y)] = v ? 1 : 0; }
    std::size_t idx(int x, int y) const {
        return static_cast<std::size_t>(y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(x);
    }
    std::size_t pixel_count() const { return pixels.size(); }
    std::size_t count_true() const;

    void validate() const;

    bool operator==(const BinaryMask& o) const {
        return width == o.width && height == o.height && pixels == o.pixels;
    }
};

// Physical size of one pixel, derived from the scan field of view.
struct PixelGeometry {
    double pixel_area_mm2 = 0.0;
    double pixel_pitch_um = 0.0;
};

// pitch = scan_size / pixels_per_side, area = (pitch / 1000)^2 in mm^2.
// The stock 200 um / 510 px scan gives 0.154 um^2 per pixel.
PixelGeometry pixel_geometry(double scan_size_um, int pixels_per_side);

// Axis-aligned crop window in pixel coordinates.
struct CropRect {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;
};

// Extracts rect from img. scan_size_um is rescaled by rect.w / img.width so
// the pixel pitch is unchanged.
GrayImage crop(const GrayImage& img, const CropRect& rect);

// Separable Gaussian smoothing. Kernel is normalized to sum 1, borders are
// reflected, the result is rounded once at the end and clamped to [0,255].
GrayImage gaussian_blur(const GrayImage& img, int kernel_size, double sigma);

// Normalized 1-D Gaussian taps for an odd kernel_size.
std::vector<double> gaussian_kernel(int kernel_size, double sigma);

// Symmetric border reflection: -1 -> 0, n -> n-1.
inline int reflect_index(int i, int n) {
    if (n == 1) return 0;
    while (i < 0 || i >= n) {
        if (i < 0) i = -i - 1;
        if (i >= n) i = 2 * n - i - 1;
    }
    return i;
}

}  // namespace octa
