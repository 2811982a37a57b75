#include "octa/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

namespace octa::phantom {

namespace {

constexpr double kPi = 3.14159265358979323846;

double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double uniform(std::mt19937_64& rng, double lo, double hi) {
    return lo + (hi - lo) * uniform01(rng);
}

// Box-Muller; std::normal_distribution is implementation-defined and would
// break seed reproducibility across standard libraries.
double gaussian(std::mt19937_64& rng, double sigma) {
    const double u1 = std::max(uniform01(rng), 1e-12);
    const double u2 = uniform01(rng);
    return sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
}

void fill_disc(BinaryMask& mask, double cx, double cy, double r, bool value) {
    const int x0 = std::max(0, static_cast<int>(std::floor(cx - r)));
    const int x1 = std::min(mask.width - 1, static_cast<int>(std::ceil(cx + r)));
    const int y0 = std::max(0, static_cast<int>(std::floor(cy - r)));
    const int y1 = std::min(mask.height - 1, static_cast<int>(std::ceil(cy + r)));
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            if (dx * dx + dy * dy <= r * r) mask.set(x, y, value);
        }
}

// True when the disc plus a 2 px guard band lies entirely on object pixels,
// so carving it leaves an enclosed hole rather than a boundary bite.
bool disc_enclosed(const BinaryMask& mask, int cx, int cy, double r) {
    const double rr = r + 2.0;
    const int x0 = static_cast<int>(std::floor(cx - rr));
    const int x1 = static_cast<int>(std::ceil(cx + rr));
    const int y0 = static_cast<int>(std::floor(cy - rr));
    const int y1 = static_cast<int>(std::ceil(cy + rr));
    if (x0 < 0 || y0 < 0 || x1 >= mask.width || y1 >= mask.height) return false;
    for (int y = y0; y <= y1; ++y)
        for (int x = x0; x <= x1; ++x) {
            const double dx = x - cx;
            const double dy = y - cy;
            if (dx * dx + dy * dy <= rr * rr && !mask.test(x, y)) return false;
        }
    return true;
}

BinaryMask draw_vessel_blob(const PhantomSpec& spec, std::mt19937_64& rng) {
    BinaryMask truth(spec.width, spec.height, false);

    const double w = spec.width;
    const double h = spec.height;
    double cx = w / 2.0 + uniform(rng, -w / 8.0, w / 8.0);
    double cy = h / 2.0 + uniform(rng, -h / 8.0, h / 8.0);
    double angle = uniform(rng, 0.0, 2.0 * kPi);
    const double r_lo = 9.0 * spec.radius_scale;
    const double r_hi = 15.0 * spec.radius_scale;
    double radius = uniform(rng, r_lo, r_hi);
    const int steps = 240 + static_cast<int>(rng() % 120);

    for (int i = 0; i < steps; ++i) {
        fill_disc(truth, cx, cy, radius, true);
        angle += gaussian(rng, 0.28);
        radius = std::clamp(radius + uniform(rng, -0.5, 0.5), r_lo, r_hi);

        // Steer back toward the center before running into the frame.
        const double guard = radius + 8.0;
        if (cx < guard || cy < guard || cx > w - guard || cy > h - guard)
            angle = std::atan2(h / 2.0 - cy, w / 2.0 - cx) + gaussian(rng, 0.2);

        cx += 2.0 * std::cos(angle);
        cy += 2.0 * std::sin(angle);
    }

    int carved = 0;
    for (int attempt = 0; attempt < 200 && carved < spec.holes; ++attempt) {
        const int hx = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.width));
        const int hy = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.height));
        const double hr = uniform(rng, 3.0, 4.5);
        if (!disc_enclosed(truth, hx, hy, hr)) continue;
        fill_disc(truth, hx, hy, hr, false);
        ++carved;
    }
    return truth;
}

}  // namespace

Phantom make_phantom(const PhantomSpec& spec) {
    std::mt19937_64 rng(spec.seed);

    Phantom out;
    out.crop = CropRect{spec.margin, spec.margin, spec.width, spec.height};
    out.truth = spec.sick ? draw_vessel_blob(spec, rng)
                          : BinaryMask(spec.width, spec.height, false);

    const int full_w = spec.width + 2 * spec.margin;
    const int full_h = spec.height + 2 * spec.margin;
    out.image = GrayImage(full_w, full_h, 0);

    // Healthy frames keep the background band narrow: with no bright vessel
    // class, a wide noise band would let Otsu split inside the noise and
    // promote half the background to the cap value.
    const double bg_lo = spec.sick ? 5.0 : 16.0;
    const double bg_hi = spec.sick ? 40.0 : 24.0;
    for (int y = 0; y < full_h; ++y) {
        for (int x = 0; x < full_w; ++x) {
            const int ix = x - spec.margin;
            const int iy = y - spec.margin;
            double v;
            if (ix < 0 || iy < 0 || ix >= spec.width || iy >= spec.height) {
                v = uniform(rng, 150.0, 255.0);  // device frame junk
            } else if (out.truth.test(ix, iy)) {
                v = uniform(rng, 185.0, 235.0);
            } else {
                v = uniform(rng, bg_lo, bg_hi);
            }
            out.image.at(x, y) = static_cast<std::uint8_t>(std::lround(v));
        }
    }

    // Speckle: isolated salt outside the object, a few 2x2 clusters, and
    // pepper pinpricks inside it. Healthy frames get at least 0.4% salt so
    // the speckle forms the bright Otsu class.
    const double salt_density = spec.sick ? spec.salt_density : std::max(spec.salt_density, 0.004);
    const std::size_t area = static_cast<std::size_t>(spec.width) * spec.height;
    const auto salt_px = static_cast<std::size_t>(salt_density * static_cast<double>(area));
    for (std::size_t i = 0; i < salt_px; ++i) {
        const int x = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.width));
        const int y = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.height));
        if (out.truth.test(x, y)) continue;
        out.image.at(x + spec.margin, y + spec.margin) =
            static_cast<std::uint8_t>(220 + rng() % 36);
    }
    for (int c = 0; c < 4; ++c) {
        const int x = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.width - 1));
        const int y = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.height - 1));
        if (out.truth.test(x, y) || out.truth.test(x + 1, y + 1)) continue;
        for (int dy = 0; dy < 2; ++dy)
            for (int dx = 0; dx < 2; ++dx)
                out.image.at(x + dx + spec.margin, y + dy + spec.margin) =
                    static_cast<std::uint8_t>(215 + rng() % 41);
    }
    const auto pepper_px = static_cast<std::size_t>(spec.pepper_density * static_cast<double>(area));
    for (std::size_t i = 0; i < pepper_px; ++i) {
        const int x = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.width));
        const int y = static_cast<int>(rng() % static_cast<std::uint64_t>(spec.height));
        if (!out.truth.test(x, y)) continue;
        out.image.at(x + spec.margin, y + spec.margin) = static_cast<std::uint8_t>(rng() % 26);
    }
    return out;
}

}  // namespace octa::phantom
