#include "octa/segmentation.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace octa::seg {

void PipelineConfig::validate() const {
    if (otsu_cap <= 0 || otsu_cap > 255) throw std::invalid_argument("config: otsu_cap outside (0,255]");
    for (std::size_t i = 0; i < multi_cuts.size(); ++i) {
        if (multi_cuts[i] <= 0 || multi_cuts[i] >= 255)
            throw std::invalid_argument("config: multi_cuts entries must lie in (0,255)");
        if (i > 0 && multi_cuts[i] <= multi_cuts[i - 1])
            throw std::invalid_argument("config: multi_cuts must be strictly ascending");
    }
    if (binary_threshold < 0 || binary_threshold > 255)
        throw std::invalid_argument("config: binary_threshold outside [0,255]");
    if (sp_window < 3 || sp_window % 2 == 0)
        throw std::invalid_argument("config: sp_window must be odd and >= 3");
    if (connectivity != 4 && connectivity != 8)
        throw std::invalid_argument("config: connectivity must be 4 or 8");
    if (gaussian_kernel < 3 || gaussian_kernel % 2 == 0)
        throw std::invalid_argument("config: gaussian_kernel must be odd and >= 3");
    if (gaussian_sigma <= 0.0) throw std::invalid_argument("config: gaussian_sigma must be positive");
}

nlohmann::json config_to_json(const PipelineConfig& cfg) {
    return nlohmann::json{{"otsu_cap", cfg.otsu_cap},
                          {"multi_cuts", cfg.multi_cuts},
                          {"binary_threshold", cfg.binary_threshold},
                          {"sp_window", cfg.sp_window},
                          {"connectivity", cfg.connectivity},
                          {"gaussian_kernel", cfg.gaussian_kernel},
                          {"gaussian_sigma", cfg.gaussian_sigma}};
}

PipelineConfig config_from_json(const nlohmann::json& j) {
    PipelineConfig cfg;
    if (j.contains("otsu_cap")) j.at("otsu_cap").get_to(cfg.otsu_cap);
    if (j.contains("multi_cuts")) j.at("multi_cuts").get_to(cfg.multi_cuts);
    if (j.contains("binary_threshold")) j.at("binary_threshold").get_to(cfg.binary_threshold);
    if (j.contains("sp_window")) j.at("sp_window").get_to(cfg.sp_window);
    if (j.contains("connectivity")) j.at("connectivity").get_to(cfg.connectivity);
    if (j.contains("gaussian_kernel")) j.at("gaussian_kernel").get_to(cfg.gaussian_kernel);
    if (j.contains("gaussian_sigma")) j.at("gaussian_sigma").get_to(cfg.gaussian_sigma);
    cfg.validate();
    return cfg;
}

std::uint64_t config_hash(const PipelineConfig& cfg) {
    const std::string dump = config_to_json(cfg).dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : dump) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

int otsu_threshold(const GrayImage& img) {
    img.validate();
    std::array<std::size_t, 256> hist{};
    for (std::uint8_t p : img.pixels) ++hist[p];

    const double total = static_cast<double>(img.pixel_count());
    double sum_all = 0.0;
    for (int v = 0; v < 256; ++v) sum_all += static_cast<double>(v) * hist[v];

    int best_t = -1;
    double best_var = -1.0;
    double w0 = 0.0;
    double sum0 = 0.0;
    for (int t = 0; t <= 254; ++t) {
        w0 += static_cast<double>(hist[t]);
        sum0 += static_cast<double>(t) * hist[t];
        const double w1 = total - w0;
        if (w0 == 0.0 || w1 == 0.0) continue;
        const double mu0 = sum0 / w0;
        const double mu1 = (sum_all - sum0) / w1;
        const double d = mu0 - mu1;
        const double var = w0 * w1 * d * d;
        if (var > best_var) {
            best_var = var;
            best_t = t;
        }
    }
    if (best_t < 0) {
        // Constant image: every candidate leaves a class empty.
        return img.pixels[0];
    }
    return best_t;
}

GrayImage otsu_cap(const GrayImage& img, int cap) {
    if (cap <= 0 || cap > 255) throw std::invalid_argument("otsu_cap: cap outside (0,255]");
    const int t = otsu_threshold(img);
    GrayImage out = img;
    for (std::uint8_t& p : out.pixels)
        if (p > t) p = static_cast<std::uint8_t>(cap);
    return out;
}

GrayImage multi_threshold(const GrayImage& img, const std::vector<int>& cuts) {
    img.validate();
    for (std::size_t i = 1; i < cuts.size(); ++i)
        if (cuts[i] <= cuts[i - 1])
            throw std::invalid_argument("multi_threshold: cuts must be strictly ascending");

    const int bands = static_cast<int>(cuts.size()) + 1;
    std::array<std::uint8_t, 256> lut{};
    for (int v = 0; v < 256; ++v) {
        int band = 0;
        while (band < static_cast<int>(cuts.size()) && v >= cuts[band]) ++band;
        const long level = bands == 1 ? 0 : std::lround(255.0 * band / (bands - 1));
        lut[v] = static_cast<std::uint8_t>(level);
    }

    GrayImage out = img;
    for (std::uint8_t& p : out.pixels) p = lut[p];
    return out;
}

BinaryMask binary_threshold(const GrayImage& img, int t) {
    img.validate();
    BinaryMask mask(img.width, img.height, false, img.scan_size_um);
    for (std::size_t i = 0; i < img.pixels.size(); ++i) mask.pixels[i] = img.pixels[i] > t ? 1 : 0;
    return mask;
}

BinaryMask salt_pepper_filter(const BinaryMask& mask, int window) {
    mask.validate();
    if (window < 3 || window % 2 == 0)
        throw std::invalid_argument("salt_pepper_filter: window must be odd and >= 3");

    const int r = window / 2;
    const int w = mask.width;
    const int h = mask.height;
    const int majority = (window * window) / 2 + 1;

    BinaryMask out(w, h, false, mask.scan_size_um);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            int cnt = 0;
            for (int dy = -r; dy <= r; ++dy) {
                const int yy = reflect_index(y + dy, h);
                for (int dx = -r; dx <= r; ++dx)
                    cnt += mask.pixels[mask.idx(reflect_index(x + dx, w), yy)];
            }
            out.pixels[out.idx(x, y)] = cnt >= majority ? 1 : 0;
        }
    }
    return out;
}

LabelMap label_components(const BinaryMask& mask, int connectivity) {
    mask.validate();
    if (connectivity != 4 && connectivity != 8)
        throw std::invalid_argument("label_components: connectivity must be 4 or 8");

    static constexpr int dx8[8] = {-1, 0, 1, -1, 1, -1, 0, 1};
    static constexpr int dy8[8] = {-1, -1, -1, 0, 0, 1, 1, 1};
    static constexpr int dx4[4] = {0, -1, 1, 0};
    static constexpr int dy4[4] = {-1, 0, 0, 1};
    const int* dx = connectivity == 8 ? dx8 : dx4;
    const int* dy = connectivity == 8 ? dy8 : dy4;
    const int ndirs = connectivity;

    LabelMap lm;
    lm.width = mask.width;
    lm.height = mask.height;
    lm.scan_size_um = mask.scan_size_um;
    lm.labels.assign(mask.pixel_count(), 0);
    lm.component_sizes.assign(1, 0);

    std::vector<std::size_t> stack;
    std::uint32_t next = 1;
    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            const std::size_t start = mask.idx(x, y);
            if (!mask.pixels[start] || lm.labels[start]) continue;

            std::size_t size = 0;
            lm.labels[start] = next;
            stack.assign(1, start);
            while (!stack.empty()) {
                const std::size_t cur = stack.back();
                stack.pop_back();
                ++size;
                const int cx = static_cast<int>(cur % mask.width);
                const int cy = static_cast<int>(cur / mask.width);
                for (int d = 0; d < ndirs; ++d) {
                    const int nx = cx + dx[d];
                    const int ny = cy + dy[d];
                    if (nx < 0 || ny < 0 || nx >= mask.width || ny >= mask.height) continue;
                    const std::size_t ni = mask.idx(nx, ny);
                    if (mask.pixels[ni] && !lm.labels[ni]) {
                        lm.labels[ni] = next;
                        stack.push_back(ni);
                    }
                }
            }
            lm.component_sizes.push_back(size);
            ++next;
        }
    }
    return lm;
}

BinaryMask largest_component(const LabelMap& lm) {
    BinaryMask out(lm.width, lm.height, false, lm.scan_size_um);
    if (lm.component_count() == 0) return out;

    std::uint32_t best = 1;
    for (std::uint32_t k = 2; k < lm.component_sizes.size(); ++k)
        if (lm.component_sizes[k] > lm.component_sizes[best]) best = k;

    for (std::size_t i = 0; i < lm.labels.size(); ++i) out.pixels[i] = lm.labels[i] == best ? 1 : 0;
    return out;
}

BinaryMask region_fill(const BinaryMask& mask) {
    mask.validate();
    const int w = mask.width;
    const int h = mask.height;

    // Background reachable from the border, 4-connected; diagonal gaps in
    // the object do not leak.
    std::vector<std::uint8_t> outside(mask.pixel_count(), 0);
    std::vector<std::size_t> stack;
    auto push = [&](int x, int y) {
        const std::size_t i = mask.idx(x, y);
        if (!mask.pixels[i] && !outside[i]) {
            outside[i] = 1;
            stack.push_back(i);
        }
    };
    for (int x = 0; x < w; ++x) {
        push(x, 0);
        push(x, h - 1);
    }
    for (int y = 0; y < h; ++y) {
        push(0, y);
        push(w - 1, y);
    }
    while (!stack.empty()) {
        const std::size_t cur = stack.back();
        stack.pop_back();
        const int cx = static_cast<int>(cur % w);
        const int cy = static_cast<int>(cur / w);
        if (cx > 0) push(cx - 1, cy);
        if (cx + 1 < w) push(cx + 1, cy);
        if (cy > 0) push(cx, cy - 1);
        if (cy + 1 < h) push(cx, cy + 1);
    }

    BinaryMask out = mask;
    for (std::size_t i = 0; i < out.pixels.size(); ++i)
        if (!out.pixels[i] && !outside[i]) out.pixels[i] = 1;
    return out;
}

GrayImage mask_to_gray(const BinaryMask& mask) {
    GrayImage img(mask.width, mask.height, 0, mask.scan_size_um);
    for (std::size_t i = 0; i < mask.pixels.size(); ++i) img.pixels[i] = mask.pixels[i] ? 255 : 0;
    return img;
}

GrayImage render_label_map(const LabelMap& lm) {
    GrayImage img(lm.width, lm.height, 0, lm.scan_size_um);
    const std::size_t n = lm.component_count();
    for (std::size_t i = 0; i < lm.labels.size(); ++i) {
        if (!lm.labels[i]) continue;
        const long level = n <= 1 ? 255 : 55 + std::lround(200.0 * (lm.labels[i] - 1) / (n - 1));
        img.pixels[i] = static_cast<std::uint8_t>(level);
    }
    return img;
}

BinaryMask run_pipeline(const GrayImage& img, const PipelineConfig& cfg, const CropRect& rect,
                        PipelineTrace* trace) {
    cfg.validate();
    auto record = [&](const char* name, const GrayImage& stage) {
        if (trace) trace->stages.emplace_back(name, stage);
    };

    record("00_original", img);
    const GrayImage cropped = crop(img, rect);
    record("01_cropped", cropped);
    const GrayImage smoothed = gaussian_blur(cropped, cfg.gaussian_kernel, cfg.gaussian_sigma);
    record("02_gaussian", smoothed);
    const GrayImage capped = otsu_cap(smoothed, cfg.otsu_cap);
    record("03_otsu_capped", capped);
    const GrayImage banded = multi_threshold(capped, cfg.multi_cuts);
    record("04_multilevel", banded);
    const BinaryMask binary = binary_threshold(banded, cfg.binary_threshold);
    record("05_binary", seg::mask_to_gray(binary));
    const BinaryMask filtered = salt_pepper_filter(binary, cfg.sp_window);
    record("06_salt_pepper", seg::mask_to_gray(filtered));
    const LabelMap lm = label_components(filtered, cfg.connectivity);
    record("07_components", render_label_map(lm));
    return largest_component(lm);
}

}  // namespace octa::seg
