#include "adc/masking.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "adc/errors.hpp"
#include "adc/util.hpp"

namespace adc {

std::size_t PixelMask::count() const {
    std::size_t n = 0;
    for (uint8_t b : bits) n += b;
    return n;
}

PixelMask class_mask(const SceneClassMask& scl, const std::set<int16_t>& masked_codes) {
    PixelMask out(scl.grid);
    const std::size_t n = scl.codes.size();
    for (std::size_t i = 0; i < n; ++i) {
        int16_t c = scl.codes[i];
        out.bits[i] = (c == kSclNodata || masked_codes.count(c)) ? 1 : 0;
    }
    return out;
}

namespace {

constexpr double kFar = 1e18;  // farther than any real squared pixel distance

// Felzenszwalb lower-envelope pass. f and d may not alias.
void edt_1d(const double* f, double* d, int* v, double* z, int n) {
    int k = 0;
    v[0] = 0;
    z[0] = -kFar;
    z[1] = kFar;
    for (int q = 1; q < n; ++q) {
        double s;
        while (true) {
            int p = v[k];
            s = ((f[q] + double(q) * q) - (f[p] + double(p) * p)) / (2.0 * (q - p));
            if (s <= z[k] && k > 0) {
                --k;
            } else {
                break;
            }
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = kFar;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        double dq = double(q - v[k]);
        d[q] = dq * dq + f[v[k]];
    }
}

}  // namespace

std::vector<double> distance_transform_sq(const uint8_t* seeds, int width, int height) {
    std::vector<double> g(std::size_t(width) * height);

    // Vertical pass: squared distance to the nearest seed in the same column.
    for (int c = 0; c < width; ++c) {
        double d = kFar;
        for (int r = 0; r < height; ++r) {
            d = seeds[std::size_t(r) * width + c] ? 0.0 : std::min(d + 1.0, kFar);
            g[std::size_t(r) * width + c] = d;
        }
        d = kFar;
        for (int r = height - 1; r >= 0; --r) {
            d = seeds[std::size_t(r) * width + c] ? 0.0 : std::min(d + 1.0, kFar);
            double& cell = g[std::size_t(r) * width + c];
            cell = std::min(cell, d);
        }
    }
    for (double& v : g) v = (v >= kFar) ? kFar : v * v;

    // Horizontal pass over the column distances.
    std::vector<double> out(g.size());
    std::vector<double> row(static_cast<std::size_t>(width));
    std::vector<int> v(static_cast<std::size_t>(width));
    std::vector<double> z(std::size_t(width) + 1);
    for (int r = 0; r < height; ++r) {
        const double* f = g.data() + std::size_t(r) * width;
        std::copy(f, f + width, row.begin());
        edt_1d(row.data(), out.data() + std::size_t(r) * width, v.data(), z.data(),
               width);
    }
    return out;
}

PixelMask dilate_mask(const PixelMask& mask, double radius_m) {
    if (radius_m < 0) throw PreconditionError("dilation radius must be >= 0");
    if (radius_m == 0) return mask;
    mask.grid.validate();

    std::vector<double> d2 =
        distance_transform_sq(mask.bits.data(), mask.grid.width, mask.grid.height);
    const double r_px = radius_m / mask.grid.pixel_size;
    const double r2 = r_px * r_px;

    PixelMask out(mask.grid);
    for (std::size_t i = 0; i < d2.size(); ++i) out.bits[i] = d2[i] <= r2 ? 1 : 0;
    return out;
}

LabelRaster erode_labels(const LabelRaster& labels, double radius_m, int threads) {
    if (radius_m < 0) throw PreconditionError("erosion radius must be >= 0");
    if (radius_m == 0) return labels;
    labels.grid.validate();

    const int W = labels.grid.width, H = labels.grid.height;
    const double r_px = radius_m / labels.grid.pixel_size;
    const double r2 = r_px * r_px;
    const int pad = int(std::floor(r_px)) + 1;

    struct Box {
        int r0, c0, r1, c1;  // inclusive
    };
    std::unordered_map<int32_t, Box> boxes;
    for (int r = 0; r < H; ++r) {
        for (int c = 0; c < W; ++c) {
            int32_t id = labels.at(r, c);
            if (id == kNoParcel) continue;
            auto [it, fresh] = boxes.try_emplace(id, Box{r, c, r, c});
            if (!fresh) {
                Box& b = it->second;
                b.r0 = std::min(b.r0, r);
                b.c0 = std::min(b.c0, c);
                b.r1 = std::max(b.r1, r);
                b.c1 = std::max(b.c1, c);
            }
        }
    }

    std::vector<std::pair<int32_t, Box>> items(boxes.begin(), boxes.end());
    LabelRaster out(labels.grid);  // background everywhere

    // Disjoint writes per label: each task touches only its own pixels.
    parallel_for(items.size(), [&](std::size_t i) {
        const auto& [id, b] = items[i];
        const int wr0 = std::max(0, b.r0 - pad);
        const int wc0 = std::max(0, b.c0 - pad);
        const int wr1 = std::min(H - 1, b.r1 + pad);
        const int wc1 = std::min(W - 1, b.c1 + pad);
        const int wh = wr1 - wr0 + 1, ww = wc1 - wc0 + 1;

        // Seeds: any in-raster pixel carrying a different label (or none).
        std::vector<uint8_t> seeds(std::size_t(wh) * ww);
        for (int r = 0; r < wh; ++r)
            for (int c = 0; c < ww; ++c)
                seeds[std::size_t(r) * ww + c] =
                    labels.at(wr0 + r, wc0 + c) != id ? 1 : 0;

        std::vector<double> d2 = distance_transform_sq(seeds.data(), ww, wh);
        for (int r = b.r0; r <= b.r1; ++r) {
            for (int c = b.c0; c <= b.c1; ++c) {
                if (labels.at(r, c) != id) continue;
                if (d2[std::size_t(r - wr0) * ww + (c - wc0)] > r2)
                    out.at(r, c) = id;
            }
        }
    }, threads);

    return out;
}

CubeArray apply_mask(const CubeArray& cube, const PixelMask& mask,
                     const std::vector<int64_t>& times) {
    if (!(mask.grid == cube.grid()))
        throw PreconditionError("mask grid does not match cube grid");

    std::vector<int> tidx;
    if (times.empty()) {
        for (int t = 0; t < cube.n_times(); ++t) tidx.push_back(t);
    } else {
        for (int64_t day : times) {
            int t = cube.time_index(day);
            if (t >= 0) tidx.push_back(t);
        }
    }

    CubeArray out = cube;
    const std::size_t n = std::size_t(cube.height()) * cube.width();
    for (int t : tidx) {
        for (int b = 0; b < cube.n_bands(); ++b) {
            uint8_t* ok = out.slice_valid(t, b);
            for (std::size_t i = 0; i < n; ++i)
                if (mask.bits[i]) ok[i] = 0;
        }
    }
    return out;
}

SceneClassMask scl_slice(const CubeArray& cube, int t) {
    int sb = cube.band_index(BandId::SCL);
    if (sb < 0) throw PreconditionError("cube has no scene classification band");
    SceneClassMask scl(cube.grid());
    const float* v = cube.slice_values(t, sb);
    const uint8_t* ok = cube.slice_valid(t, sb);
    for (std::size_t i = 0; i < scl.codes.size(); ++i)
        scl.codes[i] = ok[i] ? int16_t(std::lround(v[i])) : int16_t(kSclNodata);
    return scl;
}

CubeArray apply_scene_masks(const CubeArray& cube, double cloud_buffer_m,
                            const std::set<int16_t>& masked_codes) {
    const int sb = cube.band_index(BandId::SCL);
    if (sb < 0) return cube;

    CubeArray out = cube;
    const std::size_t n = std::size_t(cube.height()) * cube.width();
    for (int t = 0; t < cube.n_times(); ++t) {
        PixelMask m = class_mask(scl_slice(cube, t), masked_codes);
        if (m.count() == 0) continue;
        if (cloud_buffer_m > 0) m = dilate_mask(m, cloud_buffer_m);
        for (int b = 0; b < cube.n_bands(); ++b) {
            if (b == sb) continue;
            uint8_t* ok = out.slice_valid(t, b);
            for (std::size_t i = 0; i < n; ++i)
                if (m.bits[i]) ok[i] = 0;
        }
    }
    return out;
}

}  // namespace adc
