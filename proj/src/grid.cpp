#include "adc/grid.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>

#include "adc/dates.hpp"
#include "adc/errors.hpp"

namespace adc {

PixelBox GridSpec::window_for(const BBox& box) const {
    // First pixel whose center x >= box.min_x, last with center x < box.max_x.
    int c0 = static_cast<int>(std::ceil(col_coord(box.min_x)));
    int c1 = static_cast<int>(std::ceil(col_coord(box.max_x)));  // exclusive
    int r0 = static_cast<int>(std::ceil(row_coord(box.min_y)));
    int r1 = static_cast<int>(std::ceil(row_coord(box.max_y)));
    c0 = std::max(c0, 0);
    r0 = std::max(r0, 0);
    c1 = std::min(c1, width);
    r1 = std::min(r1, height);
    return {r0, c0, std::max(0, r1 - r0), std::max(0, c1 - c0)};
}

GridSpec GridSpec::sub_grid(const PixelBox& w) const {
    GridSpec g = *this;
    g.origin_x = origin_x + w.col * pixel_size;
    g.origin_y = origin_y + w.row * pixel_size;
    g.width = w.ncols;
    g.height = w.nrows;
    return g;
}

void GridSpec::validate() const {
    if (pixel_size <= 0) throw PreconditionError("pixel_size must be > 0");
    if (width < 1 || height < 1) throw PreconditionError("grid must be at least 1x1");
}

// ---- bands ------------------------------------------------------------------

namespace {
const BandInfo kBands[] = {
    {"B02", "reflectance", 0.0, 1.0, false},
    {"B03", "reflectance", 0.0, 1.0, false},
    {"B04", "reflectance", 0.0, 1.0, false},
    {"B08", "reflectance", 0.0, 1.0, false},
    {"NDVI", "index", -1.0, 1.0, false},
    {"SIGMA0_VV", "dB", -40.0, 10.0, false},
    {"SIGMA0_VH", "dB", -40.0, 10.0, false},
    {"COHERENCE_VV", "coherence", 0.0, 1.0, false},
    {"SCL", "class", 0.0, 5.0, true},
};
}

const BandInfo& band_info(BandId b) { return kBands[static_cast<int>(b)]; }
const char* band_name(BandId b) { return band_info(b).name; }

BandId band_from_string(const std::string& s) {
    for (int i = 0; i < static_cast<int>(std::size(kBands)); ++i) {
        if (s == kBands[i].name) return static_cast<BandId>(i);
    }
    throw UsageError("unknown band '" + s + "'");
}

// ---- raster -------------------------------------------------------------------

Raster::Raster(GridSpec g, float fill, float nd) : grid(std::move(g)), nodata(nd) {
    grid.validate();
    values.assign(std::size_t(grid.width) * grid.height, fill);
}

// ---- cube ---------------------------------------------------------------------

CubeArray::CubeArray(GridSpec grid, std::vector<int64_t> times, std::vector<BandId> bands)
    : grid_(std::move(grid)), times_(std::move(times)), bands_(std::move(bands)) {
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (times_[i] <= times_[i - 1])
            throw PreconditionError("cube times must be strictly increasing");
    }
    for (std::size_t i = 0; i < bands_.size(); ++i) {
        for (std::size_t j = i + 1; j < bands_.size(); ++j) {
            if (bands_[i] == bands_[j]) throw PreconditionError("cube bands must be unique");
        }
    }
    std::size_t n = times_.size() * bands_.size() *
                    std::size_t(grid_.width) * grid_.height;
    values_.assign(n, kDefaultNodata);
    valid_.assign(n, 0);
}

int CubeArray::time_index(int64_t day) const {
    auto it = std::lower_bound(times_.begin(), times_.end(), day);
    if (it == times_.end() || *it != day) return -1;
    return static_cast<int>(it - times_.begin());
}

int CubeArray::band_index(BandId b) const {
    for (std::size_t i = 0; i < bands_.size(); ++i)
        if (bands_[i] == b) return static_cast<int>(i);
    return -1;
}

std::size_t CubeArray::count_valid() const {
    std::size_t n = 0;
    for (uint8_t v : valid_) n += v;
    return n;
}

// ---- resampling ------------------------------------------------------------------

ResampleMethod resample_method_from_string(const std::string& s) {
    if (s == "nearest") return ResampleMethod::Nearest;
    if (s == "bilinear") return ResampleMethod::Bilinear;
    throw UsageError("unknown resampling method '" + s + "'");
}

Raster resample_to_grid(const Raster& src, const GridSpec& target,
                        ResampleMethod method, bool categorical) {
    if (src.grid.crs_id != target.crs_id)
        throw PreconditionError("resample: CRS mismatch ('" + src.grid.crs_id +
                                "' vs '" + target.crs_id + "')");
    if (method == ResampleMethod::Bilinear && categorical)
        throw PreconditionError("resample: bilinear not allowed for categorical bands");
    target.validate();

    if (src.grid == target) return src;

    Raster out(target, src.nodata, src.nodata);
    const int sw = src.grid.width, sh = src.grid.height;

    for (int r = 0; r < target.height; ++r) {
        const double y = target.center_y(r);
        const double fr = src.grid.row_coord(y);
        for (int c = 0; c < target.width; ++c) {
            const double x = target.center_x(c);
            const double fc = src.grid.col_coord(x);
            if (method == ResampleMethod::Nearest) {
                int sr = static_cast<int>(std::lround(fr));
                int sc = static_cast<int>(std::lround(fc));
                if (sr < 0 || sr >= sh || sc < 0 || sc >= sw) continue;
                out.at(r, c) = src.at(sr, sc);
            } else {
                // Sample must fall inside the source extent.
                if (fr < -0.5 || fr > sh - 0.5 || fc < -0.5 || fc > sw - 0.5) continue;
                int r0 = static_cast<int>(std::floor(fr));
                int c0 = static_cast<int>(std::floor(fc));
                double wr = fr - r0, wc = fc - c0;
                double wsum = 0, acc = 0;
                bool any = false;
                const int rows[2] = {r0, r0 + 1};
                const int cols[2] = {c0, c0 + 1};
                const double wrow[2] = {1.0 - wr, wr};
                const double wcol[2] = {1.0 - wc, wc};
                for (int i = 0; i < 2; ++i) {
                    if (wrow[i] == 0.0 || rows[i] < 0 || rows[i] >= sh) continue;
                    for (int j = 0; j < 2; ++j) {
                        if (wcol[j] == 0.0 || cols[j] < 0 || cols[j] >= sw) continue;
                        float v = src.at(rows[i], cols[j]);
                        if (v == src.nodata) continue;
                        double w = wrow[i] * wcol[j];
                        acc += w * static_cast<double>(v);
                        wsum += w;
                        any = true;
                    }
                }
                if (any) out.at(r, c) = static_cast<float>(acc / wsum);
            }
        }
    }
    return out;
}

// ---- stacking -------------------------------------------------------------------

CubeArray stack_cube(std::vector<CubeSlice> slices, const GridSpec& target,
                     ResampleMethod method) {
    target.validate();

    std::vector<int64_t> times;
    std::vector<BandId> bands;
    for (const auto& s : slices) {
        if (std::find(times.begin(), times.end(), s.day) == times.end())
            times.push_back(s.day);
        if (std::find(bands.begin(), bands.end(), s.band) == bands.end())
            bands.push_back(s.band);
    }
    std::sort(times.begin(), times.end());
    std::sort(bands.begin(), bands.end());

    CubeArray cube(target, times, bands);
    std::map<std::pair<int64_t, BandId>, std::size_t> seen;  // -> slice index

    for (std::size_t si = 0; si < slices.size(); ++si) {
        auto& s = slices[si];
        auto key = std::make_pair(s.day, s.band);
        auto found = seen.find(key);
        if (found != seen.end()) {
            const Raster& prev = slices[found->second].raster;
            const Raster& cur = s.raster;
            if (prev.grid != cur.grid || prev.values != cur.values)
                throw PreconditionError("stack_cube: conflicting data for duplicate (" +
                                        format_date(s.day) + ", " + band_name(s.band) + ")");
            continue;  // identical duplicate
        }
        seen.emplace(key, si);

        Raster on_grid = (s.raster.grid == target)
                             ? std::move(s.raster)
                             : resample_to_grid(s.raster, target,
                                                band_categorical(s.band)
                                                    ? ResampleMethod::Nearest
                                                    : method,
                                                band_categorical(s.band));
        int t = cube.time_index(s.day);
        int b = cube.band_index(s.band);
        float* vals = cube.slice_values(t, b);
        uint8_t* ok = cube.slice_valid(t, b);
        const std::size_t n = on_grid.size();
        for (std::size_t i = 0; i < n; ++i) {
            float v = on_grid.values[i];
            if (v != on_grid.nodata) {
                vals[i] = v;
                ok[i] = 1;
            }
        }
    }
    return cube;
}

// ---- selection --------------------------------------------------------------------

CubeArray select(const CubeArray& cube,
                 std::optional<std::pair<int64_t, int64_t>> time_range,
                 std::optional<std::vector<BandId>> bands,
                 std::optional<BBox> bbox) {
    PixelBox w{0, 0, cube.height(), cube.width()};
    if (bbox) w = cube.grid().window_for(*bbox);
    return select_window(cube, time_range, bands, w);
}

CubeArray select_window(const CubeArray& cube,
                        std::optional<std::pair<int64_t, int64_t>> time_range,
                        std::optional<std::vector<BandId>> bands,
                        const PixelBox& w) {
    std::vector<int> tidx;
    for (int t = 0; t < cube.n_times(); ++t) {
        int64_t day = cube.times()[t];
        if (time_range && (day < time_range->first || day >= time_range->second)) continue;
        tidx.push_back(t);
    }
    std::vector<int> bidx;
    if (bands) {
        for (BandId b : *bands) {
            int i = cube.band_index(b);
            if (i >= 0) bidx.push_back(i);
        }
    } else {
        for (int i = 0; i < cube.n_bands(); ++i) bidx.push_back(i);
    }

    std::vector<int64_t> times;
    for (int t : tidx) times.push_back(cube.times()[t]);
    std::vector<BandId> sel_bands;
    for (int b : bidx) sel_bands.push_back(cube.bands()[b]);

    if (w.empty() || times.empty() || sel_bands.empty()) return CubeArray();

    CubeArray out(cube.grid().sub_grid(w), times, sel_bands);
    for (std::size_t ti = 0; ti < tidx.size(); ++ti) {
        for (std::size_t bi = 0; bi < bidx.size(); ++bi) {
            const float* sv = cube.slice_values(tidx[ti], bidx[bi]);
            const uint8_t* sk = cube.slice_valid(tidx[ti], bidx[bi]);
            float* dv = out.slice_values(int(ti), int(bi));
            uint8_t* dk = out.slice_valid(int(ti), int(bi));
            for (int r = 0; r < w.nrows; ++r) {
                const std::size_t soff = std::size_t(w.row + r) * cube.width() + w.col;
                const std::size_t doff = std::size_t(r) * w.ncols;
                std::memcpy(dv + doff, sv + soff, sizeof(float) * w.ncols);
                std::memcpy(dk + doff, sk + soff, w.ncols);
            }
        }
    }
    return out;
}

}  // namespace adc
