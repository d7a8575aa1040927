#include "adc/animate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>

#include <json.hpp>

#include "adc/dates.hpp"
#include "adc/errors.hpp"
#include "adc/masking.hpp"
#include "adc/util.hpp"

namespace adc {

using nlohmann::json;

void AnimationSpec::validate() const {
    if (parcel_id <= 0 && !box)
        throw UsageError("animation needs a parcel id or a bounding box");
    if (parcel_id > 0 && box)
        throw UsageError("animation target is a parcel or a box, not both");
    if (band == BandId::SCL)
        throw UsageError("SCL is categorical; pick a measurement band");
    if (step_days < 0) throw UsageError("step length must be >= 0 days");
    if (day1 <= day0) throw UsageError("animation range is empty");
    if (cloud_buffer_m < 0) throw UsageError("cloud buffer must be >= 0");
    if (max_cloud_cover_fraction < 0 || max_cloud_cover_fraction > 1)
        throw UsageError("max cloud cover fraction must be in [0, 1]");
}

namespace {

int64_t next_period(Period unit, int64_t start) {
    switch (unit) {
        case Period::Day: return start + 1;
        case Period::Month: return month_start(start + 32);
        case Period::Season: return season_start(start + 3 * 31 + 2);
        case Period::Year: return year_start(start + 370);
        case Period::WholeRange: break;
    }
    return INT64_MAX;
}

std::vector<int64_t> enumerate_periods(const AnimationSpec& spec) {
    std::vector<int64_t> starts;
    if (spec.step_days > 0) {
        for (int64_t s = spec.day0; s < spec.day1; s += spec.step_days)
            starts.push_back(s);
        return starts;
    }
    if (spec.unit == Period::WholeRange) return {spec.day0};
    int64_t s = period_start(spec.unit, spec.day0, spec.day0);
    while (s < spec.day1) {
        starts.push_back(s);
        s = next_period(spec.unit, s);
    }
    return starts;
}

std::string period_label(const AnimationSpec& spec, int64_t start) {
    if (spec.step_days <= 0 && spec.unit == Period::Month)
        return month_label(start);
    return format_date(start);
}

LabelRaster crop_labels(const LabelRaster& labels, const PixelBox& w) {
    LabelRaster out(labels.grid.sub_grid(w));
    for (int r = 0; r < w.nrows; ++r)
        for (int c = 0; c < w.ncols; ++c)
            out.at(r, c) = labels.at(w.row + r, w.col + c);
    return out;
}

}  // namespace

std::string FrameSet::aggregate_csv() const {
    std::string out = "period_start,value,n_valid_pixels\n";
    for (const Frame& f : frames) {
        out += format_date(f.period_start);
        out += ',';
        if (f.aggregate) out += format_double(*f.aggregate);
        out += ',';
        out += std::to_string(f.n_valid_pixels);
        out += '\n';
    }
    return out;
}

FrameSet animate(CubeStore& store, const LabelRaster& labels,
                 const std::vector<Parcel>& parcels, const AnimationSpec& spec) {
    spec.validate();
    const GridSpec& grid = store.grid();

    BBox target{};
    if (spec.parcel_id > 0) {
        const Parcel* p = find_parcel(parcels, spec.parcel_id);
        if (!p) throw DataError("unknown parcel " + std::to_string(spec.parcel_id));
        target = geometry_bbox(p->geometry);
    } else {
        target = *spec.box;
    }
    const PixelBox window = grid.window_for(target);
    if (window.empty()) throw DataError("animation target is outside the grid");

    FrameSet fs;
    fs.band = spec.band;
    fs.grid = grid.sub_grid(window);

    std::vector<int64_t> days = store.scene_days(spec.day0, spec.day1, {spec.band});
    if (spec.max_cloud_cover_fraction < 1) {
        std::erase_if(days, [&](int64_t d) {
            const double f = store.cloud_fraction(d);
            return f >= 0 && f > spec.max_cloud_cover_fraction;
        });
    }
    if (days.empty()) {
        fs.reason = "no usable scene with " + std::string(band_name(spec.band)) +
                    " between " + format_date(spec.day0) + " and " +
                    format_date(spec.day1);
        return fs;
    }

    const bool have_scl = !store.scene_days(spec.day0, spec.day1, {BandId::SCL}).empty();

    int pad = 0;
    if (have_scl && spec.cloud_buffer_m > 0)
        pad = int(spec.cloud_buffer_m / grid.pixel_size) + 1;
    PixelBox loaded = window;
    if (pad > 0) {
        loaded.row = std::max(0, window.row - pad);
        loaded.col = std::max(0, window.col - pad);
        loaded.nrows = std::min(grid.height, window.row + window.nrows + pad) - loaded.row;
        loaded.ncols = std::min(grid.width, window.col + window.ncols + pad) - loaded.col;
    }

    std::vector<BandId> wants = {spec.band};
    if (have_scl) wants.push_back(BandId::SCL);
    CubeArray wcube = store.load_days(loaded, days, wants);
    if (wcube.empty()) {
        fs.reason = "no scene loaded between " + format_date(spec.day0) + " and " +
                    format_date(spec.day1);
        return fs;
    }

    std::map<int64_t, std::optional<double>> aggregate;
    std::map<int64_t, int64_t> agg_pixels;
    if (spec.parcel_id > 0) {
        StatRequest req;
        req.statistic = Statistic::Mean;
        req.period = spec.unit;
        req.step_days = spec.step_days;
        req.bands = {spec.band};
        req.cloud_buffer_m = spec.cloud_buffer_m;
        const ZonalStatsTable table = zonal_stats_grouped(
            wcube, crop_labels(labels, loaded), req, spec.day0);
        for (const StatRecord& r : table.records) {
            if (r.parcel_id != spec.parcel_id) continue;
            aggregate[r.period_start] = r.value;
            agg_pixels[r.period_start] = r.n_valid_pixels;
        }
    }

    if (have_scl) wcube = apply_scene_masks(wcube, spec.cloud_buffer_m);

    const int bi = wcube.band_index(spec.band);
    StatRequest key_req;
    key_req.period = spec.unit;
    key_req.step_days = spec.step_days;
    std::map<int64_t, std::vector<int>> period_scenes;
    for (int t = 0; t < wcube.n_times(); ++t)
        period_scenes[request_period_start(key_req, wcube.times()[std::size_t(t)],
                                           spec.day0)]
            .push_back(t);

    const int or_ = window.row - loaded.row;
    const int oc = window.col - loaded.col;
    const std::size_t n_px = std::size_t(window.nrows) * window.ncols;

    for (int64_t start : enumerate_periods(spec)) {
        Frame f;
        f.period_start = start;
        f.label = period_label(spec, start);
        f.values.assign(n_px, 0.0f);
        f.valid.assign(n_px, 0);
        const auto it = period_scenes.find(start);
        if (it != period_scenes.end()) {
            for (int r = 0; r < window.nrows; ++r) {
                for (int c = 0; c < window.ncols; ++c) {
                    const std::size_t src =
                        std::size_t(or_ + r) * loaded.ncols + (oc + c);
                    const std::size_t dst = std::size_t(r) * window.ncols + c;
                    double sum = 0;
                    int n = 0;
                    for (int t : it->second) {
                        if (!wcube.slice_valid(t, bi)[src]) continue;
                        sum += double(wcube.slice_values(t, bi)[src]);
                        ++n;
                    }
                    if (n == 0) continue;
                    f.values[dst] = float(sum / n);
                    f.valid[dst] = 1;
                }
            }
        }
        const auto ait = aggregate.find(start);
        if (ait != aggregate.end()) {
            f.aggregate = ait->second;
            f.n_valid_pixels = agg_pixels.at(start);
        }
        fs.frames.push_back(std::move(f));
    }
    return fs;
}

std::pair<double, double> display_range(BandId band) {
    switch (band) {
        case BandId::NDVI: return {0.0, 1.0};
        case BandId::COHERENCE_VV: return {0.0, 1.0};
        case BandId::SIGMA0_VV:
        case BandId::SIGMA0_VH: return {-30.0, 0.0};
        default: return {0.0, 1.0};
    }
}

std::vector<std::string> save_frames(const FrameSet& fs, const std::string& dir) {
    namespace fsys = std::filesystem;
    fsys::create_directories(dir);
    std::vector<std::string> written;

    const auto [lo, hi] = display_range(fs.band);
    const int w = fs.grid.width, h = fs.grid.height;
    for (std::size_t i = 0; i < fs.frames.size(); ++i) {
        const Frame& f = fs.frames[i];
        char name[32];
        std::snprintf(name, sizeof name, "frame_%03zu.ppm", i);
        const std::string path = dir + "/" + name;
        std::ofstream out(path, std::ios::binary | std::ios::trunc);
        if (!out) throw DataError("cannot open " + path + " for writing");
        out << "P6\n" << w << ' ' << h << "\n255\n";
        std::vector<uint8_t> rgb(std::size_t(w) * h * 3, 0);
        for (std::size_t px = 0; px < std::size_t(w) * h; ++px) {
            if (!f.valid[px]) continue;
            double x = (double(f.values[px]) - lo) / (hi - lo);
            x = std::clamp(x, 0.0, 1.0);
            rgb[px * 3 + 0] = uint8_t(std::lround(120 + x * (10 - 120)));
            rgb[px * 3 + 1] = uint8_t(std::lround(84 + x * (150 - 84)));
            rgb[px * 3 + 2] = uint8_t(std::lround(32 + x * (16 - 32)));
        }
        out.write(reinterpret_cast<const char*>(rgb.data()),
                  std::streamsize(rgb.size()));
        if (!out) throw DataError("write to " + path + " failed");
        written.push_back(path);
    }

    {
        const std::string path = dir + "/aggregate.csv";
        std::ofstream out(path, std::ios::trunc);
        out << fs.aggregate_csv();
        if (!out) throw DataError("write to " + path + " failed");
        written.push_back(path);
    }
    {
        json frames = json::array();
        for (std::size_t i = 0; i < fs.frames.size(); ++i) {
            char name[32];
            std::snprintf(name, sizeof name, "frame_%03zu.ppm", i);
            frames.push_back({{"file", name},
                              {"period_start", format_date(fs.frames[i].period_start)},
                              {"label", fs.frames[i].label}});
        }
        json j{{"band", band_name(fs.band)},
               {"width", fs.grid.width},
               {"height", fs.grid.height},
               {"frames", frames}};
        if (!fs.reason.empty()) j["reason"] = fs.reason;
        const std::string path = dir + "/frames.json";
        std::ofstream out(path, std::ios::trunc);
        out << j.dump(1) << '\n';
        if (!out) throw DataError("write to " + path + " failed");
        written.push_back(path);
    }
    return written;
}

}  // namespace adc
