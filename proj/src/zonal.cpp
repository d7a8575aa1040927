#include "adc/zonal.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "adc/errors.hpp"
#include "adc/geometry.hpp"
#include "adc/masking.hpp"
#include "adc/synthetic.hpp"
#include "adc/util.hpp"

namespace fs = std::filesystem;

namespace adc {

const char* statistic_name(Statistic s) {
    switch (s) {
        case Statistic::Mean: return "mean";
        case Statistic::Median: return "median";
        case Statistic::Min: return "min";
        case Statistic::Max: return "max";
        case Statistic::Std: return "std";
        case Statistic::Count: return "count";
        case Statistic::ValidFraction: return "valid_fraction";
    }
    return "?";
}

Statistic statistic_from_string(const std::string& s) {
    for (Statistic v : {Statistic::Mean, Statistic::Median, Statistic::Min,
                        Statistic::Max, Statistic::Std, Statistic::Count,
                        Statistic::ValidFraction})
        if (s == statistic_name(v)) return v;
    throw UsageError("unknown statistic '" + s +
                     "' (mean|median|min|max|std|count|valid_fraction)");
}

void StatRequest::validate() const {
    if (bands.empty()) throw UsageError("request has no bands");
    std::set<BandId> uniq(bands.begin(), bands.end());
    if (uniq.size() != bands.size()) throw UsageError("duplicate band in request");
    if (uniq.count(BandId::SCL))
        throw UsageError("SCL is a mask band, not a statistics target");
    if (step_days < 0) throw UsageError("step length must be >= 0 days");
    if (buffer_inward_m < 0) throw UsageError("inward buffer must be >= 0");
    if (cloud_buffer_m < 0) throw UsageError("cloud buffer must be >= 0");
    if (max_cloud_cover_fraction < 0 || max_cloud_cover_fraction > 1)
        throw UsageError("max cloud cover fraction must be in [0, 1]");
}

int64_t request_period_start(const StatRequest& req, int64_t day,
                             int64_t range_start) {
    if (req.step_days <= 0) return period_start(req.period, day, range_start);
    const int64_t step = req.step_days;
    int64_t k = (day - range_start) / step;
    if ((day - range_start) % step < 0) --k;
    return range_start + k * step;
}

void ZonalStatsTable::sort_canonical() {
    std::sort(records.begin(), records.end(),
              [](const StatRecord& a, const StatRecord& b) {
                  if (a.parcel_id != b.parcel_id) return a.parcel_id < b.parcel_id;
                  if (a.period_start != b.period_start)
                      return a.period_start < b.period_start;
                  if (a.band != b.band) return int(a.band) < int(b.band);
                  return int(a.statistic) < int(b.statistic);
              });
}

std::string ZonalStatsTable::to_csv() const {
    std::string out = "parcel_id,period_start,band,statistic,value,n_valid_pixels\n";
    for (const StatRecord& r : records) {
        out += std::to_string(r.parcel_id);
        out += ',';
        out += format_date(r.period_start);
        out += ',';
        out += band_name(r.band);
        out += ',';
        out += statistic_name(r.statistic);
        out += ',';
        out += format_double(r.value);
        out += ',';
        out += std::to_string(r.n_valid_pixels);
        out += '\n';
    }
    return out;
}

namespace {

struct Kahan {
    double s = 0, c = 0;
    void add(double x) {
        const double y = x - c;
        const double t = s + y;
        c = (t - s) - y;
        s = t;
    }
};

// Jain & Chlamtac streaming quantile estimator, fixed at the median. State
// depends only on the insertion sequence, so grouped and serial agree.
struct P2Median {
    int count = 0;
    double q[5] = {0, 0, 0, 0, 0};
    double n[5] = {1, 2, 3, 4, 5};
    double np[5] = {1, 1, 1, 1, 1};

    static constexpr double kDn[5] = {0, 0.25, 0.5, 0.75, 1};

    void add(double x) {
        if (count < 5) {
            q[count++] = x;
            if (count == 5) {
                std::sort(q, q + 5);
                for (int i = 0; i < 5; ++i) np[i] = 1 + 4 * kDn[i];
            }
            return;
        }
        int k;
        if (x < q[0]) {
            q[0] = x;
            k = 0;
        } else if (x >= q[4]) {
            q[4] = x;
            k = 3;
        } else {
            k = 0;
            while (k < 3 && x >= q[k + 1]) ++k;
        }
        for (int i = k + 1; i < 5; ++i) n[i] += 1;
        for (int i = 0; i < 5; ++i) np[i] += kDn[i];
        ++count;

        for (int i = 1; i <= 3; ++i) {
            const double d = np[i] - n[i];
            if ((d >= 1 && n[i + 1] - n[i] > 1) || (d <= -1 && n[i - 1] - n[i] < -1)) {
                const double sgn = d >= 1 ? 1 : -1;
                const double qp =
                    q[i] + sgn / (n[i + 1] - n[i - 1]) *
                               ((n[i] - n[i - 1] + sgn) * (q[i + 1] - q[i]) /
                                    (n[i + 1] - n[i]) +
                                (n[i + 1] - n[i] - sgn) * (q[i] - q[i - 1]) /
                                    (n[i] - n[i - 1]));
                if (q[i - 1] < qp && qp < q[i + 1]) {
                    q[i] = qp;
                } else {
                    const int j = int(sgn);
                    q[i] = q[i] + sgn * (q[i + j] - q[i]) / (n[i + j] - n[i]);
                }
                n[i] += sgn;
            }
        }
    }

    double value() const {
        if (count == 0) return 0;
        if (count < 5) {
            double tmp[5];
            std::copy(q, q + count, tmp);
            std::sort(tmp, tmp + count);
            return count % 2 ? tmp[count / 2]
                             : 0.5 * (tmp[count / 2 - 1] + tmp[count / 2]);
        }
        return q[2];
    }
};

struct CellAcc {
    Kahan sum, sum2;
    double mn = std::numeric_limits<double>::infinity();
    double mx = -std::numeric_limits<double>::infinity();
    int64_t n = 0;
    std::vector<float> gather;
    P2Median p2;

    void add(float v, bool want_gather, bool want_p2) {
        const double x = double(v);
        sum.add(x);
        sum2.add(x * x);
        mn = std::min(mn, x);
        mx = std::max(mx, x);
        ++n;
        if (want_gather) gather.push_back(v);
        if (want_p2) p2.add(x);
    }
};

// Included timesteps with their period bucket, shared by every parcel.
struct Layout {
    std::vector<int> ts;
    std::vector<int> t_period;
    std::vector<int64_t> period_starts;
    std::vector<int64_t> scenes_in_period;
    std::map<int64_t, int> day_period;  // included day -> period index
};

std::vector<double> scene_cloud_fractions(const CubeArray& cube) {
    const int sb = cube.band_index(BandId::SCL);
    std::vector<double> out(std::size_t(cube.n_times()), -1.0);
    if (sb < 0) return out;
    const std::size_t n = std::size_t(cube.height()) * cube.width();
    for (int t = 0; t < cube.n_times(); ++t) {
        PixelMask m = class_mask(scl_slice(cube, t), {kSclCloud, kSclShadow});
        out[std::size_t(t)] = n ? double(m.count()) / double(n) : 0.0;
    }
    return out;
}

Layout layout_from_days(const std::vector<int64_t>& days,
                        const StatRequest& req, int64_t range_start) {
    Layout lay;
    if (days.empty())
        throw DataError("empty period set: no scene passed the filters");
    std::map<int64_t, int> index;
    for (int64_t d : days) index.emplace(request_period_start(req, d, range_start), 0);
    int k = 0;
    for (auto& [day, idx] : index) {
        idx = k++;
        lay.period_starts.push_back(day);
    }
    lay.scenes_in_period.assign(lay.period_starts.size(), 0);
    for (int64_t d : days) {
        const int p = index.at(request_period_start(req, d, range_start));
        lay.day_period.emplace(d, p);
        lay.scenes_in_period[std::size_t(p)]++;
    }
    return lay;
}

Layout build_layout(const CubeArray& cube, const StatRequest& req,
                    int64_t range_start) {
    const std::vector<double> fraction = scene_cloud_fractions(cube);
    std::vector<int> ts;
    std::vector<int64_t> days;
    for (int t = 0; t < cube.n_times(); ++t) {
        if (fraction[std::size_t(t)] >= 0 && req.max_cloud_cover_fraction < 1 &&
            fraction[std::size_t(t)] > req.max_cloud_cover_fraction)
            continue;
        ts.push_back(t);
        days.push_back(cube.times()[std::size_t(t)]);
    }
    Layout lay = layout_from_days(days, req, range_start);
    lay.ts = std::move(ts);
    for (int t : lay.ts)
        lay.t_period.push_back(lay.day_period.at(cube.times()[std::size_t(t)]));
    return lay;
}

void accumulate(const CubeArray& cube, const std::vector<int>& cube_band,
                const Layout& lay, const std::vector<uint32_t>& px,
                bool want_gather, bool want_p2, std::vector<CellAcc>& acc) {
    const std::size_t nb = cube_band.size();
    for (std::size_t it = 0; it < lay.ts.size(); ++it) {
        const int t = lay.ts[it];
        const std::size_t base = std::size_t(lay.t_period[it]) * nb;
        for (std::size_t k = 0; k < nb; ++k) {
            const float* v = cube.slice_values(t, cube_band[k]);
            const uint8_t* ok = cube.slice_valid(t, cube_band[k]);
            CellAcc& a = acc[base + k];
            for (uint32_t i : px)
                if (ok[i]) a.add(v[i], want_gather, want_p2);
        }
    }
}

double finalize_value(CellAcc& a, Statistic s, int64_t n_px, int64_t scenes,
                      bool approx) {
    switch (s) {
        case Statistic::Mean:
            return a.sum.s / double(a.n);
        case Statistic::Std: {
            const double m = a.sum.s / double(a.n);
            return std::sqrt(std::max(0.0, a.sum2.s / double(a.n) - m * m));
        }
        case Statistic::Min:
            return a.mn;
        case Statistic::Max:
            return a.mx;
        case Statistic::Count:
            return double(a.n);
        case Statistic::ValidFraction:
            return double(a.n) / (double(n_px) * double(scenes));
        case Statistic::Median: {
            if (approx) return a.p2.value();
            std::sort(a.gather.begin(), a.gather.end());
            const std::size_t m = a.gather.size();
            return m % 2 ? double(a.gather[m / 2])
                         : 0.5 * (double(a.gather[m / 2 - 1]) +
                                  double(a.gather[m / 2]));
        }
    }
    return 0;
}

void emit_parcel(int64_t id, std::vector<CellAcc>& acc, int64_t n_px,
                 const Layout& lay, const StatRequest& req,
                 std::vector<StatRecord>& out) {
    const std::size_t nb = req.bands.size();
    for (std::size_t p = 0; p < lay.period_starts.size(); ++p) {
        for (std::size_t k = 0; k < nb; ++k) {
            CellAcc& a = acc[p * nb + k];
            if (a.n == 0) continue;
            StatRecord r;
            r.parcel_id = id;
            r.period_start = lay.period_starts[p];
            r.band = req.bands[k];
            r.statistic = req.statistic;
            r.n_valid_pixels = a.n;
            r.value = finalize_value(a, req.statistic, n_px,
                                     lay.scenes_in_period[p],
                                     req.approximate_median);
            out.push_back(r);
        }
    }
}

std::vector<int> resolve_bands(const CubeArray& cube, const StatRequest& req) {
    std::vector<int> cube_band;
    for (BandId b : req.bands) {
        const int idx = cube.band_index(b);
        if (idx < 0)
            throw DataError(std::string("band ") + band_name(b) +
                            " is not in the cube");
        cube_band.push_back(idx);
    }
    return cube_band;
}

std::string cube_identity(const CubeArray& cube) {
    uint64_t h = fnv1a64(cube.times().data(),
                         cube.times().size() * sizeof(int64_t));
    for (BandId b : cube.bands()) {
        const std::string n = band_name(b);
        h = fnv1a64_append(h, n.data(), n.size());
    }
    const int dims[2] = {cube.grid().width, cube.grid().height};
    h = fnv1a64_append(h, dims, sizeof(dims));
    return "cube:" + checksum_hex(h);
}

std::string labels_identity(const LabelRaster& labels) {
    return "labels:" + checksum_hex(fnv1a64(
                           labels.labels.data(),
                           labels.labels.size() * sizeof(int32_t)));
}

int erosion_pad(double radius_m, double pixel_size) {
    return int(std::floor(radius_m / pixel_size)) + 1;
}

}  // namespace

ZonalStatsTable zonal_stats_grouped(const CubeArray& cube0,
                                    const LabelRaster& labels,
                                    const StatRequest& req,
                                    int64_t range_start, int threads) {
    req.validate();
    if (cube0.empty()) throw DataError("empty period set: cube has no data");
    if (!(labels.grid == cube0.grid()))
        throw PreconditionError("label raster grid differs from the cube grid");
    if (range_start == INT64_MIN) range_start = cube0.times().front();

    const std::vector<int> cube_band = resolve_bands(cube0, req);
    const Layout lay = build_layout(cube0, req, range_start);

    const CubeArray* cube = &cube0;
    CubeArray masked;
    if (cube0.band_index(BandId::SCL) >= 0) {
        masked = apply_scene_masks(cube0, req.cloud_buffer_m);
        cube = &masked;
    }

    const LabelRaster* eff = &labels;
    LabelRaster eroded;
    if (req.buffer_inward_m > 0) {
        eroded = erode_labels(labels, req.buffer_inward_m, threads);
        eff = &eroded;
    }

    std::map<int32_t, std::vector<uint32_t>> lists;
    for (std::size_t i = 0; i < eff->labels.size(); ++i) {
        const int32_t id = eff->labels[i];
        if (id != kNoParcel) lists[id].push_back(uint32_t(i));
    }

    std::vector<int32_t> ids;
    std::vector<const std::vector<uint32_t>*> px;
    for (const auto& [id, list] : lists) {
        ids.push_back(id);
        px.push_back(&list);
    }

    const bool want_gather =
        req.statistic == Statistic::Median && !req.approximate_median;
    const bool want_p2 =
        req.statistic == Statistic::Median && req.approximate_median;

    std::vector<std::vector<StatRecord>> slots(ids.size());
    parallel_for(
        ids.size(),
        [&](std::size_t i) {
            std::vector<CellAcc> acc(lay.period_starts.size() *
                                     req.bands.size());
            accumulate(*cube, cube_band, lay, *px[i], want_gather, want_p2, acc);
            emit_parcel(ids[i], acc, int64_t(px[i]->size()), lay, req, slots[i]);
        },
        threads);

    ZonalStatsTable table;
    table.request = req;
    table.cube_id = cube_identity(cube0);
    table.labels_id = labels_identity(labels);
    table.approximate = want_p2;
    for (auto& s : slots)
        table.records.insert(table.records.end(), s.begin(), s.end());
    table.sort_canonical();
    return table;
}

namespace {

// Window around a parcel wide enough that erosion and cloud dilation inside
// it agree exactly with their full-grid counterparts on the parcel's pixels.
PixelBox parcel_window(const GridSpec& grid, const Parcel& p,
                       const StatRequest& req, bool scl_present) {
    PixelBox w = grid.window_for(geometry_bbox(p.geometry));
    if (w.empty()) return w;
    int pad = 0;
    if (req.buffer_inward_m > 0) pad += erosion_pad(req.buffer_inward_m, grid.pixel_size);
    if (scl_present) pad += erosion_pad(req.cloud_buffer_m, grid.pixel_size);
    const int r0 = std::max(0, w.row - pad);
    const int c0 = std::max(0, w.col - pad);
    const int r1 = std::min(grid.height, w.row + w.nrows + pad);
    const int c1 = std::min(grid.width, w.col + w.ncols + pad);
    return {r0, c0, r1 - r0, c1 - c0};
}

// Solo-rasterized, eroded pixel set of one parcel, as offsets into the
// window. Matches what the full-grid label pipeline assigns the parcel as
// long as no other parcel overlaps it.
std::vector<uint32_t> solo_pixels(const GridSpec& wgrid, const Parcel& p,
                                  double buffer_inward_m) {
    RasterizeResult rr = rasterize_parcels({p}, wgrid);
    const std::size_t n = rr.labels.labels.size();
    std::vector<uint32_t> px;
    if (buffer_inward_m > 0) {
        std::vector<uint8_t> seeds(n);
        for (std::size_t i = 0; i < n; ++i)
            seeds[i] = rr.labels.labels[i] == p.id ? 0 : 1;
        const std::vector<double> d2 =
            distance_transform_sq(seeds.data(), wgrid.width, wgrid.height);
        const double r_px = buffer_inward_m / wgrid.pixel_size;
        const double r2 = r_px * r_px;
        for (std::size_t i = 0; i < n; ++i)
            if (rr.labels.labels[i] == p.id && d2[i] > r2)
                px.push_back(uint32_t(i));
    } else {
        for (std::size_t i = 0; i < n; ++i)
            if (rr.labels.labels[i] == p.id) px.push_back(uint32_t(i));
    }
    return px;
}

// Per-timestep window masking mirroring apply_scene_masks on the crop.
std::vector<uint8_t> window_scene_mask(const CubeArray& wcube, int t, int scl_b,
                                       double cloud_buffer_m) {
    const GridSpec& g = wcube.grid();
    const std::size_t n = std::size_t(g.width) * g.height;
    SceneClassMask scl(g);
    const float* v = wcube.slice_values(t, scl_b);
    const uint8_t* ok = wcube.slice_valid(t, scl_b);
    for (std::size_t i = 0; i < n; ++i)
        scl.codes[i] = ok[i] ? int16_t(std::lround(v[i])) : int16_t(kSclNodata);
    PixelMask m = class_mask(scl, {kSclCloud, kSclShadow});
    if (m.count() > 0 && cloud_buffer_m > 0) m = dilate_mask(m, cloud_buffer_m);
    return std::move(m.bits);
}

void accumulate_window(const CubeArray& wcube, const std::vector<int>& cube_band,
                       int scl_b, const Layout& lay,
                       const std::vector<uint32_t>& px, const StatRequest& req,
                       bool want_gather, bool want_p2, std::vector<CellAcc>& acc) {
    const std::size_t nb = cube_band.size();
    for (int t = 0; t < wcube.n_times(); ++t) {
        const auto pit = lay.day_period.find(wcube.times()[std::size_t(t)]);
        if (pit == lay.day_period.end()) continue;
        std::vector<uint8_t> wm;
        if (scl_b >= 0) wm = window_scene_mask(wcube, t, scl_b, req.cloud_buffer_m);
        const std::size_t base = std::size_t(pit->second) * nb;
        for (std::size_t k = 0; k < nb; ++k) {
            const float* v = wcube.slice_values(t, cube_band[k]);
            const uint8_t* ok = wcube.slice_valid(t, cube_band[k]);
            CellAcc& a = acc[base + k];
            if (wm.empty()) {
                for (uint32_t i : px)
                    if (ok[i]) a.add(v[i], want_gather, want_p2);
            } else {
                for (uint32_t i : px)
                    if (ok[i] && !wm[i]) a.add(v[i], want_gather, want_p2);
            }
        }
    }
}

}  // namespace

ZonalStatsTable zonal_stats_serial(const CubeArray& cube,
                                   const std::vector<Parcel>& parcels,
                                   const StatRequest& req, int64_t range_start) {
    req.validate();
    if (cube.empty()) throw DataError("empty period set: cube has no data");
    if (range_start == INT64_MIN) range_start = cube.times().front();

    const std::vector<int> full_band = resolve_bands(cube, req);
    const Layout lay = build_layout(cube, req, range_start);
    const int scl_full = cube.band_index(BandId::SCL);

    const bool want_gather =
        req.statistic == Statistic::Median && !req.approximate_median;
    const bool want_p2 =
        req.statistic == Statistic::Median && req.approximate_median;

    ZonalStatsTable table;
    table.request = req;
    table.cube_id = cube_identity(cube);
    table.labels_id = "parcels:" + std::to_string(parcels.size());
    table.approximate = want_p2;

    std::vector<BandId> crop_bands = req.bands;
    if (scl_full >= 0) crop_bands.push_back(BandId::SCL);

    for (const Parcel& p : parcels) {
        const PixelBox w = parcel_window(cube.grid(), p, req, scl_full >= 0);
        if (w.empty()) continue;
        const CubeArray wcube = select_window(cube, {}, crop_bands, w);
        if (wcube.empty()) continue;
        const std::vector<uint32_t> px =
            solo_pixels(wcube.grid(), p, req.buffer_inward_m);
        if (px.empty()) continue;

        const std::vector<int> cube_band = resolve_bands(wcube, req);
        const int scl_b = wcube.band_index(BandId::SCL);
        std::vector<CellAcc> acc(lay.period_starts.size() * req.bands.size());
        accumulate_window(wcube, cube_band, scl_b, lay, px, req, want_gather,
                          want_p2, acc);
        emit_parcel(p.id, acc, int64_t(px.size()), lay, req, table.records);
    }
    table.sort_canonical();
    return table;
}

ZonalStatsTable zonal_stats_grouped(CubeStore& store, const LabelRaster& labels,
                                    const StatRequest& req, int64_t day0,
                                    int64_t day1, int threads, LoadStats* io) {
    req.validate();
    const bool want_scl = (req.max_cloud_cover_fraction < 1 ||
                           req.cloud_buffer_m > 0) &&
                          !store.scene_days(day0, day1, {BandId::SCL}).empty();

    std::vector<int64_t> days = store.scene_days(day0, day1, req.bands);
    if (req.max_cloud_cover_fraction < 1) {
        std::erase_if(days, [&](int64_t d) {
            const double f = store.cloud_fraction(d);
            return f >= 0 && f > req.max_cloud_cover_fraction;
        });
    }
    if (days.empty())
        throw DataError("empty period set: no scene passed the filters");

    std::vector<BandId> bands = req.bands;
    if (want_scl) bands.push_back(BandId::SCL);
    const CubeArray cube = store.load_days(
        {0, 0, store.grid().height, store.grid().width}, days, bands, io);
    return zonal_stats_grouped(cube, labels, req, day0, threads);
}

ZonalStatsTable zonal_stats_serial(CubeStore& store,
                                   const std::vector<Parcel>& parcels,
                                   const StatRequest& req, int64_t day0,
                                   int64_t day1, LoadStats* io) {
    req.validate();
    const bool want_scl = (req.max_cloud_cover_fraction < 1 ||
                           req.cloud_buffer_m > 0) &&
                          !store.scene_days(day0, day1, {BandId::SCL}).empty();

    std::vector<int64_t> days = store.scene_days(day0, day1, req.bands);
    if (req.max_cloud_cover_fraction < 1) {
        std::erase_if(days, [&](int64_t d) {
            const double f = store.cloud_fraction(d);
            return f >= 0 && f > req.max_cloud_cover_fraction;
        });
    }
    if (days.empty())
        throw DataError("empty period set: no scene passed the filters");

    std::vector<BandId> bands = req.bands;
    if (want_scl) bands.push_back(BandId::SCL);

    const bool want_gather =
        req.statistic == Statistic::Median && !req.approximate_median;
    const bool want_p2 =
        req.statistic == Statistic::Median && req.approximate_median;

    ZonalStatsTable table;
    table.request = req;
    table.cube_id = "store:" + checksum_hex(fnv1a64(days.data(),
                                                    days.size() * sizeof(int64_t)));
    table.labels_id = "parcels:" + std::to_string(parcels.size());
    table.approximate = want_p2;

    const Layout lay = layout_from_days(days, req, day0);

    for (const Parcel& p : parcels) {
        const PixelBox w = parcel_window(store.grid(), p, req, want_scl);
        if (w.empty()) continue;
        const CubeArray wcube = store.load_days(w, days, bands, io);
        if (wcube.empty()) continue;
        const std::vector<uint32_t> px =
            solo_pixels(wcube.grid(), p, req.buffer_inward_m);
        if (px.empty()) continue;

        const std::vector<int> cube_band = resolve_bands(wcube, req);
        const int scl_b = wcube.band_index(BandId::SCL);
        std::vector<CellAcc> acc(lay.period_starts.size() * req.bands.size());
        accumulate_window(wcube, cube_band, scl_b, lay, px, req, want_gather,
                          want_p2, acc);
        emit_parcel(p.id, acc, int64_t(px.size()), lay, req, table.records);
    }
    table.sort_canonical();
    return table;
}

std::string BenchReport::to_csv() const {
    std::string out = "n_parcels,method,wall_time_s\n";
    for (const BenchRow& r : rows) {
        out += std::to_string(r.n_parcels);
        out += ',';
        out += r.method;
        out += ',';
        out += r.skipped ? "budget-exceeded" : format_double(r.wall_time_s);
        out += '\n';
    }
    return out;
}

std::string BenchReport::to_table() const {
    std::map<int64_t, std::pair<std::string, std::string>> by_size;
    for (const BenchRow& r : rows) {
        std::string cell;
        if (r.skipped) {
            cell = "budget-exceeded";
        } else {
            char buf[32];
            std::snprintf(buf, sizeof(buf), "%.2f s", r.wall_time_s);
            cell = buf;
        }
        if (r.method == "grouped")
            by_size[r.n_parcels].first = cell;
        else
            by_size[r.n_parcels].second = cell;
    }
    std::ostringstream os;
    os << "  parcels      grouped           serial\n";
    for (const auto& [n, cells] : by_size) {
        os.width(9);
        os << n;
        os << "  ";
        os.width(16);
        os << std::left << (cells.first.empty() ? "-" : cells.first)
           << std::right << " ";
        os << (cells.second.empty() ? "-" : cells.second) << "\n";
    }
    if (!environment.empty()) os << environment << "\n";
    return os.str();
}

BenchReport run_benchmark(const std::vector<int64_t>& sizes,
                          const GridSpec& grid, const std::string& work_dir,
                          int months, int n_bands, double serial_budget_s,
                          int threads) {
    grid.validate();
    if (sizes.empty()) throw UsageError("no benchmark sizes given");
    if (months < 1) throw UsageError("months must be >= 1");
    if (n_bands < 1 || n_bands > 2)
        throw UsageError("benchmark supports 1 or 2 bands");

    std::vector<int64_t> order = sizes;
    std::sort(order.begin(), order.end());

    StatRequest req;
    req.statistic = Statistic::Mean;
    req.period = Period::Month;
    req.bands = n_bands == 1 ? std::vector<BandId>{BandId::B08}
                             : std::vector<BandId>{BandId::B08, BandId::B04};
    req.max_cloud_cover_fraction = 1;

    BenchReport rep;
    {
        std::ostringstream env;
        env << "grid " << grid.width << "x" << grid.height << " at "
            << grid.pixel_size << " m, " << months << " monthly scenes, "
            << n_bands << " band(s), deflate tile storage, "
            << (threads > 0 ? threads : max_threads()) << " worker(s)";
        rep.environment = env.str();
    }

    using clock = std::chrono::steady_clock;
    double prev_serial = -1;
    int64_t prev_n = 0;

    for (int64_t n : order) {
        const fs::path dir =
            fs::path(work_dir) / ("bench_" + std::to_string(n));
        fs::remove_all(dir);

        SyntheticConfig cfg;
        cfg.grid = grid;
        cfg.n_parcels = int(n);
        cfg.start_day = parse_date("2019-01-01");
        cfg.revisit_days = 31;
        cfg.end_day = cfg.start_day + int64_t(31) * (months - 1);
        cfg.seed = 40000 + uint64_t(n);
        Workspace ws = generate_synthetic_dataset(cfg, dir.string());

        const LabelRaster labels = ws.labels();
        const std::vector<Parcel> parcels = ws.parcels();
        const int64_t t0 = cfg.start_day, t1 = cfg.end_day + 1;

        {
            CubeStore store(ws);
            const auto a = clock::now();
            ZonalStatsTable t = zonal_stats_grouped(store, labels, req, t0, t1,
                                                    threads);
            const double sec = std::chrono::duration<double>(clock::now() - a)
                                   .count();
            rep.rows.push_back({n, "grouped", sec, false});
            if (t.records.empty())
                throw DataError("benchmark produced no grouped records");
        }

        const double projected =
            prev_serial < 0 ? 0 : prev_serial * double(n) / double(prev_n);
        if (serial_budget_s > 0 && projected > serial_budget_s) {
            rep.rows.push_back({n, "serial", 0, true});
        } else {
            CubeStore store(ws);
            const auto a = clock::now();
            ZonalStatsTable t = zonal_stats_serial(store, parcels, req, t0, t1);
            const double sec = std::chrono::duration<double>(clock::now() - a)
                                   .count();
            rep.rows.push_back({n, "serial", sec, false});
            if (t.records.empty())
                throw DataError("benchmark produced no serial records");
            prev_serial = sec;
            prev_n = n;
        }

        fs::remove_all(dir);
    }
    return rep;
}

}  // namespace adc
