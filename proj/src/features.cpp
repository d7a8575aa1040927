#include "adc/features.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include <json.hpp>

#include "adc/dates.hpp"
#include "adc/errors.hpp"
#include "adc/util.hpp"

namespace adc {

using nlohmann::json;

std::optional<double> ndvi(double nir, double red) {
    const double den = nir + red;
    if (den < 1e-12) return {};
    return std::clamp((nir - red) / den, -1.0, 1.0);
}

CubeArray ndvi(const CubeArray& cube) {
    const int bn = cube.band_index(BandId::B08);
    const int br = cube.band_index(BandId::B04);
    if (bn < 0 || br < 0) throw DataError("NDVI needs both B08 and B04 in the cube");

    CubeArray out(cube.grid(), cube.times(), {BandId::NDVI});
    const std::size_t n = std::size_t(cube.height()) * cube.width();
    for (int t = 0; t < cube.n_times(); ++t) {
        const float* nv = cube.slice_values(t, bn);
        const uint8_t* nk = cube.slice_valid(t, bn);
        const float* rv = cube.slice_values(t, br);
        const uint8_t* rk = cube.slice_valid(t, br);
        float* ov = out.slice_values(t, 0);
        uint8_t* ok = out.slice_valid(t, 0);
        for (std::size_t i = 0; i < n; ++i) {
            if (!nk[i] || !rk[i]) continue;
            const auto v = ndvi(double(nv[i]), double(rv[i]));
            if (!v) continue;
            ov[i] = float(*v);
            ok[i] = 1;
        }
    }
    return out;
}

CubeArray temporal_composite(const CubeArray& cube, Period unit, Statistic stat) {
    if (cube.empty()) throw DataError("composite of an empty cube");
    if (stat == Statistic::ValidFraction)
        throw UsageError("valid_fraction is not a per-pixel composite statistic");

    const int64_t anchor = cube.times().front();
    std::map<int64_t, std::vector<int>> groups;
    for (int t = 0; t < cube.n_times(); ++t)
        groups[period_start(unit, cube.times()[std::size_t(t)], anchor)].push_back(t);

    std::vector<int64_t> out_times;
    for (const auto& [day, ts] : groups) out_times.push_back(day);

    CubeArray out(cube.grid(), out_times, cube.bands());
    const std::size_t n = std::size_t(cube.height()) * cube.width();
    std::vector<double> samples;

    int ot = 0;
    for (const auto& [day, ts] : groups) {
        for (int b = 0; b < cube.n_bands(); ++b) {
            float* ov = out.slice_values(ot, b);
            uint8_t* ok = out.slice_valid(ot, b);
            for (std::size_t i = 0; i < n; ++i) {
                samples.clear();
                for (int t : ts) {
                    if (cube.slice_valid(t, b)[i])
                        samples.push_back(double(cube.slice_values(t, b)[i]));
                }
                if (samples.empty()) continue;
                double v = 0;
                switch (stat) {
                    case Statistic::Mean: {
                        double s = 0;
                        for (double x : samples) s += x;
                        v = s / double(samples.size());
                        break;
                    }
                    case Statistic::Median: {
                        std::sort(samples.begin(), samples.end());
                        const std::size_t m = samples.size();
                        v = m % 2 ? samples[m / 2]
                                  : 0.5 * (samples[m / 2 - 1] + samples[m / 2]);
                        break;
                    }
                    case Statistic::Min:
                        v = *std::min_element(samples.begin(), samples.end());
                        break;
                    case Statistic::Max:
                        v = *std::max_element(samples.begin(), samples.end());
                        break;
                    case Statistic::Std: {
                        double s = 0, s2 = 0;
                        for (double x : samples) {
                            s += x;
                            s2 += x * x;
                        }
                        const double m = s / double(samples.size());
                        v = std::sqrt(std::max(0.0, s2 / double(samples.size()) - m * m));
                        break;
                    }
                    case Statistic::Count:
                        v = double(samples.size());
                        break;
                    case Statistic::ValidFraction:
                        break;
                }
                ov[i] = float(v);
                ok[i] = 1;
            }
        }
        ++ot;
    }
    return out;
}

bool PhenologyMetrics::season_defined() const {
    return !std::isnan(sos_day) && !std::isnan(pos_day) && !std::isnan(eos_day);
}

PhenologyMetrics phenology(const TimeSeries& ts, double amplitude_fraction) {
    ts.validate();
    if (amplitude_fraction <= 0 || amplitude_fraction >= 1)
        throw UsageError("amplitude fraction must be in (0, 1)");

    std::vector<int64_t> t;
    std::vector<double> v;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!ts.valid[i]) continue;
        t.push_back(ts.times[i]);
        v.push_back(ts.values[i]);
    }
    if (t.size() < 4) throw DataError("phenology needs at least 4 valid points");

    PhenologyMetrics m;
    std::size_t imax = 0, imin = 0;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] > v[imax]) imax = i;
        if (v[i] < v[imin]) imin = i;
    }
    const double base = v[imin];
    m.amplitude = v[imax] - base;

    m.max_derivative = -std::numeric_limits<double>::infinity();
    m.min_derivative = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const double d = (v[i + 1] - v[i]) / double(t[i + 1] - t[i]);
        m.max_derivative = std::max(m.max_derivative, d);
        m.min_derivative = std::min(m.min_derivative, d);
        m.integral += 0.5 * (v[i] + v[i + 1]) * double(t[i + 1] - t[i]);
    }
    m.integral_above_base =
        m.integral - base * double(t.back() - t.front());

    if (m.amplitude < 1e-6) {
        m.sos_day = m.pos_day = m.eos_day = std::numeric_limits<double>::quiet_NaN();
        return m;
    }

    m.pos_day = double(t[imax]);
    const double thr = base + amplitude_fraction * m.amplitude;

    auto crossing = [&](std::size_t i) -> std::optional<double> {
        const bool lo0 = v[i] <= thr, lo1 = v[i + 1] <= thr;
        if (lo0 == lo1) return {};
        return double(t[i]) + (thr - v[i]) / (v[i + 1] - v[i]) *
                                  double(t[i + 1] - t[i]);
    };

    m.sos_day = std::numeric_limits<double>::quiet_NaN();
    m.eos_day = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        const auto c = crossing(i);
        if (!c) continue;
        if (std::isnan(m.sos_day)) m.sos_day = *c;
        m.eos_day = *c;
    }
    return m;
}

FeatureLevel feature_level_from_string(const std::string& s) {
    if (s == "pixel") return FeatureLevel::Pixel;
    if (s == "parcel") return FeatureLevel::Parcel;
    throw UsageError("unknown feature level '" + s + "' (pixel|parcel)");
}

void FeatureSpec::validate() const {
    if (bands.empty()) throw UsageError("feature spec has no bands");
    std::set<BandId> uniq(bands.begin(), bands.end());
    if (uniq.size() != bands.size()) throw UsageError("duplicate band in feature spec");
    if (stats.empty()) throw UsageError("feature spec has no statistics");
    std::set<Statistic> su(stats.begin(), stats.end());
    if (su.size() != stats.size())
        throw UsageError("duplicate statistic in feature spec");
    if (amplitude_fraction <= 0 || amplitude_fraction >= 1)
        throw UsageError("amplitude fraction must be in (0, 1)");
    pipeline.validate();
}

namespace {

const char* const kPhenologyNames[7] = {
    "sos_day",  "pos_day",  "eos_day",       "amplitude",
    "integral", "integral_above_base", "max_derivative"};

struct ColumnPlan {
    // composite columns sorted by name; each knows its band/period/stat
    struct Col {
        std::string name;
        BandId band;
        int64_t period;
        Statistic stat;
    };
    std::vector<Col> composites;
    bool phenology = false;

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (const Col& c : composites) out.push_back(c.name);
        if (phenology)
            for (const char* n : kPhenologyNames) out.emplace_back(n);
        return out;
    }
};

ColumnPlan plan_columns(const FeatureSpec& spec,
                        const std::vector<int64_t>& period_starts) {
    ColumnPlan plan;
    for (BandId b : spec.bands)
        for (int64_t p : period_starts)
            for (Statistic s : spec.stats)
                plan.composites.push_back(
                    {std::string(band_name(b)) + "_" + format_date(p) + "_" +
                         statistic_name(s),
                     b, p, s});
    std::sort(plan.composites.begin(), plan.composites.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    plan.phenology = spec.phenology;
    return plan;
}

void put(FeatureSpace& fs, std::size_t row, std::size_t col, double v) {
    fs.values[row * fs.names.size() + col] = v;
    fs.missing[row * fs.names.size() + col] = 0;
}

void fill_phenology(FeatureSpace& fs, std::size_t row, std::size_t col0,
                    const PhenologyMetrics& m, int64_t doy_anchor) {
    const double vals[7] = {
        m.sos_day - double(doy_anchor) + 1, m.pos_day - double(doy_anchor) + 1,
        m.eos_day - double(doy_anchor) + 1, m.amplitude,
        m.integral, m.integral_above_base, m.max_derivative};
    for (int k = 0; k < 7; ++k)
        if (!std::isnan(vals[k])) put(fs, row, col0 + std::size_t(k), vals[k]);
}

}  // namespace

std::string FeatureSpace::to_csv() const {
    std::string out = "key";
    for (const std::string& n : names) {
        out += ',';
        out += n;
        out += ',';
        out += n;
        out += "_mask";
    }
    out += '\n';
    for (std::size_t r = 0; r < keys.size(); ++r) {
        out += std::to_string(keys[r]);
        for (std::size_t c = 0; c < names.size(); ++c) {
            out += ',';
            if (!is_missing(r, c)) out += format_double(at(r, c));
            out += ',';
            out += is_missing(r, c) ? '1' : '0';
        }
        out += '\n';
    }
    return out;
}

FeatureSpace build_feature_space(const CubeArray& cube, const FeatureSpec& spec,
                                 int threads) {
    spec.validate();
    if (cube.empty()) throw DataError("feature space from an empty cube");
    for (BandId b : spec.bands)
        if (cube.band_index(b) < 0)
            throw DataError(std::string("band ") + band_name(b) +
                            " is not in the cube");
    if (spec.phenology && cube.band_index(spec.phenology_band) < 0)
        throw DataError(std::string("phenology band ") +
                        band_name(spec.phenology_band) + " is not in the cube");

    const int64_t anchor = cube.times().front();
    std::set<int64_t> pset;
    for (int64_t day : cube.times())
        pset.insert(period_start(spec.unit, day, anchor));
    const std::vector<int64_t> periods(pset.begin(), pset.end());
    const ColumnPlan plan = plan_columns(spec, periods);

    const std::size_t n_px = std::size_t(cube.height()) * cube.width();
    FeatureSpace fs;
    fs.names = plan.names();
    fs.keys.resize(n_px);
    for (std::size_t i = 0; i < n_px; ++i) fs.keys[i] = int64_t(i);
    fs.values.assign(n_px * fs.names.size(), 0.0);
    fs.missing.assign(n_px * fs.names.size(), 1);

    std::map<Statistic, CubeArray> composites;
    for (Statistic s : spec.stats)
        composites.emplace(s, temporal_composite(cube, spec.unit, s));

    for (std::size_t c = 0; c < plan.composites.size(); ++c) {
        const ColumnPlan::Col& col = plan.composites[c];
        const CubeArray& comp = composites.at(col.stat);
        const int t = comp.time_index(col.period);
        const int b = comp.band_index(col.band);
        if (t < 0 || b < 0) continue;
        const float* v = comp.slice_values(t, b);
        const uint8_t* ok = comp.slice_valid(t, b);
        for (std::size_t i = 0; i < n_px; ++i)
            if (ok[i]) put(fs, i, c, double(v[i]));
    }

    if (spec.phenology) {
        const std::size_t col0 = plan.composites.size();
        const int pb = cube.band_index(spec.phenology_band);
        const int64_t doy_anchor = year_start(anchor);
        const int nt = cube.n_times();
        parallel_for(
            n_px,
            [&](std::size_t i) {
                TimeSeries ts;
                ts.times = cube.times();
                ts.values.resize(std::size_t(nt));
                ts.valid.resize(std::size_t(nt));
                ts.prov.assign(std::size_t(nt), Provenance::Observed);
                for (int t = 0; t < nt; ++t) {
                    ts.values[std::size_t(t)] = double(cube.slice_values(t, pb)[i]);
                    ts.valid[std::size_t(t)] = cube.slice_valid(t, pb)[i];
                }
                try {
                    const TimeSeries prep = prepare(ts, spec.pipeline);
                    const PhenologyMetrics m =
                        phenology(prep, spec.amplitude_fraction);
                    fill_phenology(fs, i, col0, m, doy_anchor);
                } catch (const DataError&) {
                    // too few valid points: the row keeps its mask bits
                }
            },
            threads);
    }
    return fs;
}

FeatureSpace build_feature_space(CubeStore& store, const LabelRaster& labels,
                                 const FeatureSpec& spec, const StatRequest& zonal_req,
                                 int64_t day0, int64_t day1, int threads) {
    spec.validate();

    std::vector<int64_t> parcel_ids;
    {
        std::set<int32_t> ids;
        for (int32_t id : labels.labels)
            if (id != kNoParcel) ids.insert(id);
        parcel_ids.assign(ids.begin(), ids.end());
    }
    if (parcel_ids.empty()) throw DataError("label raster has no parcels");

    std::map<Statistic, ZonalStatsTable> tables;
    for (Statistic s : spec.stats) {
        StatRequest req = zonal_req;
        req.statistic = s;
        req.period = spec.unit;
        req.bands = spec.bands;
        tables.emplace(s, zonal_stats_grouped(store, labels, req, day0, day1,
                                              threads));
    }

    std::set<int64_t> pset;
    for (const auto& [s, table] : tables)
        for (const StatRecord& r : table.records) pset.insert(r.period_start);
    const std::vector<int64_t> periods(pset.begin(), pset.end());
    const ColumnPlan plan = plan_columns(spec, periods);

    FeatureSpace fs;
    fs.names = plan.names();
    fs.keys = parcel_ids;
    fs.values.assign(parcel_ids.size() * fs.names.size(), 0.0);
    fs.missing.assign(parcel_ids.size() * fs.names.size(), 1);

    std::map<int64_t, std::size_t> row_of;
    for (std::size_t r = 0; r < parcel_ids.size(); ++r)
        row_of[parcel_ids[r]] = r;
    std::map<std::string, std::size_t> col_of;
    for (std::size_t c = 0; c < plan.composites.size(); ++c)
        col_of[plan.composites[c].name] = c;

    for (const auto& [s, table] : tables) {
        for (const StatRecord& r : table.records) {
            const std::string name = std::string(band_name(r.band)) + "_" +
                                     format_date(r.period_start) + "_" +
                                     statistic_name(r.statistic);
            const auto rit = row_of.find(r.parcel_id);
            const auto cit = col_of.find(name);
            if (rit == row_of.end() || cit == col_of.end()) continue;
            put(fs, rit->second, cit->second, r.value);
        }
    }

    if (spec.phenology) {
        StatRequest req = zonal_req;
        req.statistic = Statistic::Mean;
        req.period = Period::Day;
        req.bands = {spec.phenology_band};
        const ZonalStatsTable daily =
            zonal_stats_grouped(store, labels, req, day0, day1, threads);

        std::map<int64_t, TimeSeries> series;
        for (const StatRecord& r : daily.records) {
            TimeSeries& ts = series[r.parcel_id];
            ts.times.push_back(r.period_start);
            ts.values.push_back(r.value);
            ts.valid.push_back(1);
            ts.prov.push_back(Provenance::Observed);
        }

        const std::size_t col0 = plan.composites.size();
        const int64_t doy_anchor = year_start(day0);
        for (auto& [id, ts] : series) {
            const auto rit = row_of.find(id);
            if (rit == row_of.end()) continue;
            try {
                const TimeSeries prep = prepare(ts, spec.pipeline);
                const PhenologyMetrics m = phenology(prep, spec.amplitude_fraction);
                fill_phenology(fs, rit->second, col0, m, doy_anchor);
            } catch (const DataError&) {
            }
        }
    }
    return fs;
}

CubeArray PatchSet::patch(std::size_t i) const {
    if (!cube) throw PreconditionError("patch set has no parent cube");
    const auto [r, c] = anchors.at(i);
    return select_window(*cube, {}, {}, PixelBox{r, c, h, w});
}

std::string PatchSet::manifest_json() const {
    json anchors_j = json::array();
    for (const auto& [r, c] : anchors) anchors_j.push_back({{"row", r}, {"col", c}});
    json j{{"h", h},
           {"w", w},
           {"stride", stride},
           {"count", anchors.size()},
           {"anchors", anchors_j}};
    if (cube) {
        json times = json::array();
        for (int64_t d : cube->times()) times.push_back(format_date(d));
        json bands = json::array();
        for (BandId b : cube->bands()) bands.push_back(band_name(b));
        j["source"] = {{"width", cube->width()},
                       {"height", cube->height()},
                       {"times", times},
                       {"bands", bands}};
    }
    return j.dump(1) + "\n";
}

PatchSet extract_patches(const CubeArray& cube, int h, int w, int stride) {
    if (cube.empty()) throw DataError("patches from an empty cube");
    if (h < 1 || w < 1 || stride < 1)
        throw UsageError("patch shape and stride must be positive");
    if (h > cube.height() || w > cube.width())
        throw UsageError("patch exceeds the cube extent");

    PatchSet set;
    set.h = h;
    set.w = w;
    set.stride = stride;
    set.cube = &cube;
    for (int r = 0; r + h <= cube.height(); r += stride)
        for (int c = 0; c + w <= cube.width(); c += stride)
            set.anchors.emplace_back(r, c);
    return set;
}

std::vector<MowingEvent> detect_mowing(const TimeSeries& ts,
                                       const MowingParams& params) {
    ts.validate();
    if (params.min_drop <= 0) throw UsageError("min_drop must be positive");
    if (params.max_window_days < 1 || params.refractory_days < 0)
        throw UsageError("bad mowing detector window");

    std::vector<int64_t> t;
    std::vector<double> v;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (!ts.valid[i]) continue;
        t.push_back(ts.times[i]);
        v.push_back(ts.values[i]);
    }

    std::vector<MowingEvent> events;
    int64_t last_event = std::numeric_limits<int64_t>::min();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i] < params.min_pre) continue;
        std::size_t best_j = i;
        double best_drop = 0;
        for (std::size_t j = i + 1;
             j < v.size() && t[j] - t[i] <= params.max_window_days; ++j) {
            const double drop = v[i] - v[j];
            if (drop > best_drop) {
                best_drop = drop;
                best_j = j;
            }
        }
        if (best_drop < params.min_drop) continue;

        double steepest = 0;
        int64_t day = t[best_j];
        for (std::size_t a = i; a < best_j; ++a) {
            const double fall = (v[a] - v[a + 1]) / double(t[a + 1] - t[a]);
            if (fall > steepest) {
                steepest = fall;
                day = t[a + 1];
            }
        }
        if (last_event != std::numeric_limits<int64_t>::min() &&
            day - last_event < params.refractory_days)
            continue;

        MowingEvent e;
        e.event_day = day;
        e.drop_magnitude = best_drop;
        e.pre_event_value = v[i];
        events.push_back(e);
        last_event = day;
    }
    return events;
}

}  // namespace adc
