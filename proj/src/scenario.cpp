#include "adc/scenario.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>

#include "adc/animate.hpp"
#include "adc/dates.hpp"
#include "adc/errors.hpp"
#include "adc/features.hpp"
#include "adc/knowledge_base.hpp"
#include "adc/query.hpp"
#include "adc/synthetic.hpp"
#include "adc/util.hpp"
#include "adc/zonal.hpp"

namespace adc {

namespace {

void day_range(const Workspace& ws, int64_t& day0, int64_t& day1) {
    const auto records = ws.catalog().list();
    if (records.empty())
        throw DataError("the catalog is empty; ingest or generate scenes first");
    day0 = records.front()->acquisition_day;
    day1 = records.front()->acquisition_day;
    for (const ProductRecord* r : records) {
        day0 = std::min(day0, r->acquisition_day);
        day1 = std::max(day1, r->acquisition_day);
    }
    day1 += 1;
}

std::string write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << content;
    out.flush();
    if (!out) throw DataError("write to " + path + " failed");
    return path;
}

int n_years(int64_t day0, int64_t day1) {
    int y0, y1, m, d;
    civil_from_days(day0, y0, m, d);
    civil_from_days(day1 - 1, y1, m, d);
    return y1 - y0 + 1;
}

std::vector<std::string> scenario_query1(Workspace& ws, const std::string& out_dir,
                                         int threads) {
    int64_t day0, day1;
    day_range(ws, day0, day1);
    CubeStore store(ws);

    FeatureSpec fspec;
    fspec.bands = {BandId::COHERENCE_VV, BandId::NDVI};
    fspec.unit = Period::Month;
    fspec.stats = {Statistic::Mean};
    fspec.phenology = false;

    StatRequest zreq;
    zreq.buffer_inward_m = 5;
    zreq.cloud_buffer_m = 50;

    const FeatureSpace fs =
        build_feature_space(store, ws.labels(), fspec, zreq, day0, day1, threads);

    KnowledgeBase kb(ws);
    for (BandId band : fspec.bands) {
        for (int64_t m = month_start(day0); m < day1; m = month_start(m + 32)) {
            const std::string column = std::string(band_name(band)) + "_" +
                                       format_date(m) + "_mean";
            const auto it = std::find(fs.names.begin(), fs.names.end(), column);
            if (it == fs.names.end()) continue;
            const std::size_t c = std::size_t(it - fs.names.begin());
            std::vector<std::pair<int64_t, AttrValue>> rows;
            for (std::size_t r = 0; r < fs.keys.size(); ++r)
                if (!fs.is_missing(r, c))
                    rows.emplace_back(fs.keys[r], AttrValue(fs.at(r, c)));
            kb.upsert(rows,
                      "mean_" + std::string(band_name(band)) + "_" + month_label(m),
                      "scenario:query1");
        }
    }

    return {write_file(out_dir + "/query1_features.csv", fs.to_csv())};
}

std::vector<std::string> scenario_query2(Workspace& ws, const std::string& out_dir,
                                         int threads) {
    int64_t day0, day1;
    day_range(ws, day0, day1);

    const std::vector<Parcel> parcels = ws.parcels();
    std::vector<std::pair<int64_t, AttrValue>> predicted;
    for (const Parcel& p : parcels)
        if (p.crop_predicted) predicted.emplace_back(p.id, AttrValue(*p.crop_predicted));
    if (predicted.empty())
        throw DataError("no crop predictions available; parcels carry no "
                        "crop_predicted property");

    KnowledgeBase kb(ws);
    kb.upsert(predicted, "crop_predicted", "crop-predictions");

    QuerySpec qspec;
    qspec.day0 = day0;
    qspec.day1 = day1;
    Predicate mismatch;
    mismatch.attribute = "crop_declared";
    mismatch.op = CmpOp::Ne;
    mismatch.rhs_attribute = "crop_predicted";
    qspec.predicates.push_back(mismatch);

    CubeStore store(ws);
    const QueryResult result = run_query(ws, kb, &store, qspec, threads);

    std::vector<std::string> written;
    written.push_back(
        write_file(out_dir + "/query2_mismatches.csv", result.to_csv()));

    int y, m, d;
    civil_from_days(day0, y, m, d);
    if (days_from_civil(y, 6, 1) < day0) ++y;
    const int64_t june1 = days_from_civil(y, 6, 1);
    const int64_t nov1 = days_from_civil(y, 11, 1);

    const LabelRaster labels = ws.labels();
    for (int64_t id : result.parcel_ids) {
        AnimationSpec aspec;
        aspec.parcel_id = id;
        aspec.band = BandId::NDVI;
        aspec.step_days = 10;
        aspec.day0 = june1;
        aspec.day1 = nov1;
        const FrameSet frames = animate(store, labels, parcels, aspec);
        const auto files =
            save_frames(frames, out_dir + "/query2_anim_" + std::to_string(id));
        written.insert(written.end(), files.begin(), files.end());
    }
    return written;
}

std::vector<std::string> scenario_query3(Workspace& ws, const std::string& out_dir,
                                         int threads) {
    int64_t day0, day1;
    day_range(ws, day0, day1);
    const int years = n_years(day0, day1);
    if (years < 2)
        throw DataError("query3 needs a multi-year dataset; this one spans " +
                        std::to_string(years) + " calendar year");

    const std::vector<Parcel> parcels = ws.parcels();
    std::vector<int64_t> grass_ids;
    for (const Parcel& p : parcels)
        if (is_grass_crop(p.crop_declared)) grass_ids.push_back(p.id);
    if (grass_ids.empty())
        throw DataError("no grassland parcels declared; query3 has nothing to rate");

    CubeStore store(ws);
    StatRequest daily;
    daily.statistic = Statistic::Mean;
    daily.period = Period::Day;
    daily.bands = {BandId::NDVI};
    daily.buffer_inward_m = 5;
    daily.cloud_buffer_m = 50;
    const ZonalStatsTable table =
        zonal_stats_grouped(store, ws.labels(), daily, day0, day1, threads);

    std::map<int64_t, TimeSeries> series;
    for (const StatRecord& r : table.records) {
        TimeSeries& ts = series[r.parcel_id];
        ts.times.push_back(r.period_start);
        ts.values.push_back(r.value);
        ts.valid.push_back(1);
        ts.prov.push_back(Provenance::Observed);
    }

    int year0, year1, m, d;
    civil_from_days(day0, year0, m, d);
    civil_from_days(day1 - 1, year1, m, d);

    KnowledgeBase kb(ws);
    std::map<int64_t, std::map<int, int>> events_per_year;
    std::vector<std::pair<int64_t, AttrValue>> avg_rows;
    for (int64_t id : grass_ids) {
        std::map<int, int> counts;
        for (int y = year0; y <= year1; ++y) counts[y] = 0;
        const auto it = series.find(id);
        if (it != series.end()) {
            for (const MowingEvent& e : detect_mowing(it->second)) {
                int ey;
                civil_from_days(e.event_day, ey, m, d);
                counts[ey]++;
            }
        }
        int total = 0;
        std::vector<KbRow> rows;
        for (const auto& [y, n] : counts) {
            total += n;
            KbRow r;
            r.parcel_id = id;
            r.attribute = "mowing_events_" + std::to_string(y);
            r.value = double(n);
            rows.push_back(std::move(r));
        }
        kb.upsert(rows, "scenario:query3");
        avg_rows.emplace_back(id, AttrValue(double(total) / years));
        events_per_year[id] = std::move(counts);
    }
    kb.upsert(avg_rows, "mowing_events_per_year", "scenario:query3");

    QuerySpec low_ndvi;
    low_ndvi.region.kind = QueryRegion::Kind::Parcels;
    low_ndvi.region.ids = grass_ids;
    low_ndvi.day0 = day0;
    low_ndvi.day1 = day1;
    low_ndvi.buffer_inward_m = 5;
    low_ndvi.cloud_buffer_m = 50;
    Predicate p1;
    p1.attribute = "mean_NDVI";
    p1.op = CmpOp::Lt;
    p1.rhs = 0.4;
    low_ndvi.predicates.push_back(p1);

    const QueryResult low = run_query(ws, kb, &store, low_ndvi, threads);

    std::string counts_csv = "parcel_id,year,mowing_events\n";
    for (int64_t id : low.parcel_ids) {
        for (const auto& [y, n] : events_per_year.at(id)) {
            counts_csv += std::to_string(id);
            counts_csv += ',';
            counts_csv += std::to_string(y);
            counts_csv += ',';
            counts_csv += std::to_string(n);
            counts_csv += '\n';
        }
    }

    QuerySpec hotspot = low_ndvi;
    Predicate p2;
    p2.attribute = "mowing_events_per_year";
    p2.op = CmpOp::Lt;
    p2.rhs = 1.0;
    hotspot.predicates.push_back(p2);
    const QueryResult hot = run_query(ws, kb, &store, hotspot, threads);

    return {write_file(out_dir + "/query3_mowing_per_year.csv", counts_csv),
            write_file(out_dir + "/query3_hotspots.csv", hot.to_csv())};
}

}  // namespace

std::vector<std::string> run_scenario(Workspace& ws, const std::string& name,
                                      const std::string& out_dir, int threads) {
    std::filesystem::create_directories(out_dir);
    if (name == "query1") return scenario_query1(ws, out_dir, threads);
    if (name == "query2") return scenario_query2(ws, out_dir, threads);
    if (name == "query3") return scenario_query3(ws, out_dir, threads);
    throw UsageError("unknown scenario '" + name + "' (query1|query2|query3)");
}

}  // namespace adc
