#include "adc.h"

#include <cstdlib>
#include <cstring>
#include <string>
#include <vector>

#include <json.hpp>

#include "adc/animate.hpp"
#include "adc/dates.hpp"
#include "adc/errors.hpp"
#include "adc/features.hpp"
#include "adc/knowledge_base.hpp"
#include "adc/masking.hpp"
#include "adc/query.hpp"
#include "adc/scenario.hpp"
#include "adc/sits.hpp"
#include "adc/store.hpp"
#include "adc/synthetic.hpp"
#include "adc/tile_io.hpp"
#include "adc/util.hpp"
#include "adc/workspace.hpp"
#include "adc/zonal.hpp"

using nlohmann::json;

struct adc_workspace {
    adc::Workspace ws;
};

namespace {

std::string& last_error() {
    thread_local std::string msg;
    return msg;
}

template <typename F>
int guard(F&& f) {
    try {
        f();
        last_error().clear();
        return ADC_OK;
    } catch (const adc::UsageError& e) {
        last_error() = e.what();
        return ADC_USAGE_ERROR;
    } catch (const adc::DataError& e) {
        last_error() = e.what();
        return ADC_DATA_ERROR;
    } catch (const adc::PreconditionError& e) {
        last_error() = e.what();
        return ADC_PRECONDITION_ERROR;
    } catch (const std::exception& e) {
        last_error() = e.what();
        return ADC_INTERNAL_ERROR;
    }
}

char* dup_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (!out) throw std::bad_alloc();
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

void require(bool ok, const char* what) {
    if (!ok) throw adc::UsageError(std::string("null argument: ") + what);
}

json parse_json(const char* text, const char* what) {
    try {
        return json::parse(text);
    } catch (const json::exception& e) {
        throw adc::DataError(std::string(what) + ": " + e.what());
    }
}

adc::GridSpec grid_from_json(const json& j) {
    adc::GridSpec g;
    try {
        g.origin_x = j.at("origin_x").get<double>();
        g.origin_y = j.at("origin_y").get<double>();
        g.pixel_size = j.at("pixel_size").get<double>();
        g.width = j.at("width").get<int>();
        g.height = j.at("height").get<int>();
        g.crs_id = j.value("crs", "");
    } catch (const json::exception& e) {
        throw adc::DataError(std::string("grid: ") + e.what());
    }
    g.validate();
    return g;
}

json grid_to_json(const adc::GridSpec& g) {
    return json{{"origin_x", g.origin_x}, {"origin_y", g.origin_y},
                {"pixel_size", g.pixel_size}, {"width", g.width},
                {"height", g.height},       {"crs", g.crs_id}};
}

adc::StatRequest stat_request_from_json(const json& j) {
    adc::StatRequest req;
    try {
        if (j.contains("statistic"))
            req.statistic =
                adc::statistic_from_string(j.at("statistic").get<std::string>());
        if (j.contains("period"))
            req.period = adc::period_from_string(j.at("period").get<std::string>());
        req.step_days = j.value("step_days", 0);
        if (j.contains("bands")) {
            req.bands.clear();
            for (const json& b : j.at("bands"))
                req.bands.push_back(adc::band_from_string(b.get<std::string>()));
        }
        req.buffer_inward_m = j.value("inward_buffer_m", 0.0);
        req.cloud_buffer_m = j.value("cloud_buffer_m", 0.0);
        req.max_cloud_cover_fraction = j.value("max_cloud_cover", 1.0);
        req.approximate_median = j.value("approximate_median", false);
    } catch (const json::exception& e) {
        throw adc::DataError(std::string("statistics request: ") + e.what());
    }
    req.validate();
    return req;
}

int64_t parse_day(const char* text, const char* what) {
    require(text != nullptr, what);
    return adc::parse_date(text);
}

adc::Raster load_band_file(const std::string& path) {
    const adc::tiles::TileFileInfo info = adc::tiles::probe(path);
    if (info.dtype == adc::tiles::DType::F32) return adc::tiles::read_raster(path);
    if (info.dtype == adc::tiles::DType::I16) {
        std::vector<int16_t> raw;
        adc::tiles::read_tiles(path, raw);
        adc::Raster r(info.grid, 0.0f, float(info.nodata));
        for (std::size_t i = 0; i < raw.size(); ++i) r.values[i] = float(raw[i]);
        return r;
    }
    throw adc::DataError(path + ": band rasters must be f32 or i16 tiles");
}

}  // namespace

extern "C" {

const char* adc_version(void) { return "1.0.0"; }

const char* adc_last_error(void) { return last_error().c_str(); }

void adc_free(char* buf) { std::free(buf); }

int adc_set_threads(int n) {
    return guard([&] { adc::set_max_threads(n); });
}

int adc_workspace_open(const char* root, adc_workspace** out) {
    return guard([&] {
        require(root && out, "root, out");
        *out = new adc_workspace{adc::Workspace::open(root)};
    });
}

int adc_workspace_create(const char* root, const char* grid_json,
                         adc_workspace** out) {
    return guard([&] {
        require(root && grid_json && out, "root, grid_json, out");
        const adc::GridSpec grid = grid_from_json(parse_json(grid_json, "grid"));
        *out = new adc_workspace{adc::Workspace::create(root, grid)};
    });
}

void adc_workspace_close(adc_workspace* ws) { delete ws; }

int adc_grid_info(adc_workspace* ws, char** json_out) {
    return guard([&] {
        require(ws && json_out, "ws, json_out");
        *json_out = dup_string(grid_to_json(ws->ws.grid()).dump(1) + "\n");
    });
}

int adc_synth(const char* config_json, int64_t seed, const char* root,
              adc_workspace** out) {
    return guard([&] {
        require(config_json && root && out, "config_json, root, out");
        adc::SyntheticConfig cfg = adc::synthetic_config_from_json(config_json);
        if (seed >= 0) cfg.seed = uint64_t(seed);
        *out = new adc_workspace{adc::generate_synthetic_dataset(cfg, root)};
    });
}

int adc_ingest(adc_workspace* ws, const char* config_json, char** report_out) {
    return guard([&] {
        require(ws && config_json && report_out, "ws, config_json, report_out");
        const json cfg = parse_json(config_json, "ingest config");
        if (!cfg.contains("products") || !cfg.at("products").is_array())
            throw adc::DataError("ingest config needs a products array");

        json ingested = json::array();
        for (const json& p : cfg.at("products")) {
            adc::ProductRecord meta;
            try {
                meta.product_id = p.at("product_id").get<std::string>();
                meta.sensor =
                    adc::sensor_from_string(p.at("sensor").get<std::string>());
                meta.acquisition_day =
                    adc::parse_date(p.at("date").get<std::string>());
                meta.tile_id = p.value("tile_id", "");
            } catch (const json::exception& e) {
                throw adc::DataError(std::string("ingest config: ") + e.what());
            }
            std::vector<adc::IngestBand> bands;
            for (const json& b : p.value("bands", json::array())) {
                adc::IngestBand ib;
                try {
                    ib.band = adc::band_from_string(b.at("band").get<std::string>());
                    ib.raster = load_band_file(b.at("file").get<std::string>());
                } catch (const json::exception& e) {
                    throw adc::DataError(std::string("ingest config: ") + e.what());
                }
                bands.push_back(std::move(ib));
            }
            if (bands.empty())
                throw adc::DataError("product " + meta.product_id + " lists no bands");
            meta.footprint = bands.front().raster.grid.extent();
            const adc::ProductRecord& rec = adc::ingest_product(
                ws->ws.catalog(), ws->ws.root(), std::move(meta), bands);
            ingested.push_back(rec.product_id);
        }
        *report_out =
            dup_string(json{{"ingested", ingested}}.dump(1) + "\n");
    });
}

int adc_rasterize(adc_workspace* ws, const char* parcels_path,
                  int64_t* n_parcels_out) {
    return guard([&] {
        require(ws && n_parcels_out, "ws, n_parcels_out");
        std::vector<adc::Parcel> parcels;
        if (parcels_path) {
            parcels = adc::load_parcels(parcels_path);
            adc::save_parcels(ws->ws.path("parcels.json"), parcels);
        } else {
            parcels = ws->ws.parcels();
        }
        const adc::RasterizeResult rr =
            adc::rasterize_parcels(parcels, ws->ws.grid());
        adc::save_labels(ws->ws.path("labels.tiles"), rr.labels);
        std::vector<int32_t> ids(rr.labels.labels);
        std::sort(ids.begin(), ids.end());
        ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
        int64_t n = 0;
        for (int32_t id : ids)
            if (id != adc::kNoParcel) ++n;
        *n_parcels_out = n;
    });
}

int adc_zonal_stats(adc_workspace* ws, const char* request_json,
                    const char* from_date, const char* to_date, char** csv_out) {
    return guard([&] {
        require(ws && request_json && csv_out, "ws, request_json, csv_out");
        const adc::StatRequest req =
            stat_request_from_json(parse_json(request_json, "statistics request"));
        const int64_t day0 = parse_day(from_date, "from_date");
        const int64_t day1 = parse_day(to_date, "to_date");
        adc::CubeStore store(ws->ws);
        adc::ZonalStatsTable table =
            adc::zonal_stats_grouped(store, ws->ws.labels(), req, day0, day1);
        *csv_out = dup_string(table.to_csv());
    });
}

int adc_benchmark(const char* config_json, char** csv_out) {
    return guard([&] {
        require(config_json && csv_out, "config_json, csv_out");
        const json cfg = parse_json(config_json, "benchmark config");
        std::vector<int64_t> sizes;
        try {
            for (const json& s : cfg.at("sizes")) sizes.push_back(s.get<int64_t>());
            const adc::GridSpec grid = grid_from_json(cfg.at("grid"));
            const std::string work_dir = cfg.at("work_dir").get<std::string>();
            const int months = cfg.value("months", 12);
            const int n_bands = cfg.value("bands", 1);
            const double budget = cfg.value("serial_budget_s", 120.0);
            const int threads = cfg.value("threads", 0);
            const adc::BenchReport report = adc::run_benchmark(
                sizes, grid, work_dir, months, n_bands, budget, threads);
            *csv_out = dup_string(report.to_csv());
        } catch (const json::exception& e) {
            throw adc::DataError(std::string("benchmark config: ") + e.what());
        }
    });
}

int adc_sits(adc_workspace* ws, int64_t parcel_id, const char* band,
             const char* pipeline_json, const char* from_date,
             const char* to_date, char** csv_out) {
    return guard([&] {
        require(ws && band && csv_out, "ws, band, csv_out");
        const adc::BandId b = adc::band_from_string(band);
        adc::PipelineConfig cfg;
        if (pipeline_json) cfg = adc::pipeline_config_from_json(pipeline_json);
        const int64_t day0 = parse_day(from_date, "from_date");
        const int64_t day1 = parse_day(to_date, "to_date");

        const std::vector<adc::Parcel> parcels = ws->ws.parcels();
        const adc::Parcel* p = adc::find_parcel(parcels, parcel_id);
        if (!p) throw adc::DataError("unknown parcel " + std::to_string(parcel_id));

        adc::StatRequest req;
        req.statistic = adc::Statistic::Mean;
        req.period = adc::Period::Day;
        req.bands = {b};
        adc::CubeStore store(ws->ws);
        const adc::ZonalStatsTable table =
            adc::zonal_stats_serial(store, {*p}, req, day0, day1);

        adc::TimeSeries ts;
        for (const adc::StatRecord& r : table.records) {
            ts.times.push_back(r.period_start);
            ts.values.push_back(r.value);
            ts.valid.push_back(1);
            ts.prov.push_back(adc::Provenance::Observed);
        }
        if (ts.times.empty())
            throw adc::DataError("parcel " + std::to_string(parcel_id) +
                                 " has no valid samples in the range");
        *csv_out = dup_string(adc::series_csv(adc::prepare(ts, cfg)));
    });
}

int adc_features(adc_workspace* ws, const char* spec_json, char** csv_out) {
    return guard([&] {
        require(ws && spec_json && csv_out, "ws, spec_json, csv_out");
        const json j = parse_json(spec_json, "feature spec");

        adc::FeatureSpec spec;
        std::string level = "parcel";
        adc::StatRequest zreq;
        int64_t day0 = 0, day1 = 0;
        try {
            level = j.value("level", level);
            if (j.contains("bands")) {
                spec.bands.clear();
                for (const json& b : j.at("bands"))
                    spec.bands.push_back(adc::band_from_string(b.get<std::string>()));
            }
            if (j.contains("unit"))
                spec.unit = adc::period_from_string(j.at("unit").get<std::string>());
            if (j.contains("stats")) {
                spec.stats.clear();
                for (const json& s : j.at("stats"))
                    spec.stats.push_back(
                        adc::statistic_from_string(s.get<std::string>()));
            }
            spec.phenology = j.value("phenology", spec.phenology);
            if (j.contains("phenology_band"))
                spec.phenology_band =
                    adc::band_from_string(j.at("phenology_band").get<std::string>());
            spec.amplitude_fraction =
                j.value("amplitude_fraction", spec.amplitude_fraction);
            if (j.contains("pipeline"))
                spec.pipeline =
                    adc::pipeline_config_from_json(j.at("pipeline").dump());
            if (j.contains("zonal"))
                zreq = stat_request_from_json(j.at("zonal"));
            day0 = adc::parse_date(j.at("from").get<std::string>());
            day1 = adc::parse_date(j.at("to").get<std::string>());
        } catch (const json::exception& e) {
            throw adc::DataError(std::string("feature spec: ") + e.what());
        }

        const adc::FeatureLevel lv = adc::feature_level_from_string(level);
        adc::CubeStore store(ws->ws);
        adc::FeatureSpace fs;
        if (lv == adc::FeatureLevel::Parcel) {
            fs = adc::build_feature_space(store, ws->ws.labels(), spec, zreq,
                                          day0, day1);
        } else {
            std::vector<adc::BandId> wants = spec.bands;
            const bool have_scl =
                !store.scene_days(day0, day1, {adc::BandId::SCL}).empty();
            if (have_scl) wants.push_back(adc::BandId::SCL);
            const adc::GridSpec& g = store.grid();
            adc::CubeArray cube = store.load(
                adc::PixelBox{0, 0, g.height, g.width}, day0, day1, wants);
            if (have_scl) {
                cube = adc::apply_scene_masks(cube, zreq.cloud_buffer_m);
                cube = adc::select(cube, {}, spec.bands);
            }
            fs = adc::build_feature_space(cube, spec);
        }
        *csv_out = dup_string(fs.to_csv());
    });
}

int adc_query(adc_workspace* ws, const char* spec_json, char** csv_out) {
    return guard([&] {
        require(ws && spec_json && csv_out, "ws, spec_json, csv_out");
        const adc::QuerySpec spec = adc::query_spec_from_json(spec_json);
        adc::KnowledgeBase kb(ws->ws);
        adc::CubeStore store(ws->ws);
        const adc::QueryResult result = adc::run_query(ws->ws, kb, &store, spec);
        *csv_out = dup_string(result.to_csv());
    });
}

int adc_scenario(adc_workspace* ws, const char* name, const char* out_dir,
                 char** files_out) {
    return guard([&] {
        require(ws && name && out_dir, "ws, name, out_dir");
        const std::vector<std::string> files =
            adc::run_scenario(ws->ws, name, out_dir);
        if (files_out) {
            std::string joined;
            for (const std::string& f : files) {
                joined += f;
                joined += '\n';
            }
            *files_out = dup_string(joined);
        }
    });
}

int adc_animate(adc_workspace* ws, const char* spec_json, const char* out_dir,
                char** files_out) {
    return guard([&] {
        require(ws && spec_json && out_dir, "ws, spec_json, out_dir");
        const json j = parse_json(spec_json, "animation spec");
        adc::AnimationSpec spec;
        try {
            spec.parcel_id = j.value("parcel", int64_t(0));
            if (j.contains("bbox")) {
                const json& b = j.at("bbox");
                if (!b.is_array() || b.size() != 4)
                    throw adc::DataError("bbox must be [min_x, min_y, max_x, max_y]");
                spec.box = adc::BBox{b[0].get<double>(), b[1].get<double>(),
                                     b[2].get<double>(), b[3].get<double>()};
            }
            if (j.contains("band"))
                spec.band = adc::band_from_string(j.at("band").get<std::string>());
            if (j.contains("unit"))
                spec.unit = adc::period_from_string(j.at("unit").get<std::string>());
            spec.step_days = j.value("step_days", 0);
            spec.day0 = adc::parse_date(j.at("from").get<std::string>());
            spec.day1 = adc::parse_date(j.at("to").get<std::string>());
            spec.cloud_buffer_m = j.value("cloud_buffer_m", 0.0);
            spec.max_cloud_cover_fraction = j.value("max_cloud_cover", 1.0);
        } catch (const json::exception& e) {
            throw adc::DataError(std::string("animation spec: ") + e.what());
        }

        adc::CubeStore store(ws->ws);
        const adc::FrameSet frames =
            adc::animate(store, ws->ws.labels(), ws->ws.parcels(), spec);
        const std::vector<std::string> files = adc::save_frames(frames, out_dir);
        if (files_out) {
            std::string joined;
            for (const std::string& f : files) {
                joined += f;
                joined += '\n';
            }
            *files_out = dup_string(joined);
        }
    });
}

int adc_checksum_file(const char* path, char** hex_out) {
    return guard([&] {
        require(path && hex_out, "path, hex_out");
        *hex_out = dup_string(adc::checksum_hex(adc::file_checksum(path)));
    });
}

}  // extern "C"
