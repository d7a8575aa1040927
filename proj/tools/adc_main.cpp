#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "adc.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct WsHandle {
    adc_workspace* ws = nullptr;
    ~WsHandle() { adc_workspace_close(ws); }
};

struct CStr {
    char* p = nullptr;
    ~CStr() { adc_free(p); }
};

int fail(int status) {
    std::fprintf(stderr, "error: %s\n", adc_last_error());
    return status;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw CLI::ValidationError("--config", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string checksum(const std::string& path) {
    CStr hex;
    if (adc_checksum_file(path.c_str(), &hex.p) != ADC_OK) return "";
    return hex.p;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw CLI::ValidationError("--out", "cannot write " + path);
}

// One manifest per run, written next to the command's outputs.
struct Manifest {
    std::vector<std::string> command;
    std::string config_path;
    int64_t seed = -1;
    std::map<std::string, std::string> outputs;  // path -> checksum

    void add_output(const std::string& path) { outputs[path] = checksum(path); }

    void add_tree(const std::string& root) {
        std::vector<std::string> files;
        for (const auto& e : fs::recursive_directory_iterator(root))
            if (e.is_regular_file()) files.push_back(e.path().string());
        std::sort(files.begin(), files.end());
        for (const std::string& f : files)
            if (fs::path(f).filename() != "run_manifest.json") add_output(f);
    }

    void write(const std::string& path, double wall_s) const {
        json j;
        j["command"] = command;
        j["config_checksum"] =
            config_path.empty() ? json() : json(checksum(config_path));
        j["seed"] = seed < 0 ? json() : json(seed);
        j["versions"] = {{"adc", adc_version()}};
        json outs = json::object();
        for (const auto& [p, sum] : outputs) outs[p] = sum;
        j["outputs"] = outs;
        j["wall_time_s"] = wall_s;
        write_text(path, j.dump(1) + "\n");
    }
};

int open_ws(const std::string& root, WsHandle& h) {
    return adc_workspace_open(root.c_str(), &h.ws);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"agricultural data cube toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", adc_version());

    std::string workspace = ".";
    int threads = 0;
    app.add_option("-w,--workspace", workspace, "workspace directory")
        ->capture_default_str();
    app.add_option("--threads", threads, "worker threads (0 = all cores)");

    Manifest manifest;
    std::string manifest_path;
    std::function<int()> run;

    // synth
    {
        auto* sub = app.add_subcommand("synth", "generate a synthetic dataset");
        auto config = std::make_shared<std::string>();
        auto seed = std::make_shared<int64_t>(-1);
        sub->add_option("--config", *config, "synthetic scene config (json)")
            ->required();
        sub->add_option("--seed", *seed, "override the config seed");
        sub->callback([&, config, seed] {
            manifest.config_path = *config;
            manifest.seed = *seed;
            manifest_path = workspace + "/run_manifest.json";
            run = [&, config, seed]() -> int {
                WsHandle h;
                int rc = adc_synth(slurp(*config).c_str(), *seed,
                                   workspace.c_str(), &h.ws);
                if (rc != ADC_OK) return fail(rc);
                manifest.add_tree(workspace);
                return 0;
            };
        });
    }

    // ingest
    {
        auto* sub = app.add_subcommand("ingest", "ingest products into the cube");
        auto config = std::make_shared<std::string>();
        sub->add_option("--config", *config, "ingest config (json)")->required();
        sub->callback([&, config] {
            manifest.config_path = *config;
            manifest_path = workspace + "/run_manifest.json";
            run = [&, config]() -> int {
                WsHandle h;
                int rc = open_ws(workspace, h);
                if (rc != ADC_OK) return fail(rc);
                CStr report;
                rc = adc_ingest(h.ws, slurp(*config).c_str(), &report.p);
                if (rc != ADC_OK) return fail(rc);
                std::fputs(report.p, stdout);
                manifest.add_output(workspace + "/catalog.jsonl");
                return 0;
            };
        });
    }

    // rasterize
    {
        auto* sub = app.add_subcommand("rasterize", "rasterize parcels to labels");
        auto parcels = std::make_shared<std::string>();
        auto grid_id = std::make_shared<std::string>();
        sub->add_option("--parcels", *parcels, "parcel file (geojson subset)");
        sub->add_option("--grid", *grid_id, "expected grid CRS id");
        sub->callback([&, parcels, grid_id] {
            manifest.config_path = *parcels;
            manifest_path = workspace + "/run_manifest.json";
            run = [&, parcels, grid_id]() -> int {
                WsHandle h;
                int rc = open_ws(workspace, h);
                if (rc != ADC_OK) return fail(rc);
                if (!grid_id->empty()) {
                    CStr info;
                    rc = adc_grid_info(h.ws, &info.p);
                    if (rc != ADC_OK) return fail(rc);
                    if (json::parse(info.p).value("crs", "") != *grid_id) {
                        std::fprintf(stderr,
                                     "error: workspace grid is not %s\n",
                                     grid_id->c_str());
                        return 1;
                    }
                }
                int64_t n = 0;
                rc = adc_rasterize(
                    h.ws, parcels->empty() ? nullptr : parcels->c_str(), &n);
                if (rc != ADC_OK) return fail(rc);
                std::printf("labeled %lld parcels\n", (long long)n);
                manifest.add_output(workspace + "/labels.tiles");
                manifest.add_output(workspace + "/parcels.json");
                return 0;
            };
        });
    }

    // stats
    {
        auto* sub = app.add_subcommand("stats", "zonal statistics over parcels");
        struct Args {
            std::string stat = "mean", period = "month";
            std::vector<std::string> bands{"NDVI"};
            double inward = 0, cloud_buffer = 0, max_cloud = 1.0;
            int step_days = 0;
            std::string from, to, out;
        };
        auto a = std::make_shared<Args>();
        sub->add_option("--stat", a->stat, "mean|median|min|max|std|count|valid_fraction")
            ->capture_default_str();
        sub->add_option("--period", a->period, "day|month|season|year|range")
            ->capture_default_str();
        sub->add_option("--bands", a->bands, "bands (comma separated)")
            ->delimiter(',')
            ->capture_default_str();
        sub->add_option("--inward-buffer", a->inward, "parcel shrink in meters");
        sub->add_option("--cloud-buffer", a->cloud_buffer, "cloud mask dilation in meters");
        sub->add_option("--max-cloud", a->max_cloud, "skip scenes above this cloud fraction");
        sub->add_option("--step-days", a->step_days, "fixed window length, overrides --period");
        sub->add_option("--from", a->from, "start date, inclusive")->required();
        sub->add_option("--to", a->to, "end date, exclusive")->required();
        sub->add_option("--out", a->out, "output csv")->required();
        sub->callback([&, a] {
            manifest_path = a->out + ".manifest.json";
            run = [&, a]() -> int {
                WsHandle h;
                int rc = open_ws(workspace, h);
                if (rc != ADC_OK) return fail(rc);
                json req{{"statistic", a->stat}, {"period", a->period},
                         {"bands", a->bands},   {"inward_buffer_m", a->inward},
                         {"cloud_buffer_m", a->cloud_buffer},
                         {"max_cloud_cover", a->max_cloud},
                         {"step_days", a->step_days}};
                CStr csv;
                rc = adc_zonal_stats(h.ws, req.dump().c_str(), a->from.c_str(),
                                     a->to.c_str(), &csv.p);
                if (rc != ADC_OK) return fail(rc);
                write_text(a->out, csv.p);
                manifest.add_output(a->out);
                return 0;
            };
        });
    }

    // bench
    {
        auto* sub = app.add_subcommand(
            "bench", "grouped vs serial zonal statistics benchmark");
        struct Args {
            std::vector<int64_t> sizes{1000, 10000, 100000};
            std::string out, work_dir = "adc-bench-work";
            int months = 12, grid_size = 2048;
            double serial_budget = 120.0;
        };
        auto a = std::make_shared<Args>();
        sub->add_option("--sizes", a->sizes, "parcel counts (comma separated)")
            ->delimiter(',')
            ->capture_default_str();
        sub->add_option("--out", a->out, "output csv")->required();
        sub->add_option("--work-dir", a->work_dir, "scratch directory")
            ->capture_default_str();
        sub->add_option("--months", a->months, "monthly scenes per dataset")
            ->capture_default_str();
        sub->add_option("--grid-size", a->grid_size, "grid width and height in pixels")
            ->capture_default_str();
        sub->add_option("--serial-budget", a->serial_budget,
                        "skip serial legs projected beyond this many seconds (0 = run all)")
            ->capture_default_str();
        sub->callback([&, a] {
            manifest_path = a->out + ".manifest.json";
            run = [&, a]() -> int {
                json grid{{"origin_x", 0.0},   {"origin_y", 0.0},
                          {"pixel_size", 10.0}, {"width", a->grid_size},
                          {"height", a->grid_size}, {"crs", "EPSG:32632"}};
                json cfg{{"sizes", a->sizes},   {"grid", grid},
                         {"work_dir", a->work_dir}, {"months", a->months},
                         {"serial_budget_s", a->serial_budget},
                         {"threads", threads}};
                CStr csv;
                int rc = adc_benchmark(cfg.dump().c_str(), &csv.p);
                if (rc != ADC_OK) return fail(rc);
                write_text(a->out, csv.p);
                std::fputs(csv.p, stdout);
                manifest.add_output(a->out);
                return 0;
            };
        });
    }

    // sits
    {
        auto* sub = app.add_subcommand(
            "sits", "prepared time series for one parcel");
        struct Args {
            int64_t parcel = 0;
            std::string band = "NDVI", pipeline, from, to, out;
        };
        auto a = std::make_shared<Args>();
        sub->add_option("--parcel", a->parcel, "parcel id")->required();
        sub->add_option("--band", a->band, "band")->capture_default_str();
        sub->add_option("--pipeline", a->pipeline, "pipeline config (json)");
        sub->add_option("--from", a->from, "start date, inclusive")->required();
        sub->add_option("--to", a->to, "end date, exclusive")->required();
        sub->add_option("--out", a->out, "output csv")->required();
        sub->callback([&, a] {
            manifest.config_path = a->pipeline;
            manifest_path = a->out + ".manifest.json";
            run = [&, a]() -> int {
                WsHandle h;
                int rc = open_ws(workspace, h);
                if (rc != ADC_OK) return fail(rc);
                std::string pipeline;
                if (!a->pipeline.empty()) pipeline = slurp(a->pipeline);
                CStr csv;
                rc = adc_sits(h.ws, a->parcel, a->band.c_str(),
                              pipeline.empty() ? nullptr : pipeline.c_str(),
                              a->from.c_str(), a->to.c_str(), &csv.p);
                if (rc != ADC_OK) return fail(rc);
                write_text(a->out, csv.p);
                manifest.add_output(a->out);
                return 0;
            };
        });
    }

    // features
    {
        auto* sub = app.add_subcommand("features", "feature space export");
        struct Args {
            std::string level, spec, out;
        };
        auto a = std::make_shared<Args>();
        sub->add_option("--level", a->level, "pixel|parcel (overrides the spec)");
        sub->add_option("--spec", a->spec, "feature spec (json)")->required();
        sub->add_option("--out", a->out, "output csv")->required();
        sub->callback([&, a] {
            manifest.config_path = a->spec;
            manifest_path = a->out + ".manifest.json";
            run = [&, a]() -> int {
                WsHandle h;
                int rc = open_ws(workspace, h);
                if (rc != ADC_OK) return fail(rc);
                std::string spec = slurp(a->spec);
                if (!a->level.empty()) {
                    json j = json::parse(spec, nullptr, false);
                    if (j.is_discarded()) {
                        std::fprintf(stderr, "error: %s is not valid json\n",
                                     a->spec.c_str());
                        return 2;
                    }
                    j["level"] = a->level;
                    spec = j.dump();
                }
                CStr csv;
                rc = adc_features(h.ws, spec.c_str(), &csv.p);
                if (rc != ADC_OK) return fail(rc);
                write_text(a->out, csv.p);
                manifest.add_output(a->out);
                return 0;
            };
        });
    }

    // query
    {
        auto* sub = app.add_subcommand("query", "run a filter query");
        struct Args {
            std::string spec, out;
        };
        auto a = std::make_shared<Args>();
        sub->add_option("--spec", a->spec, "query spec (json)")->required();
        sub->add_option("--out", a->out, "output csv")->required();
        sub->callback([&, a] {
            manifest.config_path = a->spec;
            manifest_path = a->out + ".manifest.json";
            run = [&, a]() -> int {
                WsHandle h;
                int rc = open_ws(workspace, h);
                if (rc != ADC_OK) return fail(rc);
                CStr csv;
                rc = adc_query(h.ws, slurp(a->spec).c_str(), &csv.p);
                if (rc != ADC_OK) return fail(rc);
                write_text(a->out, csv.p);
                manifest.add_output(a->out);
                return 0;
            };
        });
    }

    // scenario
    {
        auto* sub = app.add_subcommand("scenario", "run a canned analysis");
        auto name = std::make_shared<std::string>();
        auto out_dir = std::make_shared<std::string>();
        sub->add_option("name", *name, "query1|query2|query3")->required();
        sub->add_option("--out-dir", *out_dir,
                        "output directory (default <workspace>/runs/<name>)");
        sub->callback([&, name, out_dir] {
            if (out_dir->empty()) *out_dir = workspace + "/runs/" + *name;
            manifest_path = *out_dir + "/run_manifest.json";
            run = [&, name, out_dir]() -> int {
                WsHandle h;
                int rc = open_ws(workspace, h);
                if (rc != ADC_OK) return fail(rc);
                CStr files;
                rc = adc_scenario(h.ws, name->c_str(), out_dir->c_str(),
                                  &files.p);
                if (rc != ADC_OK) return fail(rc);
                std::fputs(files.p, stdout);
                std::istringstream in(files.p);
                for (std::string line; std::getline(in, line);)
                    if (!line.empty()) manifest.add_output(line);
                return 0;
            };
        });
    }

    // animate
    {
        auto* sub = app.add_subcommand("animate", "render periodic composites");
        struct Args {
            int64_t parcel = 0;
            std::vector<double> bbox;
            std::string band = "NDVI", unit = "month", from, to, out_dir;
            int step_days = 0;
            double cloud_buffer = 0, max_cloud = 1.0;
        };
        auto a = std::make_shared<Args>();
        sub->add_option("--parcel", a->parcel, "parcel id");
        sub->add_option("--bbox", a->bbox, "min_x,min_y,max_x,max_y")
            ->delimiter(',')
            ->expected(4);
        sub->add_option("--band", a->band, "band")->capture_default_str();
        sub->add_option("--unit", a->unit, "day|month|season|year")
            ->capture_default_str();
        sub->add_option("--step-days", a->step_days,
                        "fixed frame length, overrides --unit");
        sub->add_option("--from", a->from, "start date, inclusive")->required();
        sub->add_option("--to", a->to, "end date, exclusive")->required();
        sub->add_option("--cloud-buffer", a->cloud_buffer,
                        "cloud mask dilation in meters");
        sub->add_option("--max-cloud", a->max_cloud,
                        "skip scenes above this cloud fraction");
        sub->add_option("--out-dir", a->out_dir, "output directory")->required();
        sub->callback([&, a] {
            manifest_path = a->out_dir + "/run_manifest.json";
            run = [&, a]() -> int {
                WsHandle h;
                int rc = open_ws(workspace, h);
                if (rc != ADC_OK) return fail(rc);
                json spec{{"band", a->band},     {"unit", a->unit},
                          {"step_days", a->step_days}, {"from", a->from},
                          {"to", a->to},         {"cloud_buffer_m", a->cloud_buffer},
                          {"max_cloud_cover", a->max_cloud}};
                if (a->parcel != 0) spec["parcel"] = a->parcel;
                if (!a->bbox.empty()) spec["bbox"] = a->bbox;
                CStr files;
                rc = adc_animate(h.ws, spec.dump().c_str(), a->out_dir.c_str(),
                                 &files.p);
                if (rc != ADC_OK) return fail(rc);
                std::fputs(files.p, stdout);
                std::istringstream in(files.p);
                for (std::string line; std::getline(in, line);)
                    if (!line.empty()) manifest.add_output(line);
                return 0;
            };
        });
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    if (!run) return 0;
    for (int i = 0; i < argc; ++i) manifest.command.push_back(argv[i]);
    if (threads > 0) adc_set_threads(threads);

    const auto t0 = std::chrono::steady_clock::now();
    int rc;
    try {
        rc = run();
    } catch (const CLI::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    if (rc != 0) return rc;

    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    try {
        manifest.write(manifest_path, wall);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
