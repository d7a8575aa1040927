#include "adc/workspace.hpp"

#include <filesystem>

#include <json.hpp>

#include "adc/errors.hpp"
#include "adc/util.hpp"

namespace fs = std::filesystem;

namespace adc {

using nlohmann::json;

namespace {

json grid_to_json(const GridSpec& g) {
    return json{{"origin_x", g.origin_x}, {"origin_y", g.origin_y},
                {"pixel_size", g.pixel_size}, {"width", g.width},
                {"height", g.height}, {"crs", g.crs_id}};
}

GridSpec grid_from_json(const json& j) {
    GridSpec g;
    g.origin_x = j.at("origin_x").get<double>();
    g.origin_y = j.at("origin_y").get<double>();
    g.pixel_size = j.at("pixel_size").get<double>();
    g.width = j.at("width").get<int>();
    g.height = j.at("height").get<int>();
    g.crs_id = j.value("crs", "");
    g.validate();
    return g;
}

}  // namespace

bool Workspace::exists(const std::string& root) {
    return fs::exists(fs::path(root) / "meta.json");
}

Workspace Workspace::create(const std::string& root, const GridSpec& grid) {
    grid.validate();
    fs::create_directories(root);
    Workspace ws;
    ws.root_ = root;
    ws.grid_ = grid;
    json meta{{"format", "adc-workspace"}, {"grid", grid_to_json(grid)}};
    write_file_atomic(ws.path("meta.json"), meta.dump(1) + "\n");
    ws.catalog_ = Catalog(ws.path("catalog.jsonl"));
    return ws;
}

Workspace Workspace::open(const std::string& root) {
    const std::string meta_path = (fs::path(root) / "meta.json").string();
    if (!fs::exists(meta_path))
        throw DataError(root + ": not a workspace (missing meta.json)");
    json meta;
    try {
        meta = json::parse(read_text_file(meta_path));
    } catch (const json::exception& e) {
        throw DataError(meta_path + ": invalid JSON: " + e.what());
    }
    Workspace ws;
    ws.root_ = root;
    try {
        ws.grid_ = grid_from_json(meta.at("grid"));
    } catch (const json::exception& e) {
        throw DataError(meta_path + ": bad grid: " + e.what());
    }
    ws.catalog_ = Catalog(ws.path("catalog.jsonl"));
    return ws;
}

std::string Workspace::path(const std::string& rel) const {
    return (fs::path(root_) / rel).string();
}

std::vector<Parcel> Workspace::parcels() const {
    const std::string p = path("parcels.json");
    if (!fs::exists(p)) throw DataError(root_ + ": no parcels.json");
    return load_parcels(p);
}

LabelRaster Workspace::labels() {
    const std::string p = path("labels.tiles");
    if (fs::exists(p)) {
        LabelRaster lr = load_labels(p);
        lr.grid.crs_id = grid_.crs_id;
        if (!(lr.grid == grid_))
            throw DataError(root_ + ": labels.tiles grid does not match meta.json");
        return lr;
    }
    RasterizeResult rr = rasterize_parcels(parcels(), grid_);
    save_labels(p, rr.labels);
    return std::move(rr.labels);
}

}  // namespace adc
