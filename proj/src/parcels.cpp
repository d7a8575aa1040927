#include "adc/parcels.hpp"

#include <algorithm>
#include <atomic>
#include <limits>
#include <set>

#include <json.hpp>

#include "adc/errors.hpp"
#include "adc/tile_io.hpp"
#include "adc/util.hpp"

namespace adc {

using nlohmann::json;

RasterizeResult rasterize_parcels(const std::vector<Parcel>& parcels,
                                  const GridSpec& grid, int threads) {
    grid.validate();
    std::set<int64_t> ids;
    for (const Parcel& p : parcels) {
        if (p.id <= 0)
            throw DataError("parcel id " + std::to_string(p.id) + " is not positive");
        if (!ids.insert(p.id).second)
            throw DataError("duplicate parcel id " + std::to_string(p.id));
        validate_geometry(p.geometry);
        if (p.id > std::numeric_limits<int32_t>::max())
            throw DataError("parcel id " + std::to_string(p.id) +
                            " exceeds label raster range");
    }

    // Candidates sorted by id so the first hit per pixel is the winner.
    struct Cand {
        const Parcel* parcel;
        PixelBox window;
    };
    std::vector<Cand> cands;
    cands.reserve(parcels.size());
    for (const Parcel& p : parcels) {
        PixelBox w = grid.window_for(geometry_bbox(p.geometry));
        if (!w.empty()) cands.push_back({&p, w});
    }
    std::sort(cands.begin(), cands.end(),
              [](const Cand& a, const Cand& b) { return a.parcel->id < b.parcel->id; });

    RasterizeResult out;
    out.labels = LabelRaster(grid);
    std::atomic<int64_t> overlaps{0};

    const int block = 64;
    const std::size_t n_blocks = std::size_t((grid.height + block - 1) / block);

    // Row-block index over candidate windows.
    std::vector<std::vector<const Cand*>> by_block(n_blocks);
    for (const Cand& c : cands) {
        std::size_t b0 = std::size_t(c.window.row) / block;
        std::size_t b1 = std::size_t(c.window.row + c.window.nrows - 1) / block;
        for (std::size_t b = b0; b <= b1; ++b) by_block[b].push_back(&c);
    }

    parallel_for(n_blocks, [&](std::size_t bi) {
        const int r0 = int(bi) * block;
        const int r1 = std::min(grid.height, r0 + block);
        int64_t local_overlaps = 0;
        for (const Cand* c : by_block[bi]) {
            const int pr0 = std::max(r0, c->window.row);
            const int pr1 = std::min(r1, c->window.row + c->window.nrows);
            const int pc0 = c->window.col;
            const int pc1 = c->window.col + c->window.ncols;
            const int32_t id = int32_t(c->parcel->id);
            for (int r = pr0; r < pr1; ++r) {
                const double y = grid.center_y(r);
                for (int cc = pc0; cc < pc1; ++cc) {
                    Point pt{grid.center_x(cc), y};
                    if (!point_in_polygon(pt, c->parcel->geometry)) continue;
                    int32_t& cell = out.labels.at(r, cc);
                    if (cell == kNoParcel) {
                        cell = id;
                    } else {
                        ++local_overlaps;  // candidates are id-sorted, keep first
                    }
                }
            }
        }
        overlaps += local_overlaps;
    }, threads);

    out.overlap_pixels = overlaps.load();
    return out;
}

namespace {

Ring parse_ring(const json& arr, std::size_t feature, const char* what) {
    std::string where = "feature " + std::to_string(feature) + ": " + what;
    if (!arr.is_array() || arr.size() < 4)
        throw DataError(where + ": ring needs at least 4 points");
    Ring r;
    r.reserve(arr.size());
    for (const auto& pt : arr) {
        if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number())
            throw DataError(where + ": point is not [x, y]");
        r.push_back({pt[0].get<double>(), pt[1].get<double>()});
    }
    try {
        validate_ring(r, what);
    } catch (const DataError& e) {
        throw DataError("feature " + std::to_string(feature) + ": " + e.what());
    }
    return r;
}

Polygon parse_polygon(const json& coords, std::size_t feature) {
    if (!coords.is_array() || coords.empty())
        throw DataError("feature " + std::to_string(feature) +
                        ": polygon has no rings");
    Polygon p;
    p.exterior = parse_ring(coords[0], feature, "exterior");
    for (std::size_t h = 1; h < coords.size(); ++h)
        p.holes.push_back(parse_ring(coords[h], feature,
                                     ("hole " + std::to_string(h - 1)).c_str()));
    try {
        validate_polygon(p);
    } catch (const DataError& e) {
        throw DataError("feature " + std::to_string(feature) + ": " + e.what());
    }
    return p;
}

json ring_to_json(const Ring& r) {
    json arr = json::array();
    for (const Point& p : r) arr.push_back(json::array({p.x, p.y}));
    return arr;
}

json polygon_coords(const Polygon& p) {
    json arr = json::array();
    arr.push_back(ring_to_json(p.exterior));
    for (const Ring& h : p.holes) arr.push_back(ring_to_json(h));
    return arr;
}

}  // namespace

std::vector<Parcel> load_parcels(const std::string& path) {
    json doc;
    try {
        doc = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" ||
        !doc.contains("features") || !doc["features"].is_array())
        throw DataError(path + ": expected a FeatureCollection");

    std::vector<Parcel> parcels;
    std::set<int64_t> ids;
    const json& feats = doc["features"];
    for (std::size_t i = 0; i < feats.size(); ++i) {
        const json& f = feats[i];
        const std::string where = "feature " + std::to_string(i);
        if (!f.is_object() || !f.contains("geometry") || !f.contains("properties"))
            throw DataError(path + ": " + where + ": missing geometry or properties");

        Parcel p;
        const json& props = f["properties"];
        if (!props.contains("id") || !props["id"].is_number_integer())
            throw DataError(path + ": " + where + ": missing integer property 'id'");
        p.id = props["id"].get<int64_t>();
        if (p.id <= 0)
            throw DataError(path + ": " + where + ": id must be positive");
        if (!ids.insert(p.id).second)
            throw DataError(path + ": " + where + ": duplicate parcel id " +
                            std::to_string(p.id));

        p.crop_declared = props.value("crop_declared", "");
        if (props.contains("crop_predicted") && props["crop_predicted"].is_string())
            p.crop_predicted = props["crop_predicted"].get<std::string>();
        for (auto it = props.begin(); it != props.end(); ++it) {
            if (it.key() == "id" || it.key() == "crop_declared" ||
                it.key() == "crop_predicted")
                continue;
            if (it->is_number())
                p.attributes[it.key()] = it->get<double>();
            else if (it->is_string())
                p.attributes[it.key()] = it->get<std::string>();
        }

        const json& g = f["geometry"];
        const std::string gtype = g.is_object() ? g.value("type", "") : "";
        try {
            if (gtype == "Polygon") {
                p.geometry.parts.push_back(parse_polygon(g.at("coordinates"), i));
            } else if (gtype == "MultiPolygon") {
                const json& coords = g.at("coordinates");
                if (!coords.is_array() || coords.empty())
                    throw DataError("feature " + std::to_string(i) +
                                    ": MultiPolygon has no parts");
                for (const auto& part : coords)
                    p.geometry.parts.push_back(parse_polygon(part, i));
            } else {
                throw DataError("feature " + std::to_string(i) +
                                ": unsupported geometry type '" + gtype + "'");
            }
        } catch (const json::exception& e) {
            throw DataError(path + ": " + where + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError(path + ": " + e.what());
        }

        if (polygon_area(p.geometry) <= 0)
            throw DataError(path + ": " + where + ": geometry area is zero");
        parcels.push_back(std::move(p));
    }
    return parcels;
}

void save_parcels(const std::string& path, const std::vector<Parcel>& parcels) {
    json feats = json::array();
    for (const Parcel& p : parcels) {
        json props;
        props["id"] = p.id;
        props["crop_declared"] = p.crop_declared;
        if (p.crop_predicted) props["crop_predicted"] = *p.crop_predicted;
        for (const auto& [k, v] : p.attributes) {
            if (std::holds_alternative<double>(v))
                props[k] = std::get<double>(v);
            else
                props[k] = std::get<std::string>(v);
        }
        json geom;
        if (p.geometry.parts.size() == 1) {
            geom["type"] = "Polygon";
            geom["coordinates"] = polygon_coords(p.geometry.parts[0]);
        } else {
            geom["type"] = "MultiPolygon";
            json parts = json::array();
            for (const Polygon& part : p.geometry.parts)
                parts.push_back(polygon_coords(part));
            geom["coordinates"] = parts;
        }
        feats.push_back({{"type", "Feature"},
                         {"properties", std::move(props)},
                         {"geometry", std::move(geom)}});
    }
    json doc{{"type", "FeatureCollection"}, {"features", std::move(feats)}};
    write_file_atomic(path, doc.dump(1) + "\n");
}

const Parcel* find_parcel(const std::vector<Parcel>& parcels, int64_t id) {
    for (const Parcel& p : parcels)
        if (p.id == id) return &p;
    return nullptr;
}

void save_labels(const std::string& path, const LabelRaster& labels) {
    tiles::write_tiles(path, labels.grid, tiles::DType::I32, labels.labels.data(),
                       double(kNoParcel));
}

LabelRaster load_labels(const std::string& path) {
    LabelRaster lr;
    tiles::TileFileInfo info = tiles::read_tiles(path, lr.labels);
    lr.grid = info.grid;
    return lr;
}

}  // namespace adc
