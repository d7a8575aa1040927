#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "adc/geometry.hpp"
#include "adc/grid.hpp"

namespace adc {

// Attribute scalar as it appears in parcel properties and the knowledge base.
using AttrValue = std::variant<double, std::string>;

struct Parcel {
    int64_t id = 0;  // > 0; 0 and -1 are reserved raster codes
    MultiPolygon geometry;
    std::string crop_declared;
    std::optional<std::string> crop_predicted;
    std::map<std::string, AttrValue> attributes;
};

constexpr int32_t kNoParcel = -1;

struct LabelRaster {
    GridSpec grid;
    std::vector<int32_t> labels;  // row-major, parcel id or kNoParcel

    LabelRaster() = default;
    explicit LabelRaster(GridSpec g)
        : grid(std::move(g)),
          labels(std::size_t(grid.width) * grid.height, kNoParcel) {}

    int32_t at(int r, int c) const { return labels[std::size_t(r) * grid.width + c]; }
    int32_t& at(int r, int c) { return labels[std::size_t(r) * grid.width + c]; }
};

struct RasterizeResult {
    LabelRaster labels;
    int64_t overlap_pixels = 0;  // pixel centers claimed by more than one parcel
};

// Labels each pixel whose center falls inside a parcel's geometry (holes
// excluded) with that parcel's id, background kNoParcel. Where parcels
// overlap the lowest id wins. Parallel over row blocks; the result does not
// depend on the partitioning.
RasterizeResult rasterize_parcels(const std::vector<Parcel>& parcels,
                                  const GridSpec& grid, int threads = 0);

// JSON feature collection (GeoJSON-compatible subset): Polygon/MultiPolygon
// geometries, properties id, crop_declared, optional crop_predicted; other
// scalar properties land in Parcel::attributes. Malformed features are
// reported with their index; duplicate ids are fatal.
std::vector<Parcel> load_parcels(const std::string& path);
void save_parcels(const std::string& path, const std::vector<Parcel>& parcels);

const Parcel* find_parcel(const std::vector<Parcel>& parcels, int64_t id);

void save_labels(const std::string& path, const LabelRaster& labels);
LabelRaster load_labels(const std::string& path);

}  // namespace adc
