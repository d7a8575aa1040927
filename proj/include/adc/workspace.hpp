#pragma once

#include <string>

#include "adc/catalog.hpp"
#include "adc/grid.hpp"
#include "adc/parcels.hpp"

namespace adc {

// On-disk dataset layout:
//   meta.json         grid definition and CRS
//   catalog.jsonl     product records
//   parcels.json      parcel feature collection
//   labels.tiles      rasterized parcel labels (i32)
//   truth.json        generator ground truth, when synthetic
//   kb.jsonl          knowledge base
//   cube/<sensor>/<YYYY-MM-DD>/<band>.tiles
class Workspace {
public:
    static Workspace create(const std::string& root, const GridSpec& grid);
    static Workspace open(const std::string& root);
    static bool exists(const std::string& root);

    const std::string& root() const { return root_; }
    const GridSpec& grid() const { return grid_; }
    Catalog& catalog() { return catalog_; }
    const Catalog& catalog() const { return catalog_; }

    std::string path(const std::string& rel) const;

    // Cached label raster; rebuilt from parcels.json when absent.
    LabelRaster labels();
    std::vector<Parcel> parcels() const;

private:
    Workspace() = default;

    std::string root_;
    GridSpec grid_;
    Catalog catalog_;
};

}  // namespace adc
