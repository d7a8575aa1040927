#pragma once

#include <cstdint>
#include <set>
#include <vector>

#include "adc/grid.hpp"
#include "adc/parcels.hpp"

namespace adc {

struct SceneClassMask {
    GridSpec grid;
    std::vector<int16_t> codes;  // SceneClass values, row-major

    SceneClassMask() = default;
    explicit SceneClassMask(GridSpec g, int16_t fill = kSclClear)
        : grid(std::move(g)), codes(std::size_t(grid.width) * grid.height, fill) {}

    int16_t at(int r, int c) const { return codes[std::size_t(r) * grid.width + c]; }
    int16_t& at(int r, int c) { return codes[std::size_t(r) * grid.width + c]; }
};

struct PixelMask {
    GridSpec grid;
    std::vector<uint8_t> bits;  // 1 = masked/invalid

    PixelMask() = default;
    explicit PixelMask(GridSpec g, bool fill = false)
        : grid(std::move(g)),
          bits(std::size_t(grid.width) * grid.height, fill ? 1 : 0) {}

    bool at(int r, int c) const { return bits[std::size_t(r) * grid.width + c] != 0; }
    void set(int r, int c, bool v) { bits[std::size_t(r) * grid.width + c] = v ? 1 : 0; }
    std::size_t count() const;
};

// True where code is in masked_codes; nodata pixels are always masked.
PixelMask class_mask(const SceneClassMask& scl, const std::set<int16_t>& masked_codes);

// Exact squared Euclidean distance to the nearest seed pixel, in pixel units,
// center to center. Pixels with no seed anywhere get a huge finite value.
// seeds is row-major width*height, nonzero = seed.
std::vector<double> distance_transform_sq(const uint8_t* seeds, int width, int height);

// Outward buffer: true iff distance from the pixel center to the nearest
// originally-true pixel center is <= radius_m. radius 0 keeps the input.
PixelMask dilate_mask(const PixelMask& mask, double radius_m);

// Inward buffer: a pixel keeps its label iff every pixel center within
// radius_m carries the same label; pixels beyond the raster edge do not
// count against it. Neighboring parcels erode each other's shared boundary.
LabelRaster erode_labels(const LabelRaster& labels, double radius_m, int threads = 0);

// Clears the valid bit where mask is true, on the listed timesteps (all when
// times is empty). Values stay untouched. Throws PreconditionError when the
// grids differ.
CubeArray apply_mask(const CubeArray& cube, const PixelMask& mask,
                     const std::vector<int64_t>& times = {});

// Reads the SCL codes of one timestep out of a cube that carries the band.
SceneClassMask scl_slice(const CubeArray& cube, int t);

// Per-scene cloud/shadow masking driven by the cube's own SCL band: for each
// timestep, masked classes (plus nodata) are dilated by cloud_buffer_m and
// the result clears validity on every other band. Cubes without an SCL band
// pass through unchanged.
CubeArray apply_scene_masks(const CubeArray& cube, double cloud_buffer_m,
                            const std::set<int16_t>& masked_codes = {kSclCloud,
                                                                     kSclShadow});

}  // namespace adc
