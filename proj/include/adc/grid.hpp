#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adc/dates.hpp"

namespace adc {

// Axis-aligned box in CRS meters. The engine uses image orientation
// throughout: y grows downward, origin at the top-left corner.
struct BBox {
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;

    bool intersects(const BBox& o) const {
        return min_x < o.max_x && o.min_x < max_x && min_y < o.max_y && o.min_y < max_y;
    }
    bool contains(double x, double y) const {
        return x >= min_x && x < max_x && y >= min_y && y < max_y;
    }
    BBox expanded(double margin) const {
        return {min_x - margin, min_y - margin, max_x + margin, max_y + margin};
    }
};

// Pixel window: rows [row, row+nrows), cols [col, col+ncols).
struct PixelBox {
    int row = 0, col = 0, nrows = 0, ncols = 0;
    bool empty() const { return nrows <= 0 || ncols <= 0; }
};

struct GridSpec {
    double origin_x = 0;    // top-left corner, meters
    double origin_y = 0;
    double pixel_size = 10; // meters
    int width = 0;          // pixels
    int height = 0;
    std::string crs_id;

    bool operator==(const GridSpec&) const = default;

    // Pixel-center sampling convention shared by rasterization, resampling
    // and morphology: center of (row, col) is origin + (col+0.5, row+0.5)*px.
    double center_x(int col) const { return origin_x + (col + 0.5) * pixel_size; }
    double center_y(int row) const { return origin_y + (row + 0.5) * pixel_size; }
    double col_coord(double x) const { return (x - origin_x) / pixel_size - 0.5; }
    double row_coord(double y) const { return (y - origin_y) / pixel_size - 0.5; }

    BBox extent() const {
        return {origin_x, origin_y, origin_x + width * pixel_size,
                origin_y + height * pixel_size};
    }

    // Pixels whose centers fall in the half-open box [min,max) x [min,max),
    // clipped to the grid. A box equal to one pixel cell selects that pixel.
    PixelBox window_for(const BBox& box) const;

    // Sub-grid with shifted origin.
    GridSpec sub_grid(const PixelBox& w) const;

    void validate() const;  // throws PreconditionError
};

// ---- bands ----------------------------------------------------------------

enum class BandId : uint8_t {
    B02, B03, B04, B08, NDVI, SIGMA0_VV, SIGMA0_VH, COHERENCE_VV, SCL
};

struct BandInfo {
    const char* name;
    const char* unit;
    double lo, hi;        // valid range
    bool categorical;
};

const BandInfo& band_info(BandId b);
const char* band_name(BandId b);
BandId band_from_string(const std::string& s);  // throws UsageError
inline bool band_categorical(BandId b) { return band_info(b).categorical; }

// Scene classification codes (SCL band values).
enum SceneClass : int16_t {
    kSclNodata = 0, kSclClear = 1, kSclCloud = 2,
    kSclShadow = 3, kSclWater = 4, kSclSnow = 5
};

// ---- rasters ---------------------------------------------------------------

constexpr float kDefaultNodata = -9999.0f;

struct Raster {
    GridSpec grid;
    std::vector<float> values;  // row-major, height*width
    float nodata = kDefaultNodata;

    Raster() = default;
    Raster(GridSpec g, float fill, float nd = kDefaultNodata);

    float at(int r, int c) const { return values[std::size_t(r) * grid.width + c]; }
    float& at(int r, int c) { return values[std::size_t(r) * grid.width + c]; }
    bool is_nodata(int r, int c) const { return at(r, c) == nodata; }
    std::size_t size() const { return values.size(); }
};

// ---- the cube ---------------------------------------------------------------

// Dense (time, band, y, x) array with a validity mask. Immutable by
// convention after construction; safe for concurrent reads.
class CubeArray {
public:
    CubeArray() = default;
    CubeArray(GridSpec grid, std::vector<int64_t> times, std::vector<BandId> bands);

    const GridSpec& grid() const { return grid_; }
    const std::vector<int64_t>& times() const { return times_; }
    const std::vector<BandId>& bands() const { return bands_; }
    int n_times() const { return int(times_.size()); }
    int n_bands() const { return int(bands_.size()); }
    int height() const { return grid_.height; }
    int width() const { return grid_.width; }
    bool empty() const { return times_.empty() || bands_.empty() || grid_.width == 0; }

    std::size_t index(int t, int b, int r, int c) const {
        return ((std::size_t(t) * bands_.size() + b) * grid_.height + r) * grid_.width + c;
    }
    float value(int t, int b, int r, int c) const { return values_[index(t, b, r, c)]; }
    bool valid(int t, int b, int r, int c) const { return valid_[index(t, b, r, c)] != 0; }
    void set(int t, int b, int r, int c, float v, bool ok) {
        std::size_t i = index(t, b, r, c);
        values_[i] = v;
        valid_[i] = ok ? 1 : 0;
    }
    void set_valid(int t, int b, int r, int c, bool ok) {
        valid_[index(t, b, r, c)] = ok ? 1 : 0;
    }

    // Raw slabs for hot loops: one (t, b) slice is height*width contiguous.
    const float* slice_values(int t, int b) const { return values_.data() + index(t, b, 0, 0); }
    const uint8_t* slice_valid(int t, int b) const { return valid_.data() + index(t, b, 0, 0); }
    float* slice_values(int t, int b) { return values_.data() + index(t, b, 0, 0); }
    uint8_t* slice_valid(int t, int b) { return valid_.data() + index(t, b, 0, 0); }

    int time_index(int64_t day) const;   // -1 if absent
    int band_index(BandId b) const;      // -1 if absent

    std::size_t count_valid() const;

private:
    GridSpec grid_;
    std::vector<int64_t> times_;   // strictly increasing
    std::vector<BandId> bands_;    // unique
    std::vector<float> values_;
    std::vector<uint8_t> valid_;
};

// ---- operations -------------------------------------------------------------

enum class ResampleMethod { Nearest, Bilinear };

ResampleMethod resample_method_from_string(const std::string& s);

// Samples each target pixel at its center coordinate in src. Out-of-extent
// pixels become nodata. Bilinear weights are renormalized over the valid
// in-range neighbors, so a constant field stays constant up to the edge.
// Throws PreconditionError on CRS mismatch or bilinear over a categorical band.
Raster resample_to_grid(const Raster& src, const GridSpec& target,
                        ResampleMethod method, bool categorical = false);

struct CubeSlice {
    int64_t day = 0;
    BandId band = BandId::NDVI;
    Raster raster;
};

// Dense cube from per-(day, band) rasters. Slices not on the target grid are
// resampled (nearest for categorical bands). Absent (day, band) combinations
// are all-invalid. A duplicate (day, band) pair with identical data is
// dropped; with conflicting data it throws PreconditionError.
CubeArray stack_cube(std::vector<CubeSlice> slices, const GridSpec& target,
                     ResampleMethod method = ResampleMethod::Nearest);

// Sub-cube copy. Time interval is half-open [start, end). Empty selections
// give empty cubes, not errors.
CubeArray select(const CubeArray& cube,
                 std::optional<std::pair<int64_t, int64_t>> time_range = {},
                 std::optional<std::vector<BandId>> bands = {},
                 std::optional<BBox> bbox = {});

// Same, with the pixel window given directly.
CubeArray select_window(const CubeArray& cube,
                        std::optional<std::pair<int64_t, int64_t>> time_range,
                        std::optional<std::vector<BandId>> bands,
                        const PixelBox& window);

}  // namespace adc
