#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adc/parcels.hpp"
#include "adc/store.hpp"
#include "adc/zonal.hpp"

namespace adc {

// Target is one parcel (parcel_id > 0) or a map-unit box. Frames step through
// [day0, day1) by calendar unit, or by fixed windows when step_days is set.
struct AnimationSpec {
    int64_t parcel_id = 0;
    std::optional<BBox> box;
    BandId band = BandId::NDVI;
    Period unit = Period::Month;
    int step_days = 0;
    int64_t day0 = 0;
    int64_t day1 = 0;
    double cloud_buffer_m = 0;
    double max_cloud_cover_fraction = 1.0;

    void validate() const;  // throws UsageError
};

struct Frame {
    int64_t period_start = 0;
    std::string label;
    std::vector<float> values;        // mean composite, row-major
    std::vector<uint8_t> valid;
    std::optional<double> aggregate;  // parcel mean over the period
    int64_t n_valid_pixels = 0;
};

struct FrameSet {
    GridSpec grid;  // shared by every frame
    BandId band = BandId::NDVI;
    std::vector<Frame> frames;
    std::string reason;  // why frames is empty

    std::string aggregate_csv() const;  // period_start,value,n_valid_pixels
};

// Per-period mean composites over the target window with cloud masking
// applied whenever scene classification data exists. Parcel targets carry the
// parcel's zonal mean as the frame aggregate; periods with no valid samples
// have no aggregate. Frame count equals the number of periods in the range
// whenever any usable scene exists.
FrameSet animate(CubeStore& store, const LabelRaster& labels,
                 const std::vector<Parcel>& parcels, const AnimationSpec& spec);

// frame_<NNN>.ppm (binary pixmap, fixed colormap, invalid pixels black),
// aggregate.csv and frames.json under dir, which is created if needed.
std::vector<std::string> save_frames(const FrameSet& fs, const std::string& dir);

// Display range used by the colormap for a band's values.
std::pair<double, double> display_range(BandId band);

}  // namespace adc
