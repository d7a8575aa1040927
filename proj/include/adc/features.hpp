#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "adc/grid.hpp"
#include "adc/sits.hpp"
#include "adc/zonal.hpp"

namespace adc {

// Scalar index; empty when either reflectance is invalid for the ratio.
std::optional<double> ndvi(double nir, double red);

// One-band NDVI cube derived from B04/B08. Pixels where either input is
// invalid, or the sum is not positive, come out invalid.
CubeArray ndvi(const CubeArray& cube);

// One timestep per calendar unit present in the input; per-pixel statistic
// over the valid observations of that unit. Zero observations leave the
// pixel invalid.
CubeArray temporal_composite(const CubeArray& cube, Period unit, Statistic stat);

// Season markers and curve summaries of one prepared series. Day-valued
// fields are expressed on the same time axis as ts.times; feature-space
// assembly converts them to day-of-year. A flat curve (amplitude below
// 1e-6) leaves sos/pos/eos NaN while the integrals stay defined.
struct PhenologyMetrics {
    double sos_day = 0;
    double pos_day = 0;
    double eos_day = 0;
    double amplitude = 0;
    double integral = 0;             // value-days over the full span
    double integral_above_base = 0;  // value-days above the curve minimum
    double max_derivative = 0;       // per day
    double min_derivative = 0;

    bool season_defined() const;
};

PhenologyMetrics phenology(const TimeSeries& ts, double amplitude_fraction = 0.5);

enum class FeatureLevel { Pixel, Parcel };

FeatureLevel feature_level_from_string(const std::string& s);

struct FeatureSpec {
    std::vector<BandId> bands = {BandId::NDVI};
    Period unit = Period::Month;
    std::vector<Statistic> stats = {Statistic::Mean};
    bool phenology = true;
    BandId phenology_band = BandId::NDVI;
    double amplitude_fraction = 0.5;
    PipelineConfig pipeline;  // preparation of the phenology curve

    void validate() const;
};

// Dense rows keyed by parcel id or row-major pixel index. Columns are the
// band-period-statistic composites in lexicographic name order followed by
// the seven phenology metrics (sos_day, pos_day, eos_day, amplitude,
// integral, integral_above_base, max_derivative). Missing cells carry a
// mask bit and an unspecified value, never an imputation.
struct FeatureSpace {
    std::vector<int64_t> keys;
    std::vector<std::string> names;
    std::vector<double> values;   // keys.size() x names.size()
    std::vector<uint8_t> missing;

    std::size_t n_rows() const { return keys.size(); }
    std::size_t n_cols() const { return names.size(); }
    double at(std::size_t r, std::size_t c) const { return values[r * names.size() + c]; }
    bool is_missing(std::size_t r, std::size_t c) const {
        return missing[r * names.size() + c] != 0;
    }

    std::string to_csv() const;  // value and mask column per feature
};

// Pixel level: composites and per-pixel phenology straight from the cube.
FeatureSpace build_feature_space(const CubeArray& cube, const FeatureSpec& spec,
                                 int threads = 0);

// Parcel level: composites come from grouped zonal statistics, the
// phenology curve from the parcel's daily mean series of phenology_band.
FeatureSpace build_feature_space(CubeStore& store, const LabelRaster& labels,
                                 const FeatureSpec& spec, const StatRequest& zonal_req,
                                 int64_t day0, int64_t day1, int threads = 0);

struct PatchSet {
    int h = 0, w = 0, stride = 0;
    std::vector<std::pair<int, int>> anchors;  // (row, col), stride lattice
    const CubeArray* cube = nullptr;

    std::size_t size() const { return anchors.size(); }
    CubeArray patch(std::size_t i) const;
    std::string manifest_json() const;
};

PatchSet extract_patches(const CubeArray& cube, int h, int w, int stride);

struct MowingEvent {
    int64_t parcel_id = 0;
    int64_t event_day = 0;
    double drop_magnitude = 0;
    double pre_event_value = 0;
};

struct MowingParams {
    double min_pre = 0.5;
    double min_drop = 0.25;
    int max_window_days = 15;
    int refractory_days = 30;
};

// Flags value drops of at least min_drop from a level of at least min_pre
// within max_window_days; event_day is the end of the steepest falling
// segment, and events closer than refractory_days collapse into the first.
std::vector<MowingEvent> detect_mowing(const TimeSeries& ts,
                                       const MowingParams& params = {});

}  // namespace adc
