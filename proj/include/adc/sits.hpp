#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace adc {

enum class Provenance : uint8_t { Observed, Filled };

struct TimeSeries {
    std::vector<int64_t> times;  // days, strictly increasing
    std::vector<double> values;
    std::vector<uint8_t> valid;
    std::vector<Provenance> prov;  // meaningful only where valid

    std::size_t size() const { return times.size(); }
    std::size_t count_valid() const;
    void validate() const;  // throws PreconditionError

    static TimeSeries observed(std::vector<int64_t> times, std::vector<double> values,
                               std::vector<uint8_t> valid = {});
};

enum class InterpMethod { Linear, Cubic };
enum class ResampleAgg { Mean, Median, Min, Max };

InterpMethod interp_method_from_string(const std::string& s);

struct PipelineConfig {
    bool filter_enabled = true;
    double value_min = -1.0;
    double value_max = 1.0;
    std::optional<double> spike_threshold;  // absolute change per day

    bool interpolate_enabled = true;
    InterpMethod method = InterpMethod::Linear;

    bool resample_enabled = false;
    int step_days = 10;
    bool resample_fill = true;  // interpolate empty windows

    bool smooth_enabled = true;
    int window_points = 3;  // odd

    void validate() const;
};

// Range and spike screening. Marks points invalid, never removes them. A
// spike is a point whose rate of change to both nearest valid neighbors
// exceeds spike_threshold; all spikes are judged against the input validity
// in one simultaneous pass.
TimeSeries filter_outliers(const TimeSeries& ts, const PipelineConfig& cfg);

// Fills invalid points strictly between the first and last valid time and
// flags them Filled. Observed points pass through bit-exactly. No
// extrapolation. Needs 2 valid points for linear, 4 for cubic.
TimeSeries interpolate(const TimeSeries& ts, InterpMethod method);

// Regular grid from times.front() to times.back() inclusive, step step_days.
// Each sample aggregates valid points in [t, t+step); an empty window is
// linearly interpolated at t when fill_empty is set, otherwise invalid.
TimeSeries resample_series(const TimeSeries& ts, int step_days,
                           ResampleAgg agg = ResampleAgg::Mean,
                           bool fill_empty = true);

// Centered rolling median across the valid subsequence; points without a
// complete window keep their values. window_points must be odd.
TimeSeries smooth(const TimeSeries& ts, int window_points);

// filter -> interpolate -> resample -> smooth, honoring the stage toggles.
TimeSeries prepare(const TimeSeries& ts, const PipelineConfig& cfg);

// Flat JSON object; absent keys keep their defaults.
PipelineConfig pipeline_config_from_json(const std::string& text);
std::string pipeline_config_to_json(const PipelineConfig& cfg);

// CSV with header date,value,valid,provenance.
std::string series_csv(const TimeSeries& ts);
void write_series_csv(const std::string& path, const TimeSeries& ts);
TimeSeries read_series_csv(const std::string& path);

}  // namespace adc
