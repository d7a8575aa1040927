#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adc/dates.hpp"
#include "adc/grid.hpp"
#include "adc/parcels.hpp"
#include "adc/store.hpp"

namespace adc {

enum class Statistic { Mean, Median, Min, Max, Std, Count, ValidFraction };

const char* statistic_name(Statistic s);
Statistic statistic_from_string(const std::string& s);  // throws UsageError

struct StatRequest {
    Statistic statistic = Statistic::Mean;
    Period period = Period::Month;
    int step_days = 0;  // > 0: fixed windows of this many days override period
    std::vector<BandId> bands = {BandId::NDVI};
    double buffer_inward_m = 0;
    double cloud_buffer_m = 0;
    double max_cloud_cover_fraction = 1.0;  // scenes above this are dropped
    bool approximate_median = false;        // P-squared estimator, flagged

    void validate() const;  // throws UsageError
};

// Period key for a scene day under a request: calendar period_start, or the
// fixed-size window anchored at range_start when step_days is set.
int64_t request_period_start(const StatRequest& req, int64_t day,
                             int64_t range_start);

struct StatRecord {
    int64_t parcel_id = 0;
    int64_t period_start = 0;
    BandId band = BandId::NDVI;
    Statistic statistic = Statistic::Mean;
    double value = 0;
    int64_t n_valid_pixels = 0;
};

// Cells whose pixel sample set is empty produce no record, so every record
// carries a defined value. std is the population convention; median of an
// even sample count is the midpoint of the two central values.
struct ZonalStatsTable {
    std::vector<StatRecord> records;
    StatRequest request;
    std::string cube_id;
    std::string labels_id;
    bool approximate = false;  // median came from the streaming estimator

    void sort_canonical();  // (parcel_id, period_start, band)
    std::string to_csv() const;
};

// One pass over every timestep slice, accumulating per-label aggregates via
// a dense parcel-id remap. Scene-level cloud cover is measured on the cube's
// own SCL band over the full grid; masking, erosion and aggregation follow.
// Output is independent of the worker count.
ZonalStatsTable zonal_stats_grouped(const CubeArray& cube,
                                    const LabelRaster& labels,
                                    const StatRequest& req,
                                    int64_t range_start = INT64_MIN,
                                    int threads = 0);

// The baseline the grouped engine is measured against: for each parcel in
// turn, crop the cube to the parcel's bounding box, rasterize that parcel
// alone, and aggregate the window. Identical record sets to grouped as long
// as parcels do not overlap (overlap resolution differs: grouped assigns
// contested pixels to the lowest id, a solo rasterization cannot know about
// its neighbors).
ZonalStatsTable zonal_stats_serial(const CubeArray& cube,
                                   const std::vector<Parcel>& parcels,
                                   const StatRequest& req,
                                   int64_t range_start = INT64_MIN);

// Storage-backed drivers: same semantics with the cube served from tile
// files. Grouped loads the range once; serial issues one windowed read per
// parcel and scene, which is precisely the access pattern whose cost the
// benchmark exposes.
ZonalStatsTable zonal_stats_grouped(CubeStore& store, const LabelRaster& labels,
                                    const StatRequest& req, int64_t day0,
                                    int64_t day1, int threads = 0,
                                    LoadStats* io = nullptr);
ZonalStatsTable zonal_stats_serial(CubeStore& store,
                                   const std::vector<Parcel>& parcels,
                                   const StatRequest& req, int64_t day0,
                                   int64_t day1, LoadStats* io = nullptr);

struct BenchRow {
    int64_t n_parcels = 0;
    std::string method;      // grouped | serial
    double wall_time_s = 0;
    bool skipped = false;    // over the serial time budget
};

struct BenchReport {
    std::vector<BenchRow> rows;
    std::string environment;

    std::string to_csv() const;    // n_parcels,method,wall_time_s
    std::string to_table() const;
};

// Monthly means over `months` synthetic scenes for each parcel count, both
// methods on identical data. The serial leg of a size is skipped with a
// budget-exceeded marker when its projected time (linear in parcel count
// from the previous measurement) exceeds serial_budget_s; 0 lifts the
// budget. Datasets are generated under work_dir and removed afterwards.
BenchReport run_benchmark(const std::vector<int64_t>& sizes,
                          const GridSpec& grid, const std::string& work_dir,
                          int months = 12, int n_bands = 1,
                          double serial_budget_s = 120.0, int threads = 0);

}  // namespace adc
