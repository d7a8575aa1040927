#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adc/grid.hpp"
#include "adc/workspace.hpp"

namespace adc {

// Seasonal NDVI curve: two logistic segments meeting at the peak day, so the
// maximum sits at a well-defined kink rather than a flat plateau. Values run
// from base in dormancy up to peak and back.
struct CropParams {
    double base = 0.15;
    double peak = 0.8;
    double pos_day = 200;    // day of year of the maximum
    double rise_days = 60;   // green-up window length
    double fall_days = 50;   // senescence window length
};

double seasonal_value(const CropParams& p, double day_of_year);

// Built-in crop presets: MAIZ, WHEA, GRAS, GRAS_LOW, BARE.
const CropParams& crop_preset(const std::string& code);
bool is_grass_crop(const std::string& code);

struct MismatchSpec {
    int64_t parcel_id = 0;  // 0 = assign deterministically at generation
    std::string declared;
    std::string actual;
};

struct MowingSpec {
    int64_t parcel_id = 0;  // 0 = assign to a grassland parcel
    std::vector<int64_t> dates;
    double drop = 0.4;
};

struct SyntheticConfig {
    GridSpec grid{0, 0, 10, 512, 512, "EPSG:32632"};
    int n_parcels = 500;
    int64_t start_day = 0;
    int64_t end_day = 0;
    int revisit_days = 5;
    int s1_revisit_days = 0;  // 0 = no S1 products
    std::map<std::string, double> crop_mix = {{"MAIZ", 0.4},
                                              {"WHEA", 0.3},
                                              {"GRAS", 0.3}};
    double noise_sigma = 0.02;
    double cloud_probability = 0.0;       // chance of cloud blobs per scene
    double full_cloud_probability = 0.0;  // chance a scene is fully clouded
    std::vector<int64_t> full_cloud_dates;
    std::vector<MismatchSpec> mismatches;
    std::vector<MowingSpec> mowing;
    uint64_t seed = 1;

    void validate() const;
};

SyntheticConfig synthetic_config_from_json(const std::string& text);
std::string synthetic_config_to_json(const SyntheticConfig& cfg);

struct SeasonTruth {
    int year = 0;
    double sos = 0, pos = 0, eos = 0;  // day of year
};

struct ParcelTruth {
    int64_t parcel_id = 0;
    std::string crop_actual;
    std::string crop_declared;
    CropParams params;  // jitter already applied
    std::vector<SeasonTruth> seasons;
    std::vector<MowingSpec> mowing;
};

struct DatasetTruth {
    std::vector<ParcelTruth> parcels;
    uint64_t seed = 0;

    const ParcelTruth* find(int64_t parcel_id) const;
};

// Noise-free parcel NDVI at an absolute day, mowing overlay included.
double truth_value(const ParcelTruth& t, int64_t day);

DatasetTruth load_truth(const std::string& path);

// Builds a complete workspace at root: parcels, label raster, truth, and one
// product per scene date ingested through the catalog. Deterministic per
// seed. Fails when n_parcels cannot be placed without overlap.
Workspace generate_synthetic_dataset(const SyntheticConfig& cfg,
                                     const std::string& root);

}  // namespace adc
