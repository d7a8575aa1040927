#pragma once

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "adc/grid.hpp"
#include "adc/parcels.hpp"

namespace testutil {

inline adc::GridSpec make_grid(int w, int h, double px = 10.0,
                               double ox = 0.0, double oy = 0.0) {
    adc::GridSpec g;
    g.origin_x = ox;
    g.origin_y = oy;
    g.pixel_size = px;
    g.width = w;
    g.height = h;
    g.crs_id = "EPSG:32632";
    return g;
}

inline adc::Ring rect_ring(double x0, double y0, double x1, double y1) {
    return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
}

inline adc::Parcel rect_parcel(int64_t id, double x0, double y0, double x1,
                               double y1, const std::string& crop = "MAIZ") {
    adc::Parcel p;
    p.id = id;
    p.crop_declared = crop;
    p.geometry.parts.push_back({rect_ring(x0, y0, x1, y1), {}});
    return p;
}

// Unique scratch directory, removed on scope exit.
class TempDir {
public:
    explicit TempDir(const std::string& tag) {
        static std::atomic<uint64_t> counter{0};
        path_ = (std::filesystem::temp_directory_path() /
                 ("adc_test_" + tag + "_" + std::to_string(::getpid()) + "_" +
                  std::to_string(counter++)))
                    .string();
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::string& path() const { return path_; }
    std::string sub(const std::string& rel) const { return path_ + "/" + rel; }

private:
    std::string path_;
};

inline adc::CubeArray make_cube(const adc::GridSpec& g,
                                std::vector<int64_t> times,
                                std::vector<adc::BandId> bands, float fill,
                                bool valid = true) {
    adc::CubeArray cube(g, std::move(times), std::move(bands));
    for (int t = 0; t < cube.n_times(); ++t)
        for (int b = 0; b < cube.n_bands(); ++b)
            for (int r = 0; r < g.height; ++r)
                for (int c = 0; c < g.width; ++c)
                    cube.set(t, b, r, c, fill, valid);
    return cube;
}

}  // namespace testutil
