#include <doctest.h>

#include <cmath>
#include <random>

#include "adc/errors.hpp"
#include "adc/masking.hpp"
#include "adc/parcels.hpp"

#include "helpers.hpp"

using namespace adc;
using testutil::make_grid;
using testutil::rect_parcel;

namespace {

std::vector<double> brute_force_dt_sq(const std::vector<uint8_t>& seeds,
                                      int w, int h) {
    std::vector<double> out(seeds.size(), 1e30);
    for (int r = 0; r < h; ++r)
        for (int c = 0; c < w; ++c) {
            if (!seeds[std::size_t(r) * w + c]) continue;
            for (int i = 0; i < h; ++i)
                for (int j = 0; j < w; ++j) {
                    const double d2 = double(i - r) * (i - r) +
                                      double(j - c) * (j - c);
                    double& cur = out[std::size_t(i) * w + j];
                    if (d2 < cur) cur = d2;
                }
        }
    return out;
}

PixelMask random_mask(const GridSpec& g, std::mt19937_64& rng, double rate) {
    PixelMask m(g);
    std::uniform_real_distribution<double> u(0, 1);
    for (auto& b : m.bits) b = u(rng) < rate ? 1 : 0;
    return m;
}

}  // namespace

TEST_CASE("distance transform equals the quadratic brute force") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(0, 1);
    for (int trial = 0; trial < 200; ++trial) {
        const int w = 64, h = 64;
        const double rate = 0.002 + 0.3 * u(rng);
        std::vector<uint8_t> seeds(std::size_t(w) * h);
        for (auto& s : seeds) s = u(rng) < rate ? 1 : 0;

        std::vector<double> fast = distance_transform_sq(seeds.data(), w, h);
        std::vector<double> slow = brute_force_dt_sq(seeds, w, h);
        bool any_seed = false;
        for (auto s : seeds) any_seed |= s != 0;
        for (std::size_t i = 0; i < seeds.size(); ++i) {
            if (!any_seed) {
                CHECK(fast[i] >= 1e17);  // huge but finite
            } else {
                // Exact: both sides are sums of squared integers.
                CHECK(fast[i] == slow[i]);
            }
        }
    }
}

TEST_CASE("dilation is extensive, monotone in radius, and identity at zero") {
    GridSpec g = make_grid(48, 48, 10.0);
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 20; ++trial) {
        PixelMask m = random_mask(g, rng, 0.05);
        PixelMask d0 = dilate_mask(m, 0.0);
        CHECK(d0.bits == m.bits);

        PixelMask d1 = dilate_mask(m, 15.0);
        PixelMask d2 = dilate_mask(m, 40.0);
        for (std::size_t i = 0; i < m.bits.size(); ++i) {
            if (m.bits[i]) CHECK(d1.bits[i]);   // extensive
            if (d1.bits[i]) CHECK(d2.bits[i]);  // monotone
        }
    }
}

TEST_CASE("dilating a single pixel by one pixel size gives the 4-neighborhood") {
    GridSpec g = make_grid(9, 9, 10.0);
    PixelMask m(g);
    m.set(4, 4, true);
    PixelMask d = dilate_mask(m, 10.0);
    CHECK(d.count() == 5);
    CHECK(d.at(4, 4));
    CHECK(d.at(3, 4));
    CHECK(d.at(5, 4));
    CHECK(d.at(4, 3));
    CHECK(d.at(4, 5));
}

TEST_CASE("erosion is anti-extensive, monotone, and identity at zero") {
    GridSpec g = make_grid(40, 40, 10.0);
    std::vector<Parcel> ps = {rect_parcel(1, 0, 0, 200, 200),
                              rect_parcel(2, 200, 0, 400, 200),
                              rect_parcel(3, 0, 200, 400, 400)};
    LabelRaster lr = rasterize_parcels(ps, g).labels;

    LabelRaster e0 = erode_labels(lr, 0.0);
    CHECK(e0.labels == lr.labels);

    LabelRaster e1 = erode_labels(lr, 15.0);
    LabelRaster e2 = erode_labels(lr, 35.0);
    for (std::size_t i = 0; i < lr.labels.size(); ++i) {
        if (e1.labels[i] != kNoParcel) CHECK(e1.labels[i] == lr.labels[i]);
        if (e2.labels[i] != kNoParcel) CHECK(e2.labels[i] == e1.labels[i]);
    }

    // Pixels at the shared boundary between parcels 1 and 2 are eroded from
    // both sides; the raster edge does not erode.
    CHECK(e1.at(0, 0) == 1);
    CHECK(e1.at(0, 19) == kNoParcel);
    CHECK(e1.at(0, 20) == kNoParcel);

    // A 20px-wide parcel survives radius 15 m (1 px ring) as an 18px core.
    int survivors = 0;
    for (int r = 0; r < 20; ++r)
        for (int c = 0; c < 20; ++c) survivors += e1.at(r, c) == 1;
    CHECK(survivors == 19 * 19);  // erosion bites only the two interior edges
}

TEST_CASE("erosion removes thin necks entirely") {
    GridSpec g = make_grid(30, 30, 10.0);
    // Two 8x8 blobs joined by a 1px bridge, all one parcel.
    Parcel p;
    p.id = 4;
    p.crop_declared = "GRAS";
    p.geometry.parts.push_back({testutil::rect_ring(0, 0, 80, 80), {}});
    p.geometry.parts.push_back({testutil::rect_ring(140, 0, 220, 80), {}});
    p.geometry.parts.push_back({testutil::rect_ring(80, 30, 140, 40), {}});
    LabelRaster lr = rasterize_parcels({p}, g).labels;

    LabelRaster e = erode_labels(lr, 25.0);
    for (int c = 8; c < 14; ++c) CHECK(e.at(3, c) == kNoParcel);
    CHECK(e.at(3, 3) == 4);  // blob cores survive
    CHECK(e.at(3, 18) == 4);
}

TEST_CASE("class mask marks the requested codes plus nodata") {
    GridSpec g = make_grid(4, 1, 10.0);
    SceneClassMask scl(g, kSclClear);
    scl.at(0, 1) = kSclCloud;
    scl.at(0, 2) = kSclShadow;
    scl.at(0, 3) = kSclNodata;

    PixelMask m = class_mask(scl, {kSclCloud, kSclShadow});
    CHECK_FALSE(m.at(0, 0));
    CHECK(m.at(0, 1));
    CHECK(m.at(0, 2));
    CHECK(m.at(0, 3));
    CHECK(m.count() == 3);
}

TEST_CASE("apply_mask clears validity on selected timesteps only") {
    GridSpec g = make_grid(3, 3, 10.0);
    CubeArray cube = testutil::make_cube(g, {0, 10}, {BandId::NDVI}, 0.5f);
    PixelMask m(g);
    m.set(1, 1, true);

    CubeArray all = apply_mask(cube, m);
    CHECK_FALSE(all.valid(0, 0, 1, 1));
    CHECK_FALSE(all.valid(1, 0, 1, 1));
    CHECK(all.valid(0, 0, 0, 0));
    CHECK(all.value(0, 0, 1, 1) == 0.5f);  // value untouched

    CubeArray one = apply_mask(cube, m, {10});
    CHECK(one.valid(0, 0, 1, 1));
    CHECK_FALSE(one.valid(1, 0, 1, 1));

    PixelMask wrong(make_grid(4, 4, 10.0));
    CHECK_THROWS_AS(apply_mask(cube, wrong), PreconditionError);
}

TEST_CASE("scene masking dilates cloud and shadow per timestep") {
    GridSpec g = make_grid(9, 9, 10.0);
    CubeArray cube(g, {0, 10}, {BandId::NDVI, BandId::SCL});
    for (int t = 0; t < 2; ++t)
        for (int r = 0; r < 9; ++r)
            for (int c = 0; c < 9; ++c) {
                cube.set(t, 0, r, c, 0.7f, true);
                cube.set(t, 1, r, c, float(kSclClear), true);
            }
    cube.set(0, 1, 4, 4, float(kSclCloud), true);  // cloud only on day 0

    CubeArray masked = apply_scene_masks(cube, 10.0);
    CHECK_FALSE(masked.valid(0, 0, 4, 4));
    CHECK_FALSE(masked.valid(0, 0, 3, 4));  // one-pixel buffer
    CHECK(masked.valid(0, 0, 2, 4));
    CHECK(masked.valid(1, 0, 4, 4));  // day 1 untouched

    // Without an SCL band the cube passes through unchanged.
    CubeArray plain = testutil::make_cube(g, {0}, {BandId::NDVI}, 0.3f);
    CubeArray same = apply_scene_masks(plain, 50.0);
    CHECK(same.count_valid() == plain.count_valid());
}
