#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "adc/catalog.hpp"
#include "adc/dates.hpp"
#include "adc/errors.hpp"
#include "adc/store.hpp"
#include "adc/workspace.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace adc;

namespace {

struct StoreFixture {
    testutil::TempDir tmp;
    GridSpec grid = testutil::make_grid(32, 32);
    int64_t d0 = parse_date("2020-05-01");
    Workspace ws;
    Raster b04{grid, 0.0f}, b08{grid, 0.0f};

    StoreFixture() : ws(Workspace::create(tmp.path() + "/ws", grid)) {
        Raster scl(grid, float(kSclClear));
        for (int r = 0; r < 32; ++r) {
            for (int c = 0; c < 32; ++c) {
                b04.at(r, c) = 0.10f + 0.001f * float(r * 32 + c);
                b08.at(r, c) = 0.30f + 0.0005f * float(r * 32 + c);
            }
        }
        b04.at(2, 3) = b04.nodata;
        b04.at(4, 5) = 0.2f;
        b08.at(4, 5) = -0.2f;
        scl.at(0, 0) = float(kSclCloud);
        scl.at(0, 1) = float(kSclCloud);
        scl.at(5, 5) = float(kSclShadow);

        ProductRecord a;
        a.product_id = "S2_A";
        a.sensor = Sensor::S2;
        a.acquisition_day = d0;
        ingest_product(ws.catalog(), ws.root(), a,
                       {{BandId::B04, b04}, {BandId::B08, b08}, {BandId::SCL, scl}});

        Raster ndvi(grid, 0.5f);
        ndvi.at(1, 1) = ndvi.nodata;
        ProductRecord b;
        b.product_id = "S2_B";
        b.sensor = Sensor::S2;
        b.acquisition_day = d0 + 5;
        ingest_product(ws.catalog(), ws.root(), b, {{BandId::NDVI, ndvi}});

        Raster vv(grid, -14.0f);
        vv.at(7, 7) = vv.nodata;
        ProductRecord c;
        c.product_id = "S1_C";
        c.sensor = Sensor::S1;
        c.acquisition_day = d0;
        ingest_product(ws.catalog(), ws.root(), c, {{BandId::SIGMA0_VV, vv}});

        ProductRecord stale;
        stale.product_id = "S2_P";
        stale.sensor = Sensor::S2;
        stale.acquisition_day = d0 + 10;
        ws.catalog().add(stale);
    }

    float expected_ndvi(int r, int c) const {
        const double red = double(b04.at(r, c)), nir = double(b08.at(r, c));
        return float(std::clamp((nir - red) / (nir + red), -1.0, 1.0));
    }
};

}  // namespace

TEST_CASE("store lists the days that can supply each band") {
    StoreFixture f;
    CubeStore store(f.ws);
    CHECK(store.scene_days(f.d0, f.d0 + 11, {BandId::NDVI}) ==
          std::vector<int64_t>{f.d0, f.d0 + 5});
    CHECK(store.scene_days(f.d0, f.d0 + 11, {BandId::SIGMA0_VV}) ==
          std::vector<int64_t>{f.d0});
    CHECK(store.scene_days(f.d0 + 1, f.d0 + 5, {BandId::NDVI}).empty());
    CHECK(store.scene_days(f.d0, f.d0 + 11, {BandId::COHERENCE_VV}).empty());
}

TEST_CASE("store derives NDVI from red and near-infrared tiles") {
    StoreFixture f;
    CubeStore store(f.ws);
    LoadStats stats;
    const CubeArray cube =
        store.load_range(f.d0, f.d0 + 11, {BandId::NDVI}, &stats);

    REQUIRE(cube.times() == std::vector<int64_t>{f.d0, f.d0 + 5});
    CHECK(stats.scenes_loaded == 2);
    CHECK(stats.scenes_incomplete == 1);
    CHECK(stats.io.tiles_read > 0);

    for (int r = 0; r < 32; ++r) {
        for (int c = 0; c < 32; ++c) {
            if ((r == 2 && c == 3) || (r == 4 && c == 5)) {
                CHECK_FALSE(cube.valid(0, 0, r, c));
                continue;
            }
            REQUIRE(cube.valid(0, 0, r, c));
            CHECK(cube.value(0, 0, r, c) == f.expected_ndvi(r, c));
        }
    }

    CHECK_FALSE(cube.valid(1, 0, 1, 1));
    CHECK(cube.value(1, 0, 3, 3) == 0.5f);
    CHECK(cube.count_valid() == 2 * 32 * 32 - 3);
}

TEST_CASE("windowed loads match the corresponding full-grid slice") {
    StoreFixture f;
    CubeStore store(f.ws);
    const CubeArray full = store.load_range(f.d0, f.d0 + 11, {BandId::NDVI});

    std::mt19937 rng(7);
    std::vector<PixelBox> windows = {{0, 0, 32, 32}, {3, 5, 7, 9}, {31, 31, 1, 1}};
    for (int i = 0; i < 10; ++i) {
        const int r = int(rng() % 28), c = int(rng() % 28);
        windows.push_back({r, c, 1 + int(rng() % (32 - r)), 1 + int(rng() % (32 - c))});
    }

    for (const PixelBox& w : windows) {
        CAPTURE(w.row);
        CAPTURE(w.col);
        const CubeArray part = store.load(w, f.d0, f.d0 + 11, {BandId::NDVI});
        REQUIRE(part.times() == full.times());
        REQUIRE(part.height() == w.nrows);
        REQUIRE(part.width() == w.ncols);
        for (int t = 0; t < part.n_times(); ++t) {
            for (int r = 0; r < w.nrows; ++r) {
                for (int c = 0; c < w.ncols; ++c) {
                    CHECK(part.valid(t, 0, r, c) ==
                          full.valid(t, 0, w.row + r, w.col + c));
                    CHECK(part.value(t, 0, r, c) ==
                          full.value(t, 0, w.row + r, w.col + c));
                }
            }
        }
    }

    CHECK(store.load({5, 5, 0, 0}, f.d0, f.d0 + 11, {BandId::NDVI}).empty());
}

TEST_CASE("store rejects bad windows and band lists") {
    StoreFixture f;
    CubeStore store(f.ws);
    CHECK_THROWS_AS(store.load({0, 0, 33, 32}, f.d0, f.d0 + 11, {BandId::NDVI}),
                    PreconditionError);
    CHECK_THROWS_AS(store.load({-1, 0, 4, 4}, f.d0, f.d0 + 11, {BandId::NDVI}),
                    PreconditionError);
    CHECK_THROWS_AS(store.load_range(f.d0, f.d0 + 11, {}), UsageError);
    CHECK_THROWS_AS(
        store.load_range(f.d0, f.d0 + 11, {BandId::NDVI, BandId::NDVI}),
        UsageError);
}

TEST_CASE("explicit day lists restrict the cube to matching scenes") {
    StoreFixture f;
    CubeStore store(f.ws);
    const CubeArray full = store.load_range(f.d0, f.d0 + 11, {BandId::NDVI});

    LoadStats stats;
    const CubeArray one = store.load_days({0, 0, 32, 32}, {f.d0 + 5},
                                          {BandId::NDVI}, &stats);
    REQUIRE(one.times() == std::vector<int64_t>{f.d0 + 5});
    CHECK(stats.scenes_loaded == 1);
    CHECK(one.value(0, 0, 9, 9) == full.value(1, 0, 9, 9));

    const CubeArray sparse = store.load_days(
        {0, 0, 32, 32}, {f.d0, f.d0 + 999}, {BandId::NDVI});
    CHECK(sparse.times() == std::vector<int64_t>{f.d0});
    CHECK(store.load_days({0, 0, 32, 32}, {}, {BandId::NDVI}).empty());
}

TEST_CASE("same-day products from different sensors merge into one timestep") {
    StoreFixture f;
    CubeStore store(f.ws);
    const CubeArray cube = store.load_range(
        f.d0, f.d0 + 1, {BandId::NDVI, BandId::SIGMA0_VV});
    REQUIRE(cube.times() == std::vector<int64_t>{f.d0});
    REQUIRE(cube.n_bands() == 2);
    const int vv = cube.band_index(BandId::SIGMA0_VV);
    REQUIRE(vv >= 0);
    CHECK(cube.value(0, vv, 0, 0) == -14.0f);
    CHECK_FALSE(cube.valid(0, vv, 7, 7));
    CHECK(cube.valid(0, cube.band_index(BandId::NDVI), 10, 10));
}

TEST_CASE("a second acquisition on the same day is skipped, keeping the first") {
    StoreFixture f;
    Raster other04(f.grid, 0.9f), other08(f.grid, 0.1f);
    ProductRecord dup;
    dup.product_id = "S2_A2";
    dup.sensor = Sensor::S2;
    dup.acquisition_day = f.d0;
    const ProductRecord& stored = ingest_product(
        f.ws.catalog(), f.ws.root(), dup,
        {{BandId::B04, other04}, {BandId::B08, other08}});
    CHECK(stored.flags.at("cube").message.find("kept first") != std::string::npos);

    CubeStore store(f.ws);
    LoadStats stats;
    const CubeArray cube = store.load_range(f.d0, f.d0 + 1, {BandId::NDVI}, &stats);
    CHECK(stats.collisions_skipped >= 1);
    CHECK(cube.value(0, 0, 10, 10) == f.expected_ndvi(10, 10));
}

TEST_CASE("store reports per-day cloud fractions from the catalog") {
    StoreFixture f;
    CubeStore store(f.ws);
    CHECK(store.cloud_fraction(f.d0) == doctest::Approx(3.0 / (32.0 * 32.0)));
    CHECK(store.cloud_fraction(f.d0 + 5) == -1);
    CHECK(store.cloud_fraction(f.d0 + 999) == -1);
}
