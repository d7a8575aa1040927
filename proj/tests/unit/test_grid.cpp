#include <doctest.h>

#include "adc/errors.hpp"
#include "adc/grid.hpp"

#include "helpers.hpp"

using namespace adc;
using testutil::make_grid;

TEST_CASE("pixel center convention") {
    GridSpec g = make_grid(100, 80, 10.0, 1000.0, 2000.0);
    CHECK(g.center_x(0) == doctest::Approx(1005.0));
    CHECK(g.center_y(0) == doctest::Approx(2005.0));
    CHECK(g.center_x(99) == doctest::Approx(1995.0));
    CHECK(g.col_coord(g.center_x(42)) == doctest::Approx(42.0));
    CHECK(g.row_coord(g.center_y(17)) == doctest::Approx(17.0));
}

TEST_CASE("window_for selects pixels by center and clips") {
    GridSpec g = make_grid(10, 10, 10.0);

    PixelBox w = g.window_for({0, 0, 10, 10});  // exactly one pixel cell
    CHECK(w.row == 0);
    CHECK(w.col == 0);
    CHECK(w.nrows == 1);
    CHECK(w.ncols == 1);

    w = g.window_for({15, 25, 45, 35});
    CHECK(w.col == 1);
    CHECK(w.row == 2);
    CHECK(w.ncols == 3);
    CHECK(w.nrows == 1);

    w = g.window_for({-100, -100, 1000, 5});
    CHECK(w.row == 0);
    CHECK(w.col == 0);
    CHECK(w.ncols == 10);
    CHECK(w.nrows == 0);  // no center above y=5

    CHECK(g.window_for({200, 200, 300, 300}).empty());
}

TEST_CASE("sub_grid shifts the origin") {
    GridSpec g = make_grid(100, 100, 10.0, 500.0, 600.0);
    GridSpec s = g.sub_grid({5, 7, 20, 30});
    CHECK(s.origin_x == doctest::Approx(570.0));
    CHECK(s.origin_y == doctest::Approx(650.0));
    CHECK(s.width == 30);
    CHECK(s.height == 20);
    CHECK(s.pixel_size == g.pixel_size);
    CHECK(s.crs_id == g.crs_id);
}

TEST_CASE("grid validation") {
    GridSpec g = make_grid(0, 10);
    CHECK_THROWS_AS(g.validate(), PreconditionError);
    g = make_grid(10, 10, -1.0);
    CHECK_THROWS_AS(g.validate(), PreconditionError);
    CHECK_NOTHROW(make_grid(10, 10).validate());
}

TEST_CASE("band names round-trip and carry metadata") {
    for (BandId b : {BandId::B02, BandId::B03, BandId::B04, BandId::B08,
                     BandId::NDVI, BandId::SIGMA0_VV, BandId::SIGMA0_VH,
                     BandId::COHERENCE_VV, BandId::SCL})
        CHECK(band_from_string(band_name(b)) == b);
    CHECK_THROWS_AS(band_from_string("B99"), UsageError);
    CHECK(band_categorical(BandId::SCL));
    CHECK_FALSE(band_categorical(BandId::NDVI));
}

TEST_CASE("cube indexing and slices") {
    GridSpec g = make_grid(4, 3);
    CubeArray cube(g, {10, 20}, {BandId::B04, BandId::B08});
    CHECK(cube.n_times() == 2);
    CHECK(cube.n_bands() == 2);
    CHECK(cube.time_index(20) == 1);
    CHECK(cube.time_index(15) == -1);
    CHECK(cube.band_index(BandId::B08) == 1);
    CHECK(cube.band_index(BandId::SCL) == -1);

    cube.set(1, 0, 2, 3, 0.5f, true);
    CHECK(cube.value(1, 0, 2, 3) == 0.5f);
    CHECK(cube.valid(1, 0, 2, 3));
    CHECK(cube.count_valid() == 1);
    CHECK(cube.slice_values(1, 0)[2 * 4 + 3] == 0.5f);
}

TEST_CASE("select copies a consistent sub-cube") {
    GridSpec g = make_grid(6, 6);
    CubeArray cube(g, {0, 10, 20}, {BandId::B04, BandId::B08});
    for (int t = 0; t < 3; ++t)
        for (int b = 0; b < 2; ++b)
            for (int r = 0; r < 6; ++r)
                for (int c = 0; c < 6; ++c)
                    cube.set(t, b, r, c, float(t * 100 + b * 10 + r + c * 0.01), true);

    CubeArray s = select(cube, {{10, 21}}, {{BandId::B08}},
                         BBox{20, 10, 50, 40});
    CHECK(s.n_times() == 2);
    CHECK(s.n_bands() == 1);
    CHECK(s.width() == 3);
    CHECK(s.height() == 3);
    CHECK(s.value(0, 0, 0, 0) == cube.value(1, 1, 1, 2));
    CHECK(s.grid().origin_x == doctest::Approx(20.0));

    CubeArray none = select(cube, {{100, 200}}, {}, {});
    CHECK(none.n_times() == 0);
}

TEST_CASE("resample nearest and bilinear sample pixel centers") {
    GridSpec src = make_grid(4, 4, 10.0);
    Raster r(src, 0.0f);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) r.at(i, j) = float(i * 4 + j);

    GridSpec dst = make_grid(2, 2, 20.0);
    Raster near = resample_to_grid(r, dst, ResampleMethod::Nearest);
    // Target centers land exactly between four source centers; nearest takes
    // the numerically closest after the half-pixel shift.
    CHECK(near.grid.width == 2);

    Raster bil = resample_to_grid(r, dst, ResampleMethod::Bilinear);
    CHECK(bil.at(0, 0) == doctest::Approx((0.0 + 1 + 4 + 5) / 4));
    CHECK(bil.at(1, 1) == doctest::Approx((10.0 + 11 + 14 + 15) / 4));
}
