#include <doctest.h>

#include <cstdio>
#include <cstring>
#include <fstream>
#include <random>

#include "adc/errors.hpp"
#include "adc/tile_io.hpp"

#include "helpers.hpp"

using namespace adc;
using namespace adc::tiles;
using testutil::make_grid;
using testutil::TempDir;

namespace {

Raster random_raster(const GridSpec& g, uint64_t seed, double nodata_rate = 0.05) {
    Raster r(g, 0.0f);
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<float> u(-1.0f, 1.0f);
    std::uniform_real_distribution<double> p(0.0, 1.0);
    for (float& v : r.values) v = p(rng) < nodata_rate ? r.nodata : u(rng);
    return r;
}

}  // namespace

TEST_CASE("raster round-trip is bit-exact in both container versions") {
    TempDir tmp("tiles");
    // Sized so the tile lattice is ragged on both axes.
    GridSpec g = make_grid(600, 335);
    Raster r = random_raster(g, 42);

    for (uint16_t version : {kVersionRaw, kVersionDeflate}) {
        const std::string path =
            tmp.sub("v" + std::to_string(version) + ".tiles");
        write_raster(path, r, version);
        Raster back = read_raster(path);
        CHECK(back.grid == g);
        CHECK(back.nodata == r.nodata);
        REQUIRE(back.values.size() == r.values.size());
        CHECK(std::memcmp(back.values.data(), r.values.data(),
                          r.values.size() * sizeof(float)) == 0);
    }
}

TEST_CASE("compressed files are the default and smaller on smooth data") {
    TempDir tmp("tiles");
    GridSpec g = make_grid(512, 512);
    Raster r(g, 0.25f);
    write_raster(tmp.sub("raw.tiles"), r, kVersionRaw);
    write_raster(tmp.sub("def.tiles"), r);
    const auto raw = std::filesystem::file_size(tmp.sub("raw.tiles"));
    const auto def = std::filesystem::file_size(tmp.sub("def.tiles"));
    CHECK(def < raw / 4);
    CHECK(probe(tmp.sub("def.tiles")).version == kVersionDeflate);
}

TEST_CASE("typed containers round-trip") {
    TempDir tmp("tiles");
    GridSpec g = make_grid(70, 40);

    std::vector<int16_t> i16(std::size_t(g.width) * g.height);
    std::mt19937_64 rng(3);
    for (auto& v : i16) v = int16_t(rng() % 10000) - 5000;
    write_tiles(tmp.sub("i16.tiles"), g, DType::I16, i16.data(), -32768);
    std::vector<int16_t> i16_back;
    TileFileInfo info = read_tiles(tmp.sub("i16.tiles"), i16_back);
    CHECK(info.dtype == DType::I16);
    CHECK(i16_back == i16);

    std::vector<int32_t> i32(i16.begin(), i16.end());
    write_tiles(tmp.sub("i32.tiles"), g, DType::I32, i32.data(), -1);
    std::vector<int32_t> i32_back;
    read_tiles(tmp.sub("i32.tiles"), i32_back);
    CHECK(i32_back == i32);

    // F32-only conveniences refuse other dtypes.
    CHECK_THROWS_AS(read_raster(tmp.sub("i16.tiles")), DataError);
}

TEST_CASE("window reads touch only intersecting tiles") {
    TempDir tmp("tiles");
    // 3x3 tile lattice with ragged edges.
    GridSpec g = make_grid(2 * kTileCols + 100, 2 * kTileRows + 50);
    Raster r = random_raster(g, 9, 0.0);
    const std::string path = tmp.sub("win.tiles");
    write_raster(path, r);

    TileReader rd(path);
    CHECK(rd.info().n_tiles() == 9);

    struct Case {
        PixelBox w;
        int64_t tiles;
    };
    const Case cases[] = {
        {{10, 10, 20, 20}, 1},
        {{kTileRows - 5, kTileCols - 5, 10, 10}, 4},
        {{0, 0, 1, g.width}, 3},
        {{0, 0, g.height, g.width}, 9},
        {{2 * kTileRows + 10, 2 * kTileCols + 10, 20, 30}, 1},
    };
    for (const Case& c : cases) {
        ReadStats st;
        std::vector<float> buf(std::size_t(c.w.nrows) * c.w.ncols);
        rd.read(c.w, buf.data(), &st);
        CHECK(st.tiles_read == c.tiles);
        for (int i = 0; i < c.w.nrows; ++i)
            for (int j = 0; j < c.w.ncols; ++j)
                CHECK(buf[std::size_t(i) * c.w.ncols + j] ==
                      r.at(c.w.row + i, c.w.col + j));
    }
}

TEST_CASE("window reads match whole-file reads everywhere") {
    TempDir tmp("tiles");
    GridSpec g = make_grid(300, 200);
    Raster r = random_raster(g, 17);
    write_raster(tmp.sub("w.tiles"), r);

    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        int row = int(rng() % 190), col = int(rng() % 290);
        int nr = 1 + int(rng() % (200 - row)), nc = 1 + int(rng() % (300 - col));
        Raster w = read_raster_window(tmp.sub("w.tiles"), {row, col, nr, nc});
        for (int a = 0; a < nr; ++a)
            for (int b = 0; b < nc; ++b)
                CHECK(w.at(a, b) == r.at(row + a, col + b));
    }
}

TEST_CASE("corrupt or truncated headers are rejected cleanly") {
    TempDir tmp("tiles");
    GridSpec g = make_grid(64, 64);
    Raster r(g, 1.0f);
    const std::string path = tmp.sub("c.tiles");
    write_raster(path, r);

    auto corrupt = [&](std::size_t offset, char byte) {
        std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
        f.seekp(offset);
        f.put(byte);
    };

    corrupt(0, 'X');  // magic
    CHECK_THROWS_AS(probe(path), DataError);

    write_raster(path, r);
    corrupt(4, 99);  // version
    CHECK_THROWS_AS(probe(path), DataError);

    write_raster(path, r);
    corrupt(6, 7);  // dtype
    CHECK_THROWS_AS(probe(path), DataError);

    std::ofstream(tmp.sub("short.tiles"), std::ios::binary) << "AD";
    CHECK_THROWS_AS(probe(tmp.sub("short.tiles")), DataError);

    CHECK_THROWS_AS(probe(tmp.sub("missing.tiles")), DataError);
}

TEST_CASE("truncated tile payload fails the read, not the probe") {
    TempDir tmp("tiles");
    GridSpec g = make_grid(64, 64);
    Raster r = random_raster(g, 23);
    const std::string path = tmp.sub("t.tiles");
    write_raster(path, r);

    std::filesystem::resize_file(path,
                                 std::filesystem::file_size(path) - 40);
    CHECK_NOTHROW(probe(path));
    CHECK_THROWS_AS(read_raster(path), DataError);
}
