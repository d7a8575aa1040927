#include <doctest.h>

#include <set>

#include "adc/errors.hpp"
#include "adc/parcels.hpp"
#include "adc/tile_io.hpp"

#include "helpers.hpp"

using namespace adc;
using testutil::make_grid;
using testutil::rect_parcel;
using testutil::TempDir;

TEST_CASE("rasterization labels exactly the pixels whose centers are inside") {
    GridSpec g = make_grid(10, 10, 10.0);
    // Covers centers at x,y in {15,25,35}: a 3x3 block starting at pixel (1,1).
    std::vector<Parcel> ps = {rect_parcel(7, 12, 12, 38, 38)};
    LabelRaster lr = rasterize_parcels(ps, g).labels;

    int count = 0;
    for (int r = 0; r < 10; ++r)
        for (int c = 0; c < 10; ++c) {
            const bool inside = r >= 1 && r <= 3 && c >= 1 && c <= 3;
            CHECK(lr.at(r, c) == (inside ? 7 : kNoParcel));
            count += lr.at(r, c) != kNoParcel;
        }
    CHECK(count == 9);
}

TEST_CASE("holes are excluded and overlaps go to the lowest id") {
    GridSpec g = make_grid(12, 12, 10.0);

    Parcel donut;
    donut.id = 3;
    donut.crop_declared = "GRAS";
    donut.geometry.parts.push_back(
        {testutil::rect_ring(0, 0, 120, 120),
         {testutil::rect_ring(40, 40, 80, 80)}});

    Parcel inner = rect_parcel(9, 40, 40, 80, 80);

    RasterizeResult rr = rasterize_parcels({donut, inner}, g);
    CHECK(rr.labels.at(0, 0) == 3);
    CHECK(rr.labels.at(5, 5) == 9);   // inside the hole, only the inner parcel
    CHECK(rr.overlap_pixels == 0);

    Parcel shifted = rect_parcel(1, 0, 0, 60, 60);
    rr = rasterize_parcels({donut, shifted}, g);
    CHECK(rr.labels.at(0, 0) == 1);   // contested pixels take the lowest id
    CHECK(rr.overlap_pixels > 0);
}

TEST_CASE("rasterization is independent of the thread count") {
    GridSpec g = make_grid(64, 64, 10.0);
    std::vector<Parcel> ps;
    for (int i = 0; i < 25; ++i)
        ps.push_back(rect_parcel(i + 1, (i % 5) * 128, (i / 5) * 128,
                                 (i % 5) * 128 + 100, (i / 5) * 128 + 100));
    LabelRaster one = rasterize_parcels(ps, g, 1).labels;
    LabelRaster many = rasterize_parcels(ps, g, 8).labels;
    CHECK(one.labels == many.labels);
}

TEST_CASE("parcel json round-trip preserves attributes") {
    TempDir tmp("parcels");
    std::vector<Parcel> ps = {rect_parcel(1, 0, 0, 50, 50, "MAIZ"),
                              rect_parcel(2, 60, 0, 90, 40, "GRAS")};
    ps[0].crop_predicted = "WHEA";
    ps[0].attributes["irrigated"] = 1.0;
    ps[0].attributes["owner"] = std::string("K. Fischer");

    const std::string path = tmp.sub("parcels.json");
    save_parcels(path, ps);
    std::vector<Parcel> back = load_parcels(path);

    REQUIRE(back.size() == 2);
    CHECK(back[0].id == 1);
    CHECK(back[0].crop_declared == "MAIZ");
    REQUIRE(back[0].crop_predicted.has_value());
    CHECK(*back[0].crop_predicted == "WHEA");
    CHECK(std::get<double>(back[0].attributes.at("irrigated")) == 1.0);
    CHECK(std::get<std::string>(back[0].attributes.at("owner")) == "K. Fischer");
    CHECK_FALSE(back[1].crop_predicted.has_value());
    CHECK(polygon_area(back[0].geometry) == doctest::Approx(2500.0));

    const Parcel* p = find_parcel(back, 2);
    REQUIRE(p != nullptr);
    CHECK(p->crop_declared == "GRAS");
    CHECK(find_parcel(back, 99) == nullptr);
}

TEST_CASE("duplicate parcel ids are rejected") {
    TempDir tmp("parcels");
    std::vector<Parcel> ps = {rect_parcel(1, 0, 0, 10, 10),
                              rect_parcel(1, 20, 20, 30, 30)};
    const std::string path = tmp.sub("dup.json");
    CHECK_THROWS_AS(save_parcels(path, ps), DataError);
}

TEST_CASE("label raster round-trips through tiles") {
    TempDir tmp("labels");
    GridSpec g = make_grid(40, 30, 10.0);
    LabelRaster lr =
        rasterize_parcels({rect_parcel(5, 0, 0, 200, 150)}, g).labels;
    save_labels(tmp.sub("labels.tiles"), lr);
    LabelRaster back = load_labels(tmp.sub("labels.tiles"));
    CHECK(back.grid == g);
    CHECK(back.labels == lr.labels);
}
