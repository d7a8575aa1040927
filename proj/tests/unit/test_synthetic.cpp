#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "adc/catalog.hpp"
#include "adc/dates.hpp"
#include "adc/errors.hpp"
#include "adc/parcels.hpp"
#include "adc/synthetic.hpp"
#include "adc/tile_io.hpp"
#include "adc/util.hpp"
#include "adc/workspace.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace adc;

namespace {

SyntheticConfig small_config() {
    SyntheticConfig cfg;
    cfg.grid = testutil::make_grid(96, 96);
    cfg.n_parcels = 25;
    cfg.start_day = parse_date("2019-01-01");
    cfg.end_day = parse_date("2019-12-31");
    cfg.revisit_days = 16;
    cfg.noise_sigma = 0.02;
    cfg.cloud_probability = 0.0;
    cfg.full_cloud_probability = 0.0;
    cfg.seed = 42;
    return cfg;
}

std::string tile_checksum(const Workspace& ws, const std::string& rel) {
    return checksum_hex(file_checksum(std::filesystem::path(ws.root()) / rel));
}

}  // namespace

TEST_CASE("synthetic config validation rejects bad settings") {
    auto expect_usage = [](auto mutate) {
        SyntheticConfig cfg = small_config();
        mutate(cfg);
        CHECK_THROWS_AS(cfg.validate(), UsageError);
    };
    expect_usage([](SyntheticConfig& c) { c.n_parcels = 0; });
    expect_usage([](SyntheticConfig& c) { c.end_day = c.start_day - 1; });
    expect_usage([](SyntheticConfig& c) { c.revisit_days = 0; });
    expect_usage([](SyntheticConfig& c) { c.s1_revisit_days = -1; });
    expect_usage([](SyntheticConfig& c) { c.noise_sigma = -0.1; });
    expect_usage([](SyntheticConfig& c) { c.cloud_probability = 1.5; });
    expect_usage([](SyntheticConfig& c) { c.full_cloud_probability = -0.2; });
    expect_usage([](SyntheticConfig& c) { c.crop_mix = {{"MAIZ", 0.5}}; });
    expect_usage([](SyntheticConfig& c) { c.crop_mix = {{"XXXX", 1.0}}; });
    expect_usage([](SyntheticConfig& c) {
        c.mismatches.push_back({3, "MAIZ", "MAIZ"});
    });
    expect_usage([](SyntheticConfig& c) {
        c.mowing.push_back({0, {c.start_day + 10}, 0.0});
    });
    expect_usage([](SyntheticConfig& c) { c.mowing.push_back({0, {}, 0.4}); });
    expect_usage([](SyntheticConfig& c) {
        c.mowing.push_back({0, {c.end_day + 5}, 0.4});
    });
    CHECK_NOTHROW(small_config().validate());
}

TEST_CASE("synthetic config JSON round-trip preserves every field") {
    SyntheticConfig cfg = small_config();
    cfg.s1_revisit_days = 30;
    cfg.crop_mix = {{"MAIZ", 0.5}, {"GRAS", 0.5}};
    cfg.full_cloud_dates = {parse_date("2019-06-10")};
    cfg.mismatches.push_back({7, "GRAS", "MAIZ"});
    cfg.mowing.push_back({0, {parse_date("2019-06-01")}, 0.3});
    cfg.seed = 99;

    const SyntheticConfig back = synthetic_config_from_json(synthetic_config_to_json(cfg));
    CHECK(back.grid.width == cfg.grid.width);
    CHECK(back.grid.crs_id == cfg.grid.crs_id);
    CHECK(back.n_parcels == cfg.n_parcels);
    CHECK(back.start_day == cfg.start_day);
    CHECK(back.end_day == cfg.end_day);
    CHECK(back.revisit_days == 16);
    CHECK(back.s1_revisit_days == 30);
    CHECK(back.crop_mix == cfg.crop_mix);
    CHECK(back.noise_sigma == doctest::Approx(0.02));
    CHECK(back.full_cloud_dates == cfg.full_cloud_dates);
    REQUIRE(back.mismatches.size() == 1);
    CHECK(back.mismatches[0].parcel_id == 7);
    CHECK(back.mismatches[0].declared == "GRAS");
    CHECK(back.mismatches[0].actual == "MAIZ");
    REQUIRE(back.mowing.size() == 1);
    CHECK(back.mowing[0].dates == cfg.mowing[0].dates);
    CHECK(back.mowing[0].drop == doctest::Approx(0.3));
    CHECK(back.seed == 99);
}

TEST_CASE("synthetic config JSON applies defaults and rejects garbage") {
    const SyntheticConfig cfg = synthetic_config_from_json("{\"n_parcels\": 4}");
    CHECK(cfg.n_parcels == 4);
    CHECK(cfg.start_day == parse_date("2019-01-01"));
    CHECK(cfg.end_day == parse_date("2019-12-31"));
    CHECK_THROWS_AS(synthetic_config_from_json("not json"), DataError);
    CHECK_THROWS_AS(synthetic_config_from_json("{\"seed\": }"), DataError);
}

TEST_CASE("generation is deterministic per seed") {
    testutil::TempDir tmp;
    SyntheticConfig cfg = small_config();
    cfg.cloud_probability = 0.4;
    cfg.mowing.push_back({0, {parse_date("2019-06-15")}, 0.4});

    const Workspace a = generate_synthetic_dataset(cfg, tmp.path() + "/a");
    const Workspace b = generate_synthetic_dataset(cfg, tmp.path() + "/b");

    for (const char* rel : {"parcels.json", "truth.json", "labels.tiles",
                            "catalog.jsonl", "synth_config.json",
                            "cube/S2/2019-01-17/B04.tiles",
                            "cube/S2/2019-01-17/SCL.tiles"}) {
        CAPTURE(rel);
        CHECK(tile_checksum(a, rel) == tile_checksum(b, rel));
    }

    SyntheticConfig other = cfg;
    other.seed = 43;
    const Workspace c = generate_synthetic_dataset(other, tmp.path() + "/c");
    CHECK(tile_checksum(a, "cube/S2/2019-01-17/B04.tiles") !=
          tile_checksum(c, "cube/S2/2019-01-17/B04.tiles"));
}

TEST_CASE("generation refuses to overwrite an existing workspace") {
    testutil::TempDir tmp;
    SyntheticConfig cfg = small_config();
    cfg.n_parcels = 4;
    cfg.revisit_days = 120;
    generate_synthetic_dataset(cfg, tmp.path() + "/ws");
    CHECK_THROWS_AS(generate_synthetic_dataset(cfg, tmp.path() + "/ws"), DataError);
}

TEST_CASE("generated workspace matches the configured scene plan") {
    testutil::TempDir tmp;
    SyntheticConfig cfg = small_config();
    cfg.s1_revisit_days = 30;
    cfg.full_cloud_dates = {parse_date("2019-03-22")};  // a scheduled scene day
    Workspace ws = generate_synthetic_dataset(cfg, tmp.path() + "/ws");

    const int span = int(cfg.end_day - cfg.start_day);
    const std::size_t s2_expected = std::size_t(span / cfg.revisit_days) + 1;
    const std::size_t s1_expected = std::size_t(span / cfg.s1_revisit_days) + 1;

    std::size_t s1 = 0, s2 = 0;
    for (const ProductRecord* r : ws.catalog().list())
        (r->sensor == Sensor::S1 ? s1 : s2)++;
    CHECK(s2 == s2_expected);
    CHECK(s1 == s1_expected);

    const std::vector<Parcel> parcels = ws.parcels();
    CHECK(parcels.size() == std::size_t(cfg.n_parcels));

    std::set<int32_t> ids;
    for (int32_t v : ws.labels().labels)
        if (v != kNoParcel) ids.insert(v);
    CHECK(ids.size() == std::size_t(cfg.n_parcels));

    const ProductRecord* clouded = ws.catalog().find("S2_2019-03-22_EPSG:32632");
    REQUIRE(clouded != nullptr);
    CHECK(clouded->cloud_fraction == doctest::Approx(1.0));

    const ProductRecord* clear = ws.catalog().find("S2_2019-01-01_EPSG:32632");
    REQUIRE(clear != nullptr);
    CHECK(clear->cloud_fraction == doctest::Approx(0.0));

    // Recorded fraction agrees with the class codes actually stored on disk.
    std::vector<int16_t> scl;
    int w = 0, h = 0;
    read_tiles(std::filesystem::path(ws.root()) / clouded->storage_path / "SCL.tiles",
               scl, w, h);
    std::size_t masked = 0;
    for (int16_t v : scl)
        if (v == kSclCloud || v == kSclShadow) masked++;
    CHECK(double(masked) / double(scl.size()) ==
          doctest::Approx(clouded->cloud_fraction));
}

TEST_CASE("planted mismatches and mowing land on the requested parcels") {
    testutil::TempDir tmp;
    SyntheticConfig cfg = small_config();
    cfg.crop_mix = {{"GRAS", 1.0}};
    cfg.mismatches.push_back({5, "GRAS", "MAIZ"});
    cfg.mowing.push_back({9, {parse_date("2019-06-15")}, 0.4});
    Workspace ws = generate_synthetic_dataset(cfg, tmp.path() + "/ws");

    const Parcel* p5 = find_parcel(ws.parcels(), 5);
    REQUIRE(p5 != nullptr);
    CHECK(p5->crop_declared == "GRAS");
    REQUIRE(p5->crop_predicted.has_value());
    CHECK(*p5->crop_predicted == "MAIZ");

    const DatasetTruth truth = load_truth(ws.path("truth.json"));
    CHECK(truth.seed == cfg.seed);
    CHECK(truth.parcels.size() == std::size_t(cfg.n_parcels));

    const ParcelTruth* t5 = truth.find(5);
    REQUIRE(t5 != nullptr);
    CHECK(t5->crop_actual == "MAIZ");
    CHECK(t5->crop_declared == "GRAS");
    CHECK(std::abs(t5->params.pos_day - crop_preset("MAIZ").pos_day) <= 7.0);

    const ParcelTruth* t9 = truth.find(9);
    REQUIRE(t9 != nullptr);
    REQUIRE(t9->mowing.size() == 1);
    CHECK(t9->mowing[0].dates == std::vector<int64_t>{parse_date("2019-06-15")});

    // The mowing overlay pulls the curve down right after the event.
    ParcelTruth bare = *t9;
    bare.mowing.clear();
    const int64_t probe = parse_date("2019-06-18");
    CHECK(truth_value(*t9, probe) < truth_value(bare, probe));
    CHECK(truth.find(99999) == nullptr);
}

TEST_CASE("truth curves stay positive and seasons are ordered") {
    testutil::TempDir tmp;
    SyntheticConfig cfg = small_config();
    cfg.mowing.push_back({0, {parse_date("2019-07-01")}, 0.9});
    cfg.crop_mix = {{"GRAS", 1.0}};
    Workspace ws = generate_synthetic_dataset(cfg, tmp.path() + "/ws");
    const DatasetTruth truth = load_truth(ws.path("truth.json"));

    for (const ParcelTruth& t : truth.parcels) {
        for (int64_t d = cfg.start_day; d <= cfg.end_day; d += 7)
            CHECK(truth_value(t, d) >= 0.02);
        REQUIRE(t.seasons.size() == 1);
        const SeasonTruth& s = t.seasons[0];
        CHECK(s.year == 2019);
        CHECK(s.sos < s.pos);
        CHECK(s.pos < s.eos);
        CHECK(s.pos == doctest::Approx(t.params.pos_day));
    }
}
