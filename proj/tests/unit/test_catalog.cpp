#include <doctest.h>

#include <random>

#include "adc/catalog.hpp"
#include "adc/dates.hpp"
#include "adc/errors.hpp"

#include "helpers.hpp"

using namespace adc;
using testutil::make_grid;
using testutil::TempDir;

namespace {

ProductRecord make_record(const std::string& id, int64_t day,
                          Sensor s = Sensor::S2) {
    ProductRecord r;
    r.product_id = id;
    r.sensor = s;
    r.acquisition_day = day;
    r.footprint = {0, 0, 1000, 1000};
    r.tile_id = "T32UNU";
    for (const std::string& step : pipeline_steps(s))
        r.flags[step] = FlagStatus{};
    return r;
}

}  // namespace

TEST_CASE("records persist and reload in acquisition order") {
    TempDir tmp("catalog");
    const std::string path = tmp.sub("catalog.jsonl");
    {
        Catalog cat(path);
        cat.add(make_record("S2_B", 200));
        cat.add(make_record("S2_A", 200));
        cat.add(make_record("S2_C", 100));
        CHECK(cat.size() == 3);
        CHECK_THROWS_AS(cat.add(make_record("S2_A", 300)), DataError);
    }
    Catalog cat(path);
    REQUIRE(cat.size() == 3);
    auto list = cat.list();
    CHECK(list[0]->product_id == "S2_C");
    CHECK(list[1]->product_id == "S2_A");  // ties break on id
    CHECK(list[2]->product_id == "S2_B");
    CHECK(cat.find("S2_A") != nullptr);
    CHECK(cat.find("nope") == nullptr);
}

TEST_CASE("query filters by time range and bbox") {
    TempDir tmp("catalog");
    Catalog cat(tmp.sub("c.jsonl"));
    cat.add(make_record("P1", 10));
    cat.add(make_record("P2", 20));
    ProductRecord far = make_record("P3", 15);
    far.footprint = {5000, 5000, 6000, 6000};
    cat.add(far);

    CHECK(cat.query({{10, 20}}).size() == 2);  // half-open: P2 excluded
    CHECK(cat.query({{10, 21}}).size() == 3);
    CHECK(cat.query({}, {{0, 0, 100, 100}}).size() == 2);
    CHECK(cat.query({{10, 21}}, {{4500, 4500, 7000, 7000}}).size() == 1);
    CHECK(cat.query({{50, 60}}).empty());
}

TEST_CASE("flag transitions follow the lifecycle and persist") {
    TempDir tmp("catalog");
    const std::string path = tmp.sub("c.jsonl");
    {
        Catalog cat(path);
        cat.add(make_record("P1", 10));
        CHECK(cat.pending_tasks("cube") == std::vector<std::string>{"P1"});

        cat.set_flag("P1", "cube", FlagState::Done);
        CHECK(cat.pending_tasks("cube").empty());

        CHECK_THROWS_AS(cat.set_flag("P1", "cube", FlagState::Pending),
                        PreconditionError);
        CHECK_THROWS_AS(cat.set_flag("P1", "cube", FlagState::Failed),
                        PreconditionError);
        CHECK_THROWS_AS(cat.set_flag("P1", "nope", FlagState::Done),
                        DataError);
        CHECK_THROWS_AS(cat.set_flag("nope", "cube", FlagState::Done),
                        DataError);
    }
    Catalog cat(path);
    CHECK(cat.find("P1")->flags.at("cube").state == FlagState::Done);
}

TEST_CASE("failed steps can be retried and sequence numbers grow") {
    TempDir tmp("catalog");
    Catalog cat(tmp.sub("c.jsonl"));
    cat.add(make_record("P1", 10));

    cat.set_flag("P1", "mask", FlagState::Failed, "disk full");
    const ProductRecord* r = cat.find("P1");
    CHECK(r->flags.at("mask").message == "disk full");
    const int64_t seq_failed = r->flags.at("mask").last_update;

    cat.set_flag("P1", "mask", FlagState::Pending);
    cat.set_flag("P1", "mask", FlagState::Done);
    CHECK(cat.find("P1")->flags.at("mask").last_update > seq_failed);

    // pending_tasks picks up failed and pending states alike.
    cat.set_flag("P1", "cube", FlagState::Failed);
    auto pending = cat.pending_tasks("cube");
    CHECK(pending == std::vector<std::string>{"P1"});
}

TEST_CASE("random legal flag walks keep every status consistent") {
    TempDir tmp("catalog");
    Catalog cat(tmp.sub("c.jsonl"));
    for (int i = 0; i < 10; ++i)
        cat.add(make_record("P" + std::to_string(i), 100 + i));

    std::mt19937_64 rng(99);
    const auto steps = pipeline_steps(Sensor::S2);
    for (int i = 0; i < 300; ++i) {
        const std::string id = "P" + std::to_string(rng() % 10);
        const std::string& step = steps[rng() % steps.size()];
        const FlagState cur = cat.find(id)->flags.at(step).state;
        FlagState next;
        switch (cur) {
            case FlagState::Pending:
                next = rng() % 2 ? FlagState::Done : FlagState::Failed;
                break;
            case FlagState::Failed: next = FlagState::Pending; break;
            default: continue;  // done is terminal
        }
        const int64_t before = cat.find(id)->flags.at(step).last_update;
        cat.set_flag(id, step, next);
        CHECK(cat.find(id)->flags.at(step).state == next);
        CHECK(cat.find(id)->flags.at(step).last_update > before);
    }

    // Every product either appears in pending_tasks or is done for the step.
    for (const std::string& step : steps) {
        auto pending = cat.pending_tasks(step);
        for (const ProductRecord* r : cat.list()) {
            const bool in_pending =
                std::find(pending.begin(), pending.end(), r->product_id) !=
                pending.end();
            CHECK(in_pending ==
                  (r->flags.at(step).state != FlagState::Done));
        }
    }
}

TEST_CASE("S1 products skip the scene mask step") {
    auto s2 = pipeline_steps(Sensor::S2);
    auto s1 = pipeline_steps(Sensor::S1);
    CHECK(std::find(s2.begin(), s2.end(), "mask") != s2.end());
    CHECK(std::find(s1.begin(), s1.end(), "mask") == s1.end());
    CHECK(std::find(s1.begin(), s1.end(), "cube") != s1.end());
}

TEST_CASE("ingest writes tiles, computes cloud fraction, and flags the product") {
    TempDir tmp("ingest");
    GridSpec g = make_grid(20, 20, 10.0);
    Catalog cat(tmp.sub("catalog.jsonl"));

    Raster b4(g, 0.1f), b8(g, 0.5f), scl(g, float(kSclClear));
    // 100 of 400 pixels clouded, 40 shadowed.
    for (int i = 0; i < 100; ++i) scl.values[i] = float(kSclCloud);
    for (int i = 100; i < 140; ++i) scl.values[i] = float(kSclShadow);

    ProductRecord meta = make_record("S2_aug", parse_date("2019-08-06"));
    meta.flags.clear();
    const ProductRecord& rec = ingest_product(
        cat, tmp.path(), meta,
        {{BandId::B04, b4}, {BandId::B08, b8}, {BandId::SCL, scl}});

    CHECK(rec.cloud_fraction == doctest::Approx(140.0 / 400.0));
    CHECK(rec.flags.at("cube").state == FlagState::Done);
    CHECK(rec.bands.size() == 3);
    CHECK(std::filesystem::exists(tmp.sub("cube/S2/2019-08-06/B04.tiles")));
    CHECK(std::filesystem::exists(tmp.sub("cube/S2/2019-08-06/SCL.tiles")));

    // A second acquisition on the same sensor and day keeps the first.
    ProductRecord dup = make_record("S2_aug_dup", parse_date("2019-08-06"));
    dup.flags.clear();
    const ProductRecord& rec2 =
        ingest_product(cat, tmp.path(), dup, {{BandId::B04, b4}});
    CHECK_FALSE(rec2.flags.at("cube").message.empty());
}

TEST_CASE("a failing band write marks the cube step failed") {
    TempDir tmp("ingest");
    GridSpec g = make_grid(10, 10, 10.0);
    Catalog cat(tmp.sub("catalog.jsonl"));
    Raster r(g, 0.2f);

    ProductRecord meta = make_record("S2_bad", 100);
    meta.flags.clear();
    int writes = 0;
    CHECK_THROWS(ingest_product(cat, tmp.path(), meta,
                                {{BandId::B04, r}, {BandId::B08, r}},
                                [&](BandId) {
                                    if (++writes == 2)
                                        throw DataError("simulated write failure");
                                }));
    const ProductRecord* rec = cat.find("S2_bad");
    REQUIRE(rec != nullptr);
    CHECK(rec->flags.at("cube").state == FlagState::Failed);
    CHECK(cat.pending_tasks("cube") == std::vector<std::string>{"S2_bad"});
}
