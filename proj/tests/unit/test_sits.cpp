#include <doctest.h>

#include <cmath>
#include <random>

#include "adc/errors.hpp"
#include "adc/sits.hpp"

using namespace adc;

namespace {

TimeSeries series(std::vector<int64_t> t, std::vector<double> v,
                  std::vector<uint8_t> ok = {}) {
    return TimeSeries::observed(std::move(t), std::move(v), std::move(ok));
}

}  // namespace

TEST_CASE("validation rejects inconsistent series") {
    TimeSeries ts = series({0, 10, 20}, {1, 2, 3});
    CHECK_NOTHROW(ts.validate());

    TimeSeries bad = ts;
    bad.times = {0, 10};
    CHECK_THROWS_AS(bad.validate(), PreconditionError);

    bad = ts;
    bad.times = {0, 10, 10};
    CHECK_THROWS_AS(bad.validate(), PreconditionError);
}

TEST_CASE("range filter marks values outside bounds invalid") {
    PipelineConfig cfg;
    TimeSeries ts = series({0, 5, 10, 15}, {0.2, 1.4, -3.0, 0.8});
    TimeSeries out = filter_outliers(ts, cfg);
    CHECK(out.valid == std::vector<uint8_t>{1, 0, 0, 1});
    CHECK(out.values[1] == 1.4);  // marked, not erased
}

TEST_CASE("spike screening judges all points against the input in one pass") {
    PipelineConfig cfg;
    cfg.spike_threshold = 0.05;  // per day

    TimeSeries ts = series({0, 10, 20, 30}, {0.2, 0.9, 0.2, 0.2});
    TimeSeries out = filter_outliers(ts, cfg);
    CHECK(out.valid == std::vector<uint8_t>{1, 0, 1, 1});

    // Two adjacent spikes: each is judged against the original neighbors,
    // so both trip the threshold rather than shielding each other.
    ts = series({0, 10, 20, 30, 40}, {0.2, 0.9, -0.7, 0.2, 0.2});
    out = filter_outliers(ts, cfg);
    CHECK(out.valid == std::vector<uint8_t>{1, 0, 0, 1, 1});

    // A slow ramp passes.
    ts = series({0, 10, 20}, {0.2, 0.4, 0.6});
    out = filter_outliers(ts, cfg);
    CHECK(out.valid == std::vector<uint8_t>{1, 1, 1});
}

TEST_CASE("linear interpolation fills gaps exactly and never extrapolates") {
    TimeSeries ts = series({0, 10, 20, 30, 40}, {0.0, 0, 0, 0, 0.8},
                           {1, 0, 0, 0, 1});
    TimeSeries out = interpolate(ts, InterpMethod::Linear);
    CHECK(out.values[1] == doctest::Approx(0.2));
    CHECK(out.values[2] == doctest::Approx(0.4));
    CHECK(out.values[3] == doctest::Approx(0.6));
    CHECK(out.valid == std::vector<uint8_t>{1, 1, 1, 1, 1});
    CHECK(out.prov[0] == Provenance::Observed);
    CHECK(out.prov[2] == Provenance::Filled);

    // Leading and trailing gaps stay invalid.
    ts = series({0, 10, 20}, {0, 0.5, 0}, {0, 1, 0});
    out = interpolate(ts, InterpMethod::Linear);
    CHECK(out.valid == std::vector<uint8_t>{0, 1, 0});
}

TEST_CASE("observed points pass through interpolation bit-exactly") {
    std::mt19937_64 rng(31);
    std::uniform_real_distribution<double> u(-1, 1);
    for (InterpMethod m : {InterpMethod::Linear, InterpMethod::Cubic}) {
        TimeSeries ts;
        for (int i = 0; i < 40; ++i) {
            ts.times.push_back(i * 7);
            ts.values.push_back(u(rng));
            ts.valid.push_back(rng() % 3 != 0);
            ts.prov.push_back(Provenance::Observed);
        }
        TimeSeries out = interpolate(ts, m);
        for (std::size_t i = 0; i < ts.size(); ++i) {
            if (!ts.valid[i]) continue;
            CHECK(out.values[i] == ts.values[i]);
            CHECK(out.prov[i] == Provenance::Observed);
        }
    }
}

TEST_CASE("cubic interpolation reproduces smooth curves better than linear") {
    TimeSeries dense;
    for (int i = 0; i <= 60; ++i) {
        dense.times.push_back(i);
        dense.values.push_back(std::sin(i * 0.1));
        dense.valid.push_back(i % 6 == 0);
        dense.prov.push_back(Provenance::Observed);
    }
    TimeSeries lin = interpolate(dense, InterpMethod::Linear);
    TimeSeries cub = interpolate(dense, InterpMethod::Cubic);
    double el = 0, ec = 0;
    for (int i = 6; i <= 54; ++i) {
        el += std::abs(lin.values[i] - std::sin(i * 0.1));
        ec += std::abs(cub.values[i] - std::sin(i * 0.1));
    }
    CHECK(ec < el);
}

TEST_CASE("interpolation needs enough valid points") {
    TimeSeries one = series({0, 10}, {0.5, 0}, {1, 0});
    CHECK_THROWS_AS(interpolate(one, InterpMethod::Linear), DataError);
    TimeSeries three = series({0, 10, 20}, {0.1, 0.2, 0.3});
    CHECK_THROWS_AS(interpolate(three, InterpMethod::Cubic), DataError);
    CHECK_NOTHROW(interpolate(three, InterpMethod::Linear));
}

TEST_CASE("resampling hits the documented sample count") {
    // floor((t_last - t_first) / step) + 1 samples.
    TimeSeries ts = series({3, 17, 23, 55, 71}, {1, 2, 3, 4, 5});
    TimeSeries out = resample_series(ts, 10);
    CHECK(out.size() == std::size_t((71 - 3) / 10 + 1));
    CHECK(out.times.front() == 3);
    CHECK(out.times.back() == 63);
    for (std::size_t i = 1; i < out.size(); ++i)
        CHECK(out.times[i] - out.times[i - 1] == 10);
}

TEST_CASE("resampling aggregates windows and fills empty ones") {
    TimeSeries ts = series({0, 2, 30, 31}, {0.1, 0.3, 0.5, 0.7});
    TimeSeries mean = resample_series(ts, 10, ResampleAgg::Mean, true);
    CHECK(mean.values[0] == doctest::Approx(0.2));   // [0,10): 0.1, 0.3
    CHECK(mean.values[3] == doctest::Approx(0.6));   // [30,40): 0.5, 0.7
    CHECK(mean.valid[1] == 1);                       // filled by interpolation
    CHECK(mean.prov[1] == Provenance::Filled);
    CHECK(mean.values[1] == doctest::Approx(0.3 + (0.5 - 0.3) * 8 / 28));

    TimeSeries sparse = resample_series(ts, 10, ResampleAgg::Mean, false);
    CHECK(sparse.valid[1] == 0);
    CHECK(sparse.valid[2] == 0);

    TimeSeries mx = resample_series(ts, 10, ResampleAgg::Max, false);
    CHECK(mx.values[0] == doctest::Approx(0.3));
    TimeSeries mn = resample_series(ts, 10, ResampleAgg::Min, false);
    CHECK(mn.values[0] == doctest::Approx(0.1));
}

TEST_CASE("rolling median flattens an isolated spike") {
    TimeSeries ts = series({0, 1, 2, 3}, {1, 9, 1, 1});
    TimeSeries out = smooth(ts, 3);
    CHECK(out.values == std::vector<double>{1, 1, 1, 1});

    // Window 1 is the identity.
    CHECK(smooth(ts, 1).values == ts.values);
    CHECK_THROWS_AS(smooth(ts, 4), PreconditionError);
}

TEST_CASE("smoothing skips invalid points and works on the valid subsequence") {
    TimeSeries ts = series({0, 1, 2, 3, 4}, {1, 50, 9, 1, 1}, {1, 0, 1, 1, 1});
    TimeSeries out = smooth(ts, 3);
    // Valid values are (1, 9, 1, 1): the interior medians flatten the 9.
    CHECK(out.values[2] == 1);
    CHECK(out.values[1] == 50);  // invalid points keep their slot untouched
    CHECK(out.valid[1] == 0);
}

TEST_CASE("prepare chains the stages and honors toggles") {
    PipelineConfig cfg;
    cfg.spike_threshold = 0.2;
    TimeSeries ts = series({0, 1, 2, 3, 4, 5, 6},
                           {0.1, 0.1, 5.0, 0.1, 0.1, 0.1, 0.1});
    TimeSeries out = prepare(ts, cfg);
    CHECK(out.size() == 7);
    for (double v : out.values) CHECK(v == doctest::Approx(0.1));

    PipelineConfig off;
    off.filter_enabled = false;
    off.interpolate_enabled = false;
    off.smooth_enabled = false;
    TimeSeries same = prepare(ts, off);
    CHECK(same.values == ts.values);

    PipelineConfig res;
    res.resample_enabled = true;
    res.step_days = 2;
    res.smooth_enabled = false;
    TimeSeries r = prepare(ts, res);
    CHECK(r.size() == 4);
}

TEST_CASE("pipeline config json round-trips") {
    PipelineConfig cfg;
    cfg.value_min = -0.5;
    cfg.value_max = 0.9;
    cfg.spike_threshold = 0.07;
    cfg.method = InterpMethod::Cubic;
    cfg.resample_enabled = true;
    cfg.step_days = 5;
    cfg.window_points = 5;

    PipelineConfig back = pipeline_config_from_json(pipeline_config_to_json(cfg));
    CHECK(back.value_min == cfg.value_min);
    CHECK(back.value_max == cfg.value_max);
    REQUIRE(back.spike_threshold.has_value());
    CHECK(*back.spike_threshold == 0.07);
    CHECK(back.method == InterpMethod::Cubic);
    CHECK(back.resample_enabled);
    CHECK(back.step_days == 5);
    CHECK(back.window_points == 5);

    CHECK_THROWS_AS(pipeline_config_from_json("{\"step_days\": -1}"),
                    PreconditionError);
    CHECK_THROWS_AS(pipeline_config_from_json("still not json"), DataError);

    PipelineConfig defaults = pipeline_config_from_json("{}");
    CHECK(defaults.filter_enabled);
    CHECK(defaults.window_points == 3);
    CHECK_FALSE(defaults.spike_threshold.has_value());
}

TEST_CASE("series csv round-trips") {
    TimeSeries ts = series({0, 10, 20}, {0.25, -0.5, 0.75}, {1, 0, 1});
    ts.prov[2] = Provenance::Filled;
    std::string csv = series_csv(ts);
    CHECK(csv.substr(0, csv.find('\n')) == "date,value,valid,provenance");

    TimeSeries back;
    {
        const std::string path = "/tmp/adc_sits_csv_test.csv";
        write_series_csv(path, ts);
        back = read_series_csv(path);
        std::remove(path.c_str());
    }
    CHECK(back.times == ts.times);
    CHECK(back.valid == ts.valid);
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts.valid[i]) CHECK(back.values[i] == ts.values[i]);
    CHECK(back.prov[2] == Provenance::Filled);
}
