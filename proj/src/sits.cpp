#include "adc/sits.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "adc/dates.hpp"
#include "adc/errors.hpp"
#include "adc/util.hpp"

namespace adc {

std::size_t TimeSeries::count_valid() const {
    std::size_t n = 0;
    for (uint8_t v : valid) n += v;
    return n;
}

void TimeSeries::validate() const {
    if (values.size() != times.size() || valid.size() != times.size() ||
        prov.size() != times.size())
        throw PreconditionError("time series arrays differ in length");
    for (std::size_t i = 1; i < times.size(); ++i)
        if (times[i] <= times[i - 1])
            throw PreconditionError("time series times must be strictly increasing");
}

TimeSeries TimeSeries::observed(std::vector<int64_t> times, std::vector<double> values,
                                std::vector<uint8_t> valid) {
    TimeSeries ts;
    ts.times = std::move(times);
    ts.values = std::move(values);
    ts.valid = valid.empty() ? std::vector<uint8_t>(ts.times.size(), 1)
                             : std::move(valid);
    ts.prov.assign(ts.times.size(), Provenance::Observed);
    ts.validate();
    return ts;
}

InterpMethod interp_method_from_string(const std::string& s) {
    if (s == "linear") return InterpMethod::Linear;
    if (s == "cubic") return InterpMethod::Cubic;
    throw UsageError("unknown interpolation method '" + s + "'");
}

void PipelineConfig::validate() const {
    if (value_min >= value_max)
        throw PreconditionError("value_min must be below value_max");
    if (step_days < 1) throw PreconditionError("step_days must be >= 1");
    if (window_points < 1 || window_points % 2 == 0)
        throw PreconditionError("window_points must be odd and >= 1");
    if (spike_threshold && *spike_threshold <= 0)
        throw PreconditionError("spike_threshold must be positive");
}

TimeSeries filter_outliers(const TimeSeries& ts, const PipelineConfig& cfg) {
    ts.validate();
    TimeSeries out = ts;
    const std::size_t n = ts.size();

    for (std::size_t i = 0; i < n; ++i) {
        if (!out.valid[i]) continue;
        if (out.values[i] < cfg.value_min || out.values[i] > cfg.value_max)
            out.valid[i] = 0;
    }

    if (cfg.spike_threshold) {
        const double thr = *cfg.spike_threshold;
        std::vector<uint8_t> keep = out.valid;
        std::vector<std::size_t> vi;
        for (std::size_t i = 0; i < n; ++i)
            if (out.valid[i]) vi.push_back(i);
        for (std::size_t k = 1; k + 1 < vi.size(); ++k) {
            const std::size_t l = vi[k - 1], i = vi[k], r = vi[k + 1];
            double rate_l = std::fabs(out.values[i] - out.values[l]) /
                            double(out.times[i] - out.times[l]);
            double rate_r = std::fabs(out.values[r] - out.values[i]) /
                            double(out.times[r] - out.times[i]);
            if (rate_l > thr && rate_r > thr) keep[i] = 0;
        }
        out.valid = std::move(keep);
    }
    return out;
}

namespace {

// Natural cubic spline second derivatives via the tridiagonal system.
std::vector<double> spline_m(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n < 3) return m;
    std::vector<double> a(n), b(n), c(n), d(n);
    b[0] = 1;
    b[n - 1] = 1;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        double h0 = x[i] - x[i - 1], h1 = x[i + 1] - x[i];
        a[i] = h0;
        b[i] = 2.0 * (h0 + h1);
        c[i] = h1;
        d[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
    }
    for (std::size_t i = 1; i < n; ++i) {
        double w = a[i] / b[i - 1];
        b[i] -= w * c[i - 1];
        d[i] -= w * d[i - 1];
    }
    m[n - 1] = d[n - 1] / b[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) m[i] = (d[i] - c[i] * m[i + 1]) / b[i];
    return m;
}

}  // namespace

TimeSeries interpolate(const TimeSeries& ts, InterpMethod method) {
    ts.validate();
    std::vector<std::size_t> vi;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts.valid[i]) vi.push_back(i);

    const std::size_t need = method == InterpMethod::Linear ? 2 : 4;
    if (vi.size() < need)
        throw DataError("interpolation needs at least " + std::to_string(need) +
                        " valid points, have " + std::to_string(vi.size()));

    std::vector<double> x(vi.size()), y(vi.size());
    for (std::size_t k = 0; k < vi.size(); ++k) {
        x[k] = double(ts.times[vi[k]]);
        y[k] = ts.values[vi[k]];
    }
    std::vector<double> m;
    if (method == InterpMethod::Cubic) m = spline_m(x, y);

    TimeSeries out = ts;
    const int64_t lo = ts.times[vi.front()], hi = ts.times[vi.back()];
    std::size_t seg = 0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (ts.valid[i]) continue;
        const int64_t t = ts.times[i];
        if (t < lo || t > hi) continue;  // no extrapolation
        while (seg + 2 < x.size() && x[seg + 1] < double(t)) ++seg;
        const double h = x[seg + 1] - x[seg];
        const double u = (double(t) - x[seg]) / h;
        double v;
        if (method == InterpMethod::Linear) {
            v = y[seg] + u * (y[seg + 1] - y[seg]);
        } else {
            const double A = 1.0 - u, B = u;
            v = A * y[seg] + B * y[seg + 1] +
                ((A * A * A - A) * m[seg] + (B * B * B - B) * m[seg + 1]) * h * h / 6.0;
        }
        out.values[i] = v;
        out.valid[i] = 1;
        out.prov[i] = Provenance::Filled;
    }
    return out;
}

namespace {

double aggregate(std::vector<double>& vals, ResampleAgg agg) {
    switch (agg) {
        case ResampleAgg::Mean: {
            double s = 0;
            for (double v : vals) s += v;
            return s / double(vals.size());
        }
        case ResampleAgg::Median: {
            std::sort(vals.begin(), vals.end());
            std::size_t n = vals.size();
            return n % 2 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
        }
        case ResampleAgg::Min: return *std::min_element(vals.begin(), vals.end());
        case ResampleAgg::Max: return *std::max_element(vals.begin(), vals.end());
    }
    throw PreconditionError("bad aggregator");
}

}  // namespace

TimeSeries resample_series(const TimeSeries& ts, int step_days, ResampleAgg agg,
                           bool fill_empty) {
    ts.validate();
    if (ts.size() == 0) throw DataError("cannot resample an empty series");
    if (step_days < 1) throw PreconditionError("step_days must be >= 1");

    const int64_t start = ts.times.front(), end = ts.times.back();
    const int64_t count = (end - start) / step_days + 1;

    // Valid points, for window gathering and for the fallback interpolation.
    std::vector<std::size_t> vi;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts.valid[i]) vi.push_back(i);

    TimeSeries out;
    out.times.resize(std::size_t(count));
    out.values.assign(std::size_t(count), 0.0);
    out.valid.assign(std::size_t(count), 0);
    out.prov.assign(std::size_t(count), Provenance::Filled);

    std::size_t k = 0;  // cursor into vi
    std::vector<double> window;
    for (int64_t s = 0; s < count; ++s) {
        const int64_t t0 = start + s * step_days;
        const int64_t t1 = t0 + step_days;
        out.times[std::size_t(s)] = t0;

        window.clear();
        bool any_observed = false;
        while (k < vi.size() && ts.times[vi[k]] < t0) ++k;
        for (std::size_t j = k; j < vi.size() && ts.times[vi[j]] < t1; ++j) {
            window.push_back(ts.values[vi[j]]);
            if (ts.prov[vi[j]] == Provenance::Observed) any_observed = true;
        }

        if (!window.empty()) {
            out.values[std::size_t(s)] = aggregate(window, agg);
            out.valid[std::size_t(s)] = 1;
            out.prov[std::size_t(s)] =
                any_observed ? Provenance::Observed : Provenance::Filled;
        } else if (fill_empty && !vi.empty() && t0 >= ts.times[vi.front()] &&
                   t0 <= ts.times[vi.back()]) {
            std::size_t seg = 0;
            while (seg + 2 < vi.size() && ts.times[vi[seg + 1]] < t0) ++seg;
            const double x0 = double(ts.times[vi[seg]]);
            const double x1 = double(ts.times[vi[seg + 1]]);
            const double u = (double(t0) - x0) / (x1 - x0);
            out.values[std::size_t(s)] =
                ts.values[vi[seg]] + u * (ts.values[vi[seg + 1]] - ts.values[vi[seg]]);
            out.valid[std::size_t(s)] = 1;
            out.prov[std::size_t(s)] = Provenance::Filled;
        }
    }
    return out;
}

TimeSeries smooth(const TimeSeries& ts, int window_points) {
    ts.validate();
    if (window_points < 1 || window_points % 2 == 0)
        throw PreconditionError("window_points must be odd and >= 1");
    if (window_points == 1) return ts;

    std::vector<std::size_t> vi;
    for (std::size_t i = 0; i < ts.size(); ++i)
        if (ts.valid[i]) vi.push_back(i);

    TimeSeries out = ts;
    const int h = window_points / 2;
    std::vector<double> buf(static_cast<std::size_t>(window_points));
    for (std::size_t k = 0; k < vi.size(); ++k) {
        if (k < std::size_t(h) || k + std::size_t(h) >= vi.size()) continue;
        for (int j = -h; j <= h; ++j)
            buf[std::size_t(j + h)] = ts.values[vi[k + std::size_t(j + h) - h]];
        std::nth_element(buf.begin(), buf.begin() + h, buf.end());
        out.values[vi[k]] = buf[std::size_t(h)];
    }
    return out;
}

TimeSeries prepare(const TimeSeries& ts, const PipelineConfig& cfg) {
    cfg.validate();
    TimeSeries out = ts;
    if (cfg.filter_enabled) out = filter_outliers(out, cfg);
    if (cfg.interpolate_enabled) out = interpolate(out, cfg.method);
    if (cfg.resample_enabled)
        out = resample_series(out, cfg.step_days, ResampleAgg::Mean, cfg.resample_fill);
    if (cfg.smooth_enabled) out = smooth(out, cfg.window_points);
    return out;
}

std::string series_csv(const TimeSeries& ts) {
    std::string s = "date,value,valid,provenance\n";
    for (std::size_t i = 0; i < ts.size(); ++i) {
        s += format_date(ts.times[i]);
        s += ',';
        s += ts.valid[i] ? format_double(ts.values[i]) : "";
        s += ',';
        s += ts.valid[i] ? '1' : '0';
        s += ',';
        if (ts.valid[i])
            s += ts.prov[i] == Provenance::Observed ? "observed" : "filled";
        s += '\n';
    }
    return s;
}

void write_series_csv(const std::string& path, const TimeSeries& ts) {
    write_file_atomic(path, series_csv(ts));
}

TimeSeries read_series_csv(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::string line;
    if (!std::getline(in, line) || line.rfind("date,value,valid", 0) != 0)
        throw DataError(path + ": missing series CSV header");
    TimeSeries ts;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto cols = split(line, ',');
        if (cols.size() < 4)
            throw DataError(path + ":" + std::to_string(lineno) + ": expected 4 columns");
        ts.times.push_back(parse_date(cols[0]));
        ts.valid.push_back(cols[2] == "1" ? 1 : 0);
        ts.values.push_back(cols[1].empty() ? 0.0 : std::stod(cols[1]));
        ts.prov.push_back(cols[3] == "filled" ? Provenance::Filled
                                              : Provenance::Observed);
    }
    ts.validate();
    return ts;
}

PipelineConfig pipeline_config_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("pipeline config: ") + e.what());
    }
    PipelineConfig cfg;
    try {
        cfg.filter_enabled = j.value("filter", cfg.filter_enabled);
        cfg.value_min = j.value("value_min", cfg.value_min);
        cfg.value_max = j.value("value_max", cfg.value_max);
        if (j.contains("spike_threshold") && !j.at("spike_threshold").is_null())
            cfg.spike_threshold = j.at("spike_threshold").get<double>();
        cfg.interpolate_enabled = j.value("interpolate", cfg.interpolate_enabled);
        if (j.contains("method"))
            cfg.method = interp_method_from_string(j.at("method").get<std::string>());
        cfg.resample_enabled = j.value("resample", cfg.resample_enabled);
        cfg.step_days = j.value("step_days", cfg.step_days);
        cfg.resample_fill = j.value("resample_fill", cfg.resample_fill);
        cfg.smooth_enabled = j.value("smooth", cfg.smooth_enabled);
        cfg.window_points = j.value("window_points", cfg.window_points);
    } catch (const nlohmann::json::exception& e) {
        throw DataError(std::string("pipeline config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string pipeline_config_to_json(const PipelineConfig& cfg) {
    nlohmann::json j{{"filter", cfg.filter_enabled},
                     {"value_min", cfg.value_min},
                     {"value_max", cfg.value_max},
                     {"interpolate", cfg.interpolate_enabled},
                     {"method", cfg.method == InterpMethod::Linear ? "linear" : "cubic"},
                     {"resample", cfg.resample_enabled},
                     {"step_days", cfg.step_days},
                     {"resample_fill", cfg.resample_fill},
                     {"smooth", cfg.smooth_enabled},
                     {"window_points", cfg.window_points}};
    if (cfg.spike_threshold) j["spike_threshold"] = *cfg.spike_threshold;
    return j.dump(1) + "\n";
}

}  // namespace adc
