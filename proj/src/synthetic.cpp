#include "adc/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include <json.hpp>

#include "adc/dates.hpp"
#include "adc/errors.hpp"
#include "adc/masking.hpp"
#include "adc/util.hpp"

namespace fs = std::filesystem;

namespace adc {

using nlohmann::json;

namespace {

// The two logistic branches meet at x = kKink (still on the rising part of
// the sigmoid), which puts a slope kink at the maximum. A flat-top curve
// would make the argmax position meaningless under noise.
constexpr double kKink = 1.2;
constexpr double kSpan = 4.2;  // x distance covered by rise_days / fall_days

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

const double kKinkGain = sigmoid(kKink);

uint64_t tag(const std::string& s) { return fnv1a64(s.data(), s.size()); }

const std::map<std::string, CropParams>& preset_table() {
    static const std::map<std::string, CropParams> t = {
        {"MAIZ", {0.15, 0.85, 210, 55, 45}},
        {"WHEA", {0.18, 0.80, 140, 65, 35}},
        {"GRAS", {0.25, 0.75, 160, 70, 80}},
        {"GRAS_LOW", {0.12, 0.35, 170, 60, 70}},
        {"BARE", {0.10, 0.14, 180, 80, 80}},
    };
    return t;
}

// Additive NDVI loss around a mowing event: sharp cut, short bare period,
// slow regrowth.
constexpr double kMowCutDays = 4;
constexpr double kMowHoldDays = 3;
constexpr double kMowRegrowDays = 25;

double mow_loss(double drop, double days_since_cut_start) {
    const double d = days_since_cut_start;
    if (d < 0) return 0;
    if (d <= kMowCutDays) return drop * d / kMowCutDays;
    if (d <= kMowCutDays + kMowHoldDays) return drop;
    const double r = d - kMowCutDays - kMowHoldDays;
    if (r <= kMowRegrowDays) return drop * (1.0 - r / kMowRegrowDays);
    return 0;
}

}  // namespace

double seasonal_value(const CropParams& p, double day_of_year) {
    const double amp = p.peak - p.base;
    double x;
    if (day_of_year <= p.pos_day) {
        x = kKink + (day_of_year - p.pos_day) * kSpan / p.rise_days;
    } else {
        x = kKink - (day_of_year - p.pos_day) * kSpan / p.fall_days;
    }
    return p.base + amp * sigmoid(x) / kKinkGain;
}

const CropParams& crop_preset(const std::string& code) {
    auto it = preset_table().find(code);
    if (it == preset_table().end()) {
        std::string known;
        for (const auto& [k, v] : preset_table()) known += k + " ";
        throw UsageError("unknown crop code '" + code + "' (have: " + known + ")");
    }
    return it->second;
}

bool is_grass_crop(const std::string& code) {
    return code == "GRAS" || code == "GRAS_LOW";
}

void SyntheticConfig::validate() const {
    grid.validate();
    if (n_parcels < 1) throw UsageError("n_parcels must be >= 1");
    if (end_day < start_day) throw UsageError("date range is empty");
    if (revisit_days < 1) throw UsageError("revisit_days must be >= 1");
    if (s1_revisit_days < 0) throw UsageError("s1_revisit_days must be >= 0");
    if (noise_sigma < 0) throw UsageError("noise_sigma must be >= 0");
    if (cloud_probability < 0 || cloud_probability > 1 ||
        full_cloud_probability < 0 || full_cloud_probability > 1)
        throw UsageError("cloud probabilities must be in [0, 1]");

    double total = 0;
    for (const auto& [code, frac] : crop_mix) {
        crop_preset(code);
        if (frac < 0) throw UsageError("crop fraction must be >= 0");
        total += frac;
    }
    if (std::fabs(total - 1.0) > 1e-9)
        throw UsageError("crop_mix fractions must sum to 1");

    for (const auto& m : mismatches) {
        crop_preset(m.declared);
        crop_preset(m.actual);
        if (m.declared == m.actual)
            throw UsageError("mismatch spec needs declared != actual");
    }
    for (const auto& m : mowing) {
        if (m.drop <= 0) throw UsageError("mowing drop must be positive");
        if (m.dates.empty()) throw UsageError("mowing spec has no dates");
        for (int64_t d : m.dates)
            if (d < start_day || d > end_day)
                throw UsageError("mowing date " + format_date(d) +
                                 " outside the dataset range");
    }
}

SyntheticConfig synthetic_config_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("invalid synthetic config JSON: ") + e.what());
    }
    SyntheticConfig cfg;
    try {
        if (j.contains("grid")) {
            const json& g = j["grid"];
            cfg.grid.origin_x = g.value("origin_x", cfg.grid.origin_x);
            cfg.grid.origin_y = g.value("origin_y", cfg.grid.origin_y);
            cfg.grid.pixel_size = g.value("pixel_size", cfg.grid.pixel_size);
            cfg.grid.width = g.value("width", cfg.grid.width);
            cfg.grid.height = g.value("height", cfg.grid.height);
            cfg.grid.crs_id = g.value("crs", cfg.grid.crs_id);
        }
        cfg.n_parcels = j.value("n_parcels", cfg.n_parcels);
        cfg.start_day = parse_date(j.value("start", "2019-01-01"));
        cfg.end_day = parse_date(j.value("end", "2019-12-31"));
        cfg.revisit_days = j.value("revisit_days", cfg.revisit_days);
        cfg.s1_revisit_days = j.value("s1_revisit_days", cfg.s1_revisit_days);
        if (j.contains("crop_mix")) {
            cfg.crop_mix.clear();
            for (auto it = j["crop_mix"].begin(); it != j["crop_mix"].end(); ++it)
                cfg.crop_mix[it.key()] = it->get<double>();
        }
        cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
        cfg.cloud_probability = j.value("cloud_probability", cfg.cloud_probability);
        cfg.full_cloud_probability =
            j.value("full_cloud_probability", cfg.full_cloud_probability);
        for (const auto& d : j.value("full_cloud_dates", json::array()))
            cfg.full_cloud_dates.push_back(parse_date(d.get<std::string>()));
        for (const auto& m : j.value("mismatches", json::array())) {
            MismatchSpec s;
            s.parcel_id = m.value("parcel_id", int64_t(0));
            s.declared = m.at("declared").get<std::string>();
            s.actual = m.at("actual").get<std::string>();
            cfg.mismatches.push_back(std::move(s));
        }
        for (const auto& m : j.value("mowing", json::array())) {
            MowingSpec s;
            s.parcel_id = m.value("parcel_id", int64_t(0));
            s.drop = m.value("drop", 0.4);
            for (const auto& d : m.at("dates"))
                s.dates.push_back(parse_date(d.get<std::string>()));
            cfg.mowing.push_back(std::move(s));
        }
        cfg.seed = j.value("seed", cfg.seed);
    } catch (const json::exception& e) {
        throw DataError(std::string("bad synthetic config: ") + e.what());
    }
    cfg.validate();
    return cfg;
}

std::string synthetic_config_to_json(const SyntheticConfig& cfg) {
    json mism = json::array();
    for (const auto& m : cfg.mismatches)
        mism.push_back({{"parcel_id", m.parcel_id},
                        {"declared", m.declared},
                        {"actual", m.actual}});
    json mow = json::array();
    for (const auto& m : cfg.mowing) {
        json dates = json::array();
        for (int64_t d : m.dates) dates.push_back(format_date(d));
        mow.push_back(
            {{"parcel_id", m.parcel_id}, {"drop", m.drop}, {"dates", dates}});
    }
    json clouds = json::array();
    for (int64_t d : cfg.full_cloud_dates) clouds.push_back(format_date(d));
    json j{{"grid",
            {{"origin_x", cfg.grid.origin_x},
             {"origin_y", cfg.grid.origin_y},
             {"pixel_size", cfg.grid.pixel_size},
             {"width", cfg.grid.width},
             {"height", cfg.grid.height},
             {"crs", cfg.grid.crs_id}}},
           {"n_parcels", cfg.n_parcels},
           {"start", format_date(cfg.start_day)},
           {"end", format_date(cfg.end_day)},
           {"revisit_days", cfg.revisit_days},
           {"s1_revisit_days", cfg.s1_revisit_days},
           {"crop_mix", cfg.crop_mix},
           {"noise_sigma", cfg.noise_sigma},
           {"cloud_probability", cfg.cloud_probability},
           {"full_cloud_probability", cfg.full_cloud_probability},
           {"full_cloud_dates", clouds},
           {"mismatches", mism},
           {"mowing", mow},
           {"seed", cfg.seed}};
    return j.dump(1) + "\n";
}

double truth_value(const ParcelTruth& t, int64_t day) {
    double v = seasonal_value(t.params, double(day_of_year(day)));
    for (const MowingSpec& m : t.mowing)
        for (int64_t e : m.dates) v -= mow_loss(m.drop, double(day - e));
    return std::max(v, 0.02);
}

const ParcelTruth* DatasetTruth::find(int64_t parcel_id) const {
    for (const ParcelTruth& p : parcels)
        if (p.parcel_id == parcel_id) return &p;
    return nullptr;
}

namespace {

json truth_to_json(const DatasetTruth& t) {
    json parcels = json::array();
    for (const ParcelTruth& p : t.parcels) {
        json seasons = json::array();
        for (const SeasonTruth& s : p.seasons)
            seasons.push_back({{"year", s.year},
                               {"sos", s.sos},
                               {"pos", s.pos},
                               {"eos", s.eos}});
        json mow = json::array();
        for (const MowingSpec& m : p.mowing) {
            json dates = json::array();
            for (int64_t d : m.dates) dates.push_back(format_date(d));
            mow.push_back({{"drop", m.drop}, {"dates", dates}});
        }
        parcels.push_back({{"id", p.parcel_id},
                           {"crop_actual", p.crop_actual},
                           {"crop_declared", p.crop_declared},
                           {"params",
                            {{"base", p.params.base},
                             {"peak", p.params.peak},
                             {"pos_day", p.params.pos_day},
                             {"rise_days", p.params.rise_days},
                             {"fall_days", p.params.fall_days}}},
                           {"seasons", seasons},
                           {"mowing", mow}});
    }
    return json{{"seed", t.seed}, {"parcels", parcels}};
}

}  // namespace

DatasetTruth load_truth(const std::string& path) {
    json j;
    try {
        j = json::parse(read_text_file(path));
    } catch (const json::exception& e) {
        throw DataError(path + ": invalid JSON: " + e.what());
    }
    DatasetTruth t;
    t.seed = j.value("seed", uint64_t(0));
    for (const auto& pj : j.at("parcels")) {
        ParcelTruth p;
        p.parcel_id = pj.at("id").get<int64_t>();
        p.crop_actual = pj.value("crop_actual", "");
        p.crop_declared = pj.value("crop_declared", "");
        const json& pp = pj.at("params");
        p.params = {pp.at("base").get<double>(), pp.at("peak").get<double>(),
                    pp.at("pos_day").get<double>(), pp.at("rise_days").get<double>(),
                    pp.at("fall_days").get<double>()};
        for (const auto& sj : pj.value("seasons", json::array()))
            p.seasons.push_back({sj.at("year").get<int>(), sj.at("sos").get<double>(),
                                 sj.at("pos").get<double>(),
                                 sj.at("eos").get<double>()});
        for (const auto& mj : pj.value("mowing", json::array())) {
            MowingSpec m;
            m.parcel_id = p.parcel_id;
            m.drop = mj.value("drop", 0.4);
            for (const auto& d : mj.at("dates"))
                m.dates.push_back(parse_date(d.get<std::string>()));
            p.mowing.push_back(std::move(m));
        }
        t.parcels.push_back(std::move(p));
    }
    return t;
}

namespace {

// Analytic season markers for the kinked-logistic curve over one calendar
// year: threshold is min + 0.5*(max - min) with the min taken at the year
// edges, matching how the metrics are later measured on sampled series.
std::optional<SeasonTruth> season_truth(const CropParams& p, int year) {
    const int64_t y0 = days_from_civil(year, 1, 1);
    const int64_t y1 = days_from_civil(year, 12, 31);
    const double doy_max = double(y1 - y0 + 1);

    const double v_start = seasonal_value(p, 1.0);
    const double v_end = seasonal_value(p, doy_max);
    const double v_min = std::min(v_start, v_end);
    const double v_peak = p.peak;
    const double amp = v_peak - v_min;
    if (amp < 1e-3 || p.pos_day < 2 || p.pos_day > doy_max - 1) return {};

    const double thr = v_min + 0.5 * amp;
    // Invert each logistic branch at the threshold.
    const double s = (thr - p.base) / (p.peak - p.base) * kKinkGain;
    if (s <= 0 || s >= 1) return {};
    const double x = std::log(s / (1.0 - s));
    SeasonTruth t;
    t.year = year;
    t.pos = p.pos_day;
    t.sos = p.pos_day + (x - kKink) * p.rise_days / kSpan;
    t.eos = p.pos_day + (kKink - x) * p.fall_days / kSpan;
    if (t.sos < 1 || t.eos > doy_max) return {};
    return t;
}

struct PlacedParcel {
    Parcel parcel;
    ParcelTruth truth;
};

std::vector<PlacedParcel> place_parcels(const SyntheticConfig& cfg, RngStream& master) {
    const GridSpec& g = cfg.grid;
    const double total_px = double(g.width) * g.height;
    const int cell = int(std::floor(std::sqrt(total_px / cfg.n_parcels)));
    const int cells_x = cell > 0 ? g.width / cell : 0;
    const int cells_y = cell > 0 ? g.height / cell : 0;
    if (cell < 4 || int64_t(cells_x) * cells_y < cfg.n_parcels)
        throw UsageError("cannot place " + std::to_string(cfg.n_parcels) +
                         " parcels on a " + std::to_string(g.width) + "x" +
                         std::to_string(g.height) + " grid without overlap");

    // Shuffled cell assignment spreads parcels over the whole grid.
    std::vector<int64_t> cells(std::size_t(cells_x) * cells_y);
    for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = int64_t(i);
    RngStream shuffle_rng = master.derive(tag("placement"));
    for (std::size_t i = cells.size(); i > 1; --i) {
        std::size_t j = std::size_t(shuffle_rng.next_in_range(0, int64_t(i) - 1));
        std::swap(cells[i - 1], cells[j]);
    }

    // Cumulative crop mix for weighted picks.
    std::vector<std::pair<std::string, double>> mix;
    double acc = 0;
    for (const auto& [code, frac] : cfg.crop_mix) {
        acc += frac;
        mix.emplace_back(code, acc);
    }

    std::vector<PlacedParcel> out;
    out.reserve(std::size_t(cfg.n_parcels));
    for (int i = 0; i < cfg.n_parcels; ++i) {
        const int64_t id = i + 1;
        RngStream rng = master.derive(tag("parcel:" + std::to_string(id)));

        const int64_t cell_idx = cells[std::size_t(i)];
        const int cr = int(cell_idx / cells_x);
        const int cc = int(cell_idx % cells_x);

        const int avail = cell - 2;
        const int lo = std::max(2, (avail * 3) / 4);
        const int w = int(rng.next_in_range(lo, avail));
        const int h = int(rng.next_in_range(lo, avail));
        const int ox = int(rng.next_in_range(1, cell - 1 - w));
        const int oy = int(rng.next_in_range(1, cell - 1 - h));

        const double x0 = g.origin_x + (double(cc) * cell + ox) * g.pixel_size;
        const double y0 = g.origin_y + (double(cr) * cell + oy) * g.pixel_size;
        const double x1 = x0 + w * g.pixel_size;
        const double y1 = y0 + h * g.pixel_size;

        Polygon poly;
        if (rng.next_double() < 0.3 && w >= 3 && h >= 3) {
            // Clip the north-east corner for some shape variety.
            const double cut = std::min(w, h) / 2.0 * g.pixel_size;
            poly.exterior = {{x0, y0}, {x1 - cut, y0}, {x1, y0 + cut},
                             {x1, y1}, {x0, y1},       {x0, y0}};
        } else {
            poly.exterior = {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}, {x0, y0}};
        }

        const double pick = rng.next_double();
        std::string crop = mix.back().first;
        for (const auto& [code, cum] : mix) {
            if (pick < cum) {
                crop = code;
                break;
            }
        }

        PlacedParcel pp;
        pp.parcel.id = id;
        pp.parcel.geometry.parts.push_back(std::move(poly));
        pp.parcel.crop_declared = crop;
        pp.truth.parcel_id = id;
        pp.truth.crop_actual = crop;
        pp.truth.crop_declared = crop;
        pp.truth.params = crop_preset(crop);
        pp.truth.params.pos_day += rng.uniform(-7.0, 7.0);
        out.push_back(std::move(pp));
    }
    return out;
}

void apply_plants(const SyntheticConfig& cfg, std::vector<PlacedParcel>& parcels,
                  RngStream& master) {
    auto by_id = [&](int64_t id) -> PlacedParcel& {
        if (id < 1 || id > int64_t(parcels.size()))
            throw UsageError("planted spec names parcel " + std::to_string(id) +
                             " outside 1.." + std::to_string(parcels.size()));
        return parcels[std::size_t(id - 1)];
    };

    std::vector<uint8_t> used(parcels.size(), 0);
    for (const MismatchSpec& spec : cfg.mismatches) {
        int64_t id = spec.parcel_id;
        if (id == 0) {
            for (std::size_t i = 0; i < parcels.size(); ++i) {
                if (!used[i]) {
                    id = parcels[i].parcel.id;
                    break;
                }
            }
            if (id == 0) throw UsageError("no parcel left for a mismatch spec");
        }
        PlacedParcel& p = by_id(id);
        used[std::size_t(id - 1)] = 1;
        p.parcel.crop_declared = spec.declared;
        p.truth.crop_declared = spec.declared;
        p.truth.crop_actual = spec.actual;
        RngStream rng = master.derive(tag("mismatch:" + std::to_string(id)));
        p.truth.params = crop_preset(spec.actual);
        p.truth.params.pos_day += rng.uniform(-7.0, 7.0);
    }

    std::vector<uint8_t> mowed(parcels.size(), 0);
    for (const MowingSpec& spec : cfg.mowing) {
        int64_t id = spec.parcel_id;
        if (id == 0) {
            for (std::size_t i = 0; i < parcels.size(); ++i) {
                if (!mowed[i] && is_grass_crop(parcels[i].truth.crop_actual)) {
                    id = parcels[i].parcel.id;
                    break;
                }
            }
            if (id == 0)
                throw UsageError("no grassland parcel left for a mowing spec");
        }
        PlacedParcel& p = by_id(id);
        mowed[std::size_t(id - 1)] = 1;
        MowingSpec stored = spec;
        stored.parcel_id = id;
        p.truth.mowing.push_back(std::move(stored));
    }

    for (PlacedParcel& p : parcels) {
        p.parcel.crop_predicted = p.truth.crop_actual;
        int y0, y1, m, d;
        civil_from_days(cfg.start_day, y0, m, d);
        civil_from_days(cfg.end_day, y1, m, d);
        for (int year = y0; year <= y1; ++year) {
            auto s = season_truth(p.truth.params, year);
            if (s) p.truth.seasons.push_back(*s);
        }
    }
}

std::vector<int64_t> scene_days(int64_t start, int64_t end, int step) {
    std::vector<int64_t> out;
    for (int64_t d = start; d <= end; d += step) out.push_back(d);
    return out;
}

void add_cloud_blobs(SceneClassMask& scl, RngStream& rng) {
    const int W = scl.grid.width, H = scl.grid.height;
    const int n_blobs = int(rng.next_in_range(1, 3));
    for (int b = 0; b < n_blobs; ++b) {
        const double cr = rng.uniform(0, double(H));
        const double cc = rng.uniform(0, double(W));
        const double radius = rng.uniform(0.05, 0.2) * std::min(W, H);
        const double sr = cr + radius * 0.6, sc = cc + radius * 0.6;
        const double sradius = radius * 0.7;

        const int r0 = std::max(0, int(cr - radius) - 1);
        const int r1 = std::min(H - 1, int(sr + sradius) + 1);
        const int c0 = std::max(0, int(cc - radius) - 1);
        const int c1 = std::min(W - 1, int(sc + sradius) + 1);
        for (int r = r0; r <= r1; ++r) {
            for (int c = c0; c <= c1; ++c) {
                const double dr = r - cr, dc = c - cc;
                if (dr * dr + dc * dc <= radius * radius) {
                    scl.at(r, c) = kSclCloud;
                    continue;
                }
                const double er = r - sr, ec = c - sc;
                if (er * er + ec * ec <= sradius * sradius &&
                    scl.at(r, c) == kSclClear)
                    scl.at(r, c) = kSclShadow;
            }
        }
    }
}

}  // namespace

Workspace generate_synthetic_dataset(const SyntheticConfig& cfg,
                                     const std::string& root) {
    cfg.validate();
    if (Workspace::exists(root) || fs::exists(fs::path(root) / "catalog.jsonl"))
        throw DataError(root + ": refusing to generate into an existing workspace");

    RngStream master(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<PlacedParcel> placed = place_parcels(cfg, master);
    apply_plants(cfg, placed, master);

    Workspace ws = Workspace::create(root, cfg.grid);

    std::vector<Parcel> parcels;
    DatasetTruth truth;
    truth.seed = cfg.seed;
    for (PlacedParcel& p : placed) {
        parcels.push_back(std::move(p.parcel));
        truth.parcels.push_back(std::move(p.truth));
    }
    save_parcels(ws.path("parcels.json"), parcels);
    write_file_atomic(ws.path("truth.json"), truth_to_json(truth).dump() + "\n");
    write_file_atomic(ws.path("synth_config.json"), synthetic_config_to_json(cfg));

    RasterizeResult rr = rasterize_parcels(parcels, cfg.grid);
    save_labels(ws.path("labels.tiles"), rr.labels);
    const LabelRaster& labels = rr.labels;

    const std::size_t npx = std::size_t(cfg.grid.width) * cfg.grid.height;

    // Static soil pattern shared by every scene; per-pixel hash noise keeps
    // the tiles from compressing to nothing.
    std::vector<float> soil(npx);
    {
        RngStream rng = master.derive(tag("soil"));
        for (std::size_t i = 0; i < npx; ++i)
            soil[i] = float(0.10 + 0.06 * rng.next_double());
    }

    // Per-scene curve values, indexed by parcel id.
    std::vector<double> curve(std::size_t(cfg.n_parcels) + 1, 0.0);

    for (int64_t day : scene_days(cfg.start_day, cfg.end_day, cfg.revisit_days)) {
        const std::string date = format_date(day);
        for (std::size_t i = 0; i < truth.parcels.size(); ++i)
            curve[std::size_t(truth.parcels[i].parcel_id)] =
                truth_value(truth.parcels[i], day);

        SceneClassMask scl(cfg.grid, kSclClear);
        RngStream cloud_rng = master.derive(tag("clouds:" + date));
        const bool forced_cloud =
            std::find(cfg.full_cloud_dates.begin(), cfg.full_cloud_dates.end(),
                      day) != cfg.full_cloud_dates.end();
        if (forced_cloud || cloud_rng.next_double() < cfg.full_cloud_probability) {
            std::fill(scl.codes.begin(), scl.codes.end(), int16_t(kSclCloud));
        } else if (cloud_rng.next_double() < cfg.cloud_probability) {
            add_cloud_blobs(scl, cloud_rng);
        }

        Raster b04(cfg.grid, 0.0f), b08(cfg.grid, 0.0f), sclr(cfg.grid, kSclClear);
        RngStream noise = master.derive(tag("noise:S2:" + date));
        RngStream cloud_noise = master.derive(tag("cloudpix:" + date));
        for (std::size_t i = 0; i < npx; ++i) {
            const int32_t id = labels.labels[i];
            double v;
            if (id == kNoParcel) {
                v = soil[i] + 0.02 * (noise.next_double() - 0.5);
            } else {
                v = curve[std::size_t(id)] + noise.normal(0.0, cfg.noise_sigma);
            }
            v = std::clamp(v, -0.5, 0.95);
            if (scl.codes[i] == kSclClear) {
                b08.values[i] = float(0.25 * (1.0 + v));
                b04.values[i] = float(0.25 * (1.0 - v));
            } else {
                // Cloud/shadow reflectance: bright and flat, NDVI near zero.
                const double c = scl.codes[i] == kSclCloud ? 0.40 : 0.08;
                b04.values[i] = float(c + 0.04 * cloud_noise.next_double());
                b08.values[i] = float(c + 0.04 * cloud_noise.next_double());
            }
            sclr.values[i] = float(scl.codes[i]);
        }

        ProductRecord meta;
        meta.product_id = "S2_" + date + "_" + cfg.grid.crs_id;
        meta.sensor = Sensor::S2;
        meta.acquisition_day = day;
        meta.tile_id = cfg.grid.crs_id;
        ingest_product(ws.catalog(), ws.root(), meta,
                       {{BandId::B04, std::move(b04)},
                        {BandId::B08, std::move(b08)},
                        {BandId::SCL, std::move(sclr)}});
    }

    if (cfg.s1_revisit_days > 0) {
        for (int64_t day :
             scene_days(cfg.start_day, cfg.end_day, cfg.s1_revisit_days)) {
            const std::string date = format_date(day);
            for (std::size_t i = 0; i < truth.parcels.size(); ++i)
                curve[std::size_t(truth.parcels[i].parcel_id)] =
                    truth_value(truth.parcels[i], day);

            Raster vv(cfg.grid, 0.0f), vh(cfg.grid, 0.0f), coh(cfg.grid, 0.0f);
            RngStream noise = master.derive(tag("noise:S1:" + date));
            for (std::size_t i = 0; i < npx; ++i) {
                const int32_t id = labels.labels[i];
                const double v =
                    id == kNoParcel ? double(soil[i]) : curve[std::size_t(id)];
                vv.values[i] = float(-16.0 + 8.0 * v + noise.normal(0.0, 0.4));
                vh.values[i] = float(-22.0 + 7.0 * v + noise.normal(0.0, 0.4));
                coh.values[i] = float(std::clamp(
                    0.85 - 0.6 * v + noise.normal(0.0, 0.02), 0.05, 0.98));
            }

            ProductRecord meta;
            meta.product_id = "S1_" + date + "_" + cfg.grid.crs_id;
            meta.sensor = Sensor::S1;
            meta.acquisition_day = day;
            meta.tile_id = cfg.grid.crs_id;
            ingest_product(ws.catalog(), ws.root(), meta,
                           {{BandId::SIGMA0_VV, std::move(vv)},
                            {BandId::SIGMA0_VH, std::move(vh)},
                            {BandId::COHERENCE_VV, std::move(coh)}});
        }
    }

    return ws;
}

}  // namespace adc
