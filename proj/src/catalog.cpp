#include "adc/catalog.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "adc/dates.hpp"
#include "adc/errors.hpp"
#include "adc/masking.hpp"
#include "adc/tile_io.hpp"
#include "adc/util.hpp"

namespace fs = std::filesystem;

namespace adc {

using nlohmann::json;

const char* sensor_name(Sensor s) { return s == Sensor::S1 ? "S1" : "S2"; }

Sensor sensor_from_string(const std::string& s) {
    if (s == "S1") return Sensor::S1;
    if (s == "S2") return Sensor::S2;
    throw UsageError("unknown sensor '" + s + "'");
}

std::vector<std::string> pipeline_steps(Sensor s) {
    if (s == Sensor::S1) return {"index", "ard", "cube"};
    return {"index", "ard", "mask", "cube"};
}

const char* flag_state_name(FlagState s) {
    switch (s) {
        case FlagState::Pending: return "pending";
        case FlagState::Done: return "done";
        case FlagState::Failed: return "failed";
    }
    return "pending";
}

FlagState flag_state_from_string(const std::string& s) {
    if (s == "pending") return FlagState::Pending;
    if (s == "done") return FlagState::Done;
    if (s == "failed") return FlagState::Failed;
    throw DataError("unknown flag state '" + s + "'");
}

namespace {

json record_to_json(const ProductRecord& r) {
    json flags = json::object();
    for (const auto& [step, st] : r.flags) {
        flags[step] = {{"state", flag_state_name(st.state)},
                       {"seq", st.last_update},
                       {"message", st.message}};
    }
    json bands = json::array();
    for (BandId b : r.bands) bands.push_back(band_name(b));
    return json{{"product_id", r.product_id},
                {"sensor", sensor_name(r.sensor)},
                {"acquisition", format_date(r.acquisition_day)},
                {"footprint", {r.footprint.min_x, r.footprint.min_y,
                               r.footprint.max_x, r.footprint.max_y}},
                {"tile_id", r.tile_id},
                {"storage_path", r.storage_path},
                {"bands", bands},
                {"cloud_fraction", r.cloud_fraction},
                {"flags", flags}};
}

ProductRecord record_from_json(const json& j) {
    ProductRecord r;
    r.product_id = j.at("product_id").get<std::string>();
    r.sensor = sensor_from_string(j.at("sensor").get<std::string>());
    r.acquisition_day = parse_date(j.at("acquisition").get<std::string>());
    const auto& fp = j.at("footprint");
    r.footprint = {fp.at(0).get<double>(), fp.at(1).get<double>(),
                   fp.at(2).get<double>(), fp.at(3).get<double>()};
    r.tile_id = j.value("tile_id", "");
    r.storage_path = j.value("storage_path", "");
    if (j.contains("bands"))
        for (const auto& b : j["bands"])
            r.bands.push_back(band_from_string(b.get<std::string>()));
    r.cloud_fraction = j.value("cloud_fraction", 0.0);
    if (j.contains("flags")) {
        for (auto it = j["flags"].begin(); it != j["flags"].end(); ++it) {
            FlagStatus st;
            st.state = flag_state_from_string(it->at("state").get<std::string>());
            st.last_update = it->value("seq", int64_t(0));
            st.message = it->value("message", "");
            r.flags[it.key()] = st;
        }
    }
    return r;
}

}  // namespace

Catalog::Catalog(std::string path) : path_(std::move(path)) {
    if (!fs::exists(path_)) return;
    std::istringstream in(read_text_file(path_));
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        ProductRecord rec;
        try {
            rec = record_from_json(json::parse(line));
        } catch (const json::exception& e) {
            throw DataError(path_ + ":" + std::to_string(lineno) +
                            ": bad catalog line: " + e.what());
        }
        for (const auto& [step, st] : rec.flags)
            seq_ = std::max(seq_, st.last_update);
        records_[rec.product_id] = std::move(rec);
    }
    for (const auto& [id, rec] : records_) order_.push_back(id);
    std::sort(order_.begin(), order_.end(), [this](const auto& a, const auto& b) {
        const auto& ra = records_.at(a);
        const auto& rb = records_.at(b);
        return std::tie(ra.acquisition_day, ra.product_id) <
               std::tie(rb.acquisition_day, rb.product_id);
    });
}

const ProductRecord* Catalog::find(const std::string& product_id) const {
    auto it = records_.find(product_id);
    return it == records_.end() ? nullptr : &it->second;
}

std::vector<const ProductRecord*> Catalog::list() const {
    std::vector<const ProductRecord*> out;
    out.reserve(order_.size());
    for (const auto& id : order_) out.push_back(&records_.at(id));
    return out;
}

std::vector<const ProductRecord*> Catalog::query(
    std::optional<std::pair<int64_t, int64_t>> time_range,
    std::optional<BBox> bbox) const {
    std::vector<const ProductRecord*> out;
    for (const auto& id : order_) {
        const ProductRecord& r = records_.at(id);
        if (time_range && (r.acquisition_day < time_range->first ||
                           r.acquisition_day >= time_range->second))
            continue;
        if (bbox && !r.footprint.intersects(*bbox)) continue;
        out.push_back(&r);
    }
    return out;
}

void Catalog::persist(const ProductRecord& rec) {
    if (path_.empty()) return;
    std::ofstream out(path_, std::ios::app);
    if (!out) throw DataError(path_ + ": cannot append");
    out << record_to_json(rec).dump() << "\n";
    if (!out) throw DataError(path_ + ": write failed");
}

void Catalog::add(const ProductRecord& rec) {
    if (rec.product_id.empty()) throw DataError("product_id must not be empty");
    if (records_.count(rec.product_id))
        throw DataError("duplicate product_id '" + rec.product_id + "'");
    for (const auto& [step, st] : rec.flags)
        seq_ = std::max(seq_, st.last_update);
    records_[rec.product_id] = rec;
    auto pos = std::lower_bound(
        order_.begin(), order_.end(), rec.product_id,
        [this, &rec](const std::string& id, const std::string&) {
            const auto& r = records_.at(id);
            return std::tie(r.acquisition_day, r.product_id) <
                   std::tie(rec.acquisition_day, rec.product_id);
        });
    order_.insert(pos, rec.product_id);
    persist(rec);
}

void Catalog::set_flag(const std::string& product_id, const std::string& step,
                       FlagState to, const std::string& message) {
    auto it = records_.find(product_id);
    if (it == records_.end())
        throw DataError("unknown product '" + product_id + "'");
    auto fit = it->second.flags.find(step);
    if (fit == it->second.flags.end())
        throw DataError("product '" + product_id + "' has no step '" + step + "'");

    const FlagState from = fit->second.state;
    const bool legal = (from == FlagState::Pending && to == FlagState::Done) ||
                       (from == FlagState::Pending && to == FlagState::Failed) ||
                       (from == FlagState::Failed && to == FlagState::Pending);
    if (!legal)
        throw PreconditionError(std::string("illegal flag transition ") +
                                flag_state_name(from) + " -> " + flag_state_name(to) +
                                " for " + product_id + "/" + step);
    fit->second.state = to;
    fit->second.last_update = next_seq();
    fit->second.message = message;
    persist(it->second);
}

std::vector<std::string> Catalog::pending_tasks(const std::string& step) const {
    std::vector<std::string> out;
    for (const auto& id : order_) {
        const ProductRecord& r = records_.at(id);
        auto it = r.flags.find(step);
        if (it == r.flags.end()) continue;
        if (it->second.state == FlagState::Pending ||
            it->second.state == FlagState::Failed)
            out.push_back(id);
    }
    return out;
}

const ProductRecord& ingest_product(Catalog& cat, const std::string& root,
                                    ProductRecord meta,
                                    const std::vector<IngestBand>& bands,
                                    const std::function<void(BandId)>& fault_hook) {
    if (cat.find(meta.product_id))
        throw DataError("duplicate product_id '" + meta.product_id + "'");
    for (const IngestBand& b : bands) b.raster.grid.validate();

    const std::string date = format_date(meta.acquisition_day);
    meta.storage_path =
        std::string("cube/") + sensor_name(meta.sensor) + "/" + date;
    meta.bands.clear();
    for (const IngestBand& b : bands) meta.bands.push_back(b.band);

    meta.flags.clear();
    for (const std::string& step : pipeline_steps(meta.sensor))
        meta.flags[step] = {FlagState::Pending, cat.next_seq(), ""};

    if (!bands.empty()) {
        meta.footprint = bands.front().raster.grid.extent();
        for (const IngestBand& b : bands) {
            if (b.band == BandId::SCL) {
                SceneClassMask scl(b.raster.grid);
                for (std::size_t i = 0; i < b.raster.values.size(); ++i)
                    scl.codes[i] = int16_t(std::lround(b.raster.values[i]));
                PixelMask m = class_mask(scl, {kSclCloud, kSclShadow});
                meta.cloud_fraction =
                    double(m.count()) / double(scl.codes.size());
            }
        }
    }

    cat.add(meta);
    cat.set_flag(meta.product_id, "index", FlagState::Done);
    cat.set_flag(meta.product_id, "ard", FlagState::Done);
    if (meta.sensor == Sensor::S2) {
        bool has_scl = false;
        for (const IngestBand& b : bands) has_scl |= b.band == BandId::SCL;
        if (has_scl)
            cat.set_flag(meta.product_id, "mask", FlagState::Done);
        else
            cat.set_flag(meta.product_id, "mask", FlagState::Failed,
                         "no scene classification band supplied");
    }

    const fs::path dir = fs::path(root) / meta.storage_path;
    bool collision = false;
    if (fs::exists(dir)) {
        for (const auto& e : fs::directory_iterator(dir))
            collision |= e.path().extension() == ".tiles";
    }

    if (collision) {
        cat.set_flag(meta.product_id, "cube", FlagState::Done,
                     "kept first acquisition already stored for " + date);
        return *cat.find(meta.product_id);
    }

    fs::create_directories(dir);
    try {
        for (const IngestBand& b : bands) {
            if (fault_hook) fault_hook(b.band);
            const std::string path =
                (dir / (std::string(band_name(b.band)) + ".tiles")).string();
            if (b.band == BandId::SCL) {
                std::vector<int16_t> codes(b.raster.values.size());
                for (std::size_t i = 0; i < codes.size(); ++i)
                    codes[i] = int16_t(std::lround(b.raster.values[i]));
                tiles::write_tiles(path, b.raster.grid, tiles::DType::I16,
                                   codes.data(), double(kSclNodata));
            } else {
                tiles::write_raster(path, b.raster);
            }
        }
    } catch (const std::exception& e) {
        cat.set_flag(meta.product_id, "cube", FlagState::Failed, e.what());
        throw DataError("ingest of '" + meta.product_id + "' failed: " + e.what());
    }
    cat.set_flag(meta.product_id, "cube", FlagState::Done);
    return *cat.find(meta.product_id);
}

}  // namespace adc
