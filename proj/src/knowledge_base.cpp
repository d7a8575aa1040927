#include "adc/knowledge_base.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <set>

#include <json.hpp>

#include "adc/errors.hpp"

namespace adc {

using nlohmann::json;

namespace {

std::string utc_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02d-%02dT%02d:%02d:%02dZ",
                  tm.tm_year + 1900, tm.tm_mon + 1, tm.tm_mday, tm.tm_hour,
                  tm.tm_min, tm.tm_sec);
    return buf;
}

json row_to_json(const KbRow& r) {
    json j{{"parcel", r.parcel_id},
           {"attr", r.attribute},
           {"producer", r.producer},
           {"run", r.run_id},
           {"at", r.written_at}};
    if (std::holds_alternative<double>(r.value))
        j["value"] = std::get<double>(r.value);
    else
        j["value"] = std::get<std::string>(r.value);
    return j;
}

KbRow row_from_json(const json& j) {
    KbRow r;
    r.parcel_id = j.at("parcel").get<int64_t>();
    r.attribute = j.at("attr").get<std::string>();
    const json& v = j.at("value");
    if (v.is_number())
        r.value = v.get<double>();
    else if (v.is_string())
        r.value = v.get<std::string>();
    else
        throw DataError("knowledge base value must be a number or a string");
    r.producer = j.value("producer", std::string());
    r.run_id = j.value("run", uint64_t(0));
    r.written_at = j.value("at", std::string());
    return r;
}

bool same_value(const AttrValue& a, const AttrValue& b) {
    if (a.index() != b.index()) return false;
    if (std::holds_alternative<double>(a))
        return std::get<double>(a) == std::get<double>(b);
    return std::get<std::string>(a) == std::get<std::string>(b);
}

}  // namespace

KnowledgeBase::KnowledgeBase(const Workspace& ws) : path_(ws.path("kb.jsonl")) {
    for (const Parcel& p : ws.parcels()) known_.push_back(p.id);
    std::sort(known_.begin(), known_.end());
    load();
}

KnowledgeBase::KnowledgeBase(std::string path, std::vector<int64_t> known_parcels)
    : path_(std::move(path)), known_(std::move(known_parcels)) {
    std::sort(known_.begin(), known_.end());
    load();
}

void KnowledgeBase::load() {
    std::ifstream in(path_);
    if (!in) return;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::exception& e) {
            throw DataError(path_ + ":" + std::to_string(lineno) + ": " + e.what());
        }
        rows_.push_back(row_from_json(j));
        latest_[{rows_.back().parcel_id, rows_.back().attribute}] = rows_.size() - 1;
        next_run_ = std::max(next_run_, rows_.back().run_id + 1);
    }
}

void KnowledgeBase::append_rows(const std::vector<KbRow>& rows) {
    std::ofstream out(path_, std::ios::app);
    if (!out) throw DataError("cannot open " + path_ + " for writing");
    for (const KbRow& r : rows) out << row_to_json(r).dump() << '\n';
    out.flush();
    if (!out) throw DataError("write to " + path_ + " failed");
    for (const KbRow& r : rows) {
        rows_.push_back(r);
        latest_[{r.parcel_id, r.attribute}] = rows_.size() - 1;
    }
}

UpsertReport KnowledgeBase::upsert(
    const std::vector<std::pair<int64_t, AttrValue>>& rows,
    const std::string& attribute, const std::string& producer) {
    std::vector<KbRow> full;
    full.reserve(rows.size());
    for (const auto& [id, value] : rows) {
        KbRow r;
        r.parcel_id = id;
        r.attribute = attribute;
        r.value = value;
        full.push_back(std::move(r));
    }
    return upsert(full, producer);
}

UpsertReport KnowledgeBase::upsert(const std::vector<KbRow>& rows,
                                   const std::string& producer) {
    std::lock_guard<std::mutex> lock(write_);
    UpsertReport report;
    std::vector<KbRow> pending;
    const std::string stamp = utc_now();
    for (const KbRow& in : rows) {
        if (!std::binary_search(known_.begin(), known_.end(), in.parcel_id)) {
            report.unknown_parcels.push_back(in.parcel_id);
            continue;
        }
        const auto it = latest_.find({in.parcel_id, in.attribute});
        if (it != latest_.end() && same_value(rows_[it->second].value, in.value)) {
            ++report.unchanged;
            continue;
        }
        KbRow r = in;
        r.producer = producer;
        r.written_at = stamp;
        pending.push_back(std::move(r));
    }
    if (!pending.empty()) {
        report.run_id = next_run_++;
        for (KbRow& r : pending) r.run_id = report.run_id;
        append_rows(pending);
        report.applied = pending.size();
    }
    return report;
}

std::optional<AttrValue> KnowledgeBase::latest(int64_t parcel_id,
                                               const std::string& attribute) const {
    const auto it = latest_.find({parcel_id, attribute});
    if (it == latest_.end()) return {};
    return rows_[it->second].value;
}

std::vector<KbRow> KnowledgeBase::history(int64_t parcel_id,
                                          const std::string& attribute) const {
    std::vector<KbRow> out;
    for (const KbRow& r : rows_)
        if (r.parcel_id == parcel_id && r.attribute == attribute) out.push_back(r);
    return out;
}

std::vector<std::string> KnowledgeBase::attributes() const {
    std::set<std::string> names;
    for (const KbRow& r : rows_) names.insert(r.attribute);
    return {names.begin(), names.end()};
}

bool KnowledgeBase::has_attribute(const std::string& attribute) const {
    for (const KbRow& r : rows_)
        if (r.attribute == attribute) return true;
    return false;
}

void KnowledgeBase::compact() {
    std::lock_guard<std::mutex> lock(write_);
    std::vector<KbRow> kept;
    std::vector<std::size_t> order;
    for (const auto& [key, idx] : latest_) order.push_back(idx);
    std::sort(order.begin(), order.end());
    for (std::size_t idx : order) kept.push_back(rows_[idx]);

    const std::string tmp = path_ + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw DataError("cannot open " + tmp + " for writing");
        for (const KbRow& r : kept) out << row_to_json(r).dump() << '\n';
        out.flush();
        if (!out) throw DataError("write to " + tmp + " failed");
    }
    std::rename(tmp.c_str(), path_.c_str());

    rows_ = std::move(kept);
    latest_.clear();
    for (std::size_t i = 0; i < rows_.size(); ++i)
        latest_[{rows_[i].parcel_id, rows_[i].attribute}] = i;
}

}  // namespace adc
