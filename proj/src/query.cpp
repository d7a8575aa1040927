#include "adc/query.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "adc/dates.hpp"
#include "adc/errors.hpp"
#include "adc/util.hpp"

namespace adc {

using nlohmann::json;

const char* cmp_name(CmpOp op) {
    switch (op) {
        case CmpOp::Eq: return "=";
        case CmpOp::Ne: return "!=";
        case CmpOp::Lt: return "<";
        case CmpOp::Le: return "<=";
        case CmpOp::Gt: return ">";
        case CmpOp::Ge: return ">=";
    }
    return "?";
}

CmpOp cmp_from_string(const std::string& s) {
    if (s == "=" || s == "==") return CmpOp::Eq;
    if (s == "!=" || s == "≠") return CmpOp::Ne;
    if (s == "<") return CmpOp::Lt;
    if (s == "<=" || s == "≤") return CmpOp::Le;
    if (s == ">") return CmpOp::Gt;
    if (s == ">=" || s == "≥") return CmpOp::Ge;
    throw UsageError("unknown comparison operator '" + s + "'");
}

void QuerySpec::validate() const {
    if (day1 < day0) throw UsageError("query window ends before it starts");
    for (const Predicate& p : predicates)
        if (p.attribute.empty()) throw UsageError("predicate with an empty attribute");
    if (output != "parcels" && output != "table")
        throw UsageError("unknown query output '" + output + "' (parcels|table)");
    if (buffer_inward_m < 0 || cloud_buffer_m < 0)
        throw UsageError("buffers must be >= 0");
    if (max_cloud_cover_fraction < 0 || max_cloud_cover_fraction > 1)
        throw UsageError("max cloud cover fraction must be in [0, 1]");
    if (region.kind == QueryRegion::Kind::Parcels && region.ids.empty())
        throw UsageError("empty region: no parcel ids listed");
}

QuerySpec query_spec_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw DataError(std::string("query spec: ") + e.what());
    }
    QuerySpec spec;
    try {
        if (j.contains("region")) {
            const json& r = j.at("region");
            if (r.is_string() && r.get<std::string>() == "all") {
                spec.region.kind = QueryRegion::Kind::All;
            } else if (r.is_object() && r.contains("bbox")) {
                const json& b = r.at("bbox");
                if (!b.is_array() || b.size() != 4)
                    throw DataError("region bbox must be [min_x, min_y, max_x, max_y]");
                spec.region.kind = QueryRegion::Kind::Box;
                spec.region.box = {b[0].get<double>(), b[1].get<double>(),
                                   b[2].get<double>(), b[3].get<double>()};
            } else if (r.is_object() && r.contains("parcels")) {
                spec.region.kind = QueryRegion::Kind::Parcels;
                for (const json& v : r.at("parcels"))
                    spec.region.ids.push_back(v.get<int64_t>());
            } else {
                throw DataError("region must be \"all\", {\"bbox\": ...} or {\"parcels\": ...}");
            }
        }
        if (j.contains("from")) spec.day0 = parse_date(j.at("from").get<std::string>());
        if (j.contains("to")) spec.day1 = parse_date(j.at("to").get<std::string>());
        for (const json& p : j.value("where", json::array())) {
            Predicate pred;
            pred.attribute = p.at("attribute").get<std::string>();
            pred.op = cmp_from_string(p.at("op").get<std::string>());
            if (p.contains("value_attribute")) {
                pred.rhs_attribute = p.at("value_attribute").get<std::string>();
            } else {
                const json& v = p.at("value");
                if (v.is_number())
                    pred.rhs = v.get<double>();
                else if (v.is_string())
                    pred.rhs = v.get<std::string>();
                else
                    throw DataError("predicate value must be a number or a string");
            }
            spec.predicates.push_back(std::move(pred));
        }
        spec.output = j.value("output", std::string("parcels"));
        spec.buffer_inward_m = j.value("inward_buffer_m", 0.0);
        spec.cloud_buffer_m = j.value("cloud_buffer_m", 0.0);
        spec.max_cloud_cover_fraction = j.value("max_cloud_cover", 1.0);
    } catch (const json::exception& e) {
        throw DataError(std::string("query spec: ") + e.what());
    }
    spec.validate();
    return spec;
}

std::string query_spec_to_json(const QuerySpec& spec) {
    json j;
    switch (spec.region.kind) {
        case QueryRegion::Kind::All: j["region"] = "all"; break;
        case QueryRegion::Kind::Box:
            j["region"] = {{"bbox",
                            {spec.region.box.min_x, spec.region.box.min_y,
                             spec.region.box.max_x, spec.region.box.max_y}}};
            break;
        case QueryRegion::Kind::Parcels:
            j["region"] = {{"parcels", spec.region.ids}};
            break;
    }
    j["from"] = format_date(spec.day0);
    j["to"] = format_date(spec.day1);
    json where = json::array();
    for (const Predicate& p : spec.predicates) {
        json e{{"attribute", p.attribute}, {"op", cmp_name(p.op)}};
        if (!p.rhs_attribute.empty())
            e["value_attribute"] = p.rhs_attribute;
        else if (std::holds_alternative<double>(p.rhs))
            e["value"] = std::get<double>(p.rhs);
        else
            e["value"] = std::get<std::string>(p.rhs);
        where.push_back(std::move(e));
    }
    j["where"] = std::move(where);
    j["output"] = spec.output;
    j["inward_buffer_m"] = spec.buffer_inward_m;
    j["cloud_buffer_m"] = spec.cloud_buffer_m;
    j["max_cloud_cover"] = spec.max_cloud_cover_fraction;
    return j.dump(1) + "\n";
}

std::string QueryResult::to_csv() const {
    std::string out = "parcel_id";
    for (const std::string& c : columns) {
        out += ',';
        out += c;
    }
    out += '\n';
    for (std::size_t r = 0; r < parcel_ids.size(); ++r) {
        out += std::to_string(parcel_ids[r]);
        for (const std::string& cell : cells[r]) {
            out += ',';
            out += cell;
        }
        out += '\n';
    }
    return out;
}

namespace {

// One attribute column over the candidate parcels; absent entries stay unset.
struct Column {
    std::vector<AttrValue> values;
    std::vector<uint8_t> present;

    explicit Column(std::size_t n) : values(n, 0.0), present(n, 0) {}
};

bool is_on_demand_mean(const std::string& name, BandId& band) {
    if (name.rfind("mean_", 0) != 0) return false;
    try {
        band = band_from_string(name.substr(5));
    } catch (const UsageError&) {
        return false;
    }
    return true;
}

std::vector<const Parcel*> resolve_region(const std::vector<Parcel>& parcels,
                                          const QueryRegion& region) {
    std::vector<const Parcel*> out;
    switch (region.kind) {
        case QueryRegion::Kind::All:
            for (const Parcel& p : parcels) out.push_back(&p);
            break;
        case QueryRegion::Kind::Box:
            for (const Parcel& p : parcels)
                if (geometry_bbox(p.geometry).intersects(region.box))
                    out.push_back(&p);
            break;
        case QueryRegion::Kind::Parcels: {
            std::set<int64_t> wanted(region.ids.begin(), region.ids.end());
            for (int64_t id : wanted)
                if (!find_parcel(parcels, id))
                    throw UsageError("region lists unknown parcel " + std::to_string(id));
            for (const Parcel& p : parcels)
                if (wanted.count(p.id)) out.push_back(&p);
            break;
        }
    }
    std::sort(out.begin(), out.end(),
              [](const Parcel* a, const Parcel* b) { return a->id < b->id; });
    if (out.empty()) throw UsageError("empty region: no parcel matches");
    return out;
}

Column materialize(const std::string& name,
                   const std::vector<const Parcel*>& candidates, Workspace& ws,
                   KnowledgeBase& kb, CubeStore* store, const QuerySpec& spec,
                   int threads) {
    Column col(candidates.size());
    auto fill_from_kb = [&] {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            const auto v = kb.latest(candidates[i]->id, name);
            if (!v) continue;
            col.values[i] = *v;
            col.present[i] = 1;
        }
    };

    if (name == "parcel_id") {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            col.values[i] = double(candidates[i]->id);
            col.present[i] = 1;
        }
        return col;
    }
    if (name == "crop_declared") {
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            col.values[i] = candidates[i]->crop_declared;
            col.present[i] = 1;
        }
        return col;
    }
    if (name == "crop_predicted") {
        fill_from_kb();
        for (std::size_t i = 0; i < candidates.size(); ++i) {
            if (col.present[i] || !candidates[i]->crop_predicted) continue;
            col.values[i] = *candidates[i]->crop_predicted;
            col.present[i] = 1;
        }
        return col;
    }
    if (kb.has_attribute(name)) {
        fill_from_kb();
        return col;
    }

    BandId band{};
    if (is_on_demand_mean(name, band)) {
        if (!store)
            throw UsageError("attribute '" + name +
                             "' is not recorded and no cube is attached");
        StatRequest req;
        req.statistic = Statistic::Mean;
        req.period = Period::WholeRange;
        req.bands = {band};
        req.buffer_inward_m = spec.buffer_inward_m;
        req.cloud_buffer_m = spec.cloud_buffer_m;
        req.max_cloud_cover_fraction = spec.max_cloud_cover_fraction;
        const ZonalStatsTable table = zonal_stats_grouped(
            *store, ws.labels(), req, spec.day0, spec.day1, threads);
        std::vector<std::pair<int64_t, AttrValue>> rows;
        for (const StatRecord& r : table.records)
            rows.emplace_back(r.parcel_id, AttrValue(r.value));
        kb.upsert(rows, name, "query-engine");
        fill_from_kb();
        return col;
    }
    throw UsageError("unknown attribute '" + name + "'");
}

bool compare_values(const AttrValue& lhs, const AttrValue& rhs, CmpOp op,
                    uint8_t& type_error) {
    if (std::holds_alternative<double>(lhs) !=
        std::holds_alternative<double>(rhs)) {
        type_error = 1;
        return false;
    }
    if (std::holds_alternative<std::string>(lhs)) {
        const std::string& a = std::get<std::string>(lhs);
        const std::string& b = std::get<std::string>(rhs);
        switch (op) {
            case CmpOp::Eq: return a == b;
            case CmpOp::Ne: return a != b;
            default:
                type_error = 2;
                return false;
        }
    }
    const double a = std::get<double>(lhs);
    const double b = std::get<double>(rhs);
    switch (op) {
        case CmpOp::Eq: return a == b;
        case CmpOp::Ne: return a != b;
        case CmpOp::Lt: return a < b;
        case CmpOp::Le: return a <= b;
        case CmpOp::Gt: return a > b;
        case CmpOp::Ge: return a >= b;
    }
    return false;
}

}  // namespace

QueryResult run_query(Workspace& ws, KnowledgeBase& kb, CubeStore* store,
                      const QuerySpec& spec, int threads) {
    spec.validate();
    const std::vector<Parcel> parcels = ws.parcels();
    const std::vector<const Parcel*> candidates = resolve_region(parcels, spec.region);

    std::vector<std::string> names;
    for (const Predicate& p : spec.predicates) {
        if (std::find(names.begin(), names.end(), p.attribute) == names.end())
            names.push_back(p.attribute);
        if (!p.rhs_attribute.empty() &&
            std::find(names.begin(), names.end(), p.rhs_attribute) == names.end())
            names.push_back(p.rhs_attribute);
    }

    std::map<std::string, Column> columns;
    for (const std::string& n : names)
        columns.emplace(n, materialize(n, candidates, ws, kb, store, spec, threads));

    std::vector<uint8_t> match(candidates.size(), 0);
    std::vector<uint8_t> type_error(candidates.size(), 0);
    parallel_for(
        candidates.size(),
        [&](std::size_t i) {
            for (const Predicate& p : spec.predicates) {
                const Column& lhs = columns.at(p.attribute);
                if (!lhs.present[i]) return;
                AttrValue rhs = p.rhs;
                if (!p.rhs_attribute.empty()) {
                    const Column& rc = columns.at(p.rhs_attribute);
                    if (!rc.present[i]) return;
                    rhs = rc.values[i];
                }
                if (!compare_values(lhs.values[i], rhs, p.op, type_error[i]))
                    return;
            }
            match[i] = 1;
        },
        threads);

    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (type_error[i] == 1)
            throw UsageError("type mismatch evaluating parcel " +
                             std::to_string(candidates[i]->id));
        if (type_error[i] == 2)
            throw UsageError("ordered comparison on a text attribute");
    }

    QueryResult result;
    result.columns = names;
    for (std::size_t i = 0; i < candidates.size(); ++i) {
        if (!match[i]) continue;
        result.parcel_ids.push_back(candidates[i]->id);
        std::vector<std::string> row;
        for (const std::string& n : names) {
            const Column& c = columns.at(n);
            if (!c.present[i]) {
                row.emplace_back();
            } else if (std::holds_alternative<double>(c.values[i])) {
                row.push_back(format_double(std::get<double>(c.values[i])));
            } else {
                row.push_back(std::get<std::string>(c.values[i]));
            }
        }
        result.cells.push_back(std::move(row));
    }
    return result;
}

}  // namespace adc
