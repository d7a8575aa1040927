#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adc/geometry.hpp"
#include "adc/knowledge_base.hpp"
#include "adc/store.hpp"
#include "adc/zonal.hpp"

namespace adc {

enum class CmpOp { Eq, Ne, Lt, Le, Gt, Ge };

const char* cmp_name(CmpOp op);
CmpOp cmp_from_string(const std::string& s);  // throws UsageError

// One comparison. The right-hand side is a literal unless rhs_attribute is
// set, in which case two attributes of the same parcel are compared.
struct Predicate {
    std::string attribute;
    CmpOp op = CmpOp::Eq;
    AttrValue rhs = 0.0;
    std::string rhs_attribute;
};

struct QueryRegion {
    enum class Kind { All, Box, Parcels };
    Kind kind = Kind::All;
    BBox box{};
    std::vector<int64_t> ids;
};

// Conjunction of comparisons over parcel attributes. Attributes resolve, in
// order: built-ins (parcel_id, crop_declared), the knowledge base's latest
// value, and mean_<BAND> computed on demand from the cube over [day0, day1)
// and recorded back into the knowledge base.
struct QuerySpec {
    QueryRegion region;
    int64_t day0 = 0;
    int64_t day1 = 0;
    std::vector<Predicate> predicates;
    std::string output = "parcels";  // parcels | table
    double buffer_inward_m = 0;      // settings for on-demand statistics
    double cloud_buffer_m = 0;
    double max_cloud_cover_fraction = 1.0;

    void validate() const;  // throws UsageError
};

QuerySpec query_spec_from_json(const std::string& text);
std::string query_spec_to_json(const QuerySpec& spec);

struct QueryResult {
    std::vector<int64_t> parcel_ids;         // matched, ascending
    std::vector<std::string> columns;        // attributes the predicates used
    std::vector<std::vector<std::string>> cells;  // per matched parcel, formatted

    std::string to_csv() const;
};

// Evaluates the conjunction over every parcel in the region. `store` may be
// null when all referenced attributes are already materialized; it is only
// consulted for on-demand statistics.
QueryResult run_query(Workspace& ws, KnowledgeBase& kb, CubeStore* store,
                      const QuerySpec& spec, int threads = 0);

}  // namespace adc
