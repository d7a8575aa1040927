#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adc/grid.hpp"

namespace adc {

enum class Sensor : uint8_t { S1, S2 };

const char* sensor_name(Sensor s);
Sensor sensor_from_string(const std::string& s);

// Processing steps tracked per product. S1 carries no scene classification,
// so it skips the mask step.
std::vector<std::string> pipeline_steps(Sensor s);

enum class FlagState : uint8_t { Pending, Done, Failed };

const char* flag_state_name(FlagState s);
FlagState flag_state_from_string(const std::string& s);

struct FlagStatus {
    FlagState state = FlagState::Pending;
    int64_t last_update = 0;  // catalog sequence number, monotone
    std::string message;
};

struct ProductRecord {
    std::string product_id;
    Sensor sensor = Sensor::S2;
    int64_t acquisition_day = 0;
    BBox footprint;
    std::string tile_id;
    std::map<std::string, FlagStatus> flags;
    std::string storage_path;  // relative to the workspace root
    std::vector<BandId> bands;
    double cloud_fraction = 0.0;  // masked fraction over the footprint grid
};

// Append-only JSON-lines product database with an in-memory index. Each
// mutation appends the full record; the newest line per product_id wins on
// reload. Single writer, any number of readers.
class Catalog {
public:
    Catalog() = default;
    explicit Catalog(std::string path);  // loads existing records if present

    const std::string& path() const { return path_; }
    std::size_t size() const { return order_.size(); }

    const ProductRecord* find(const std::string& product_id) const;

    // Ordered by (acquisition_day, product_id).
    std::vector<const ProductRecord*> list() const;
    std::vector<const ProductRecord*> query(
        std::optional<std::pair<int64_t, int64_t>> time_range = {},
        std::optional<BBox> bbox = {}) const;

    void add(const ProductRecord& rec);  // duplicate product_id is fatal

    // Legal transitions: pending->done, pending->failed, failed->pending.
    void set_flag(const std::string& product_id, const std::string& step,
                  FlagState to, const std::string& message = "");

    // Products whose flag for step is pending or failed, by acquisition time.
    std::vector<std::string> pending_tasks(const std::string& step) const;

    int64_t next_seq() { return ++seq_; }

private:
    void persist(const ProductRecord& rec);

    std::string path_;
    std::map<std::string, ProductRecord> records_;
    std::vector<std::string> order_;  // ids sorted by (acquisition, id)
    int64_t seq_ = 0;
};

struct IngestBand {
    BandId band = BandId::NDVI;
    Raster raster;  // SCL values are class codes stored as floats
};

// Writes band tiles under root/cube/<sensor>/<date>/ and records the product
// with its pipeline flags. A write failure marks the cube step failed and
// leaves previously written bands intact. When another acquisition already
// occupies the same sensor/day directory the first one is kept and the cube
// flag carries a warning. fault_hook, when set, runs before each band write
// (test instrumentation).
const ProductRecord& ingest_product(
    Catalog& cat, const std::string& root, ProductRecord meta,
    const std::vector<IngestBand>& bands,
    const std::function<void(BandId)>& fault_hook = {});

}  // namespace adc
