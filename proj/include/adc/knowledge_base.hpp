#pragma once

#include <cstdint>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "adc/parcels.hpp"
#include "adc/workspace.hpp"

namespace adc {

struct KbRow {
    int64_t parcel_id = 0;
    std::string attribute;
    AttrValue value;
    std::string producer;
    uint64_t run_id = 0;
    std::string written_at;
};

struct UpsertReport {
    std::size_t applied = 0;
    std::size_t unchanged = 0;
    std::vector<int64_t> unknown_parcels;
    uint64_t run_id = 0;  // 0 when nothing was written
};

// Per-parcel attribute store persisted as append-only JSON lines. Reads are
// latest-wins; earlier rows stay in the file as history until compact() is
// called explicitly. Writes are serialized through one mutex.
class KnowledgeBase {
public:
    // Opens <root>/kb.jsonl, creating it on first write. The workspace's
    // parcels define the set of known parcel ids.
    explicit KnowledgeBase(const Workspace& ws);
    KnowledgeBase(std::string path, std::vector<int64_t> known_parcels);

    // Appends one row per (parcel, attribute) whose latest value differs.
    // Rows naming unknown parcels are skipped and reported; the rest are
    // still applied. Writing an identical payload twice is a no-op.
    UpsertReport upsert(const std::vector<std::pair<int64_t, AttrValue>>& rows,
                        const std::string& attribute, const std::string& producer);
    UpsertReport upsert(const std::vector<KbRow>& rows, const std::string& producer);

    std::optional<AttrValue> latest(int64_t parcel_id, const std::string& attribute) const;
    std::vector<KbRow> history(int64_t parcel_id, const std::string& attribute) const;
    std::vector<std::string> attributes() const;
    bool has_attribute(const std::string& attribute) const;
    std::size_t size() const { return rows_.size(); }

    // Rewrites the file keeping only the latest row per (parcel, attribute).
    // Reads are unaffected; history before the compaction point is dropped.
    void compact();

    const std::string& path() const { return path_; }

private:
    void load();
    void append_rows(const std::vector<KbRow>& rows);

    std::string path_;
    std::vector<int64_t> known_;
    std::vector<KbRow> rows_;
    std::map<std::pair<int64_t, std::string>, std::size_t> latest_;
    uint64_t next_run_ = 1;
    mutable std::mutex write_;
};

}  // namespace adc
