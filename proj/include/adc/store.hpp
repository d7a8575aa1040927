#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "adc/catalog.hpp"
#include "adc/grid.hpp"
#include "adc/tile_io.hpp"
#include "adc/workspace.hpp"

namespace adc {

struct LoadStats {
    std::size_t scenes_loaded = 0;       // product records that contributed
    std::size_t scenes_incomplete = 0;   // skipped: cube step not done
    std::size_t collisions_skipped = 0;  // skipped: same sensor and day
    tiles::ReadStats io;
};

// Read side of the cube: assembles dense arrays from the per-band tile files
// the catalog points at. NDVI is derived from B04/B08 on the fly when no
// NDVI tiles were ingested. Tile files stay open across calls, so repeated
// small windows (one parcel at a time) do not pay open/parse costs.
class CubeStore {
public:
    CubeStore(const Catalog& cat, std::string root, GridSpec grid);
    explicit CubeStore(Workspace& ws);

    const GridSpec& grid() const { return grid_; }

    // Scene days in [day0, day1) that can contribute at least one of the
    // requested bands. Ascending, unique.
    std::vector<int64_t> scene_days(int64_t day0, int64_t day1,
                                    const std::vector<BandId>& bands) const;

    // Dense cube for one pixel window over [day0, day1). Timesteps with none
    // of the requested bands are dropped; pixels missing in the files stay
    // invalid. Thread-safe.
    CubeArray load(const PixelBox& window, int64_t day0, int64_t day1,
                   const std::vector<BandId>& bands,
                   LoadStats* stats = nullptr) const;

    // Same, restricted to an explicit day list.
    CubeArray load_days(const PixelBox& window, const std::vector<int64_t>& days,
                        const std::vector<BandId>& bands,
                        LoadStats* stats = nullptr) const;

    // Whole-grid convenience.
    CubeArray load_range(int64_t day0, int64_t day1,
                         const std::vector<BandId>& bands,
                         LoadStats* stats = nullptr) const;

    // Catalog cloud fraction of the scene-classified product on that day,
    // -1 when the day has none.
    double cloud_fraction(int64_t day) const;

private:
    struct SceneSource {
        int64_t day = 0;
        const ProductRecord* record = nullptr;
        bool has(BandId b) const;
        bool resolves(BandId b) const;
    };

    std::vector<SceneSource> select(int64_t day0, int64_t day1,
                                    const std::vector<BandId>& bands,
                                    LoadStats* stats) const;
    CubeArray assemble(const PixelBox& window,
                       const std::vector<SceneSource>& sources,
                       const std::vector<BandId>& bands,
                       LoadStats* stats) const;
    const tiles::TileReader& reader(const std::string& rel_path) const;
    void fill_band(const SceneSource& src, BandId band, const PixelBox& w,
                   CubeArray& cube, int t, int b, LoadStats* stats) const;

    const Catalog* catalog_;
    std::string root_;
    GridSpec grid_;

    mutable std::mutex mu_;
    mutable std::map<std::string, std::unique_ptr<tiles::TileReader>> readers_;
};

}  // namespace adc
