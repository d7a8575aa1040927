#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "adc/grid.hpp"

// Tiled binary raster container.
//
// Header (little-endian): magic "ADC1", version u16, dtype u8,
// tile rows u16, tile cols u16, origin_x f64, origin_y f64, pixel_size f64,
// width u32, height u32, nodata f64. Payload follows in row-then-column
// tile order; each tile is tile_rows*tile_cols elements row-major, edge
// tiles padded with nodata.
//
// version 1: raw fixed-stride tiles, seekable by arithmetic.
// version 2: a tile index (offset u64, byte size u64 per tile) sits between
// header and payload and each tile is DEFLATE-compressed. This is the
// default for cube bands; windowed reads decompress only touched tiles.
//
// The header has no CRS field; grids come back with an empty crs_id and the
// caller stamps the workspace CRS on.

namespace adc::tiles {

enum class DType : uint8_t { F32 = 0, I16 = 1, I32 = 2, U8 = 3 };

std::size_t dtype_size(DType d);

constexpr uint16_t kVersionRaw = 1;
constexpr uint16_t kVersionDeflate = 2;
constexpr int kTileRows = 256;
constexpr int kTileCols = 256;
constexpr std::size_t kHeaderSize = 51;

struct TileFileInfo {
    uint16_t version = kVersionDeflate;
    DType dtype = DType::F32;
    int tile_rows = kTileRows;
    int tile_cols = kTileCols;
    GridSpec grid;
    double nodata = kDefaultNodata;

    int tiles_x() const { return (grid.width + tile_cols - 1) / tile_cols; }
    int tiles_y() const { return (grid.height + tile_rows - 1) / tile_rows; }
    int n_tiles() const { return tiles_x() * tiles_y(); }
};

struct ReadStats {
    int64_t tiles_read = 0;
    int64_t bytes_read = 0;

    void add(const ReadStats& o) {
        tiles_read += o.tiles_read;
        bytes_read += o.bytes_read;
    }
};

// data points at grid.width*grid.height elements of dtype, row-major.
// Writes to a temp file and renames into place.
void write_tiles(const std::string& path, const GridSpec& grid, DType dtype,
                 const void* data, double nodata,
                 uint16_t version = kVersionDeflate,
                 int tile_rows = kTileRows, int tile_cols = kTileCols);

// Header-only read. Throws DataError on bad magic/version/fields.
TileFileInfo probe(const std::string& path);

// Open file handle; reads are positioned (pread), so one instance can serve
// concurrent readers.
class TileReader {
public:
    explicit TileReader(const std::string& path);
    ~TileReader();
    TileReader(TileReader&&) noexcept;
    TileReader& operator=(TileReader&&) noexcept;
    TileReader(const TileReader&) = delete;
    TileReader& operator=(const TileReader&) = delete;

    const TileFileInfo& info() const { return info_; }

    // Copies the window into out (window.nrows*window.ncols elements of the
    // file's dtype). Only tiles intersecting the window are read. The window
    // must lie inside the raster.
    void read(const PixelBox& window, void* out, ReadStats* stats = nullptr) const;

private:
    int fd_ = -1;
    std::string path_;
    TileFileInfo info_;
    std::vector<std::pair<uint64_t, uint64_t>> index_;  // v2: offset, byte size
};

// One-shot conveniences.
TileFileInfo read_tiles(const std::string& path, std::vector<float>& out,
                        ReadStats* stats = nullptr);
TileFileInfo read_tiles(const std::string& path, std::vector<int16_t>& out,
                        ReadStats* stats = nullptr);
TileFileInfo read_tiles(const std::string& path, std::vector<int32_t>& out,
                        ReadStats* stats = nullptr);

void write_raster(const std::string& path, const Raster& r,
                  uint16_t version = kVersionDeflate);
Raster read_raster(const std::string& path, ReadStats* stats = nullptr);
Raster read_raster_window(const std::string& path, const PixelBox& window,
                          ReadStats* stats = nullptr);

}  // namespace adc::tiles
