#include "adc/tile_io.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstdio>
#include <cstring>

#include "adc/errors.hpp"

namespace adc::tiles {

std::size_t dtype_size(DType d) {
    switch (d) {
        case DType::F32: return 4;
        case DType::I16: return 2;
        case DType::I32: return 4;
        case DType::U8: return 1;
    }
    throw PreconditionError("bad dtype code");
}

namespace {

constexpr char kMagic[4] = {'A', 'D', 'C', '1'};

void put_u16(std::string& b, uint16_t v) {
    b.push_back(char(v & 0xff));
    b.push_back(char(v >> 8));
}
void put_u32(std::string& b, uint32_t v) {
    for (int i = 0; i < 4; ++i) b.push_back(char((v >> (8 * i)) & 0xff));
}
void put_u64(std::string& b, uint64_t v) {
    for (int i = 0; i < 8; ++i) b.push_back(char((v >> (8 * i)) & 0xff));
}
void put_f64(std::string& b, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_u64(b, bits);
}

uint16_t get_u16(const uint8_t* p) { return uint16_t(p[0]) | uint16_t(p[1]) << 8; }
uint32_t get_u32(const uint8_t* p) {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= uint32_t(p[i]) << (8 * i);
    return v;
}
uint64_t get_u64(const uint8_t* p) {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= uint64_t(p[i]) << (8 * i);
    return v;
}
double get_f64(const uint8_t* p) {
    uint64_t bits = get_u64(p);
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
}

std::string encode_header(const TileFileInfo& info) {
    std::string b;
    b.reserve(kHeaderSize);
    b.append(kMagic, 4);
    put_u16(b, info.version);
    b.push_back(char(info.dtype));
    put_u16(b, uint16_t(info.tile_rows));
    put_u16(b, uint16_t(info.tile_cols));
    put_f64(b, info.grid.origin_x);
    put_f64(b, info.grid.origin_y);
    put_f64(b, info.grid.pixel_size);
    put_u32(b, uint32_t(info.grid.width));
    put_u32(b, uint32_t(info.grid.height));
    put_f64(b, info.nodata);
    return b;
}

TileFileInfo decode_header(const uint8_t* p, const std::string& path) {
    if (std::memcmp(p, kMagic, 4) != 0)
        throw DataError(path + ": not a tile file (bad magic)");
    TileFileInfo info;
    info.version = get_u16(p + 4);
    if (info.version != kVersionRaw && info.version != kVersionDeflate)
        throw DataError(path + ": unsupported tile file version " +
                        std::to_string(info.version));
    uint8_t dt = p[6];
    if (dt > uint8_t(DType::U8))
        throw DataError(path + ": bad dtype code " + std::to_string(dt));
    info.dtype = DType(dt);
    info.tile_rows = get_u16(p + 7);
    info.tile_cols = get_u16(p + 9);
    info.grid.origin_x = get_f64(p + 11);
    info.grid.origin_y = get_f64(p + 19);
    info.grid.pixel_size = get_f64(p + 27);
    info.grid.width = int(get_u32(p + 35));
    info.grid.height = int(get_u32(p + 39));
    info.nodata = get_f64(p + 43);
    if (info.tile_rows < 1 || info.tile_cols < 1 || info.grid.width < 1 ||
        info.grid.height < 1 || info.grid.pixel_size <= 0)
        throw DataError(path + ": corrupt tile file header");
    return info;
}

void fill_nodata(uint8_t* buf, std::size_t count, DType dtype, double nodata) {
    switch (dtype) {
        case DType::F32: {
            float v = float(nodata);
            auto* p = reinterpret_cast<float*>(buf);
            std::fill(p, p + count, v);
            break;
        }
        case DType::I16: {
            int16_t v = int16_t(nodata);
            auto* p = reinterpret_cast<int16_t*>(buf);
            std::fill(p, p + count, v);
            break;
        }
        case DType::I32: {
            int32_t v = int32_t(nodata);
            auto* p = reinterpret_cast<int32_t*>(buf);
            std::fill(p, p + count, v);
            break;
        }
        case DType::U8: {
            std::memset(buf, int(uint8_t(nodata)), count);
            break;
        }
    }
}

void write_all(FILE* f, const void* data, std::size_t n, const std::string& path) {
    if (std::fwrite(data, 1, n, f) != n)
        throw DataError(path + ": write failed: " + std::strerror(errno));
}

}  // namespace

void write_tiles(const std::string& path, const GridSpec& grid, DType dtype,
                 const void* data, double nodata, uint16_t version,
                 int tile_rows, int tile_cols) {
    grid.validate();
    if (version != kVersionRaw && version != kVersionDeflate)
        throw PreconditionError("unsupported tile file version");

    TileFileInfo info;
    info.version = version;
    info.dtype = dtype;
    info.tile_rows = tile_rows;
    info.tile_cols = tile_cols;
    info.grid = grid;
    info.nodata = nodata;

    const std::size_t esize = dtype_size(dtype);
    const std::size_t tile_bytes = std::size_t(tile_rows) * tile_cols * esize;
    const int tx = info.tiles_x(), ty = info.tiles_y();
    const auto* src = static_cast<const uint8_t*>(data);

    std::string tmp = path + ".tmp";
    FILE* f = std::fopen(tmp.c_str(), "wb");
    if (!f) throw DataError(tmp + ": cannot open for writing: " + std::strerror(errno));

    try {
        std::string header = encode_header(info);
        write_all(f, header.data(), header.size(), tmp);

        std::vector<std::pair<uint64_t, uint64_t>> index(std::size_t(tx) * ty);
        const long index_pos = long(kHeaderSize);
        if (version == kVersionDeflate) {
            // Placeholder; rewritten once offsets are known.
            std::vector<uint8_t> zeros(index.size() * 16, 0);
            write_all(f, zeros.data(), zeros.size(), tmp);
        }

        std::vector<uint8_t> tile(tile_bytes);
        std::vector<uint8_t> packed(compressBound(uLong(tile_bytes)));
        uint64_t pos = kHeaderSize +
                       (version == kVersionDeflate ? uint64_t(index.size()) * 16 : 0);

        for (int tr = 0; tr < ty; ++tr) {
            for (int tc = 0; tc < tx; ++tc) {
                const int row0 = tr * tile_rows;
                const int col0 = tc * tile_cols;
                const int nrows = std::min(tile_rows, grid.height - row0);
                const int ncols = std::min(tile_cols, grid.width - col0);
                if (nrows < tile_rows || ncols < tile_cols)
                    fill_nodata(tile.data(), std::size_t(tile_rows) * tile_cols,
                                dtype, nodata);
                for (int r = 0; r < nrows; ++r) {
                    const uint8_t* s =
                        src + (std::size_t(row0 + r) * grid.width + col0) * esize;
                    std::memcpy(tile.data() + std::size_t(r) * tile_cols * esize, s,
                                std::size_t(ncols) * esize);
                }
                if (version == kVersionRaw) {
                    write_all(f, tile.data(), tile_bytes, tmp);
                } else {
                    uLongf zlen = uLongf(packed.size());
                    int rc = compress2(packed.data(), &zlen, tile.data(),
                                       uLong(tile_bytes), Z_DEFAULT_COMPRESSION);
                    if (rc != Z_OK)
                        throw DataError(tmp + ": tile compression failed");
                    index[std::size_t(tr) * tx + tc] = {pos, zlen};
                    write_all(f, packed.data(), zlen, tmp);
                    pos += zlen;
                }
            }
        }

        if (version == kVersionDeflate) {
            if (std::fseek(f, index_pos, SEEK_SET) != 0)
                throw DataError(tmp + ": seek failed");
            std::string ib;
            ib.reserve(index.size() * 16);
            for (auto [off, len] : index) {
                put_u64(ib, off);
                put_u64(ib, len);
            }
            write_all(f, ib.data(), ib.size(), tmp);
        }
        if (std::fclose(f) != 0) {
            f = nullptr;
            throw DataError(tmp + ": close failed: " + std::strerror(errno));
        }
        f = nullptr;
    } catch (...) {
        if (f) std::fclose(f);
        std::remove(tmp.c_str());
        throw;
    }

    if (std::rename(tmp.c_str(), path.c_str()) != 0) {
        std::remove(tmp.c_str());
        throw DataError(path + ": rename failed: " + std::strerror(errno));
    }
}

namespace {

void pread_all(int fd, void* buf, std::size_t n, uint64_t offset,
               const std::string& path) {
    auto* p = static_cast<uint8_t*>(buf);
    std::size_t done = 0;
    while (done < n) {
        ssize_t got = ::pread(fd, p + done, n - done, off_t(offset + done));
        if (got < 0) {
            if (errno == EINTR) continue;
            throw DataError(path + ": read failed: " + std::strerror(errno));
        }
        if (got == 0) throw DataError(path + ": truncated tile file");
        done += std::size_t(got);
    }
}

}  // namespace

TileReader::TileReader(const std::string& path) : path_(path) {
    fd_ = ::open(path.c_str(), O_RDONLY);
    if (fd_ < 0) throw DataError(path + ": cannot open: " + std::strerror(errno));
    try {
        uint8_t hdr[kHeaderSize];
        pread_all(fd_, hdr, kHeaderSize, 0, path_);
        info_ = decode_header(hdr, path_);
        if (info_.version == kVersionDeflate) {
            const std::size_t n = std::size_t(info_.n_tiles());
            std::vector<uint8_t> raw(n * 16);
            pread_all(fd_, raw.data(), raw.size(), kHeaderSize, path_);
            index_.resize(n);
            for (std::size_t i = 0; i < n; ++i)
                index_[i] = {get_u64(raw.data() + i * 16),
                             get_u64(raw.data() + i * 16 + 8)};
        }
    } catch (...) {
        ::close(fd_);
        throw;
    }
}

TileReader::~TileReader() {
    if (fd_ >= 0) ::close(fd_);
}

TileReader::TileReader(TileReader&& o) noexcept
    : fd_(o.fd_), path_(std::move(o.path_)), info_(o.info_),
      index_(std::move(o.index_)) {
    o.fd_ = -1;
}

TileReader& TileReader::operator=(TileReader&& o) noexcept {
    if (this != &o) {
        if (fd_ >= 0) ::close(fd_);
        fd_ = o.fd_;
        path_ = std::move(o.path_);
        info_ = o.info_;
        index_ = std::move(o.index_);
        o.fd_ = -1;
    }
    return *this;
}

void TileReader::read(const PixelBox& w, void* out, ReadStats* stats) const {
    if (w.empty()) return;
    if (w.row < 0 || w.col < 0 || w.row + w.nrows > info_.grid.height ||
        w.col + w.ncols > info_.grid.width)
        throw PreconditionError(path_ + ": read window outside raster");

    const std::size_t esize = dtype_size(info_.dtype);
    const int trows = info_.tile_rows, tcols = info_.tile_cols;
    const std::size_t tile_bytes = std::size_t(trows) * tcols * esize;
    const int tx = info_.tiles_x();

    const int tr0 = w.row / trows, tr1 = (w.row + w.nrows - 1) / trows;
    const int tc0 = w.col / tcols, tc1 = (w.col + w.ncols - 1) / tcols;

    std::vector<uint8_t> tile(tile_bytes);
    std::vector<uint8_t> packed;
    auto* dst = static_cast<uint8_t*>(out);

    for (int tr = tr0; tr <= tr1; ++tr) {
        for (int tc = tc0; tc <= tc1; ++tc) {
            const std::size_t tid = std::size_t(tr) * tx + tc;
            if (info_.version == kVersionRaw) {
                pread_all(fd_, tile.data(), tile_bytes,
                          kHeaderSize + uint64_t(tid) * tile_bytes, path_);
                if (stats) {
                    stats->tiles_read++;
                    stats->bytes_read += int64_t(tile_bytes);
                }
            } else {
                auto [off, zlen] = index_[tid];
                if (zlen == 0 || zlen > tile_bytes + tile_bytes / 2 + 64)
                    throw DataError(path_ + ": corrupt tile index");
                packed.resize(zlen);
                pread_all(fd_, packed.data(), zlen, off, path_);
                uLongf dlen = uLongf(tile_bytes);
                int rc = uncompress(tile.data(), &dlen, packed.data(), uLong(zlen));
                if (rc != Z_OK || dlen != tile_bytes)
                    throw DataError(path_ + ": tile decompression failed");
                if (stats) {
                    stats->tiles_read++;
                    stats->bytes_read += int64_t(zlen);
                }
            }

            // Intersection of this tile with the window, copied row by row.
            const int row_lo = std::max(w.row, tr * trows);
            const int row_hi = std::min(w.row + w.nrows, (tr + 1) * trows);
            const int col_lo = std::max(w.col, tc * tcols);
            const int col_hi = std::min(w.col + w.ncols, (tc + 1) * tcols);
            const std::size_t span = std::size_t(col_hi - col_lo) * esize;
            for (int r = row_lo; r < row_hi; ++r) {
                const uint8_t* s =
                    tile.data() +
                    (std::size_t(r - tr * trows) * tcols + (col_lo - tc * tcols)) * esize;
                uint8_t* d =
                    dst + (std::size_t(r - w.row) * w.ncols + (col_lo - w.col)) * esize;
                std::memcpy(d, s, span);
            }
        }
    }
}

TileFileInfo probe(const std::string& path) {
    int fd = ::open(path.c_str(), O_RDONLY);
    if (fd < 0) throw DataError(path + ": cannot open: " + std::strerror(errno));
    uint8_t hdr[kHeaderSize];
    try {
        pread_all(fd, hdr, kHeaderSize, 0, path);
    } catch (...) {
        ::close(fd);
        throw;
    }
    ::close(fd);
    return decode_header(hdr, path);
}

namespace {

template <typename T>
TileFileInfo read_typed(const std::string& path, std::vector<T>& out, DType want,
                        ReadStats* stats) {
    TileReader rd(path);
    if (rd.info().dtype != want)
        throw DataError(path + ": unexpected dtype");
    const auto& g = rd.info().grid;
    out.resize(std::size_t(g.width) * g.height);
    rd.read({0, 0, g.height, g.width}, out.data(), stats);
    return rd.info();
}

}  // namespace

TileFileInfo read_tiles(const std::string& path, std::vector<float>& out,
                        ReadStats* stats) {
    return read_typed(path, out, DType::F32, stats);
}
TileFileInfo read_tiles(const std::string& path, std::vector<int16_t>& out,
                        ReadStats* stats) {
    return read_typed(path, out, DType::I16, stats);
}
TileFileInfo read_tiles(const std::string& path, std::vector<int32_t>& out,
                        ReadStats* stats) {
    return read_typed(path, out, DType::I32, stats);
}

void write_raster(const std::string& path, const Raster& r, uint16_t version) {
    write_tiles(path, r.grid, DType::F32, r.values.data(), double(r.nodata), version);
}

Raster read_raster(const std::string& path, ReadStats* stats) {
    Raster r;
    TileFileInfo info = read_tiles(path, r.values, stats);
    r.grid = info.grid;
    r.nodata = float(info.nodata);
    return r;
}

Raster read_raster_window(const std::string& path, const PixelBox& w,
                          ReadStats* stats) {
    TileReader rd(path);
    if (rd.info().dtype != DType::F32) throw DataError(path + ": unexpected dtype");
    Raster r;
    r.grid = rd.info().grid.sub_grid(w);
    r.nodata = float(rd.info().nodata);
    r.values.resize(std::size_t(w.nrows) * w.ncols);
    rd.read(w, r.values.data(), stats);
    return r;
}

}  // namespace adc::tiles
