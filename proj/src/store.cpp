#include "adc/store.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "adc/errors.hpp"

namespace fs = std::filesystem;

namespace adc {

namespace {

bool cube_done(const ProductRecord& r) {
    auto it = r.flags.find("cube");
    return it != r.flags.end() && it->second.state == FlagState::Done;
}

}  // namespace

CubeStore::CubeStore(const Catalog& cat, std::string root, GridSpec grid)
    : catalog_(&cat), root_(std::move(root)), grid_(std::move(grid)) {
    grid_.validate();
}

CubeStore::CubeStore(Workspace& ws)
    : CubeStore(ws.catalog(), ws.root(), ws.grid()) {}

bool CubeStore::SceneSource::has(BandId b) const {
    const auto& bs = record->bands;
    return std::find(bs.begin(), bs.end(), b) != bs.end();
}

bool CubeStore::SceneSource::resolves(BandId b) const {
    if (has(b)) return true;
    return b == BandId::NDVI && has(BandId::B04) && has(BandId::B08);
}

std::vector<CubeStore::SceneSource> CubeStore::select(
    int64_t day0, int64_t day1, const std::vector<BandId>& bands,
    LoadStats* stats) const {
    std::vector<SceneSource> out;
    std::set<std::pair<int, int64_t>> seen;  // (sensor, day)
    for (const ProductRecord* r : catalog_->query({{day0, day1}})) {
        if (!cube_done(*r)) {
            if (stats) stats->scenes_incomplete++;
            continue;
        }
        if (!seen.insert({int(r->sensor), r->acquisition_day}).second) {
            if (stats) stats->collisions_skipped++;
            continue;
        }
        SceneSource src{r->acquisition_day, r};
        bool any = false;
        for (BandId b : bands) any = any || src.resolves(b);
        if (!any) continue;
        out.push_back(src);
        if (stats) stats->scenes_loaded++;
    }
    return out;
}

std::vector<int64_t> CubeStore::scene_days(
    int64_t day0, int64_t day1, const std::vector<BandId>& bands) const {
    std::vector<int64_t> days;
    for (const SceneSource& s : select(day0, day1, bands, nullptr))
        days.push_back(s.day);
    days.erase(std::unique(days.begin(), days.end()), days.end());
    return days;
}

const tiles::TileReader& CubeStore::reader(const std::string& rel_path) const {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = readers_.find(rel_path);
    if (it == readers_.end()) {
        auto r = std::make_unique<tiles::TileReader>(
            (fs::path(root_) / rel_path).string());
        it = readers_.emplace(rel_path, std::move(r)).first;
    }
    return *it->second;
}

void CubeStore::fill_band(const SceneSource& src, BandId band, const PixelBox& w,
                          CubeArray& cube, int t, int b, LoadStats* stats) const {
    const std::size_t n = std::size_t(w.nrows) * w.ncols;
    float* vals = cube.slice_values(t, b);
    uint8_t* ok = cube.slice_valid(t, b);
    tiles::ReadStats rs;

    auto band_path = [&](const std::string& name) {
        return src.record->storage_path + "/" + name + ".tiles";
    };

    if (src.has(band)) {
        const tiles::TileReader& rd = reader(band_path(band_name(band)));
        const tiles::TileFileInfo& info = rd.info();
        if (info.dtype == tiles::DType::F32) {
            std::vector<float> buf(n);
            rd.read(w, buf.data(), &rs);
            const float nd = float(info.nodata);
            for (std::size_t i = 0; i < n; ++i) {
                vals[i] = buf[i];
                ok[i] = buf[i] != nd;
            }
        } else if (info.dtype == tiles::DType::I16) {
            std::vector<int16_t> buf(n);
            rd.read(w, buf.data(), &rs);
            const int16_t nd = int16_t(std::lround(info.nodata));
            for (std::size_t i = 0; i < n; ++i) {
                vals[i] = float(buf[i]);
                ok[i] = buf[i] != nd;
            }
        } else if (info.dtype == tiles::DType::I32) {
            std::vector<int32_t> buf(n);
            rd.read(w, buf.data(), &rs);
            const int32_t nd = int32_t(std::lround(info.nodata));
            for (std::size_t i = 0; i < n; ++i) {
                vals[i] = float(buf[i]);
                ok[i] = buf[i] != nd;
            }
        } else {
            std::vector<uint8_t> buf(n);
            rd.read(w, buf.data(), &rs);
            const uint8_t nd = uint8_t(std::lround(info.nodata));
            for (std::size_t i = 0; i < n; ++i) {
                vals[i] = float(buf[i]);
                ok[i] = buf[i] != nd;
            }
        }
    } else if (band == BandId::NDVI && src.has(BandId::B04) &&
               src.has(BandId::B08)) {
        const tiles::TileReader& red = reader(band_path("B04"));
        const tiles::TileReader& nir = reader(band_path("B08"));
        std::vector<float> rbuf(n), nbuf(n);
        red.read(w, rbuf.data(), &rs);
        nir.read(w, nbuf.data(), &rs);
        const float rnd = float(red.info().nodata);
        const float nnd = float(nir.info().nodata);
        for (std::size_t i = 0; i < n; ++i) {
            const float r = rbuf[i], nr = nbuf[i];
            const double den = double(nr) + double(r);
            if (r == rnd || nr == nnd || den < 1e-12) {
                vals[i] = 0.0f;
                ok[i] = 0;
            } else {
                const double v = (double(nr) - double(r)) / den;
                vals[i] = float(std::clamp(v, -1.0, 1.0));
                ok[i] = 1;
            }
        }
    }
    if (stats) stats->io.add(rs);
}

CubeArray CubeStore::load(const PixelBox& window, int64_t day0, int64_t day1,
                          const std::vector<BandId>& bands,
                          LoadStats* stats) const {
    return assemble(window, select(day0, day1, bands, stats), bands, stats);
}

CubeArray CubeStore::load_days(const PixelBox& window,
                               const std::vector<int64_t>& days,
                               const std::vector<BandId>& bands,
                               LoadStats* stats) const {
    if (days.empty()) return CubeArray();
    const auto [lo, hi] = std::minmax_element(days.begin(), days.end());
    std::vector<SceneSource> sources = select(*lo, *hi + 1, bands, stats);
    const std::set<int64_t> wanted(days.begin(), days.end());
    std::erase_if(sources, [&](const SceneSource& s) {
        if (!wanted.count(s.day)) {
            if (stats) stats->scenes_loaded--;
            return true;
        }
        return false;
    });
    return assemble(window, sources, bands, stats);
}

double CubeStore::cloud_fraction(int64_t day) const {
    for (const ProductRecord* r : catalog_->query({{day, day + 1}})) {
        if (!cube_done(*r)) continue;
        if (std::find(r->bands.begin(), r->bands.end(), BandId::SCL) !=
            r->bands.end())
            return r->cloud_fraction;
    }
    return -1;
}

CubeArray CubeStore::assemble(const PixelBox& window,
                              const std::vector<SceneSource>& sources,
                              const std::vector<BandId>& bands,
                              LoadStats* stats) const {
    if (bands.empty()) throw UsageError("no bands requested");
    {
        std::set<BandId> uniq(bands.begin(), bands.end());
        if (uniq.size() != bands.size())
            throw UsageError("duplicate band in request");
    }
    if (window.empty()) return CubeArray();
    if (window.row < 0 || window.col < 0 ||
        window.row + window.nrows > grid_.height ||
        window.col + window.ncols > grid_.width)
        throw PreconditionError("load window exceeds the grid");

    if (sources.empty()) return CubeArray();

    std::vector<int64_t> days;
    for (const SceneSource& s : sources) days.push_back(s.day);
    days.erase(std::unique(days.begin(), days.end()), days.end());

    CubeArray cube(grid_.sub_grid(window), days, bands);
    for (const SceneSource& src : sources) {
        const int t = cube.time_index(src.day);
        for (std::size_t b = 0; b < bands.size(); ++b) {
            if (!src.resolves(bands[b])) continue;
            bool already = false;
            if (sources.size() > days.size()) {
                const uint8_t* ok = cube.slice_valid(t, int(b));
                const std::size_t n = std::size_t(window.nrows) * window.ncols;
                for (std::size_t i = 0; i < n && !already; ++i) already = ok[i];
            }
            if (already) continue;
            fill_band(src, bands[b], window, cube, t, int(b), stats);
        }
    }
    return cube;
}

CubeArray CubeStore::load_range(int64_t day0, int64_t day1,
                                const std::vector<BandId>& bands,
                                LoadStats* stats) const {
    return load({0, 0, grid_.height, grid_.width}, day0, day1, bands, stats);
}

}  // namespace adc
