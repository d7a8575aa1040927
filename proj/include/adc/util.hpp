#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

namespace adc {

// ---- threading ----------------------------------------------------------

// Global worker cap used by parallel_for (0 = hardware concurrency).
void set_max_threads(int n);
int max_threads();

// Runs fn(i) for i in [0, n). Work items are fixed-granularity tasks pulled
// from a shared counter, so the decomposition (and therefore any result
// assembled into per-index slots) does not depend on the worker count.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn,
                  int threads = 0);

// ---- deterministic RNG --------------------------------------------------

// Small splittable generator. Streams derived from (seed, tags...) are
// independent and stable across platforms, unlike std:: distributions.
class RngStream {
public:
    explicit RngStream(uint64_t seed) : state_(seed) {}

    uint64_t next_u64();
    double next_double();                       // [0, 1)
    double uniform(double lo, double hi);
    double normal(double mean, double sigma);   // Box-Muller
    int64_t next_in_range(int64_t lo, int64_t hi);  // inclusive
    // Derive an independent child stream tagged by `tag`.
    RngStream derive(uint64_t tag) const;

private:
    uint64_t state_;
    bool have_spare_ = false;
    double spare_ = 0.0;
};

// ---- checksums ----------------------------------------------------------

uint64_t fnv1a64(const void* data, std::size_t size);
uint64_t fnv1a64_append(uint64_t hash, const void* data, std::size_t size);
uint64_t file_checksum(const std::filesystem::path& path);
std::string checksum_hex(uint64_t checksum);

// ---- small string/file helpers ------------------------------------------

std::string read_text_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);
// Writes to path + ".tmp" then renames, so readers never see partial files.
void write_file_atomic(const std::filesystem::path& path, const void* data,
                       std::size_t size);
void write_file_atomic(const std::filesystem::path& path, const std::string& text);
std::vector<std::string> split(const std::string& s, char sep);
std::string format_double(double v);  // shortest round-trip, stable across runs

}  // namespace adc
