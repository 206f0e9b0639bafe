#pragma once

// On-disk cache of simulated replicate columns.
//
// One file per (statistic, n, null model, B, seed):
//   <STAT>_n<n>_B<B>_s<seed>_<null hash, 16 hex>.bnull
// Layout: a single ASCII header line
//   benford-null-cache v1 stat=<STAT> n=<n> B=<B> seed=<seed> null=<canonical null>
// terminated by '\n', followed by B little-endian IEEE-754 doubles in
// replicate order (unsorted, so combined statistics can be rebuilt). A file
// whose header does not match the expected line exactly is ignored.

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "benford/errors.hpp"
#include "benford/null_engine.hpp"
#include "benford/statistics.hpp"

namespace benford {

inline constexpr int kNullCacheVersion = 1;

class NullCache {
 public:
  explicit NullCache(std::filesystem::path dir) : dir_(std::move(dir)) {}

  const std::filesystem::path& directory() const { return dir_; }

  std::filesystem::path path_for(Statistic s, std::size_t n, std::size_t B, std::uint64_t seed,
                                 const NullModel& null) const {
    char name[160];
    std::snprintf(name, sizeof name, "%s_n%zu_B%zu_s%llu_%016llx.bnull", to_string(s).c_str(),
                  n, B, static_cast<unsigned long long>(seed),
                  static_cast<unsigned long long>(null.hash()));
    return dir_ / name;
  }

  static std::string header(Statistic s, std::size_t n, std::size_t B, std::uint64_t seed,
                            const NullModel& null) {
    return "benford-null-cache v" + std::to_string(kNullCacheVersion) +
           " stat=" + to_string(s) + " n=" + std::to_string(n) + " B=" + std::to_string(B) +
           " seed=" + std::to_string(seed) + " null=" + null.canonical();
  }

  std::optional<std::vector<double>> load(Statistic s, std::size_t n, std::size_t B,
                                          std::uint64_t seed, const NullModel& null) const {
    std::ifstream in(path_for(s, n, B, seed, null), std::ios::binary);
    if (!in) return std::nullopt;
    std::string line;
    if (!std::getline(in, line) || line != header(s, n, B, seed, null)) return std::nullopt;
    std::vector<double> values(B);
    in.read(reinterpret_cast<char*>(values.data()),
            static_cast<std::streamsize>(B * sizeof(double)));
    if (in.gcount() != static_cast<std::streamsize>(B * sizeof(double))) return std::nullopt;
    if constexpr (std::endian::native == std::endian::big) {
      for (auto& v : values) v = std::bit_cast<double>(byteswap(std::bit_cast<std::uint64_t>(v)));
    }
    return values;
  }

  void store(Statistic s, std::size_t n, std::size_t B, std::uint64_t seed,
             const NullModel& null, const std::vector<double>& values) const {
    std::filesystem::create_directories(dir_);
    const auto target = path_for(s, n, B, seed, null);
    auto tmp = target;
    tmp += ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw Error("cannot write null cache file " + tmp.string());
      out << header(s, n, B, seed, null) << '\n';
      if constexpr (std::endian::native == std::endian::big) {
        for (double v : values) {
          const auto w = byteswap(std::bit_cast<std::uint64_t>(v));
          out.write(reinterpret_cast<const char*>(&w), sizeof w);
        }
      } else {
        out.write(reinterpret_cast<const char*>(values.data()),
                  static_cast<std::streamsize>(values.size() * sizeof(double)));
      }
      if (!out) throw Error("failed writing null cache file " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
  }

 private:
  static std::uint64_t byteswap(std::uint64_t x) {
    x = ((x & 0x00ff00ff00ff00ffull) << 8) | ((x >> 8) & 0x00ff00ff00ff00ffull);
    x = ((x & 0x0000ffff0000ffffull) << 16) | ((x >> 16) & 0x0000ffff0000ffffull);
    return (x << 32) | (x >> 32);
  }

  std::filesystem::path dir_;
};

/// Replicate table for `mask`, reading columns from `cache` when all are
/// present and writing freshly simulated ones otherwise.
inline ReplicateTable cached_replicates(StatisticMask mask, std::size_t n, std::size_t B,
                                        std::uint64_t seed, const NullModel& null,
                                        const EngineOptions& options, const NullCache* cache) {
  if (cache) {
    ReplicateTable table;
    table.n = n;
    table.B = B;
    table.seed = seed;
    table.null = null;
    table.mask = mask;
    bool complete = true;
    for (std::size_t i = 0; i < kSampleStatisticCount && complete; ++i) {
      if (!mask.test(i)) continue;
      auto col = cache->load(kAllStatistics[i], n, B, seed, null);
      if (!col) {
        complete = false;
      } else {
        table.columns[i] = std::move(*col);
      }
    }
    if (complete) return table;
  }
  auto table = simulate_replicates(mask, n, B, seed, null, options);
  if (cache) {
    for (std::size_t i = 0; i < kSampleStatisticCount; ++i) {
      if (mask.test(i)) cache->store(kAllStatistics[i], n, B, seed, null, table.columns[i]);
    }
  }
  return table;
}

}  // namespace benford
