#pragma once

// Monte Carlo null distributions: replicate b of a run evaluates the
// statistics on n Benford significands 10^U drawn from substream (seed, b),
// optionally discretized to the digit profile of an observed sample.
// Output is independent of the number of worker threads.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <exception>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "benford/errors.hpp"
#include "benford/generators.hpp"
#include "benford/random.hpp"
#include "benford/significand.hpp"
#include "benford/special_functions.hpp"
#include "benford/statistics.hpp"

namespace benford {

enum class NullKind { plain, truncated, rounded };

inline std::string to_string(NullKind k) {
  switch (k) {
    case NullKind::plain: return "plain";
    case NullKind::truncated: return "truncated";
    case NullKind::rounded: return "rounded";
  }
  return "?";
}

/// Which Benford null the replicates are drawn from.
struct NullModel {
  NullKind kind = NullKind::plain;
  TruncationProfile profile;  // used by truncated/rounded only
  bool jitter = false;        // spread discretized values over their digit cell

  static NullModel plain() { return {}; }

  static NullModel discretized(TruncationProfile profile, DiscretizeMode mode,
                               bool jitter = false) {
    NullModel m;
    m.kind = mode == DiscretizeMode::truncate ? NullKind::truncated : NullKind::rounded;
    m.profile = std::move(profile);
    m.jitter = jitter;
    return m;
  }

  bool is_discretized() const { return kind != NullKind::plain; }

  DiscretizeMode mode() const {
    return kind == NullKind::rounded ? DiscretizeMode::round : DiscretizeMode::truncate;
  }

  std::string canonical() const {
    std::string out = to_string(kind);
    if (is_discretized()) out += "[" + profile.canonical() + "]";
    if (jitter) out += "+jitter";
    return out;
  }

  /// Short form for reports: kind plus jitter flag.
  std::string label() const { return to_string(kind) + (jitter ? "+jitter" : ""); }

  /// FNV-1a of the canonical form; part of cache keys.
  std::uint64_t hash() const {
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : canonical()) {
      h ^= static_cast<unsigned char>(c);
      h *= 0x100000001b3ull;
    }
    return h;
  }
};

struct EngineOptions {
  unsigned workers = 0;                               // 0 = hardware concurrency
  std::size_t memory_ceiling_bytes = std::size_t{1} << 31;  // replicate storage
};

namespace detail {

inline unsigned resolve_workers(unsigned requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : hw;
}

/// Runs fn(begin, end, worker) over [0, count) in chunks. Each index is
/// visited exactly once; the first exception is rethrown.
template <class Fn>
void parallel_chunks(std::size_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(
                                                         std::max<std::size_t>(1, count))));
  constexpr std::size_t kChunk = 256;
  if (workers == 1) {
    fn(std::size_t{0}, count, 0u);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          const std::size_t begin = next.fetch_add(kChunk);
          if (begin >= count) break;
          fn(begin, std::min(count, begin + kChunk), w);
        }
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next.store(count);
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

inline double jitter_value(double s, int k, DiscretizeMode mode, RandomStream& rng) {
  const double cell = 1.0 / pow10(k - 1);
  const double offset = mode == DiscretizeMode::truncate ? rng.uniform() : rng.uniform() - 0.5;
  const double v = s + offset * cell;
  return std::clamp(v, 1.0, std::nextafter(10.0, 1.0));
}

}  // namespace detail

/// Draws the significands of replicate `b` under `null` into `out` (size n).
/// `digits` is scratch space for profiles without rank information.
inline void draw_null_sample(std::uint64_t seed, std::uint64_t b, const NullModel& null,
                             std::span<double> out, std::vector<DigitCount>& digits) {
  RandomStream rng(seed, b, Lane::significand);
  for (auto& s : out) s = benford_significand(rng);
  if (!null.is_discretized() || !null.profile.any_discretized()) return;

  const auto& profile = null.profile;
  if (profile.n != out.size()) throw DomainError("profile size does not match n");
  std::sort(out.begin(), out.end());
  std::span<const DigitCount> ranked;
  if (profile.has_ranks()) {
    ranked = profile.ranked;
  } else {
    // Ranks unknown: digit counts go to order statistics in random order.
    digits.clear();
    for (int k = 1; k <= profile.max_digits; ++k) {
      digits.insert(digits.end(), profile.counts[k - 1], DigitCount::of(k));
    }
    digits.insert(digits.end(), profile.n_full, DigitCount::full());
    RandomStream perm(seed, b, Lane::permutation);
    for (std::size_t i = digits.size(); i > 1; --i) {
      std::swap(digits[i - 1], digits[perm.below(i)]);
    }
    ranked = digits;
  }
  const auto mode = null.mode();
  std::optional<RandomStream> jitter;
  if (null.jitter) jitter.emplace(seed, b, Lane::jitter);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const DigitCount k = ranked[i];
    if (k.is_full()) continue;
    out[i] = discretize(out[i], k.value(), mode);
    if (jitter) out[i] = detail::jitter_value(out[i], k.value(), mode, *jitter);
  }
}

/// Per-replicate statistic values, in replicate order (unsorted). Columns of
/// statistics outside the mask are empty.
struct ReplicateTable {
  std::size_t n = 0;
  std::size_t B = 0;
  std::uint64_t seed = 0;
  NullModel null;
  StatisticMask mask;
  std::array<std::vector<double>, kSampleStatisticCount> columns;

  const std::vector<double>& column(Statistic s) const {
    if (is_combined(s) || !mask.test(index_of(s))) {
      throw DomainError("replicate table has no column for " + to_string(s));
    }
    return columns[index_of(s)];
  }
};

inline constexpr std::size_t kMinReplicates = 100;

/// Simulates B replicates of every statistic in `mask` on shared samples.
inline ReplicateTable simulate_replicates(StatisticMask mask, std::size_t n, std::size_t B,
                                          std::uint64_t seed, const NullModel& null = {},
                                          const EngineOptions& options = {}) {
  if (n == 0) throw EmptySampleError("sample size must be at least 1");
  if (B < kMinReplicates) throw DomainError("B must be at least 100");
  if (mask.none()) throw DomainError("no statistic requested");
  if (null.is_discretized() && null.profile.n != n) {
    throw DomainError("truncation profile describes " + std::to_string(null.profile.n) +
                      " observations, not " + std::to_string(n));
  }
  const std::size_t bytes = B * mask.count() * sizeof(double);
  if (B > options.memory_ceiling_bytes / sizeof(double) || bytes > options.memory_ceiling_bytes) {
    throw BudgetError("replicate storage of " + std::to_string(bytes) +
                      " bytes exceeds the memory ceiling");
  }

  ReplicateTable table;
  table.n = n;
  table.B = B;
  table.seed = seed;
  table.null = null;
  table.mask = mask;
  for (std::size_t i = 0; i < kSampleStatisticCount; ++i) {
    if (mask.test(i)) table.columns[i].assign(B, 0.0);
  }

  const unsigned workers = detail::resolve_workers(options.workers);
  detail::parallel_chunks(B, workers, [&](std::size_t begin, std::size_t end, unsigned) {
    StatisticEvaluator eval(mask);
    std::vector<double> sample(n);
    std::vector<DigitCount> digits;
    for (std::size_t b = begin; b < end; ++b) {
      draw_null_sample(seed, b, null, sample, digits);
      const auto values = eval(sample);
      for (std::size_t i = 0; i < kSampleStatisticCount; ++i) {
        if (mask.test(i)) table.columns[i][b] = values[i];
      }
    }
  });
  return table;
}

/// Sorted Monte Carlo replicates of one statistic.
struct NullDistribution {
  Statistic statistic = Statistic::q1;
  std::vector<double> replicates;  // ascending
  std::size_t n = 0;
  NullModel null;
  std::uint64_t seed = 0;

  std::size_t B() const { return replicates.size(); }

  static NullDistribution from_table(const ReplicateTable& table, Statistic s) {
    NullDistribution nd;
    nd.statistic = s;
    nd.replicates = table.column(s);
    std::sort(nd.replicates.begin(), nd.replicates.end());
    nd.n = table.n;
    nd.null = table.null;
    nd.seed = table.seed;
    return nd;
  }
};

inline NullDistribution simulate_null(Statistic s, std::size_t n, std::size_t B,
                                      std::uint64_t seed, const EngineOptions& options = {}) {
  if (is_combined(s)) throw DomainError("use combined_null for " + to_string(s));
  StatisticMask mask;
  mask.set(index_of(s));
  return NullDistribution::from_table(simulate_replicates(mask, n, B, seed, {}, options), s);
}

/// Null under a truncated or rounded Benford model matching `profile`.
inline NullDistribution simulate_null_discretized(Statistic s, const TruncationProfile& profile,
                                                  DiscretizeMode mode, std::size_t B,
                                                  std::uint64_t seed,
                                                  const EngineOptions& options = {}) {
  if (is_combined(s)) throw DomainError("use combined_null for " + to_string(s));
  if (profile.n == 0) throw EmptySampleError("profile describes an empty sample");
  StatisticMask mask;
  mask.set(index_of(s));
  return NullDistribution::from_table(
      simulate_replicates(mask, profile.n, B, seed, NullModel::discretized(profile, mode),
                          options),
      s);
}

/// Monte Carlo p-value 1 - F(t): fraction of replicates strictly above t.
inline double p_value(const NullDistribution& nd, double t) {
  if (nd.replicates.empty()) throw DomainError("empty null distribution");
  const auto above = nd.replicates.end() -
                     std::upper_bound(nd.replicates.begin(), nd.replicates.end(), t);
  return static_cast<double>(above) / static_cast<double>(nd.B());
}

/// (1 + #{replicates >= t}) / (B + 1); never zero.
inline double p_value_plus_one(std::span<const double> sorted, double t) {
  const auto at_least =
      sorted.end() - std::lower_bound(sorted.begin(), sorted.end(), t);
  return (1.0 + static_cast<double>(at_least)) / (static_cast<double>(sorted.size()) + 1.0);
}

inline double p_value_plus_one(const NullDistribution& nd, double t) {
  return p_value_plus_one(std::span<const double>(nd.replicates), t);
}

namespace detail {

// ceil(x) that ignores representation noise such as 0.99 * 1e5 = 99000.00000000001.
inline std::size_t ceil_rank(double x) {
  return static_cast<std::size_t>(std::ceil(x - 1e-9 * std::max(1.0, std::fabs(x))));
}

inline std::size_t floor_rank(double x) {
  return static_cast<std::size_t>(std::floor(x + 1e-9 * std::max(1.0, std::fabs(x))));
}

}  // namespace detail

/// Upper-tail critical value at size gamma: the order statistic of rank
/// ceil((1 - gamma) B).
inline double quantile(const NullDistribution& nd, double gamma) {
  if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
  if (nd.replicates.empty()) throw DomainError("empty null distribution");
  const std::size_t rank = std::clamp<std::size_t>(
      detail::ceil_rank((1.0 - gamma) * static_cast<double>(nd.B())), 1, nd.B());
  return nd.replicates[rank - 1];
}

/// Min-p combination of a fractional-significand statistic (KS2 or KU2) with
/// Q_Delta. Component p-values come from the pooled replicates of each
/// component; small G rejects.
class CombinedNull {
 public:
  /// `component` and `qdelta` are replicate-order values from the same
  /// samples. When `g_pool_*` is given, the G replicates are evaluated on
  /// that independent pool instead (marginals still come from the first).
  static CombinedNull build(Statistic combined, std::span<const double> component,
                            std::span<const double> qdelta, std::uint64_t seed,
                            std::span<const double> g_pool_component = {},
                            std::span<const double> g_pool_qdelta = {}) {
    if (component.size() != qdelta.size() || component.empty()) {
      throw DomainError("combined null needs two equal, non-empty replicate sets");
    }
    if (g_pool_component.size() != g_pool_qdelta.size()) {
      throw DomainError("independent pool components differ in size");
    }
    CombinedNull c;
    c.statistic_ = combined;
    c.seed_ = seed;
    c.sorted_component_.assign(component.begin(), component.end());
    c.sorted_qdelta_.assign(qdelta.begin(), qdelta.end());
    std::sort(c.sorted_component_.begin(), c.sorted_component_.end());
    std::sort(c.sorted_qdelta_.begin(), c.sorted_qdelta_.end());
    const bool independent = !g_pool_component.empty();
    const auto pool_a = independent ? g_pool_component : component;
    const auto pool_b = independent ? g_pool_qdelta : qdelta;
    c.values_.reserve(pool_a.size());
    c.g_.reserve(pool_a.size());
    for (std::size_t b = 0; b < pool_a.size(); ++b) {
      c.values_.push_back({pool_a[b], pool_b[b]});
      c.g_.push_back(c.combine(pool_a[b], pool_b[b]));
    }
    std::sort(c.g_.begin(), c.g_.end());
    return c;
  }

  static CombinedNull from_table(const ReplicateTable& table, Statistic combined) {
    return build(combined, table.column(combined_component(combined)),
                 table.column(Statistic::q_delta), table.seed);
  }

  Statistic statistic() const { return statistic_; }
  std::array<Statistic, 2> components() const {
    return {combined_component(statistic_), Statistic::q_delta};
  }
  std::size_t B() const { return g_.size(); }
  std::uint64_t seed() const { return seed_; }
  const std::vector<double>& g_replicates() const { return g_; }
  const std::vector<std::array<double, 2>>& component_values() const { return values_; }

  double component_p(std::size_t which, double t) const {
    return p_value_plus_one(which == 0 ? sorted_component_ : sorted_qdelta_, t);
  }

  /// Observed G for component values (t_component, t_qdelta).
  double combine(double t_component, double t_qdelta) const {
    return std::min(component_p(0, t_component), component_p(1, t_qdelta));
  }

  /// F_G(g) = #{G_b <= g} / B.
  double p_value(double g) const {
    const auto at_most = std::upper_bound(g_.begin(), g_.end(), g) - g_.begin();
    return static_cast<double>(at_most) / static_cast<double>(B());
  }

  /// (1 + #{G_b <= g}) / (B + 1).
  double p_value_plus_one(double g) const {
    const auto at_most = std::upper_bound(g_.begin(), g_.end(), g) - g_.begin();
    return (1.0 + static_cast<double>(at_most)) / (static_cast<double>(B()) + 1.0);
  }

  /// Lower-tail critical value: the floor(gamma B)-th smallest G.
  double critical_value(double gamma) const {
    if (!(gamma > 0.0 && gamma < 1.0)) throw DomainError("gamma must lie in (0, 1)");
    const std::size_t rank = std::clamp<std::size_t>(
        detail::floor_rank(gamma * static_cast<double>(B())), 1, B());
    return g_[rank - 1];
  }

 private:
  static double p_value_plus_one(const std::vector<double>& sorted, double t) {
    return benford::p_value_plus_one(std::span<const double>(sorted), t);
  }

  Statistic statistic_ = Statistic::g_ks;
  std::uint64_t seed_ = 0;
  std::vector<double> sorted_component_;
  std::vector<double> sorted_qdelta_;
  std::vector<std::array<double, 2>> values_;
  std::vector<double> g_;
};

inline CombinedNull combined_null(Statistic combined, std::size_t n, std::size_t B,
                                  std::uint64_t seed, const NullModel& null = {},
                                  const EngineOptions& options = {},
                                  bool independent_pool = false) {
  const auto comp = combined_component(combined);
  StatisticMask mask;
  mask.set(index_of(comp));
  mask.set(index_of(Statistic::q_delta));
  const auto table = simulate_replicates(mask, n, B, seed, null, options);
  if (!independent_pool) return CombinedNull::from_table(table, combined);
  const auto second = simulate_replicates(mask, n, B, derive_seed(seed, 0x6b00c0de), null,
                                          options);
  return CombinedNull::build(combined, table.column(comp), table.column(Statistic::q_delta),
                             seed, second.column(comp), second.column(Statistic::q_delta));
}

/// Decision rule shared by every test: reject when p <= gamma. The slack
/// absorbs representation error in count / B.
inline bool rejects(double p, double gamma) { return p <= gamma * (1.0 + 1e-12); }

/// Asymptotic upper-tail p-value: chi-square with 8 (Q1), 9 (Q2), 89 (Q12)
/// or 1 (Q_Delta) degrees of freedom. KS/KU/G have none.
inline std::optional<double> asymptotic_p_value(Statistic s, double value) {
  switch (s) {
    case Statistic::q1: return special::chi2_sf(value, 8);
    case Statistic::q2: return special::chi2_sf(value, 9);
    case Statistic::q12: return special::chi2_sf(value, 89);
    case Statistic::q_delta: return special::chi2_sf(value, 1);
    default: return std::nullopt;
  }
}

/// Sorted replicates of `target` restricted to replicates where `condition`
/// lies below `threshold` (tail diagnostic for Q_Delta given Q1).
inline std::vector<double> conditional_replicates(const ReplicateTable& table, Statistic target,
                                                  Statistic condition, double threshold) {
  const auto& t = table.column(target);
  const auto& c = table.column(condition);
  std::vector<double> out;
  for (std::size_t b = 0; b < t.size(); ++b) {
    if (c[b] < threshold) out.push_back(t[b]);
  }
  std::sort(out.begin(), out.end());
  return out;
}

/// Adds uniform noise within the digit cell of every discretized record:
/// [0, cell) for truncated data, [-cell/2, cell/2) for rounded data.
inline std::vector<double> jitter_sample(std::span<const SignificandRecord> sample,
                                         DiscretizeMode mode, StreamKey key) {
  RandomStream rng(key, Lane::jitter);
  std::vector<double> out;
  out.reserve(sample.size());
  for (const auto& r : sample) {
    if (r.digits.is_full()) {
      out.push_back(r.significand);
    } else {
      out.push_back(detail::jitter_value(r.significand, r.digits.value(), mode, rng));
    }
  }
  return out;
}

}  // namespace benford
