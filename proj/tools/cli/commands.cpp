#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <sstream>

namespace benford::cli {

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::string null_choice_name(NullChoice c) {
  switch (c) {
    case NullChoice::automatic: return "auto";
    case NullChoice::plain: return "plain";
    case NullChoice::truncated: return "truncated";
    case NullChoice::rounded: return "rounded";
  }
  return "?";
}

nlohmann::json profile_json(const TruncationProfile& p) {
  return {{"K", p.max_digits}, {"n", p.n}, {"counts", p.counts}, {"n_full", p.n_full}};
}

std::unique_ptr<NullCache> make_cache(const std::string& dir) {
  if (dir.empty()) return nullptr;
  return std::make_unique<NullCache>(dir);
}

}  // namespace

std::string file_digest(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::uint64_t h = 0xcbf29ce484222325ull;
  char buf[1 << 16];
  while (in.read(buf, sizeof buf) || in.gcount() > 0) {
    for (std::streamsize i = 0; i < in.gcount(); ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 0x100000001b3ull;
    }
  }
  return hex64(h);
}

nlohmann::json test_report_json(const TestArgs& args, const std::string& digest,
                                const TruncationProfile& profile,
                                const std::vector<TestReport>& reports) {
  nlohmann::json stats = nlohmann::json::array();
  for (const auto s : args.stats) stats.push_back(to_string(s));
  nlohmann::json results = nlohmann::json::array();
  for (const auto& r : reports) {
    results.push_back({{"statistic", to_string(r.statistic)},
                       {"value", r.value},
                       {"p_value", optional_json(r.p_value)},
                       {"p_value_plus_one", optional_json(r.p_value_plus_one)},
                       {"asymptotic_p", optional_json(r.asymptotic_p)},
                       {"critical_value", optional_json(r.critical_value)},
                       {"reject", r.reject},
                       {"warnings", r.warnings}});
  }
  const auto& o = args.options;
  return {{"format_version", kReportFormatVersion},
          {"tool_version", kToolVersion},
          {"input", {{"path", args.input}, {"digest", digest}, {"n", profile.n}}},
          {"config",
           {{"stats", stats},
            {"B", o.B},
            {"gamma", o.gamma},
            {"seed", o.seed},
            {"null", null_choice_name(o.null)},
            {"jitter", o.jitter},
            {"independent_pool", o.independent_pool}}},
          {"seed", o.seed},
          {"B", o.B},
          {"null_kind", reports.empty() ? "" : reports.front().null_kind},
          {"profile", profile_json(profile)},
          {"results", results}};
}

void print_test_text(std::ostream& out, const TestArgs& args, const TruncationProfile& profile,
                     const std::vector<TestReport>& reports) {
  out << "input: " << args.input << " (n = " << profile.n << ")\n";
  out << "significant digits:";
  for (int k = 1; k <= profile.max_digits; ++k) {
    if (profile.counts[k - 1]) out << " n" << k << "=" << profile.counts[k - 1];
  }
  out << " full=" << profile.n_full << "\n";
  if (!reports.empty()) {
    out << "null: " << reports.front().null_kind << ", B = " << args.options.B
        << ", seed = " << args.options.seed << ", gamma = " << args.options.gamma << "\n\n";
  }
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %12s %10s %10s %10s %12s  %s\n", "stat", "value",
                "exact p", "p (+1)", "asympt p", "critical", "decision");
  out << line;
  auto opt = [](const std::optional<double>& v, const char* f) {
    return v ? fmt(f, *v) : std::string("-");
  };
  for (const auto& r : reports) {
    std::snprintf(line, sizeof line, "%-8s %12.6f %10s %10s %10s %12s  %s\n",
                  to_string(r.statistic).c_str(), r.value, opt(r.p_value, "%.5f").c_str(),
                  opt(r.p_value_plus_one, "%.5f").c_str(), opt(r.asymptotic_p, "%.5f").c_str(),
                  opt(r.critical_value, "%.6f").c_str(), r.reject ? "reject" : "retain");
    out << line;
    for (const auto& w : r.warnings) out << "  note: " << w << "\n";
  }
}

int cmd_test(const TestArgs& args, std::ostream& out) {
  const auto sample = read_significand_file(args.input, args.options.max_digits);
  if (sample.empty()) throw EmptySampleError("'" + args.input + "' holds no values");
  const auto cache = make_cache(args.cache_dir);
  TestOptions options = args.options;
  options.cache = cache.get();
  TestArgs echoed = args;
  if (echoed.stats.empty()) echoed.stats.assign(kAllStatistics.begin(), kAllStatistics.end());
  if (options.B == 0) {
    // Only the chi-square statistics have a fallback.
    std::erase_if(echoed.stats, [](Statistic s) { return !asymptotic_p_value(s, 1.0); });
    if (echoed.stats.empty()) throw UsageError("no requested statistic has an asymptotic null");
  }
  const auto reports = run_test(sample, echoed.stats, options);
  const auto profile = TruncationProfile::from_sample(sample, options.max_digits);
  if (args.json_path.empty()) {
    print_test_text(out, echoed, profile, reports);
  } else {
    const auto j = test_report_json(echoed, file_digest(args.input), profile, reports);
    if (args.json_path == "-") {
      out << j.dump(2) << "\n";
    } else {
      std::ofstream f(args.json_path);
      if (!f) throw Error("cannot write '" + args.json_path + "'");
      f << j.dump(2) << "\n";
      print_test_text(out, echoed, profile, reports);
    }
  }
  return kOk;
}

int cmd_nulltab(const NulltabArgs& args, std::ostream& out) {
  if (args.stats.empty() || args.ns.empty() || args.gammas.empty()) {
    throw UsageError("nulltab needs at least one statistic, n and gamma");
  }
  const auto cache = make_cache(args.cache_dir);
  const StatisticMask mask = mask_of(args.stats);
  out << "# benford-nulltab v" << kCsvFormatVersion << "\n";
  out << "statistic,n,gamma,B,seed,quantile\n";
  for (const auto n : args.ns) {
    const auto table =
        cached_replicates(mask, n, args.B, args.seed, NullModel::plain(), args.engine, cache.get());
    for (const auto s : args.stats) {
      std::optional<NullDistribution> nd;
      std::optional<CombinedNull> cn;
      if (is_combined(s)) {
        cn = CombinedNull::from_table(table, s);
      } else {
        nd = NullDistribution::from_table(table, s);
      }
      for (const double g : args.gammas) {
        const double q = cn ? cn->critical_value(g) : quantile(*nd, g);
        char line[200];
        std::snprintf(line, sizeof line, "%s,%zu,%g,%zu,%llu,%.6f\n", to_string(s).c_str(), n, g,
                      args.B, static_cast<unsigned long long>(args.seed), q);
        out << line;
      }
    }
  }
  return kOk;
}

DataModel DataModel::parse(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  for (std::string part; std::getline(ss, part, ':');) parts.push_back(part);
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != s.size() || s.empty()) throw UsageError("bad number '" + s + "' in model");
    return v;
  };
  DataModel m;
  if (parts.size() == 1 && parts[0] == "benford") return m;
  if (parts.size() == 3 && parts[0] == "manipulated") {
    m.kind = Kind::manipulated;
    m.law = {family_from_string(parts[1]), number(parts[2])};
  } else if (parts.size() == 4 && parts[0] == "mixture") {
    m.kind = Kind::mixture;
    m.lambda = number(parts[1]);
    m.law = {family_from_string(parts[2]), number(parts[3])};
    if (!(m.lambda >= 0.0 && m.lambda <= 1.0)) throw ModelError("lambda must lie in [0, 1]");
  } else {
    throw UsageError("model must be benford, manipulated:<family>:<alpha> or "
                     "mixture:<lambda>:<family>:<alpha>");
  }
  m.law.validate();
  return m;
}

std::string DataModel::describe() const {
  switch (kind) {
    case Kind::benford: return "benford";
    case Kind::manipulated: return "manipulated:" + to_string(law.family);
    case Kind::mixture: return "mixture:" + fmt("%g", lambda) + ":" + to_string(law.family);
  }
  return "?";
}

std::vector<double> DataModel::sample(std::size_t n, StreamKey key) const {
  switch (kind) {
    case Kind::benford: return sample_benford(n, key);
    case Kind::manipulated: return sample_manipulated(n, law, key);
    case Kind::mixture: return sample_contaminated(n, lambda, law, key);
  }
  return {};
}

int cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  if (args.n == 0) throw UsageError("n must be at least 1");
  auto values = args.model.sample(args.n, StreamKey{args.seed, 0});
  char line[64];
  for (double v : values) {
    if (args.digits) {
      v = discretize(v, *args.digits, args.mode);
      std::snprintf(line, sizeof line, "%.*f\n", *args.digits - 1, v);
    } else {
      std::snprintf(line, sizeof line, "%.15f\n", v);
    }
    out << line;
  }
  return kOk;
}

std::vector<QqPoint> qq_points(const std::vector<SignificandRecord>& sample, const QqArgs& args) {
  if (sample.empty()) throw EmptySampleError();
  const std::size_t n = sample.size();
  const auto null = resolve_null(sample, args.null, false);
  const std::size_t reps = std::max<std::size_t>(1, (args.B + n - 1) / n);
  std::vector<double> pool;
  pool.reserve(reps * n);
  std::vector<double> buf(n);
  std::vector<DigitCount> scratch;
  for (std::size_t b = 0; b < reps; ++b) {
    draw_null_sample(args.seed, b, null, buf, scratch);
    for (const double s : buf) pool.push_back(s - std::floor(s));
  }
  std::sort(pool.begin(), pool.end());
  std::vector<double> obs;
  obs.reserve(n);
  for (const auto& r : sample) obs.push_back(r.frac);
  std::sort(obs.begin(), obs.end());
  std::vector<QqPoint> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double p = (static_cast<double>(i) + 0.5) / static_cast<double>(n);
    const auto idx = std::min(pool.size() - 1,
                              static_cast<std::size_t>(p * static_cast<double>(pool.size())));
    out.push_back({p, obs[i], pool[idx]});
  }
  return out;
}

int cmd_qq(const QqArgs& args, std::ostream& out) {
  const auto sample = read_significand_file(args.input);
  if (sample.empty()) throw EmptySampleError("'" + args.input + "' holds no values");
  const auto pts = qq_points(sample, args);
  out << "# benford-qq v" << kCsvFormatVersion << "\n";
  out << "i,p,observed,null\n";
  char line[128];
  for (std::size_t i = 0; i < pts.size(); ++i) {
    std::snprintf(line, sizeof line, "%zu,%.6f,%.8f,%.8f\n", i + 1, pts[i].p, pts[i].observed,
                  pts[i].null_quantile);
    out << line;
  }
  return kOk;
}

int cmd_density(const DensityArgs& args, std::ostream& out) {
  if (!(args.x1_max > 0.0) || !(args.x2_max > 0.0) || args.steps == 0) {
    throw UsageError("density grid needs positive bounds and steps");
  }
  out << "# benford-density v" << kCsvFormatVersion << "\n";
  out << "x1,x2,density\n";
  char line[128];
  for (std::size_t i = 1; i <= args.steps; ++i) {
    const double x1 = args.x1_max * static_cast<double>(i) / static_cast<double>(args.steps);
    for (std::size_t j = 1; j <= args.steps; ++j) {
      const double x2 = args.x2_max * static_cast<double>(j) / static_cast<double>(args.steps);
      if (!(x2 > x1)) continue;
      std::snprintf(line, sizeof line, "%.6f,%.6f,%.10e\n", x1, x2, density_T(x1, x2));
      out << line;
    }
  }
  return kOk;
}

}  // namespace benford::cli
