#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>

#include "cli.hpp"

namespace benford::cli {

namespace {

using nlohmann::json;

DiscretizeMode mode_from_string(const std::string& s) {
  if (s == "truncate") return DiscretizeMode::truncate;
  if (s == "round") return DiscretizeMode::round;
  throw UsageError("discretize mode must be truncate or round, not '" + s + "'");
}

Discretization discretization_from_json(const json& j) {
  Discretization d;
  d.k = j.at("k").get<int>();
  d.mode = mode_from_string(j.value("mode", std::string("truncate")));
  const auto null = j.value("null", std::string("plain"));
  if (null != "plain" && null != "matched") {
    throw UsageError("discretize.null must be plain or matched");
  }
  d.matched_null = null == "matched";
  if (d.k < 1 || d.k > 15) throw UsageError("discretize.k must lie in 1..15");
  return d;
}

json discretization_to_json(const Discretization& d) {
  return {{"k", d.k}, {"mode", to_string(d.mode)}, {"null", d.matched_null ? "matched" : "plain"}};
}

std::string discretization_label(const std::optional<Discretization>& d) {
  if (!d) return "";
  return to_string(d->mode) + ":" + std::to_string(d->k) + ":" +
         (d->matched_null ? "matched" : "plain");
}

std::string model_kind_name(DataModel::Kind k) {
  switch (k) {
    case DataModel::Kind::benford: return "benford";
    case DataModel::Kind::manipulated: return "manipulated";
    case DataModel::Kind::mixture: return "mixture";
  }
  return "?";
}

// Rejection rule for one statistic against one null table.
struct Criterion {
  Statistic stat;
  double gamma = 0.01;
  std::optional<NullDistribution> null;
  std::optional<CombinedNull> combined;

  bool rejects(const StatisticValues& v) const {
    if (combined) {
      const double g = combined->combine(v[index_of(combined_component(stat))],
                                         v[index_of(Statistic::q_delta)]);
      return benford::rejects(combined->p_value(g), gamma);
    }
    return benford::rejects(p_value(*null, v[index_of(stat)]), gamma);
  }
};

}  // namespace

PowerStudyConfig PowerStudyConfig::from_json(const json& j) {
  PowerStudyConfig c;
  try {
    c.n = j.value("n", c.n);
    c.runs = j.value("runs", c.runs);
    c.gamma = j.value("gamma", c.gamma);
    c.B = static_cast<std::size_t>(j.value("B", static_cast<double>(c.B)));
    c.seed = j.at("seed").get<std::uint64_t>();
    c.workers = j.value("workers", 0u);
    c.cache_dir = j.value("cache_dir", std::string());
    for (const auto& s : j.at("statistics")) c.stats.push_back(statistic_from_string(s.get<std::string>()));
    std::optional<Discretization> fallback;
    if (j.contains("discretize")) fallback = discretization_from_json(j.at("discretize"));
    for (const auto& sj : j.at("scenarios")) {
      Scenario s;
      const auto model = sj.at("model").get<std::string>();
      if (model == "benford") {
        s.model.kind = DataModel::Kind::benford;
      } else if (model == "manipulated" || model == "mixture") {
        s.model.kind =
            model == "manipulated" ? DataModel::Kind::manipulated : DataModel::Kind::mixture;
        s.model.law.family = family_from_string(sj.at("family").get<std::string>());
        if (s.model.kind == DataModel::Kind::mixture) s.model.lambda = sj.at("lambda").get<double>();
        const auto& a = sj.at("alpha");
        if (a.is_array()) {
          for (const auto& v : a) s.alphas.push_back(v.get<double>());
        } else {
          s.alphas.push_back(a.get<double>());
        }
      } else {
        throw UsageError("unknown scenario model '" + model + "'");
      }
      if (sj.contains("discretize")) {
        s.discretize = discretization_from_json(sj.at("discretize"));
      } else {
        s.discretize = fallback;
      }
      c.scenarios.push_back(std::move(s));
    }
  } catch (const json::exception& e) {
    throw UsageError(std::string("invalid study configuration: ") + e.what());
  }
  c.validate();
  return c;
}

json PowerStudyConfig::to_json() const {
  json scen = json::array();
  for (const auto& s : scenarios) {
    json js = {{"model", model_kind_name(s.model.kind)}};
    if (s.model.kind != DataModel::Kind::benford) {
      js["family"] = to_string(s.model.law.family);
      js["alpha"] = s.alphas;
    }
    if (s.model.kind == DataModel::Kind::mixture) js["lambda"] = s.model.lambda;
    if (s.discretize) js["discretize"] = discretization_to_json(*s.discretize);
    scen.push_back(js);
  }
  json st = json::array();
  for (const auto s : stats) st.push_back(to_string(s));
  return {{"n", n},       {"runs", runs},       {"gamma", gamma},
          {"B", B},       {"seed", seed},       {"statistics", st},
          {"scenarios", scen}};
}

void PowerStudyConfig::validate() const {
  if (runs < 1) throw UsageError("runs must be at least 1");
  if (!(gamma > 0.0 && gamma < 1.0)) throw UsageError("gamma must lie in (0, 1)");
  if (n < 1) throw UsageError("n must be at least 1");
  if (B < kMinReplicates) throw UsageError("B must be at least 100");
  if (stats.empty()) throw UsageError("no statistics listed");
  if (scenarios.empty()) throw UsageError("no scenarios listed");
  for (const auto& s : scenarios) {
    if (s.model.kind != DataModel::Kind::benford) {
      if (s.alphas.empty()) throw UsageError("scenario without alpha values");
      for (const double a : s.alphas) ManipulationModel{s.model.law.family, a}.validate();
    }
    if (s.model.kind == DataModel::Kind::mixture &&
        !(s.model.lambda >= 0.0 && s.model.lambda <= 1.0)) {
      throw UsageError("lambda must lie in [0, 1]");
    }
  }
}

double StudyRow::std_error() const {
  if (!runs) return 0.0;
  const double r = rate();
  return std::sqrt(r * (1.0 - r) / static_cast<double>(runs));
}

void StudyReport::write_csv(std::ostream& out) const {
  out << "# benford-power v" << kCsvFormatVersion << "\n";
  out << "scenario,model,alpha,discretize,n,runs,gamma,B,statistic,rejection_rate,std_error\n";
  char line[256];
  for (const auto& r : rows) {
    std::snprintf(line, sizeof line, "%zu,%s,%g,%s,%zu,%zu,%g,%zu,%s,%.4f,%.4f\n", r.scenario,
                  r.model.c_str(), r.alpha, r.discretize.c_str(), config.n, r.runs, config.gamma,
                  config.B, to_string(r.statistic).c_str(), r.rate(), r.std_error());
    out << line;
  }
}

json StudyReport::to_json() const {
  json rs = json::array();
  for (const auto& r : rows) {
    rs.push_back({{"scenario", r.scenario},
                  {"model", r.model},
                  {"alpha", r.alpha},
                  {"discretize", r.discretize},
                  {"statistic", to_string(r.statistic)},
                  {"rejections", r.rejections},
                  {"runs", r.runs},
                  {"rejection_rate", r.rate()},
                  {"std_error", r.std_error()}});
  }
  return {{"format_version", kReportFormatVersion},
          {"tool_version", kToolVersion},
          {"config", config.to_json()},
          {"runtime_seconds", runtime_seconds},
          {"results", rs}};
}

StudyReport run_power_study(const PowerStudyConfig& config) {
  config.validate();
  const auto start = std::chrono::steady_clock::now();
  EngineOptions engine;
  engine.workers = config.workers;
  std::unique_ptr<NullCache> cache;
  if (!config.cache_dir.empty()) cache = std::make_unique<NullCache>(config.cache_dir);

  const StatisticMask mask = mask_of(config.stats);
  std::map<std::string, std::vector<Criterion>> criteria_by_null;
  auto criteria_for = [&](const NullModel& null) -> const std::vector<Criterion>& {
    const auto key = null.canonical();
    auto it = criteria_by_null.find(key);
    if (it != criteria_by_null.end()) return it->second;
    const auto table =
        cached_replicates(mask, config.n, config.B, config.seed, null, engine, cache.get());
    std::vector<Criterion> crit;
    for (const auto s : config.stats) {
      Criterion c{s, config.gamma};
      if (is_combined(s)) {
        c.combined = CombinedNull::from_table(table, s);
      } else {
        c.null = NullDistribution::from_table(table, s);
      }
      crit.push_back(std::move(c));
    }
    return criteria_by_null.emplace(key, std::move(crit)).first->second;
  };

  StudyReport report;
  report.config = config;
  const unsigned workers = detail::resolve_workers(config.workers);
  for (std::size_t si = 0; si < config.scenarios.size(); ++si) {
    const auto& sc = config.scenarios[si];
    NullModel null;
    if (sc.discretize && sc.discretize->matched_null) {
      const int K = std::max(kDefaultMaxDigits, sc.discretize->k);
      null = NullModel::discretized(TruncationProfile::uniform(sc.discretize->k, config.n, K),
                                    sc.discretize->mode);
    }
    const auto& criteria = criteria_for(null);
    const std::vector<double> alphas =
        sc.model.kind == DataModel::Kind::benford ? std::vector<double>{0.0} : sc.alphas;
    for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
      DataModel model = sc.model;
      model.law.alpha = alphas[ai];
      // Data streams never share a key with the null replicates.
      const std::uint64_t data_seed = derive_seed(derive_seed(config.seed, 0xda7a0000 + si), ai);
      std::vector<std::vector<std::size_t>> hits(workers,
                                                 std::vector<std::size_t>(criteria.size(), 0));
      detail::parallel_chunks(config.runs, workers,
                              [&](std::size_t begin, std::size_t end, unsigned w) {
                                StatisticEvaluator eval(mask);
                                for (std::size_t r = begin; r < end; ++r) {
                                  auto x = model.sample(config.n, StreamKey{data_seed, r});
                                  if (sc.discretize) {
                                    for (auto& v : x) {
                                      v = discretize(v, sc.discretize->k, sc.discretize->mode);
                                    }
                                  }
                                  const auto values = eval(x);
                                  for (std::size_t c = 0; c < criteria.size(); ++c) {
                                    if (criteria[c].rejects(values)) ++hits[w][c];
                                  }
                                }
                              });
      for (std::size_t c = 0; c < criteria.size(); ++c) {
        StudyRow row;
        row.scenario = si;
        row.model = model.describe();
        row.alpha = alphas[ai];
        row.discretize = discretization_label(sc.discretize);
        row.statistic = criteria[c].stat;
        row.runs = config.runs;
        for (const auto& h : hits) row.rejections += h[c];
        report.rows.push_back(std::move(row));
      }
    }
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

int cmd_power(const PowerArgs& args, std::ostream& out) {
  std::ifstream in(args.config_path);
  if (!in) throw ParseError("cannot open '" + args.config_path + "'");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("invalid JSON in study configuration: ") + e.what());
  }
  auto config = PowerStudyConfig::from_json(j);
  if (args.full_scale) {
    config.runs = 5000;
    config.B = 1000000;
  }
  if (args.workers) config.workers = *args.workers;
  const auto report = run_power_study(config);
  if (args.csv_path.empty() || args.csv_path == "-") {
    report.write_csv(out);
  } else {
    std::ofstream f(args.csv_path);
    if (!f) throw Error("cannot write '" + args.csv_path + "'");
    report.write_csv(f);
  }
  if (!args.json_path.empty()) {
    std::ofstream f(args.json_path);
    if (!f) throw Error("cannot write '" + args.json_path + "'");
    f << report.to_json().dump(2) << "\n";
  }
  return kOk;
}

}  // namespace benford::cli
