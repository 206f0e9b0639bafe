// Acceptance suite. Every criterion prints its sub-checks followed by one
// summary line of the form "ACCEPT C<k> <name>: PASS|FAIL|NOT RUN".

#include <gtest/gtest.h>

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "cli.hpp"

using namespace benford;
namespace fs = std::filesystem;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class Criterion {
 public:
  Criterion(int id, std::string name) : id_(id), name_(std::move(name)) {}

  bool check(bool ok, const char* fmt, ...) __attribute__((format(printf, 3, 4))) {
    char buf[512];
    va_list ap;
    va_start(ap, fmt);
    std::vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    std::printf("  C%d %-4s %s\n", id_, ok ? "ok" : "FAIL", buf);
    pass_ = pass_ && ok;
    return ok;
  }

  bool finish() const {
    std::printf("ACCEPT C%d %s: %s\n", id_, name_.c_str(), pass_ ? "PASS" : "FAIL");
    std::fflush(stdout);
    return pass_;
  }

  void not_run(const char* why) const {
    std::printf("ACCEPT C%d %s: NOT RUN (%s)\n", id_, name_.c_str(), why);
    std::fflush(stdout);
  }

 private:
  int id_;
  std::string name_;
  bool pass_ = true;
};

template <class F>
double integrate(F f, double a, double b) {
  return boost::math::quadrature::gauss_kronrod<double, 31>::integrate(f, a, b, 12, 1e-13);
}

// Standard error of a sorted-sample order statistic at 0-based rank r,
// from the spread of ranks r +/- sqrt(B p (1 - p)).
double order_se(const std::vector<double>& sorted, std::size_t r, double p) {
  const auto B = static_cast<double>(sorted.size());
  const auto k = static_cast<std::size_t>(std::ceil(std::sqrt(B * p * (1 - p))));
  const std::size_t lo = r >= k ? r - k : 0;
  const std::size_t hi = std::min(r + k, sorted.size() - 1);
  return 0.5 * (sorted[hi] - sorted[lo]);
}

cli::StudyReport study(const std::string& config_json) {
  return cli::run_power_study(cli::PowerStudyConfig::from_json(nlohmann::json::parse(config_json)));
}

const cli::StudyRow* find_row(const cli::StudyReport& r, std::size_t scenario, double alpha,
                              Statistic s) {
  for (const auto& row : r.rows) {
    if (row.scenario == scenario && row.alpha == alpha && row.statistic == s) return &row;
  }
  return nullptr;
}

}  // namespace

TEST(Acceptance, C1_Constants) {
  Criterion c(1, "constants");
  const double tol = 5e-6;
  auto near = [&](const char* what, double got, double want) {
    c.check(std::fabs(got - want) <= tol, "%-22s %.8f vs %.5f (|diff| %.1e, tol %.0e)", what, got,
            want, std::fabs(got - want), tol);
  };
  near("digit_frac_correlation", digit_frac_correlation(), 0.05636);
  const double ed = mixed_moment(1, 0), ed2 = mixed_moment(2, 0);
  const double ef = mixed_moment(0, 1), ef2 = mixed_moment(0, 2);
  near("E[D]", ed, 3.44024);
  near("E[D^2]", ed2, 17.8917);
  near("var[D]", ed2 - ed * ed, 6.05651);
  near("E[frac]", ef, 0.46841);
  near("E[frac^2]", ef2, 0.30281);
  near("var[frac]", ef2 - ef * ef, 0.08340);
  near("E[D frac]", mixed_moment(1, 1), 1.65151);
  EXPECT_TRUE(c.finish());
}

TEST(Acceptance, C2_CanonicalStructure) {
  Criterion c(2, "canonical structure");
  const std::array<double, 8> table = {0.9995, 0.9994, 0.9992, 0.9990,
                                       0.9985, 0.9977, 0.9959, 0.9906};
  const auto rho = canonical_correlations();
  for (int j = 0; j < 8; ++j) {
    const double d = std::fabs(rho(j) - table[j]);
    c.check(d <= 5e-5, "rho_%d %.7f vs %.4f (|diff| %.1e, tol 5e-5)", j + 1, rho(j), table[j], d);
  }
  const double cv = canonical_structure().cor_V;
  c.check(std::fabs(cv - 0.9381) <= 5e-4, "cor_V %.6f vs 0.9381 (tol 5e-4)", cv);
  EXPECT_TRUE(c.finish());
}

TEST(Acceptance, C3_NullQuantiles) {
  Criterion c(3, "null quantiles");
  struct Row {
    std::size_t n;
    double gamma;
    std::array<double, 5> q;  // KS2, KU2, QDELTA, G_KS, G_KU
  };
  const std::vector<Row> table = {
      {200, 0.10, {0.086, 0.113, 2.768, 0.064, 0.056}},
      {500, 0.10, {0.054, 0.072, 2.771, 0.064, 0.056}},
      {1000, 0.10, {0.038, 0.051, 2.766, 0.064, 0.056}},
      {200, 0.05, {0.095, 0.122, 3.893, 0.031, 0.027}},
      {500, 0.05, {0.060, 0.078, 3.900, 0.031, 0.027}},
      {1000, 0.05, {0.043, 0.055, 3.883, 0.031, 0.027}},
      {200, 0.01, {0.114, 0.140, 6.683, 0.006, 0.005}},
      {500, 0.01, {0.072, 0.089, 6.689, 0.006, 0.005}},
      {1000, 0.01, {0.051, 0.063, 6.681, 0.006, 0.005}},
  };
  const std::array<Statistic, 5> stats = {Statistic::ks2, Statistic::ku2, Statistic::q_delta,
                                          Statistic::g_ks, Statistic::g_ku};
  const std::size_t B = 100000;
  // Reference values rest on 10^6 replicates and are printed to 3 decimals.
  const double ref_ratio = std::sqrt(1e5 / 1e6);
  const double half_unit = 5e-4;
  for (const std::size_t n : {200u, 500u, 1000u}) {
    const auto tab = simulate_replicates(mask_of(stats), n, B, 31337 + n);
    std::array<NullDistribution, 3> single = {NullDistribution::from_table(tab, stats[0]),
                                              NullDistribution::from_table(tab, stats[1]),
                                              NullDistribution::from_table(tab, stats[2])};
    std::array<CombinedNull, 2> comb = {CombinedNull::from_table(tab, stats[3]),
                                        CombinedNull::from_table(tab, stats[4])};
    for (const auto& row : table) {
      if (row.n != n) continue;
      for (std::size_t i = 0; i < stats.size(); ++i) {
        double q, se;
        if (i < 3) {
          q = quantile(single[i], row.gamma);
          const auto r = static_cast<std::size_t>(std::ceil((1 - row.gamma) * B - 1e-9)) - 1;
          se = order_se(single[i].replicates, r, row.gamma);
        } else {
          const auto& cn = comb[i - 3];
          q = cn.critical_value(row.gamma);
          const auto r = static_cast<std::size_t>(std::floor(row.gamma * B + 1e-9)) - 1;
          se = order_se(cn.g_replicates(), r, row.gamma);
        }
        const double tol = 3 * se * std::sqrt(1 + ref_ratio * ref_ratio) + half_unit;
        const double d = std::fabs(q - row.q[i]);
        c.check(d <= tol, "%-6s n=%-4zu gamma=%.2f  %.5f vs %.3f (|diff| %.5f, tol %.5f)",
                to_string(stats[i]).c_str(), n, row.gamma, q, row.q[i], d, tol);
      }
    }
  }
  EXPECT_TRUE(c.finish());
}

TEST(Acceptance, C4_JointMoments) {
  Criterion c(4, "joint moments of (Q1, Q2)");
  struct Ref {
    std::size_t n;
    double m1, m2, v1, v2, cor;
  };
  for (const Ref ref : {Ref{30, 7.984, 8.979, 16.538, 18.355, 0.939},
                        Ref{100, 8.011, 9.019, 16.466, 18.190, 0.938}}) {
    const std::array<Statistic, 2> st = {Statistic::q1, Statistic::q2};
    const auto tab = simulate_replicates(mask_of(st), ref.n, 100000, 4040 + ref.n);
    const auto& a = tab.column(Statistic::q1);
    const auto& b = tab.column(Statistic::q2);
    const double N = static_cast<double>(a.size());
    double m1 = 0, m2 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      m1 += a[i];
      m2 += b[i];
    }
    m1 /= N;
    m2 /= N;
    double s11 = 0, s22 = 0, s12 = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      s11 += (a[i] - m1) * (a[i] - m1);
      s22 += (b[i] - m2) * (b[i] - m2);
      s12 += (a[i] - m1) * (b[i] - m2);
    }
    const double v1 = s11 / (N - 1), v2 = s22 / (N - 1), cor = s12 / std::sqrt(s11 * s22);
    c.check(std::fabs(m1 - ref.m1) <= 0.1, "n=%-3zu E[Q1]   %.3f vs %.3f (tol 0.1)", ref.n, m1, ref.m1);
    c.check(std::fabs(m2 - ref.m2) <= 0.1, "n=%-3zu E[Q2]   %.3f vs %.3f (tol 0.1)", ref.n, m2, ref.m2);
    c.check(std::fabs(v1 - ref.v1) <= 0.6, "n=%-3zu var[Q1] %.3f vs %.3f (tol 0.6)", ref.n, v1, ref.v1);
    c.check(std::fabs(v2 - ref.v2) <= 0.6, "n=%-3zu var[Q2] %.3f vs %.3f (tol 0.6)", ref.n, v2, ref.v2);
    c.check(std::fabs(cor - ref.cor) <= 0.005, "n=%-3zu cor     %.4f vs %.3f (tol 0.005)", ref.n,
            cor, ref.cor);
  }
  EXPECT_TRUE(c.finish());
}

namespace {

// All sixteen manipulated-Benford scenarios at n = 500, 1000 runs, against a
// shared plain null of 10^5 replicates. Shared by C5 and C8.
const cli::StudyReport& table3_study() {
  static const cli::StudyReport report = study(R"({
    "n": 500, "runs": 1000, "gamma": 0.01, "B": 100000, "seed": 500500,
    "statistics": ["Q1", "KS2", "QDELTA", "G_KS"],
    "scenarios": [
      {"model": "manipulated", "family": "lognormal", "alpha": [0.3, 0.4, 0.5, 0.6]},
      {"model": "manipulated", "family": "weibull", "alpha": [2.2, 2.6, 3.0, 3.4]},
      {"model": "manipulated", "family": "uniform", "alpha": [5, 20, 40, 60]},
      {"model": "manipulated", "family": "gb", "alpha": [-1.0, 1.0, 2.0, 3.0]}
    ]})");
  return report;
}

}  // namespace

TEST(Acceptance, C5_PowerSpotChecks) {
  Criterion c(5, "power spot checks");
  const auto& r = table3_study();
  struct Spot {
    std::size_t scenario;
    double alpha;
    Statistic stat;
    double want;
    const char* label;
  };
  const std::vector<Spot> spots = {
      {0, 0.3, Statistic::ks2, 0.997, "Lognormal(0.3)"},
      {0, 0.3, Statistic::q_delta, 0.927, "Lognormal(0.3)"},
      {0, 0.3, Statistic::q1, 0.011, "Lognormal(0.3)"},
      {1, 3.4, Statistic::ks2, 0.997, "Weibull(3.4)"},
      {2, 20, Statistic::q_delta, 0.598, "Uniform[0,20)"},
      {2, 20, Statistic::g_ks, 0.559, "Uniform[0,20)"},
      {3, 3.0, Statistic::q_delta, 0.974, "GenBenford(3)"},
  };
  for (const auto& s : spots) {
    const auto* row = find_row(r, s.scenario, s.alpha, s.stat);
    ASSERT_NE(row, nullptr);
    const double d = std::fabs(row->rate() - s.want);
    c.check(d <= 0.03, "%-15s %-6s %.3f vs %.3f (|diff| %.3f, tol 0.03)", s.label,
            to_string(s.stat).c_str(), row->rate(), s.want, d);
  }
  EXPECT_TRUE(c.finish());
}

TEST(Acceptance, C6_TruncationRobustness) {
  Criterion c(6, "truncation robustness");
  const auto r = study(R"({
    "n": 500, "runs": 1000, "gamma": 0.01, "B": 100000, "seed": 600600,
    "statistics": ["KS2", "KU2", "QDELTA", "G_KS", "G_KU"],
    "scenarios": [
      {"model": "benford", "discretize": {"k": 6, "mode": "truncate"}},
      {"model": "benford", "discretize": {"k": 5, "mode": "truncate"}},
      {"model": "benford", "discretize": {"k": 4, "mode": "truncate"}},
      {"model": "benford", "discretize": {"k": 2, "mode": "truncate"}},
      {"model": "benford", "discretize": {"k": 2, "mode": "truncate", "null": "matched"}}
    ]})");
  for (const auto& row : r.rows) {
    const double rate = row.rate();
    const auto name = to_string(row.statistic);
    const bool plain_k2 = row.scenario == 3;
    if (plain_k2) {
      if (row.statistic == Statistic::ks2 || row.statistic == Statistic::ku2) {
        c.check(rate >= 0.99, "%-16s %-6s %.3f (want >= 0.99)", row.discretize.c_str(),
                name.c_str(), rate);
      } else {
        std::printf("  C6 info %-16s %-6s %.3f\n", row.discretize.c_str(), name.c_str(), rate);
      }
      continue;
    }
    c.check(std::fabs(rate - 0.01) <= 0.01, "%-16s %-6s %.3f (want 0.01 +/- 0.01)",
            row.discretize.c_str(), name.c_str(), rate);
  }
  EXPECT_TRUE(c.finish());
}

namespace {

// Q_Delta 0.99 quantile against chi2_1 with 10^6 replicates, so that Monte
// Carlo error (about 0.018) stays well inside the 1% band.
void qdelta_chi2_checks(Criterion& c) {
  const double chi = boost::math::quantile(boost::math::chi_squared_distribution<>(1), 0.99);
  for (const std::size_t n : {100u, 500u, 1000u}) {
    const auto nd = simulate_null(Statistic::q_delta, n, 1000000, 7000 + n);
    const double q = quantile(nd, 0.01);
    c.check(std::fabs(q / chi - 1) <= 0.01, "Q_Delta q99 n=%-4zu %.4f vs chi2_1 %.4f (rel %.4f, tol 0.01)",
            n, q, chi, std::fabs(q / chi - 1));
  }
}

}  // namespace

TEST(Acceptance, C7_PropertySuite) {
  Criterion c(7, "property suite");

  const double total = integrate([](double u) { return frac_pdf(u); }, 0.0, 1.0);
  c.check(std::fabs(total - 1) <= 1e-10, "frac_pdf integral %.15f (tol 1e-10)", total);

  double worst = 0.0;
  for (int d = 1; d <= 9; ++d) {
    const double e = first_digit_pmf(d) *
                     integrate([d](double u) { return (d + u) * conditional_frac_pdf(u, d); }, 0, 1);
    worst = std::max(worst, std::fabs(e - kLog10e));
  }
  c.check(worst <= 1e-12, "sum invariance max |E[S 1(D=d)] - C| %.1e (tol 1e-12)", worst);

  boost::math::chi_squared_distribution<> c8(8), c1(1);
  double fact = 0.0;
  for (double x1 = 0.2; x1 < 40; x1 += 0.9) {
    for (const double y : {0.003, 0.1, 0.7, 2.0, 6.5, 15.0}) {
      const double want = boost::math::pdf(c8, x1) * boost::math::pdf(c1, y);
      fact = std::max(fact, std::fabs(density_T(x1, x1 + y) - want) / want);
    }
  }
  c.check(fact <= 1e-12, "density_T vs chi2_8 x chi2_1 max rel %.1e (tol 1e-12)", fact);

  const double mass = integrate(
      [](double x1) {
        return integrate(
            [x1](double w) {
              // Nodes near w = 0 can round x1 + w^2 back onto the diagonal.
              const double x2 = std::max(x1 + w * w, std::nextafter(x1, kInf));
              return density_T(x1, x2) * 2 * w;
            },
            0.0, kInf);
      },
      0.0, kInf);
  c.check(std::fabs(mass - 1) <= 1e-6, "density_T integral %.10f (tol 1e-6)", mass);

  double scale = 0.0;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const auto s = sample_manipulated(200, {Family::weibull, 2.2}, StreamKey{seed, 0});
    const double base = ku1(s);
    for (const double k : {1.7, 2.0, 3.3, 7.9}) {
      std::vector<double> t;
      for (double x : s) t.push_back(benford::significand(k * x));
      scale = std::max(scale, std::fabs(ku1(t) - base));
    }
  }
  c.check(scale <= 1e-10, "KU1 scale invariance max |diff| %.1e (tol 1e-10)", scale);

  qdelta_chi2_checks(c);

  EngineOptions one, many;
  one.workers = 1;
  many.workers = 8;
  const auto a = simulate_null(Statistic::ku2, 300, 20000, 99, one);
  const auto b = simulate_null(Statistic::ku2, 300, 20000, 99, many);
  c.check(a.replicates == b.replicates, "KU2 null bit-identical with 1 and 8 workers");
  const auto prof = TruncationProfile::uniform(3, 300);
  const auto ta = simulate_null_discretized(Statistic::ks2, prof, DiscretizeMode::truncate, 20000, 99, one);
  const auto tb = simulate_null_discretized(Statistic::ks2, prof, DiscretizeMode::truncate, 20000, 99, many);
  c.check(ta.replicates == tb.replicates, "truncated KS2 null bit-identical with 1 and 8 workers");

  EXPECT_TRUE(c.finish());
}

TEST(Acceptance, C8_FirstDigitBlindness) {
  Criterion c(8, "Q1 blind to manipulation");
  const auto& r = table3_study();
  const std::array<const char*, 4> names = {"lognormal", "weibull", "uniform", "gb"};
  std::size_t rows = 0;
  for (const auto& row : r.rows) {
    if (row.statistic != Statistic::q1) continue;
    ++rows;
    c.check(std::fabs(row.rate() - 0.01) <= 0.01, "%-9s alpha=%-4g Q1 %.3f (want 0.01 +/- 0.01)",
            names[row.scenario], row.alpha, row.rate());
  }
  c.check(rows == 16, "%zu scenarios", rows);
  EXPECT_TRUE(c.finish());
}

namespace {

struct OperatorResult {
  int code;
  nlohmann::json report;
  std::string err;
};

OperatorResult run_operator_test(const std::string& path) {
  std::vector<std::string> args = {"benford", "test", path, "--B", "100000", "--seed", "2025",
                                   "--json", "-"};
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
  OperatorResult r{code, {}, err.str()};
  if (code == 0) r.report = nlohmann::json::parse(out.str());
  return r;
}

double p_of(const nlohmann::json& report, const std::string& stat) {
  for (const auto& r : report.at("results")) {
    if (r.at("statistic") == stat) return r.at("p_value").get<double>();
  }
  throw std::runtime_error("statistic missing from report: " + stat);
}

std::optional<fs::path> operator_dir() {
  std::vector<fs::path> candidates;
  if (const char* env = std::getenv("BENFORD_OPERATOR_DATA")) candidates.emplace_back(env);
  candidates.emplace_back(fs::path(BENFORD_SOURCE_DIR) / "data");
  for (const auto& d : candidates) {
    if (fs::exists(d / "sig_A.txt") && fs::exists(d / "sig_B.txt")) return d;
  }
  return std::nullopt;
}

// Manipulated sample written with the given numbers of 1-, 2- and 3-digit
// records; the rest carry 15 decimals.
std::string write_surrogate(const fs::path& path, std::size_t n, double alpha,
                            std::array<std::size_t, 3> short_counts, std::uint64_t seed) {
  const auto s = sample_manipulated(n, {Family::lognormal, alpha}, StreamKey{seed, 0});
  std::ofstream f(path);
  f << "# surrogate operator file\n";
  std::size_t i = 0;
  char buf[64];
  for (int k = 1; k <= 3; ++k) {
    for (std::size_t j = 0; j < short_counts[k - 1]; ++j, ++i) {
      std::snprintf(buf, sizeof buf, "%.*f", k - 1, discretize(s[i], k, DiscretizeMode::truncate));
      f << buf << "\n";
    }
  }
  for (; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%.15f", s[i]);
    f << buf << "\n";
  }
  return path.string();
}

}  // namespace

TEST(Acceptance, C9_OperatorWorkflow) {
  if (const auto dir = operator_dir()) {
    Criterion c(9, "operator workflow");
    const auto a = run_operator_test((*dir / "sig_A.txt").string());
    const auto b = run_operator_test((*dir / "sig_B.txt").string());
    ASSERT_EQ(a.code, 0) << a.err;
    ASSERT_EQ(b.code, 0) << b.err;
    const double a_q1 = p_of(a.report, "Q1"), a_qd = p_of(a.report, "QDELTA");
    c.check(std::fabs(a_q1 - 0.6) <= 0.1, "sig_A Q1 p %.4f (want about 0.6)", a_q1);
    c.check(a_qd < 0.001, "sig_A QDELTA p %.5f (want < 0.001)", a_qd);
    for (const char* s : {"KS2", "KU2", "G_KS", "G_KU"}) {
      const double p = p_of(b.report, s);
      c.check(p <= 0.01, "sig_B %-6s p %.5f (want <= 0.01)", s, p);
    }
    EXPECT_TRUE(c.finish());
    return;
  }

  // Without the published files the workflow still runs end to end on
  // surrogates with the same size and digit-count profile.
  Criterion s(9, "operator workflow on surrogate files");
  const auto tmp = fs::temp_directory_path() / "benford_acceptance_operators";
  fs::create_directories(tmp);
  const auto a = run_operator_test(write_surrogate(tmp / "surrogate_A.txt", 290, 0.2, {0, 2, 5}, 11));
  const auto b = run_operator_test(write_surrogate(tmp / "surrogate_B.txt", 2298, 0.4, {9, 39, 100}, 12));
  fs::remove_all(tmp);
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  s.check(a.report.at("null_kind") == "truncated", "surrogate A null %s",
          a.report.at("null_kind").get<std::string>().c_str());
  s.check(a.report.at("profile").at("counts")[1] == 2 && a.report.at("profile").at("counts")[2] == 5,
          "surrogate A profile n2=2 n3=5");
  const double a_q1 = p_of(a.report, "Q1"), a_qd = p_of(a.report, "QDELTA");
  s.check(a_q1 > 0.01, "surrogate A Q1 p %.4f (not rejected)", a_q1);
  s.check(a_qd < 0.001, "surrogate A QDELTA p %.5f (want < 0.001)", a_qd);
  const double b_q1 = p_of(b.report, "Q1");
  s.check(b_q1 > 0.01, "surrogate B Q1 p %.4f (not rejected)", b_q1);
  for (const char* st : {"KS2", "KU2", "G_KS", "G_KU"}) {
    const double p = p_of(b.report, st);
    s.check(p <= 0.01, "surrogate B %-6s p %.5f (want <= 0.01)", st, p);
  }
  EXPECT_TRUE(s.finish());
  Criterion(9, "operator workflow").not_run(
      "sig_A.txt/sig_B.txt not found in data/ or $BENFORD_OPERATOR_DATA");
  GTEST_SKIP() << "published operator files unavailable";
}
