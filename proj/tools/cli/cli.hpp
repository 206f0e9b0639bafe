#pragma once

// Command implementations behind the `benford` executable. Each command
// writes its output to streams so it can be exercised without a process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "benford/benford.hpp"

namespace benford::cli {

inline constexpr const char* kToolVersion = "1.0.0";
inline constexpr int kReportFormatVersion = 1;
inline constexpr int kCsvFormatVersion = 1;

enum ExitCode : int { kOk = 0, kUsage = 1, kDataError = 2, kInternal = 3 };

/// Thrown for bad flag combinations or configuration files.
class UsageError : public Error {
 public:
  using Error::Error;
};

/// FNV-1a 64 of a file's bytes, as 16 hex digits.
std::string file_digest(const std::string& path);

struct TestArgs {
  std::string input;
  std::vector<Statistic> stats;
  TestOptions options;
  std::string cache_dir;
  std::string json_path;  // "-" writes JSON to the output stream instead of text
};

nlohmann::json test_report_json(const TestArgs& args, const std::string& digest,
                                const TruncationProfile& profile,
                                const std::vector<TestReport>& reports);
void print_test_text(std::ostream& out, const TestArgs& args, const TruncationProfile& profile,
                     const std::vector<TestReport>& reports);
int cmd_test(const TestArgs& args, std::ostream& out);

struct NulltabArgs {
  std::vector<Statistic> stats;
  std::vector<std::size_t> ns;
  std::vector<double> gammas;
  std::size_t B = 100000;
  std::uint64_t seed = 0;
  std::string cache_dir;
  EngineOptions engine;
};

/// CSV: statistic,n,gamma,B,seed,quantile (combined statistics report the
/// lower-tail critical value of G).
int cmd_nulltab(const NulltabArgs& args, std::ostream& out);

/// Generating model for simulated data, parsed from
///   benford | manipulated:<family>:<alpha> | mixture:<lambda>:<family>:<alpha>
struct DataModel {
  enum class Kind { benford, manipulated, mixture } kind = Kind::benford;
  ManipulationModel law;
  double lambda = 0.0;

  static DataModel parse(const std::string& text);
  std::string describe() const;
  std::vector<double> sample(std::size_t n, StreamKey key) const;
};

struct SimulateArgs {
  DataModel model;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  std::optional<int> digits;  // discretize to k digits
  DiscretizeMode mode = DiscretizeMode::truncate;
};

/// One value per line with 15 decimals (parsed back as full-precision).
int cmd_simulate(const SimulateArgs& args, std::ostream& out);

struct QqArgs {
  std::string input;
  std::size_t B = 100000;
  std::uint64_t seed = 0;
  NullChoice null = NullChoice::automatic;
  EngineOptions engine;
};

struct QqPoint {
  double p;
  double observed;
  double null_quantile;
};

std::vector<QqPoint> qq_points(const std::vector<SignificandRecord>& sample, const QqArgs& args);
int cmd_qq(const QqArgs& args, std::ostream& out);

struct DensityArgs {
  double x1_max = 20.0;
  double x2_max = 25.0;
  std::size_t steps = 50;
};

/// CSV grid x1,x2,density of the limit pair T over 0 < x1 < x2.
int cmd_density(const DensityArgs& args, std::ostream& out);

// Power and size studies.

struct Discretization {
  int k = 0;
  DiscretizeMode mode = DiscretizeMode::truncate;
  bool matched_null = false;  // test against the discretized null instead of the plain one
};

struct Scenario {
  DataModel model;
  std::vector<double> alphas;  // empty for benford
  std::optional<Discretization> discretize;
};

struct PowerStudyConfig {
  std::vector<Scenario> scenarios;
  std::size_t n = 500;
  std::size_t runs = 1000;
  double gamma = 0.01;
  std::size_t B = 100000;
  std::uint64_t seed = 0;
  std::vector<Statistic> stats;
  unsigned workers = 0;
  std::string cache_dir;

  static PowerStudyConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  void validate() const;
};

struct StudyRow {
  std::size_t scenario = 0;
  std::string model;
  double alpha = 0.0;
  std::string discretize;
  Statistic statistic = Statistic::q1;
  std::size_t rejections = 0;
  std::size_t runs = 0;

  double rate() const { return runs ? static_cast<double>(rejections) / runs : 0.0; }
  double std_error() const;
};

struct StudyReport {
  PowerStudyConfig config;
  std::vector<StudyRow> rows;
  double runtime_seconds = 0.0;

  void write_csv(std::ostream& out) const;
  nlohmann::json to_json() const;
};

StudyReport run_power_study(const PowerStudyConfig& config);

struct PowerArgs {
  std::string config_path;
  std::string csv_path;   // "-" or empty: stdout
  std::string json_path;  // empty: none
  bool full_scale = false;
  std::optional<unsigned> workers;
};

int cmd_power(const PowerArgs& args, std::ostream& out);

/// Parses argv and dispatches; maps exceptions to exit codes.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);

}  // namespace benford::cli
