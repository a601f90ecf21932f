// rramcim: run one experiment and emit its report.
//
//   rramcim verify|margins|ber-sweep|perf|protocol|trace [options]
//
// Exit codes: 0 success, 1 verification failure, 2 config error, 3 I/O error.

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "rramcim/rramcim.hpp"

namespace {

enum Exit { kOk = 0, kFailed = 1, kConfig = 2, kIo = 3 };

struct Flags {
  std::string experiment;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::uint64_t> trials;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::size_t> trace_row;
  std::optional<unsigned> jobs;
  bool no_timestamp = false;
  std::optional<std::string> matrix;
  std::optional<std::string> vector;
  bool quiet = false;
};

rramcim::AppConfig resolve(const Flags& f) {
  rramcim::AppConfig c = f.config_path.empty() ? rramcim::AppConfig{} : rramcim::load_config(f.config_path);
  if (f.seed) c.seed = *f.seed;
  if (f.trials) {
    if (*f.trials == 0) throw rramcim::ConfigError("--trials must be > 0");
    c.trials = *f.trials;
  }
  if (f.out) c.output_path = *f.out;
  if (f.format) c.format = *f.format;
  if (f.trace_row) c.trace.row = *f.trace_row;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.no_timestamp) c.timestamp = false;
  if (f.matrix) c.verify.matrix_path = *f.matrix;
  if (f.vector) c.verify.vector_path = *f.vector;
  rramcim::finalize(c);
  return c;
}

void emit(const rramcim::Report& r, const rramcim::AppConfig& c, bool quiet) {
  const std::string body = c.format == "csv" ? r.csv : r.json.dump(2) + "\n";
  if (c.output_path.empty()) {
    std::cout << body;
    if (!quiet) std::cerr << r.experiment << ": " << r.summary << '\n';
    return;
  }
  std::ofstream out(c.output_path, std::ios::binary);
  if (!out) throw rramcim::IoError("cannot open " + c.output_path + " for writing");
  out << body;
  out.flush();
  if (!out) throw rramcim::IoError("write to " + c.output_path + " failed");
  if (!quiet) std::cout << r.experiment << ": " << r.summary << '\n';
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"RRAM compute-in-memory BMVM simulator"};
  app.set_version_flag("--version", "rramcim 1.0");
  Flags f;
  app.add_option("experiment", f.experiment, "verify | margins | ber-sweep | perf | protocol | trace")
      ->required()
      ->check(CLI::IsMember({"verify", "margins", "ber-sweep", "perf", "protocol", "trace"}));
  app.add_option("--config", f.config_path, "JSON config file (see docs/config.md)");
  app.add_option("--seed", f.seed, "master seed (config: seed)");
  app.add_option("--trials", f.trials, "Monte Carlo count for this experiment (config: trials)");
  app.add_option("--out", f.out, "write the report here instead of stdout (config: output_path)");
  app.add_option("--format", f.format, "report format (config: format)")->check(CLI::IsMember({"json", "csv"}));
  app.add_option("--trace-row", f.trace_row, "row traced by the trace experiment (config: experiments.trace.row)");
  app.add_option("--jobs", f.jobs, "worker threads, 0 = all cores (config: jobs)");
  app.add_flag("--no-timestamp", f.no_timestamp, "omit generated_at (config: timestamp = false)");
  app.add_option("--matrix", f.matrix, "BMV1 matrix for verify (config: experiments.verify.matrix_path)");
  app.add_option("--vector", f.vector, "BMV1 vector for verify (config: experiments.verify.vector_path)");
  app.add_flag("-q,--quiet", f.quiet, "no summary line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  rramcim::AppConfig cfg;
  try {
    cfg = resolve(f);
  } catch (const rramcim::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  }

  try {
    const rramcim::Report report = rramcim::run_experiment(f.experiment, cfg);
    emit(report, cfg, f.quiet);
    if (!report.passed) {
      std::cerr << f.experiment << ": FAILED\n";
      return kFailed;
    }
    return kOk;
  } catch (const rramcim::IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const rramcim::ParseError& e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return kConfig;
  } catch (const rramcim::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfig;
  } catch (const rramcim::DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << '\n';
    return kConfig;
  } catch (const rramcim::DeploymentError& e) {
    std::cerr << "deployment error: " << e.what() << '\n';
    return kFailed;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kFailed;
  }
}
