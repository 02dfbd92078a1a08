// Command-line harness: model generation, correctness verification,
// simulated-hardware experiments, wall-clock benchmarks and the speedup
// experiment, all emitting the tidy CSV schema.
//
// Exit codes: 0 success, 1 gating-tolerance failure, 2 usage error.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "parascan/bench.hpp"

namespace {

using namespace parascan;

std::optional<Method> parse_method(const std::string& s) {
  if (s == "pkf") return Method::PKF;
  if (s == "prts") return Method::PRTS;
  if (s == "ptfs") return Method::PTFS;
  if (s == "seq_kf") return Method::SEQ_KF;
  if (s == "seq_rts") return Method::SEQ_RTS;
  if (s == "seq_tfs") return Method::SEQ_TFS;
  return std::nullopt;
}

std::optional<ScanAlg> parse_alg(const std::string& s) {
  if (s == "seqscan") return ScanAlg::Sequential;
  if (s == "hillis_steele") return ScanAlg::HillisSteele;
  if (s == "blelloch") return ScanAlg::Blelloch;
  if (s == "inplace_lafi") return ScanAlg::InplaceLaFi;
  if (s == "sengupta_a") return ScanAlg::SenguptaA;
  if (s == "sengupta_b") return ScanAlg::SenguptaB;
  return std::nullopt;
}

const std::vector<Method> kAllMethods = {Method::PKF,    Method::PRTS,
                                         Method::PTFS,   Method::SEQ_KF,
                                         Method::SEQ_RTS, Method::SEQ_TFS};
const std::vector<ScanAlg> kAllAlgs = {
    ScanAlg::Sequential, ScanAlg::HillisSteele, ScanAlg::Blelloch,
    ScanAlg::InplaceLaFi, ScanAlg::SenguptaA, ScanAlg::SenguptaB};

struct CliOptions {
  std::uint64_t seed = 0;
  int nx = 4;
  int ny = 2;
  std::vector<std::size_t> t_grid = {64, 256, 1024};
  std::vector<std::string> methods = {"pkf", "prts", "ptfs", "seq_kf"};
  std::vector<std::string> algs = {"inplace_lafi"};
  std::string precision = "f32";
  int runs = 12;
  int warmup = 2;
  unsigned threads = 0;  // 0: resolve from PARASCAN_THREADS, else 1
  int devices = 1;
  std::size_t sengupta_n = 16;
  unsigned sim_threads = 15000;
  std::string out;
  bool gate = false;
};

unsigned resolve_threads(unsigned flag_value) {
  if (flag_value != 0) return flag_value;
  if (const char* env = std::getenv("PARASCAN_THREADS")) {
    const long v = std::atol(env);
    if (v >= 1) return unsigned(v);
  }
  return 1;
}

int build_config(const CliOptions& o, BenchConfig& cfg) {
  cfg.seed = o.seed;
  cfg.nx = o.nx;
  cfg.ny = o.ny;
  cfg.t_grid = o.t_grid;
  cfg.runs = o.runs;
  cfg.warmup = o.warmup;
  cfg.threads = resolve_threads(o.threads);
  cfg.devices = o.devices;
  cfg.sengupta_n = o.sengupta_n;
  cfg.sim_threads = o.sim_threads;
  cfg.gating = o.gate;
  if (o.precision == "f32") {
    cfg.precision = Precision::F32;
  } else if (o.precision == "f64") {
    cfg.precision = Precision::F64;
  } else {
    std::cerr << "unknown precision: " << o.precision << "\n";
    return 2;
  }
  cfg.methods.clear();
  for (const auto& s : o.methods) {
    if (s == "all") {
      cfg.methods = kAllMethods;
      break;
    }
    auto m = parse_method(s);
    if (!m) {
      std::cerr << "unknown method: " << s << "\n";
      return 2;
    }
    cfg.methods.push_back(*m);
  }
  cfg.algs.clear();
  for (const auto& s : o.algs) {
    if (s == "all") {
      cfg.algs = kAllAlgs;
      break;
    }
    auto a = parse_alg(s);
    if (!a) {
      std::cerr << "unknown scan algorithm: " << s << "\n";
      return 2;
    }
    cfg.algs.push_back(*a);
  }
  if (cfg.runs <= cfg.warmup || cfg.warmup < 0) {
    std::cerr << "need runs > warmup >= 0\n";
    return 2;
  }
  if (cfg.devices != 1 && cfg.devices != 2) {
    std::cerr << "devices must be 1 or 2\n";
    return 2;
  }
  return 0;
}

void emit(const std::vector<ResultRow>& rows, const std::string& out) {
  if (!out.empty()) write_csv(out, rows);
  std::cout << kCsvHeader << "\n";
  auto sorted = rows;
  sort_rows(sorted);
  for (const auto& r : sorted) std::cout << format_row(r) << "\n";
}

void add_common_flags(CLI::App* cmd, CliOptions& o) {
  cmd->add_option("--seed", o.seed, "Master seed; all randomness derives from it");
  cmd->add_option("--nx", o.nx, "State dimension")->check(CLI::Range(1, 16));
  cmd->add_option("--ny", o.ny, "Measurement dimension")->check(CLI::Range(1, 16));
  cmd->add_option("--T", o.t_grid, "Series lengths (repeatable)");
  cmd->add_option("--methods", o.methods,
                  "pkf prts ptfs seq_kf seq_rts seq_tfs, or all");
  cmd->add_option("--algs", o.algs,
                  "seqscan hillis_steele blelloch inplace_lafi sengupta_a "
                  "sengupta_b, or all");
  cmd->add_option("--precision", o.precision, "f32 or f64");
  cmd->add_option("--runs", o.runs, "Timing runs per cell");
  cmd->add_option("--warmup", o.warmup, "Discarded leading runs");
  cmd->add_option("--threads", o.threads,
                  "Worker-pool size (default: $PARASCAN_THREADS or 1)");
  cmd->add_option("--devices", o.devices, "1 or 2 (PTFS only)");
  cmd->add_option("--sengupta-n", o.sengupta_n, "Sengupta B threshold N");
  cmd->add_option("--sim-threads", o.sim_threads, "Simulated PRAM threads P");
  cmd->add_option("--out", o.out, "CSV output path (atomic write)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prefix-sum parallel Kalman filtering/smoothing workbench"};
  app.require_subcommand(1);

  CliOptions o;
  CLI::App* cmd_run = app.add_subcommand(
      "run", "Full grid: wall-clock, simulated units, oracle errors");
  CLI::App* cmd_verify = app.add_subcommand(
      "verify", "Correctness suite only (exits 1 beyond tolerance)");
  CLI::App* cmd_sim = app.add_subcommand(
      "simulate", "Simulated-hardware time/work/span only");
  CLI::App* cmd_speedup =
      app.add_subcommand("speedup", "Sequential KF vs InplaceLaFi PKF");
  for (auto* c : {cmd_run, cmd_verify, cmd_sim, cmd_speedup})
    add_common_flags(c, o);
  cmd_run->add_flag("--gate", o.gate,
                    "Exit 1 if any max_rel_err row exceeds tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  BenchConfig cfg;
  if (int rc = build_config(o, cfg); rc != 0) return rc;

  try {
    if (cmd_run->parsed()) {
      bool gating_failed = false;
      auto rows = run_suite(cfg, &gating_failed);
      emit(rows, o.out);
      return (cfg.gating && gating_failed) ? 1 : 0;
    }
    if (cmd_verify->parsed()) {
      cfg.runs = 1;  // single evaluation: only errors matter here
      cfg.warmup = 0;
      bool gating_failed = false;
      auto rows = run_suite(cfg, &gating_failed);
      std::vector<ResultRow> errs;
      for (auto& r : rows)
        if (r.metric == "max_rel_err") errs.push_back(r);
      emit(errs, o.out);
      return gating_failed ? 1 : 0;
    }
    if (cmd_sim->parsed()) {
      std::vector<ResultRow> rows;
      for (std::size_t t : cfg.t_grid) {
        const auto m = gen_model(cfg.seed, cfg.nx, cfg.ny, t);
        const auto ys = simulate_data(m, cfg.seed + 1);
        for (Method method : cfg.methods) {
          const bool seq = method == Method::SEQ_KF ||
                           method == Method::SEQ_RTS ||
                           method == Method::SEQ_TFS;
          std::vector<ScanAlg> algs =
              seq ? std::vector<ScanAlg>{ScanAlg::Sequential} : cfg.algs;
          for (ScanAlg alg : algs) {
            const ScanSpec spec{alg, cfg.sengupta_n};
            const SimConfig sim_cfg{cfg.sim_threads, cfg.devices};
            const SimReport rep =
                (!seq && method == Method::PTFS && cfg.devices == 2)
                    ? estimate_time_two_device(spec, m, ys, sim_cfg)
                    : estimate_time(method, spec, m, ys, sim_cfg);
            const std::string alg_label = seq ? "seq" : to_string(alg);
            auto add = [&](const char* metric, double v) {
              rows.push_back(ResultRow{to_string(method), alg_label, t,
                                       to_string(cfg.precision), metric, v,
                                       cfg.seed, cfg.threads, cfg.devices});
            };
            add("time_units", double(rep.time_units));
            add("work_units", double(rep.work_units));
            add("span_launches", double(rep.span_launches));
          }
        }
      }
      emit(rows, o.out);
      return 0;
    }
    // speedup
    auto rows = speedup_report(cfg);
    emit(rows, o.out);
    return 0;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
