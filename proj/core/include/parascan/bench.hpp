#pragma once

// Benchmark/experiment harness: configuration grid, the median-of-runs
// timing protocol, tidy CSV emission, and the correctness/simulation/speedup
// suites behind the CLI subcommands.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "parascan/backend.hpp"
#include "parascan/kalman_par.hpp"
#include "parascan/kalman_seq.hpp"
#include "parascan/lgssm.hpp"
#include "parascan/model_gen.hpp"
#include "parascan/scan.hpp"
#include "parascan/simhw.hpp"

namespace parascan {

enum class Precision { F32, F64 };

inline const char* to_string(Precision p) {
  return p == Precision::F32 ? "f32" : "f64";
}

struct BenchConfig {
  std::uint64_t seed = 0;
  int nx = 4;
  int ny = 2;
  std::vector<std::size_t> t_grid;
  std::vector<Method> methods;
  std::vector<ScanAlg> algs;
  Precision precision = Precision::F32;
  int runs = 12;
  int warmup = 2;
  unsigned threads = 1;
  int devices = 1;
  std::size_t sengupta_n = 16;
  unsigned sim_threads = 15000;  // P of the simulated accelerator
  bool gating = false;
};

struct ResultRow {
  std::string method;
  std::string alg;
  std::size_t t = 0;
  std::string precision;
  std::string metric;
  double value = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  int devices = 1;
};

// Gating tolerances for the max_rel_err rows, per scalar precision.
inline double rel_err_tolerance(Precision p) {
  return p == Precision::F32 ? 1e-2 : 1e-5;
}

// ---------------------------------------------------------------------------
// Timing protocol: discard the first `warmup` samples, median of the rest;
// an even remainder takes the mean of the two middle values.

inline double median_after_warmup(std::vector<double> durations, int warmup) {
  if (warmup < 0 || durations.size() <= std::size_t(warmup))
    throw std::invalid_argument("need runs > warmup");
  durations.erase(durations.begin(), durations.begin() + warmup);
  std::sort(durations.begin(), durations.end());
  const std::size_t n = durations.size();
  if (n % 2 == 1) return durations[n / 2];
  return 0.5 * (durations[n / 2 - 1] + durations[n / 2]);
}

// `sample` performs one run and returns its duration in seconds (injectable
// for tests with fake timers).
template <typename F>
double time_run_with(F&& sample, int runs, int warmup) {
  std::vector<double> d;
  d.reserve(std::size_t(runs));
  for (int i = 0; i < runs; ++i) d.push_back(sample());
  return median_after_warmup(std::move(d), warmup);
}

template <typename F>
double time_run(F&& thunk, int runs, int warmup) {
  return time_run_with(
      [&thunk] {
        const auto t0 = std::chrono::steady_clock::now();
        thunk();
        const auto t1 = std::chrono::steady_clock::now();
        return std::chrono::duration<double>(t1 - t0).count();
      },
      runs, warmup);
}

// ---------------------------------------------------------------------------
// CSV: UTF-8, LF, `.` decimals, deterministic row order; written atomically
// via a temp file + rename.

inline constexpr const char* kCsvHeader =
    "method,alg,T,precision,metric,value,seed,threads,devices";

inline bool is_count_metric(const std::string& metric) {
  return metric == "time_units" || metric == "work_units" ||
         metric == "span_launches";
}

inline std::string format_row(const ResultRow& r) {
  char value[64];
  if (is_count_metric(r.metric))
    std::snprintf(value, sizeof value, "%.0f", r.value);
  else
    std::snprintf(value, sizeof value, "%.9e", r.value);
  std::ostringstream os;
  os << r.method << ',' << r.alg << ',' << r.t << ',' << r.precision << ','
     << r.metric << ',' << value << ',' << r.seed << ',' << r.threads << ','
     << r.devices;
  return os.str();
}

inline ResultRow parse_row(const std::string& line) {
  std::vector<std::string> f;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      f.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  f.push_back(cur);
  if (f.size() != 9) throw std::invalid_argument("bad CSV row: " + line);
  ResultRow r;
  r.method = f[0];
  r.alg = f[1];
  r.t = std::stoull(f[2]);
  r.precision = f[3];
  r.metric = f[4];
  r.value = std::stod(f[5]);
  r.seed = std::stoull(f[6]);
  r.threads = unsigned(std::stoul(f[7]));
  r.devices = std::stoi(f[8]);
  return r;
}

inline void sort_rows(std::vector<ResultRow>& rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const ResultRow& a, const ResultRow& b) {
                     if (a.method != b.method) return a.method < b.method;
                     if (a.alg != b.alg) return a.alg < b.alg;
                     if (a.t != b.t) return a.t < b.t;
                     return a.metric < b.metric;
                   });
}

inline void write_csv(const std::filesystem::path& path,
                      std::vector<ResultRow> rows) {
  sort_rows(rows);
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + tmp.string());
    os << kCsvHeader << '\n';
    for (const auto& r : rows) os << format_row(r) << '\n';
  }
  std::filesystem::rename(tmp, path);
}

inline std::vector<ResultRow> read_csv(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  if (!std::getline(is, line) || line != kCsvHeader)
    throw std::invalid_argument("bad CSV header");
  std::vector<ResultRow> rows;
  while (std::getline(is, line))
    if (!line.empty()) rows.push_back(parse_row(line));
  return rows;
}

// ---------------------------------------------------------------------------
// Suite execution

namespace bench_detail {

inline bool is_sequential_method(Method m) {
  return m == Method::SEQ_KF || m == Method::SEQ_RTS || m == Method::SEQ_TFS;
}

template <typename S>
std::vector<GaussianStats<S>> run_method(Method method, const Lgssm<S>& m,
                                         const Measurements<S>& ys,
                                         const ScanSpec& spec, Backend& be,
                                         int devices) {
  switch (method) {
    case Method::SEQ_KF: return kf_run(m, ys);
    case Method::SEQ_RTS: return rts_run(m, kf_run(m, ys));
    case Method::SEQ_TFS: return tfs_run(m, ys);
    case Method::PKF: return pkf_run(m, ys, spec, be);
    case Method::PRTS: return prts_run(m, ys, spec, be);
    case Method::PTFS: return ptfs_run(m, ys, spec, be, be, devices);
  }
  throw std::logic_error("unknown method");
}

// Max relative error against a double-precision reference.
template <typename S>
double max_rel_err(const std::vector<GaussianStats<S>>& got,
                   const std::vector<GaussianStats<double>>& ref) {
  double worst = 0;
  for (std::size_t k = 0; k < ref.size(); ++k) {
    const int nx = ref[k].mean.len();
    for (int i = 0; i < nx; ++i) {
      const double r = ref[k].mean[i];
      const double e = std::abs(to_double(got[k].mean[i]) - r) /
                       (1.0 + std::abs(r));
      worst = std::max(worst, e);
    }
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < nx; ++j) {
        const double r = ref[k].cov(i, j);
        const double e = std::abs(to_double(got[k].cov(i, j)) - r) /
                         (1.0 + std::abs(r));
        worst = std::max(worst, e);
      }
  }
  return worst;
}

// The double-precision sequential reference for a method's output.
inline const std::vector<GaussianStats<double>>& oracle_for(
    Method method, const std::vector<GaussianStats<double>>& kf,
    const std::vector<GaussianStats<double>>& rts) {
  switch (method) {
    case Method::PKF:
    case Method::SEQ_KF:
      return kf;
    default:
      return rts;
  }
}

}  // namespace bench_detail

// Full grid: per (T, method, alg) cell emits wall-clock on the pooled
// backend, simulated time/work/span at cfg.sim_threads, and max_rel_err
// against the f64 sequential oracle. Returns all rows (sorted); callers
// write them with write_csv. Sets *gating_failed when an error row exceeds
// the precision's tolerance.
inline std::vector<ResultRow> run_suite(const BenchConfig& cfg,
                                        bool* gating_failed = nullptr) {
  std::vector<ResultRow> rows;
  if (gating_failed) *gating_failed = false;
  PoolBackend pool(cfg.threads);

  for (std::size_t t : cfg.t_grid) {
    const Lgssm<double> m = gen_model(cfg.seed, cfg.nx, cfg.ny, t);
    const Measurements<double> ys = simulate_data(m, cfg.seed + 1);
    const auto kf = kf_run(m, ys);
    const auto rts = rts_run(m, kf);
    const auto m32 = convert_model<float>(m);
    const auto ys32 = convert_measurements<float>(ys);

    for (Method method : cfg.methods) {
      const bool seq = bench_detail::is_sequential_method(method);
      std::vector<ScanAlg> algs =
          seq ? std::vector<ScanAlg>{ScanAlg::Sequential} : cfg.algs;
      for (ScanAlg alg : algs) {
        const ScanSpec spec{alg, cfg.sengupta_n};
        const std::string alg_label = seq ? "seq" : to_string(alg);
        const auto& ref = bench_detail::oracle_for(method, kf, rts);

        auto emit = [&](const std::string& metric, double value) {
          rows.push_back(ResultRow{to_string(method), alg_label, t,
                                   to_string(cfg.precision), metric, value,
                                   cfg.seed, cfg.threads, cfg.devices});
        };

        double err;
        double wall;
        if (cfg.precision == Precision::F32) {
          auto run = [&] {
            return bench_detail::run_method(method, m32, ys32, spec, pool,
                                            cfg.devices);
          };
          err = bench_detail::max_rel_err(run(), ref);
          wall = time_run([&] { run(); }, cfg.runs, cfg.warmup);
        } else {
          auto run = [&] {
            return bench_detail::run_method(method, m, ys, spec, pool,
                                            cfg.devices);
          };
          err = bench_detail::max_rel_err(run(), ref);
          wall = time_run([&] { run(); }, cfg.runs, cfg.warmup);
        }
        emit("max_rel_err", err);
        emit("wall_median_s", wall);
        if (err > rel_err_tolerance(cfg.precision) && gating_failed)
          *gating_failed = true;

        const SimConfig sim_cfg{cfg.sim_threads, cfg.devices};
        const SimReport rep =
            (!seq && method == Method::PTFS && cfg.devices == 2)
                ? estimate_time_two_device(spec, m, ys, sim_cfg)
                : estimate_time(method, spec, m, ys, sim_cfg);
        emit("time_units", double(rep.time_units));
        emit("work_units", double(rep.work_units));
        emit("span_launches", double(rep.span_launches));
      }
    }
  }
  sort_rows(rows);
  return rows;
}

// Speedup experiment: sequential KF on one worker vs the InplaceLaFi PKF on
// the pooled backend (measured), plus the simulated-hardware speedup at
// cfg.sim_threads as a separate metric.
inline std::vector<ResultRow> speedup_report(const BenchConfig& cfg) {
  std::vector<ResultRow> rows;
  PoolBackend pool(cfg.threads);
  const ScanSpec spec{ScanAlg::InplaceLaFi, cfg.sengupta_n};

  for (std::size_t t : cfg.t_grid) {
    const Lgssm<double> m = gen_model(cfg.seed, cfg.nx, cfg.ny, t);
    const Measurements<double> ys = simulate_data(m, cfg.seed + 1);
    const auto m32 = convert_model<float>(m);
    const auto ys32 = convert_measurements<float>(ys);

    const double seq_s =
        time_run([&] { kf_run(m32, ys32); }, cfg.runs, cfg.warmup);
    const double par_s = time_run([&] { pkf_run(m32, ys32, spec, pool); },
                                  cfg.runs, cfg.warmup);

    const SimConfig sim_cfg{cfg.sim_threads, 1};
    const SimReport seq_rep =
        estimate_time(Method::SEQ_KF, spec, m, ys, sim_cfg);
    const SimReport par_rep = estimate_time(Method::PKF, spec, m, ys, sim_cfg);

    auto emit = [&](const std::string& metric, double value) {
      rows.push_back(ResultRow{"pkf", to_string(ScanAlg::InplaceLaFi), t,
                               to_string(cfg.precision), metric, value,
                               cfg.seed, cfg.threads, cfg.devices});
    };
    emit("speedup_wall", seq_s / par_s);
    emit("speedup_sim",
         double(seq_rep.work_units) / double(par_rep.time_units));
  }
  sort_rows(rows);
  return rows;
}

}  // namespace parascan
