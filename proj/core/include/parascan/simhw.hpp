#pragma once

// Simulated-PRAM backend: replays launches over P simulated threads, using
// the counted<> scalar tally to attribute flops. Launch time is the maximum
// per-thread tally under the stride partition (iteration i on thread i % P);
// total time is the sum over launches. Memory traffic, launch overhead and
// device copies cost 0 flops (the PRAM assumption).
//
// Two modes:
//  - Measure: every iteration executes and is tallied individually (the run
//    also produces real results).
//  - Model: only one representative iteration per declared cost class
//    executes; all iterations of that class are charged its cost. Valid
//    because kernel flop counts are data-independent. Results are not
//    meaningful, only the timing is; this is what makes T = 2^20 sweeps
//    affordable.

#include <cstdint>
#include <vector>

#include "parascan/backend.hpp"
#include "parascan/flops.hpp"
#include "parascan/kalman_par.hpp"
#include "parascan/kalman_seq.hpp"
#include "parascan/lgssm.hpp"
#include "parascan/model_gen.hpp"
#include "parascan/scan.hpp"

namespace parascan {

struct SimConfig {
  unsigned threads = 1;  // P
  int devices = 1;
};

struct LaunchRecord {
  std::uint64_t max_thread_flops = 0;
  std::uint64_t total_flops = 0;
};

struct SimReport {
  std::vector<LaunchRecord> launches;
  std::uint64_t time_units = 0;
  std::uint64_t work_units = 0;
  std::uint64_t span_launches = 0;

  void add(const LaunchRecord& r) {
    launches.push_back(r);
    time_units += r.max_thread_flops;
    work_units += r.total_flops;
    if (r.total_flops > 0) ++span_launches;
  }
  void append(const SimReport& o) {
    for (const auto& r : o.launches) add(r);
  }
};

class SimBackend final : public Backend {
 public:
  enum class Mode { Measure, Model };

  explicit SimBackend(unsigned p, Mode mode = Mode::Measure)
      : p_(p == 0 ? 1 : p), mode_(mode) {}

  const SimReport& report() const { return report_; }
  void reset() { report_ = SimReport{}; }
  unsigned threads() const { return p_; }

  void run(const Launch& launch) override {
    if (launch.count == 0) return;
    thread_flops_.assign(launch.sequential_chain ? 1 : p_, 0);
    if (mode_ == Mode::Measure)
      run_measure(launch);
    else
      run_model(launch);
    LaunchRecord rec;
    for (std::uint64_t f : thread_flops_) {
      rec.total_flops += f;
      if (f > rec.max_thread_flops) rec.max_thread_flops = f;
    }
    report_.add(rec);
  }

 private:
  void run_measure(const Launch& launch) {
    for (std::size_t i = 0; i < launch.count; ++i) {
      const std::uint64_t before = flop_tally().total();
      launch.body(i);
      const std::uint64_t cost = flop_tally().total() - before;
      thread_flops_[launch.sequential_chain ? 0 : i % p_] += cost;
    }
  }

  void run_model(const Launch& launch) {
    const unsigned nc = launch.cost_class ? launch.num_classes : 1;
    std::vector<std::uint64_t> class_count(nc, 0);
    std::vector<unsigned> cls_of;
    cls_of.reserve(launch.count);
    for (std::size_t i = 0; i < launch.count; ++i) {
      const unsigned c = launch.cost_class ? launch.cost_class(i) : 0;
      cls_of.push_back(c);
      ++class_count[c];
    }
    std::vector<std::uint64_t> class_cost(nc, 0);
    for (unsigned c = 0; c < nc; ++c) {
      if (class_count[c] == 0) continue;  // representative may be invalid
      const std::size_t rep =
          launch.representative ? launch.representative(c) : 0;
      const std::uint64_t before = flop_tally().total();
      launch.body(rep);
      class_cost[c] = flop_tally().total() - before;
    }
    for (std::size_t i = 0; i < launch.count; ++i)
      thread_flops_[launch.sequential_chain ? 0 : i % p_] +=
          class_cost[cls_of[i]];
  }

  unsigned p_;
  Mode mode_;
  SimReport report_;
  std::vector<std::uint64_t> thread_flops_;
};

enum class Method { PKF, PRTS, PTFS, SEQ_KF, SEQ_RTS, SEQ_TFS };

inline const char* to_string(Method m) {
  switch (m) {
    case Method::PKF: return "pkf";
    case Method::PRTS: return "prts";
    case Method::PTFS: return "ptfs";
    case Method::SEQ_KF: return "seq_kf";
    case Method::SEQ_RTS: return "seq_rts";
    case Method::SEQ_TFS: return "seq_tfs";
  }
  return "?";
}

namespace sim_detail {

using CountedF = counted<float>;

inline std::uint64_t seq_flops_at(Method method, const Lgssm<double>& m,
                                  const Measurements<double>& ys,
                                  std::size_t t) {
  Lgssm<double> head = m;
  head.t = t;
  head.f.resize(t);
  head.u.resize(t);
  head.q.resize(t);
  head.h.resize(t);
  head.d.resize(t);
  head.r.resize(t);
  Measurements<double> ys_head(ys.begin(), ys.begin() + t);

  auto mc = convert_model<CountedF>(head);
  auto yc = convert_measurements<CountedF>(ys_head);

  const FlopTally before = flop_tally();
  switch (method) {
    case Method::SEQ_KF:
      kf_run(mc, yc);
      break;
    case Method::SEQ_RTS:
      rts_run(mc, kf_run(mc, yc));
      break;
    default:
      tfs_run(mc, yc);
      break;
  }
  return (flop_tally() - before).total();
}

// Sequential methods bypass the launch machinery; per-step flop cost is
// data-independent, so probing short prefixes gives the exact marginal
// per-step cost and the total is linear in T.
inline SimReport simulate_sequential(Method method, const Lgssm<double>& m,
                                     const Measurements<double>& ys) {
  std::uint64_t total;
  if (m.t <= 3) {
    total = seq_flops_at(method, m, ys, m.t);
  } else {
    const std::uint64_t c2 = seq_flops_at(method, m, ys, 2);
    const std::uint64_t c3 = seq_flops_at(method, m, ys, 3);
    total = c2 + (m.t - 2) * (c3 - c2);
  }
  SimReport rep;
  rep.add(LaunchRecord{total, total});  // one thread, fully serial
  return rep;
}

}  // namespace sim_detail

// Flop-time estimate of a full method on P simulated threads (one device).
inline SimReport estimate_time(Method method, const ScanSpec& spec,
                               const Lgssm<double>& m,
                               const Measurements<double>& ys,
                               const SimConfig& cfg) {
  using sim_detail::CountedF;
  if (method == Method::SEQ_KF || method == Method::SEQ_RTS ||
      method == Method::SEQ_TFS)
    return sim_detail::simulate_sequential(method, m, ys);

  auto mc = convert_model<CountedF>(m);
  auto yc = convert_measurements<CountedF>(ys);
  SimBackend sim(cfg.threads, SimBackend::Mode::Model);
  switch (method) {
    case Method::PKF:
      pkf_run(mc, yc, spec, sim);
      break;
    case Method::PRTS:
      prts_run(mc, yc, spec, sim);
      break;
    default:
      ptfs_run(mc, yc, spec, sim, sim, 1);
      break;
  }
  return sim.report();
}

// Two-device PTFS estimate: forward and backward passes run concurrently on
// separate devices, so their times combine as a max; the copy of the
// backward results and the combination run on the forward device afterwards.
inline SimReport estimate_time_two_device(const ScanSpec& spec,
                                          const Lgssm<double>& m,
                                          const Measurements<double>& ys,
                                          const SimConfig& cfg) {
  using sim_detail::CountedF;
  auto mc = convert_model<CountedF>(m);
  auto yc = convert_measurements<CountedF>(ys);
  const std::size_t t = mc.t;
  const int nx = mc.nx;
  const std::size_t n =
      spec.alg == ScanAlg::Sequential ? t : next_pow2(t);

  SimBackend dev_fwd(cfg.threads, SimBackend::Mode::Model);
  SimBackend dev_bwd(cfg.threads, SimBackend::Mode::Model);
  SimBackend dev_comb(cfg.threads, SimBackend::Mode::Model);

  auto fwd = build_filter_elems(mc, yc, n, dev_fwd);
  scan_forward(spec, fwd, dev_fwd);
  auto filtered = extract_filter_stats(fwd, t, nx, dev_fwd);

  auto bwd = build_shifted_filter_elems(mc, yc, n, dev_bwd);
  scan_reverse(spec, bwd, dev_bwd);

  {
    Launch k;  // device-to-device copy of (η, J): 0 flops under PRAM
    k.count = t;
    k.body = [](std::size_t) {};
    dev_comb.run(k);
  }
  combine_tf_stats(filtered, bwd, t, nx, dev_comb);

  SimReport rep;
  const SimReport& f = dev_fwd.report();
  const SimReport& b = dev_bwd.report();
  const SimReport& longer = f.time_units >= b.time_units ? f : b;
  const SimReport& shorter = f.time_units >= b.time_units ? b : f;
  rep.append(longer);
  for (const auto& r : shorter.launches) {  // overlapped: work only
    rep.work_units += r.total_flops;
    if (r.total_flops > 0) ++rep.span_launches;
    rep.launches.push_back(LaunchRecord{0, r.total_flops});
  }
  rep.append(dev_comb.report());
  return rep;
}

}  // namespace parascan
