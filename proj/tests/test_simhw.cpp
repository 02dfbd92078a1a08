#include <doctest.h>

#include <vector>

#include "parascan/simhw.hpp"
#include "test_util.hpp"

using namespace parascan;

namespace {

// one unit-cost flop per iteration
Launch unit_launch(std::size_t count) {
  Launch k;
  k.count = count;
  k.body = [](std::size_t) { ++flop_tally().adds; };
  return k;
}

SimReport scan_report(ScanAlg alg, std::size_t t, unsigned p,
                      SimBackend::Mode mode) {
  Int64Elems e(t);
  for (std::size_t i = 0; i < t; ++i) e[i] = std::int64_t(i);
  SimBackend sim(p, mode);
  scan_forward(ScanSpec{alg, 16}, e, sim);
  return sim.report();
}

}  // namespace

TEST_CASE("stride partition: 8 iterations on 3 threads peak at 3") {
  SimBackend sim(3);
  sim.run(unit_launch(8));
  REQUIRE(sim.report().launches.size() == 1);
  CHECK(sim.report().launches[0].total_flops == 8);
  CHECK(sim.report().launches[0].max_thread_flops == 3);  // threads get 3,3,2
  CHECK(sim.report().time_units == 3);
  CHECK(sim.report().work_units == 8);
}

TEST_CASE("nine iterations on 4 threads peak at 3") {
  SimBackend sim(4);
  sim.run(unit_launch(9));
  CHECK(sim.report().time_units == 3);  // thread 0 gets iterations 0, 4, 8
  CHECK(sim.report().work_units == 9);
}

TEST_CASE("sequential chains serialize onto one thread") {
  SimBackend sim(64);
  Launch k = unit_launch(10);
  k.sequential_chain = true;
  sim.run(k);
  CHECK(sim.report().time_units == 10);
  CHECK(sim.report().work_units == 10);
}

TEST_CASE("zero-flop launches do not contribute to the span") {
  SimBackend sim(4);
  Launch k;
  k.count = 16;
  k.body = [](std::size_t) {};
  sim.run(k);
  sim.run(unit_launch(4));
  CHECK(sim.report().span_launches == 1);
  CHECK(sim.report().launches.size() == 2);
}

TEST_CASE("model mode reproduces measure-mode timing for scans") {
  for (ScanAlg alg : {ScanAlg::HillisSteele, ScanAlg::Blelloch,
                      ScanAlg::InplaceLaFi, ScanAlg::SenguptaA,
                      ScanAlg::SenguptaB}) {
    for (unsigned p : {1u, 3u, 64u}) {
      const auto meas = scan_report(alg, 256, p, SimBackend::Mode::Measure);
      const auto model = scan_report(alg, 256, p, SimBackend::Mode::Model);
      INFO("alg=" << to_string(alg) << " p=" << p);
      CHECK(meas.time_units == model.time_units);
      CHECK(meas.work_units == model.work_units);
      CHECK(meas.span_launches == model.span_launches);
    }
  }
}

TEST_CASE("simulated scan work matches the closed forms") {
  const std::size_t t = 512;
  const double lg = 9.0;
  CHECK(scan_report(ScanAlg::HillisSteele, t, 8, SimBackend::Mode::Model)
            .work_units == std::uint64_t(t * lg - t + 1));
  CHECK(scan_report(ScanAlg::Blelloch, t, 8, SimBackend::Mode::Model)
            .work_units == 3 * t - 2);
  CHECK(scan_report(ScanAlg::InplaceLaFi, t, 8, SimBackend::Mode::Model)
            .work_units == std::uint64_t(2 * t - 2 - lg));
}

TEST_CASE("time equals work at P=1, is monotone in P, and is sandwiched") {
  for (ScanAlg alg : {ScanAlg::HillisSteele, ScanAlg::Blelloch,
                      ScanAlg::InplaceLaFi}) {
    std::uint64_t prev = 0;
    for (unsigned p = 1; p <= (1u << 16); p <<= 1) {
      const auto rep = scan_report(alg, 1024, p, SimBackend::Mode::Model);
      if (p == 1) CHECK(rep.time_units == rep.work_units);
      if (prev != 0) CHECK(rep.time_units <= prev);
      prev = rep.time_units;
      CHECK(rep.time_units <= rep.work_units);
      CHECK(rep.time_units * p >= rep.work_units);
    }
  }
}

TEST_CASE("sequential-method estimate equals a full counted run") {
  const auto m = gen_model(9, 4, 2, 16);
  const auto ys = simulate_data(m, 10);
  for (Method method : {Method::SEQ_KF, Method::SEQ_RTS, Method::SEQ_TFS}) {
    const auto rep = sim_detail::simulate_sequential(method, m, ys);
    const auto full = sim_detail::seq_flops_at(method, m, ys, m.t);
    INFO("method=" << to_string(method));
    CHECK(rep.work_units == full);  // extrapolation from T=2,3 is exact
    CHECK(rep.time_units == full);
    CHECK(rep.launches.size() == 1);
  }
}

TEST_CASE("pkf beats prts beats ptfs in simulated time at moderate T") {
  const auto m = gen_model(2, 4, 2, 1 << 12);
  const auto ys = simulate_data(m, 3);
  const ScanSpec spec{ScanAlg::InplaceLaFi, 16};
  const SimConfig cfg{15000, 1};
  const auto pkf = estimate_time(Method::PKF, spec, m, ys, cfg);
  const auto prts = estimate_time(Method::PRTS, spec, m, ys, cfg);
  const auto ptfs = estimate_time(Method::PTFS, spec, m, ys, cfg);
  CHECK(pkf.time_units < prts.time_units);
  CHECK(prts.time_units < ptfs.time_units);
}

TEST_CASE("two-device ptfs does the same work in less or equal time") {
  const auto m = gen_model(4, 4, 2, 1 << 12);
  const auto ys = simulate_data(m, 5);
  const ScanSpec spec{ScanAlg::InplaceLaFi, 16};
  const auto one = estimate_time(Method::PTFS, spec, m, ys, SimConfig{15000, 1});
  const auto two = estimate_time_two_device(spec, m, ys, SimConfig{15000, 2});
  CHECK(two.work_units == one.work_units);
  CHECK(two.time_units <= one.time_units);
}
