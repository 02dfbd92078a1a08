#include <doctest.h>

#include <cstdint>
#include <vector>

#include "parascan/backend.hpp"
#include "parascan/scan.hpp"
#include "test_util.hpp"

using namespace parascan;

namespace {

const std::vector<ScanAlg> kParallelAlgs = {
    ScanAlg::HillisSteele, ScanAlg::Blelloch, ScanAlg::InplaceLaFi,
    ScanAlg::SenguptaA, ScanAlg::SenguptaB};

Int64Elems make_int_series(std::size_t t, std::uint64_t seed) {
  Int64Elems e(t);
  for (std::size_t i = 0; i < t; ++i)
    e[i] = std::int64_t(gen_detail::splitmix64(seed + i) % 1000) - 500;
  return e;
}

std::vector<std::int64_t> prefix_sums(const Int64Elems& e, std::size_t t) {
  std::vector<std::int64_t> s(t);
  std::int64_t acc = 0;
  for (std::size_t i = 0; i < t; ++i) s[i] = acc += e[i];
  return s;
}

MatMulElems<double> make_mat_series(std::size_t t, int dim, std::uint64_t seed) {
  MatMulElems<double> e(t, dim);
  gen_detail::GaussianStream g(seed);
  for (std::size_t i = 0; i < t; ++i) {
    g.fill(e.at(i));
    // keep products bounded so long chains stay comparable
    for (int k = 0; k < dim * dim; ++k) e.at(i).d[k] *= 0.5;
  }
  return e;
}

}  // namespace

TEST_CASE("all algorithms match sequential integer prefix sums") {
  SerialBackend be;
  std::vector<std::size_t> ts;
  for (std::size_t t = 1; t <= 64; ++t) ts.push_back(t);
  ts.push_back(1000);
  for (std::size_t t : ts) {
    const auto in = make_int_series(t, 7 * t);
    const auto expect = prefix_sums(in, t);

    Int64Elems seq = in;
    scan_forward(ScanSpec{ScanAlg::Sequential, 1}, seq, be);
    for (std::size_t i = 0; i < t; ++i) REQUIRE(seq[i] == expect[i]);

    for (ScanAlg alg : kParallelAlgs) {
      Int64Elems padded = pad_pow2(in);
      scan_forward(ScanSpec{alg, 4}, padded, be);
      for (std::size_t i = 0; i < t; ++i) {
        INFO("alg=" << to_string(alg) << " T=" << t << " i=" << i);
        REQUIRE(padded[i] == expect[i]);
      }
    }
  }
}

TEST_CASE("matrix-product scans match the sequential fold (non-commutative)") {
  SerialBackend be;
  for (std::size_t t : {1ul, 2ul, 3ul, 13ul, 32ul, 100ul}) {
    auto in = make_mat_series(t, 4, 11 * t);
    auto seq = in;
    scan_forward(ScanSpec{ScanAlg::Sequential, 1}, seq, be);
    for (ScanAlg alg : kParallelAlgs) {
      auto padded = pad_pow2(in);
      scan_forward(ScanSpec{alg, 4}, padded, be);
      for (std::size_t i = 0; i < t; ++i) {
        INFO("alg=" << to_string(alg) << " T=" << t << " i=" << i);
        REQUIRE(testutil::max_abs_diff(padded.at(i), seq.at(i)) < 1e-10);
      }
    }
  }
}

TEST_CASE("reversed scan computes suffix folds with correct operand order") {
  SerialBackend be;
  const std::size_t t = 16;
  auto in = make_mat_series(t, 3, 99);

  // reference suffixes: s̄_k = a_k * a_{k+1} * ... * a_{T}
  auto ref = in.make_like(t);
  ref.assign(t - 1, in, t - 1);
  for (std::size_t i = t - 1; i-- > 0;) ref.combine(i, in, i, ref, i + 1);

  for (ScanAlg alg : kParallelAlgs) {
    auto work = pad_pow2(in);
    scan_reverse(ScanSpec{alg, 4}, work, be);
    // padding slots are neutral, so suffixes for k <= T are unchanged
    for (std::size_t i = 0; i < t; ++i)
      REQUIRE(testutil::max_abs_diff(work.at(i), ref.at(i)) < 1e-12);
  }
}

TEST_CASE("splice identity: s_T = s_{k-1} (x) sbar_k") {
  SerialBackend be;
  const std::size_t t = 32;
  auto in = make_mat_series(t, 4, 123);
  auto fwd = in;
  scan_forward(ScanSpec{ScanAlg::Blelloch, 1}, fwd, be);
  auto bwd = in;
  scan_reverse(ScanSpec{ScanAlg::Blelloch, 1}, bwd, be);
  for (std::size_t k = 1; k < t; ++k) {
    auto total = in.make_like(1);
    total.combine(0, fwd, k - 1, bwd, k);
    REQUIRE(testutil::max_abs_diff(total.at(0), fwd.at(t - 1)) < 1e-10);
  }
}

TEST_CASE("hillis-steele per-level work is T - 2^d") {
  const std::size_t t = 64;
  Int64Elems e = make_int_series(t, 1);
  scan_detail::PerLaunchTallyBackend be;
  scan_forward(ScanSpec{ScanAlg::HillisSteele, 1}, e, be);
  REQUIRE(be.launch_flops.size() == 6);  // log2(64) levels, result in buf
  for (unsigned d = 0; d < 6; ++d)
    CHECK(be.launch_flops[d] == t - (std::size_t(1) << d));
}

TEST_CASE("work-count identities for T in {2..1024}") {
  for (std::size_t t = 2; t <= 1024; t <<= 1) {
    const double lg = double(log2_exact(t));
    const auto hs = count_work_and_span({ScanAlg::HillisSteele, 1}, t);
    CHECK(hs.work == std::uint64_t(t * lg - t + 1));
    CHECK(hs.span_levels == std::uint64_t(lg));

    const auto bl = count_work_and_span({ScanAlg::Blelloch, 1}, t);
    CHECK(bl.work == 3 * t - 2);
    CHECK(bl.span_levels == std::uint64_t(2 * lg + 1));

    const auto lf = count_work_and_span({ScanAlg::InplaceLaFi, 1}, t);
    CHECK(lf.work == std::uint64_t(2 * t - 2 - lg));
    if (t >= 4) CHECK(lf.span_levels == bl.span_levels - 2);
  }
}

TEST_CASE("sengupta-b degenerates to hillis-steele when N >= T") {
  const std::size_t t = 256;
  const auto hs = count_work_and_span({ScanAlg::HillisSteele, 1}, t);
  const auto sb = count_work_and_span({ScanAlg::SenguptaB, t}, t);
  CHECK(sb.work == hs.work);
  CHECK(sb.span_levels == hs.span_levels);
  // a real threshold does strictly less work than pure hillis-steele
  const auto sb16 = count_work_and_span({ScanAlg::SenguptaB, 16}, t);
  CHECK(sb16.work < hs.work);
}

TEST_CASE("parallel launches have disjoint write sets") {
  for (ScanAlg alg : kParallelAlgs) {
    WriteSetRecorderBackend be;
    Int64Elems e = make_int_series(64, 3);
    CHECK_NOTHROW(scan_forward(ScanSpec{alg, 4}, e, be));
    Int64Elems r = make_int_series(64, 4);
    CHECK_NOTHROW(scan_reverse(ScanSpec{alg, 4}, r, be));
  }
}

TEST_CASE("contract violations") {
  SerialBackend be;
  Int64Elems e(48);  // not a power of 2
  CHECK_THROWS_AS(scan_forward(ScanSpec{ScanAlg::Blelloch, 1}, e, be),
                  ContractViolation);
  Int64Elems p(64);
  CHECK_THROWS_AS(scan_forward(ScanSpec{ScanAlg::SenguptaB, 3}, p, be),
                  ContractViolation);
  CHECK_NOTHROW(scan_forward(ScanSpec{ScanAlg::Sequential, 1}, e, be));
}

TEST_CASE("pooled backend reproduces the serial result") {
  const std::size_t t = 4096;
  const auto in = make_int_series(t, 21);
  const auto expect = prefix_sums(in, t);
  PoolBackend pool(4);
  for (ScanAlg alg : kParallelAlgs) {
    Int64Elems e = in;
    scan_forward(ScanSpec{alg, 16}, e, pool);
    for (std::size_t i = 0; i < t; ++i) REQUIRE(e[i] == expect[i]);
  }
}
