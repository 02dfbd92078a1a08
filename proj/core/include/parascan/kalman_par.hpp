#pragma once

// Parallel-in-time Kalman methods: PKF (scan of filtering elements), PRTS
// (PKF + reverse scan of smoothing elements), and PTFS (forward and reverse
// scans of filtering elements + two-filter combination). Every stage is a
// launch on an execution backend, so the same drivers run on the serial,
// pooled, and simulated-PRAM backends.

#include <cstddef>
#include <vector>

#include "parascan/backend.hpp"
#include "parascan/kalman_elems.hpp"
#include "parascan/kalman_seq.hpp"
#include "parascan/lgssm.hpp"
#include "parascan/scan.hpp"

namespace parascan {

namespace kpar_detail {

template <typename S>
std::size_t padded_len(const ScanSpec& spec, std::size_t t) {
  return spec.alg == ScanAlg::Sequential ? t : next_pow2(t);
}

}  // namespace kpar_detail

// Builds filtering elements a_1..a_T into slots 0..T-1; slots T..n-1 (the
// padding) hold the neutral element.
template <typename S>
FilterElems<S> build_filter_elems(const Lgssm<S>& m, const Measurements<S>& ys,
                                  std::size_t n, Backend& be) {
  FilterElems<S> elems(n, m.nx);
  const std::size_t t = m.t;
  Launch k;
  k.count = n;
  k.body = [&](std::size_t i) {
    if (i < t)
      elems.set(i, make_filter_element(m, i + 1, ys[i]));
    else
      elems.set_identity(i);
  };
  k.num_classes = 3;
  k.cost_class = [t](std::size_t i) {
    if (i == 0) return 0u;
    return i < t ? 1u : 2u;
  };
  k.representative = [t](unsigned cls) -> std::size_t {
    switch (cls) {
      case 0: return 0;
      case 1: return 1;
      default: return t;
    }
  };
  k.write_slots = [&elems](std::size_t i, std::vector<std::uint64_t>& out) {
    out.push_back(elems.slot_id(i));
  };
  be.run(k);
  return elems;
}

// The shifted series (a_2, ..., a_T, e, ..., e) whose reversed scan yields
// the backward information pairs (η_{k|k+1:T}, J_{k|k+1:T}) at slot k-1.
template <typename S>
FilterElems<S> build_shifted_filter_elems(const Lgssm<S>& m,
                                          const Measurements<S>& ys,
                                          std::size_t n, Backend& be) {
  FilterElems<S> elems(n, m.nx);
  const std::size_t t = m.t;
  Launch k;
  k.count = n;
  k.body = [&](std::size_t i) {
    if (i + 2 <= t)
      elems.set(i, make_filter_element(m, i + 2, ys[i + 1]));
    else
      elems.set_identity(i);
  };
  k.num_classes = 2;
  k.cost_class = [t](std::size_t i) { return i + 2 <= t ? 0u : 1u; };
  k.representative = [t](unsigned cls) -> std::size_t {
    return cls == 0 ? 0 : t - 1;
  };
  k.write_slots = [&elems](std::size_t i, std::vector<std::uint64_t>& out) {
    out.push_back(elems.slot_id(i));
  };
  be.run(k);
  return elems;
}

// Extracts (b_k^+, C_k^+) of the scanned elements as filtered stats.
template <typename S>
std::vector<GaussianStats<S>> extract_filter_stats(const FilterElems<S>& elems,
                                                   std::size_t t, int nx,
                                                   Backend& be) {
  std::vector<GaussianStats<S>> out;
  out.reserve(t);
  for (std::size_t i = 0; i < t; ++i)
    out.push_back(GaussianStats<S>{Vec<S>(nx), Mat<S>(nx, nx)});
  Launch k;
  k.count = t;
  k.body = [&](std::size_t i) {
    mat_copy(out[i].mean.view(), elems.b(i));
    mat_copy(out[i].cov.view(), elems.c(i));
  };
  be.run(k);
  return out;
}

// PKF, Algorithm 5: parallel element init, padded forward scan, extraction.
template <typename S>
std::vector<GaussianStats<S>> pkf_run(const Lgssm<S>& m,
                                      const Measurements<S>& ys,
                                      const ScanSpec& spec, Backend& be) {
  const std::size_t n = kpar_detail::padded_len<S>(spec, m.t);
  FilterElems<S> elems = build_filter_elems(m, ys, n, be);
  scan_forward(spec, elems, be);
  return extract_filter_stats(elems, m.t, m.nx, be);
}

// Builds smoothing elements from the filtered stats (padding is neutral).
template <typename S>
SmootherElems<S> build_smoother_elems(const Lgssm<S>& m,
                                      const std::vector<GaussianStats<S>>& filtered,
                                      std::size_t n, Backend& be) {
  SmootherElems<S> elems(n, m.nx);
  const std::size_t t = m.t;
  Launch k;
  k.count = n;
  k.body = [&](std::size_t i) {
    if (i < t)
      elems.set(i, make_smoother_element(m, filtered[i], i + 1, t));
    else
      elems.set_identity(i);
  };
  k.num_classes = 3;
  k.cost_class = [t](std::size_t i) {
    if (i + 1 < t) return 0u;
    return i + 1 == t ? 1u : 2u;
  };
  k.representative = [t](unsigned cls) -> std::size_t {
    switch (cls) {
      case 0: return 0;
      case 1: return t - 1;
      default: return t;
    }
  };
  k.write_slots = [&elems](std::size_t i, std::vector<std::uint64_t>& out) {
    out.push_back(elems.slot_id(i));
  };
  be.run(k);
  return elems;
}

// PRTS, Algorithm 6: PKF, then a reversed scan of smoothing elements.
template <typename S>
std::vector<GaussianStats<S>> prts_run(const Lgssm<S>& m,
                                       const Measurements<S>& ys,
                                       const ScanSpec& spec, Backend& be) {
  auto filtered = pkf_run(m, ys, spec, be);
  const std::size_t n = kpar_detail::padded_len<S>(spec, m.t);
  SmootherElems<S> elems = build_smoother_elems(m, filtered, n, be);
  scan_reverse(spec, elems, be);

  const std::size_t t = m.t;
  const int nx = m.nx;
  std::vector<GaussianStats<S>> out;
  out.reserve(t);
  for (std::size_t i = 0; i < t; ++i)
    out.push_back(GaussianStats<S>{Vec<S>(nx), Mat<S>(nx, nx)});
  Launch k;
  k.count = t;
  k.body = [&](std::size_t i) {
    mat_copy(out[i].mean.view(), elems.g(i));
    mat_copy(out[i].cov.view(), elems.l(i));
  };
  be.run(k);
  return out;
}

// Two-filter combination of filtered stats with the reversed-scan backward
// information fields, one tf_combine per step.
template <typename S>
std::vector<GaussianStats<S>> combine_tf_stats(
    const std::vector<GaussianStats<S>>& filtered, const FilterElems<S>& bwd,
    std::size_t t, int nx, Backend& be) {
  std::vector<GaussianStats<S>> out;
  out.reserve(t);
  for (std::size_t i = 0; i < t; ++i)
    out.push_back(GaussianStats<S>{Vec<S>(nx), Mat<S>(nx, nx)});
  Launch k;
  k.count = t;
  k.body = [&](std::size_t i) {
    InfoStats<S> info{Vec<S>(nx), Mat<S>(nx, nx)};
    mat_copy(info.eta.view(), bwd.eta(i));
    mat_copy(info.jmat.view(), bwd.jmat(i));
    out[i] = tf_combine(filtered[i], info);
  };
  be.run(k);
  return out;
}

// PTFS, Algorithm 7. The forward scan runs on be_fwd and the reversed scan
// on be_bwd; with devices=2 these model two independent accelerators, each
// constructing its own elements, with the backward results copied to the
// combining device before the final combination launch.
template <typename S>
std::vector<GaussianStats<S>> ptfs_run(const Lgssm<S>& m,
                                       const Measurements<S>& ys,
                                       const ScanSpec& spec, Backend& be_fwd,
                                       Backend& be_bwd, int devices = 1) {
  const std::size_t t = m.t;
  const int nx = m.nx;
  const std::size_t n = kpar_detail::padded_len<S>(spec, t);

  FilterElems<S> fwd = build_filter_elems(m, ys, n, be_fwd);
  scan_forward(spec, fwd, be_fwd);
  auto filtered = extract_filter_stats(fwd, t, nx, be_fwd);

  FilterElems<S> bwd = build_shifted_filter_elems(m, ys, n, be_bwd);
  scan_reverse(spec, bwd, be_bwd);

  FilterElems<S>* merged = &bwd;
  FilterElems<S> copy(0, nx);
  if (devices == 2) {
    // explicit device-to-device transfer of the backward results
    copy = FilterElems<S>(t, nx);
    Launch k;
    k.count = t;
    k.body = [&](std::size_t i) { copy.assign(i, bwd, i); };
    k.write_slots = [&](std::size_t i, std::vector<std::uint64_t>& out) {
      out.push_back(copy.slot_id(i));
    };
    be_fwd.run(k);
    merged = &copy;
  }
  return combine_tf_stats(filtered, *merged, t, nx, be_fwd);
}

}  // namespace parascan
