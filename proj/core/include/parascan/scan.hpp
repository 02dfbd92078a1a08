#pragma once

// Generic all-prefix-sum (scan) algorithms over an associative operator:
// sequential, Hillis-Steele, Blelloch, in-place Ladner-Fischer, and the
// Sengupta hybrid (A: N=1, B: N>1). Element storage is accessed through a
// handle type H providing
//
//   size(), make_like(n), set_identity(i), assign(dst, src, si),
//   combine(dst, l, li, r, ri)   // elems[dst] = elems[li] (x) elems[ri]
//   slot_id(i)                   // unique storage slot, for write checks
//
// Reverse scans (suffix combinations) reuse the same kernels through an
// index-reversal adapter; the series is never physically reversed.

#include <atomic>
#include <cstdint>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "parascan/backend.hpp"
#include "parascan/flops.hpp"
#include "parascan/mat.hpp"

namespace parascan {

struct ContractViolation : std::logic_error {
  using std::logic_error::logic_error;
};

enum class ScanAlg {
  Sequential,
  HillisSteele,
  Blelloch,
  InplaceLaFi,
  SenguptaA,
  SenguptaB,
};

struct ScanSpec {
  ScanAlg alg = ScanAlg::InplaceLaFi;
  std::size_t sengupta_n = 1;  // threshold N for SenguptaB (power of 2)
};

inline const char* to_string(ScanAlg a) {
  switch (a) {
    case ScanAlg::Sequential: return "seqscan";
    case ScanAlg::HillisSteele: return "hillis_steele";
    case ScanAlg::Blelloch: return "blelloch";
    case ScanAlg::InplaceLaFi: return "inplace_lafi";
    case ScanAlg::SenguptaA: return "sengupta_a";
    case ScanAlg::SenguptaB: return "sengupta_b";
  }
  return "?";
}

inline bool is_pow2(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

inline std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

inline unsigned log2_exact(std::size_t n) {
  unsigned l = 0;
  while ((std::size_t(1) << l) < n) ++l;
  return l;
}

namespace detail {
inline std::uint64_t next_buffer_id() {
  static std::atomic<std::uint64_t> c{1};
  return c.fetch_add(1);
}
inline std::uint64_t slot(std::uint64_t buffer_id, std::size_t i) {
  return (buffer_id << 40) | std::uint64_t(i);
}
}  // namespace detail

// ---------------------------------------------------------------------------
// Basic element arrays

// 64-bit integers under addition; the combine charges one unit-cost flop so
// scans over it expose their work/span structure exactly.
class Int64Elems {
 public:
  explicit Int64Elems(std::size_t n) : id_(detail::next_buffer_id()), v_(n, 0) {}
  std::size_t size() const { return v_.size(); }
  Int64Elems make_like(std::size_t n) const { return Int64Elems(n); }
  void set_identity(std::size_t i) { v_[i] = 0; }
  void assign(std::size_t dst, const Int64Elems& src, std::size_t si) {
    v_[dst] = src.v_[si];
  }
  void combine(std::size_t dst, const Int64Elems& l, std::size_t li,
               const Int64Elems& r, std::size_t ri) {
    ++flop_tally().adds;  // unit-cost operator
    v_[dst] = l.v_[li] + r.v_[ri];
  }
  std::uint64_t slot_id(std::size_t i) const { return detail::slot(id_, i); }
  std::int64_t& operator[](std::size_t i) { return v_[i]; }
  std::int64_t operator[](std::size_t i) const { return v_[i]; }

 private:
  std::uint64_t id_;
  std::vector<std::int64_t> v_;
};

// Square matrices under matrix multiplication (combine(l, r) = l * r).
template <typename S>
class MatMulElems {
 public:
  MatMulElems(std::size_t n, int dim)
      : id_(detail::next_buffer_id()), dim_(dim), v_(n * size_t(dim) * dim, S(0)), n_(n) {}
  std::size_t size() const { return n_; }
  int dim() const { return dim_; }
  MatMulElems make_like(std::size_t n) const { return MatMulElems(n, dim_); }
  MatView<S> at(std::size_t i) {
    return {v_.data() + i * size_t(dim_) * dim_, dim_, dim_};
  }
  CMatView<S> at(std::size_t i) const {
    return {v_.data() + i * size_t(dim_) * dim_, dim_, dim_};
  }
  void set_identity(std::size_t i) { mat_set_identity(at(i)); }
  void assign(std::size_t dst, const MatMulElems& src, std::size_t si) {
    mat_copy(at(dst), src.at(si));
  }
  void combine(std::size_t dst, const MatMulElems& l, std::size_t li,
               const MatMulElems& r, std::size_t ri) {
    ScratchMat<S> tmp;
    auto t = tmp.view(dim_, dim_);
    mat_mul(t, l.at(li), r.at(ri));
    mat_copy(at(dst), CMatView<S>(t));
  }
  std::uint64_t slot_id(std::size_t i) const { return detail::slot(id_, i); }

 private:
  std::uint64_t id_;
  int dim_;
  std::vector<S> v_;
  std::size_t n_;
};

// ---------------------------------------------------------------------------
// Reverse adapter: logical index i maps to physical size()-1-i and operand
// order flips, which turns a forward inclusive scan into the reversed scan
// s̄_k = a_k (x) ... (x) a_T over the underlying storage.
template <class E>
class Reversed {
 public:
  explicit Reversed(E& e) : ref_(&e), n_(e.size()) {}
  std::size_t size() const { return n_; }
  Reversed make_like(std::size_t n) const {
    Reversed r;
    r.own_ = std::make_unique<E>(base().make_like(n));
    r.n_ = n;
    return r;
  }
  void set_identity(std::size_t i) { base().set_identity(map(i)); }
  void assign(std::size_t dst, const Reversed& src, std::size_t si) {
    base().assign(map(dst), src.base(), src.map(si));
  }
  void combine(std::size_t dst, const Reversed& l, std::size_t li,
               const Reversed& r, std::size_t ri) {
    base().combine(map(dst), r.base(), r.map(ri), l.base(), l.map(li));
  }
  std::uint64_t slot_id(std::size_t i) const { return base().slot_id(map(i)); }

 private:
  Reversed() = default;
  E& base() const { return ref_ ? *ref_ : *own_; }
  std::size_t map(std::size_t i) const { return n_ - 1 - i; }
  E* ref_ = nullptr;
  std::unique_ptr<E> own_;
  std::size_t n_ = 0;
};

// ---------------------------------------------------------------------------
// Padding: extend to the next power of 2 with neutral elements; the first T
// forward prefix sums (and, since the identity is two-sided, the reversed
// prefix sums for k <= T) are unchanged.
template <class E>
E pad_pow2(const E& in) {
  const std::size_t t = in.size();
  const std::size_t tp = next_pow2(t);
  E out = in.make_like(tp);
  for (std::size_t i = 0; i < t; ++i) out.assign(i, in, i);
  for (std::size_t i = t; i < tp; ++i) out.set_identity(i);
  return out;
}

// ---------------------------------------------------------------------------
// Algorithm kernels

namespace scan_detail {

template <class H>
void sequential(H& a, Backend& be) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  Launch k;
  k.count = n - 1;
  k.sequential_chain = true;
  k.body = [&a](std::size_t i) { a.combine(i + 1, a, i, a, i + 1); };
  k.write_slots = [&a](std::size_t i, std::vector<std::uint64_t>& out) {
    out.push_back(a.slot_id(i + 1));
  };
  be.run(k);
}

// Hillis-Steele on the segment [base, base+n) of buf, with ping-pong double
// buffering (storage 2n). n must be a power of 2.
template <class H>
void hillis_steele_segment(H& buf, std::size_t base, std::size_t n,
                           Backend& be) {
  if (n <= 1) return;
  H aux = buf.make_like(n);
  H* cur = &buf;
  H* nxt = &aux;
  std::size_t cur_base = base, nxt_base = 0;
  const unsigned levels = log2_exact(n);
  for (unsigned d = 0; d < levels; ++d) {
    const std::size_t delta = std::size_t(1) << d;
    Launch k;
    k.count = n;
    k.body = [cur, nxt, cur_base, nxt_base, delta](std::size_t i) {
      if (i >= delta)
        nxt->combine(nxt_base + i, *cur, cur_base + i - delta, *cur,
                     cur_base + i);
      else
        nxt->assign(nxt_base + i, *cur, cur_base + i);
    };
    k.num_classes = 2;
    k.cost_class = [delta](std::size_t i) { return i >= delta ? 0u : 1u; };
    k.representative = [delta](unsigned cls) {
      return cls == 0 ? delta : std::size_t(0);
    };
    k.write_slots = [nxt, nxt_base](std::size_t i,
                                    std::vector<std::uint64_t>& out) {
      out.push_back(nxt->slot_id(nxt_base + i));
    };
    be.run(k);
    std::swap(cur, nxt);
    std::swap(cur_base, nxt_base);
  }
  if (cur != &buf) {
    Launch k;  // result landed in the aux buffer; copy back (no flops)
    k.count = n;
    k.body = [&buf, base, cur, cur_base](std::size_t i) {
      buf.assign(base + i, *cur, cur_base + i);
    };
    k.write_slots = [&buf, base](std::size_t i,
                                 std::vector<std::uint64_t>& out) {
      out.push_back(buf.slot_id(base + i));
    };
    be.run(k);
  }
}

template <class H>
void upsweep(H& a, std::size_t n, Backend& be) {
  const unsigned levels = log2_exact(n);
  for (unsigned d = 0; d < levels; ++d) {
    const std::size_t d1 = std::size_t(1) << d;
    const std::size_t d2 = d1 << 1;
    Launch k;
    k.count = n / d2;
    k.body = [&a, d1, d2](std::size_t m) {
      const std::size_t j = m * d2 + d1 - 1;
      const std::size_t kk = m * d2 + d2 - 1;
      a.combine(kk, a, j, a, kk);
    };
    k.write_slots = [&a, d2](std::size_t m, std::vector<std::uint64_t>& out) {
      out.push_back(a.slot_id(m * d2 + d2 - 1));
    };
    be.run(k);
  }
}

template <class H>
void blelloch(H& a, Backend& be) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  const unsigned levels = log2_exact(n);

  H orig = a.make_like(n);
  {
    Launch k;  // keep the input for the final inclusive pass
    k.count = n;
    k.body = [&](std::size_t i) { orig.assign(i, a, i); };
    k.write_slots = [&orig](std::size_t i, std::vector<std::uint64_t>& out) {
      out.push_back(orig.slot_id(i));
    };
    be.run(k);
  }

  upsweep(a, n, be);

  {
    Launch k;  // a_T <- neutral element
    k.count = 1;
    k.body = [&a, n](std::size_t) { a.set_identity(n - 1); };
    k.write_slots = [&a, n](std::size_t, std::vector<std::uint64_t>& out) {
      out.push_back(a.slot_id(n - 1));
    };
    be.run(k);
  }

  H tmp = a.make_like(n / 2);
  for (unsigned d = levels; d-- > 0;) {
    const std::size_t d1 = std::size_t(1) << d;
    const std::size_t d2 = d1 << 1;
    Launch k;
    k.count = n / d2;
    k.body = [&a, &tmp, d1, d2](std::size_t m) {
      const std::size_t j = m * d2 + d1 - 1;
      const std::size_t kk = m * d2 + d2 - 1;
      tmp.assign(m, a, j);           // t <- a_j
      a.assign(j, a, kk);            // a_j <- a_k
      a.combine(kk, a, kk, tmp, m);  // a_k <- a_k (x) t
    };
    k.write_slots = [&a, &tmp, d1, d2](std::size_t m,
                                       std::vector<std::uint64_t>& out) {
      out.push_back(tmp.slot_id(m));
      out.push_back(a.slot_id(m * d2 + d1 - 1));
      out.push_back(a.slot_id(m * d2 + d2 - 1));
    };
    be.run(k);
  }

  {
    Launch k;  // final pass: inclusive = exclusive (x) original
    k.count = n;
    k.body = [&](std::size_t i) { a.combine(i, a, i, orig, i); };
    k.write_slots = [&a](std::size_t i, std::vector<std::uint64_t>& out) {
      out.push_back(a.slot_id(i));
    };
    be.run(k);
  }
}

template <class H>
void inplace_lafi(H& a, Backend& be) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  const unsigned levels = log2_exact(n);
  upsweep(a, n, be);
  for (unsigned d = levels; d-- > 0;) {
    const std::size_t d1 = std::size_t(1) << d;
    const std::size_t d2 = d1 << 1;
    const std::size_t blocks = n / d2;
    if (blocks <= 1) continue;  // level has no interior blocks
    Launch k;
    k.count = blocks - 1;
    k.body = [&a, d1, d2](std::size_t m) {
      const std::size_t i = (m + 1) * d2 - 1;
      const std::size_t j = i + d1;
      a.combine(j, a, i, a, j);
    };
    k.write_slots = [&a, d1, d2](std::size_t m,
                                 std::vector<std::uint64_t>& out) {
      out.push_back(a.slot_id((m + 1) * d2 - 1 + d1));
    };
    be.run(k);
  }
}

template <class H>
void sengupta(H& a, std::size_t threshold_n, Backend& be) {
  const std::size_t n = a.size();
  if (n <= 1) return;
  if (threshold_n >= n) {
    // degenerate threshold: plain Hillis-Steele on the whole series
    hillis_steele_segment(a, 0, n, be);
    return;
  }
  const unsigned levels = log2_exact(n);
  const unsigned dstar = levels - log2_exact(threshold_n);

  // level d (1..dstar) lives in one arena at offset off[d]; level 0 is the
  // input array itself
  std::vector<std::size_t> off(dstar + 1, 0);
  std::size_t total = 0;
  for (unsigned d = 1; d <= dstar; ++d) {
    off[d] = total;
    total += n >> d;
  }
  H arena = a.make_like(total);

  for (unsigned d = 1; d <= dstar; ++d) {  // reduce passes
    Launch k;
    k.count = n >> d;
    const std::size_t dst_off = off[d];
    const std::size_t src_off = d == 1 ? 0 : off[d - 1];
    H* dst = &arena;
    H* src = d == 1 ? &a : &arena;
    k.body = [dst, src, dst_off, src_off](std::size_t m) {
      dst->combine(dst_off + m, *src, src_off + 2 * m, *src,
                   src_off + 2 * m + 1);
    };
    k.write_slots = [dst, dst_off](std::size_t m,
                                   std::vector<std::uint64_t>& out) {
      out.push_back(dst->slot_id(dst_off + m));
    };
    be.run(k);
  }

  hillis_steele_segment(arena, off[dstar], n >> dstar, be);

  for (unsigned d = dstar; d-- > 0;) {  // down-sweep distribution
    Launch k;
    k.count = n >> d;
    const std::size_t dst_off = d == 0 ? 0 : off[d];
    const std::size_t par_off = off[d + 1];
    H* dst = d == 0 ? &a : &arena;
    H* par = &arena;
    k.body = [dst, par, dst_off, par_off](std::size_t m) {
      if (m == 0) return;            // first slot already holds its prefix
      if ((m & 1) == 0)              // 1-based odd index: combine with parent
        dst->combine(dst_off + m, *par, par_off + m / 2 - 1, *dst,
                     dst_off + m);
      else                           // 1-based even index: copy from parent
        dst->assign(dst_off + m, *par, par_off + (m - 1) / 2);
    };
    k.num_classes = 3;
    k.cost_class = [](std::size_t m) {
      if (m == 0) return 0u;
      return (m & 1) == 0 ? 1u : 2u;
    };
    k.representative = [](unsigned cls) -> std::size_t {
      switch (cls) {
        case 0: return 0;
        case 1: return 2;
        default: return 1;
      }
    };
    k.write_slots = [dst, dst_off](std::size_t m,
                                   std::vector<std::uint64_t>& out) {
      if (m != 0) out.push_back(dst->slot_id(dst_off + m));
    };
    be.run(k);
  }
}

}  // namespace scan_detail

// In-place inclusive forward scan. Parallel algorithms require a power-of-2
// length (pad first); Sequential accepts any length.
template <class H>
void scan_forward(const ScanSpec& spec, H& a, Backend& be) {
  const std::size_t n = a.size();
  if (n == 0) throw ContractViolation("scan of empty series");
  if (n == 1) return;
  if (spec.alg == ScanAlg::Sequential) {
    scan_detail::sequential(a, be);
    return;
  }
  if (!is_pow2(n)) throw ContractViolation("parallel scan length not a power of 2");
  switch (spec.alg) {
    case ScanAlg::HillisSteele:
      scan_detail::hillis_steele_segment(a, 0, n, be);
      break;
    case ScanAlg::Blelloch:
      scan_detail::blelloch(a, be);
      break;
    case ScanAlg::InplaceLaFi:
      scan_detail::inplace_lafi(a, be);
      break;
    case ScanAlg::SenguptaA:
      scan_detail::sengupta(a, 1, be);
      break;
    case ScanAlg::SenguptaB: {
      std::size_t tn = spec.sengupta_n;
      if (tn < 2 || !is_pow2(tn))
        throw ContractViolation("sengupta_n must be a power of 2, >= 2");
      scan_detail::sengupta(a, tn, be);
      break;
    }
    default:
      break;
  }
}

// In-place reversed scan: slot k ends up holding a_k (x) ... (x) a_T.
template <class E>
void scan_reverse(const ScanSpec& spec, E& a, Backend& be) {
  Reversed<E> r(a);
  scan_forward(spec, r, be);
}

// ---------------------------------------------------------------------------
// Instrumented work/span counts: number of (x) applications and number of
// launches that perform at least one (x), for a unit-cost operator.
struct WorkSpan {
  std::uint64_t work = 0;
  std::uint64_t span_levels = 0;
};

namespace scan_detail {
class PerLaunchTallyBackend final : public Backend {
 public:
  std::vector<std::uint64_t> launch_flops;
  void run(const Launch& launch) override {
    const std::uint64_t before = flop_tally().total();
    for (std::size_t i = 0; i < launch.count; ++i) launch.body(i);
    launch_flops.push_back(flop_tally().total() - before);
  }
};
}  // namespace scan_detail

inline WorkSpan count_work_and_span(const ScanSpec& spec, std::size_t t) {
  if (!is_pow2(t)) throw ContractViolation("work/span count needs power-of-2 T");
  Int64Elems elems(t);
  for (std::size_t i = 0; i < t; ++i) elems[i] = std::int64_t(i + 1);
  scan_detail::PerLaunchTallyBackend be;
  scan_forward(spec, elems, be);
  WorkSpan ws;
  for (auto f : be.launch_flops) {
    ws.work += f;
    if (f > 0) ++ws.span_levels;
  }
  return ws;
}

}  // namespace parascan
