#pragma once

// Scan elements for the parallel Kalman methods: the filtering element
// (A, b, C, η, J) with the associative operator of Lemma 1, and the
// smoothing element (E, g, L) with the operator of Lemma 2. Storage is
// structure-of-arrays so scan kernels write disjoint slots.
//
// The neutral element for filtering is (I, 0, 0, 0, 0): a verified two-sided
// identity under the Lemma 1 operator, used for padding and for slots the
// pseudocode fills with its element e (whose extracted (η, J) fields agree).

#include <cstddef>
#include <cstdint>
#include <vector>

#include "parascan/lgssm.hpp"
#include "parascan/kalman_seq.hpp"
#include "parascan/mat.hpp"
#include "parascan/scan.hpp"

namespace parascan {

template <typename S>
struct FilterElement {
  Mat<S> a;
  Vec<S> b;
  Mat<S> c;
  Vec<S> eta;
  Mat<S> jmat;
};

template <typename S>
struct SmootherElement {
  Mat<S> e;
  Vec<S> g;
  Mat<S> l;
};

template <typename S>
FilterElement<S> filter_identity(int nx) {
  FilterElement<S> e{Mat<S>::identity(nx), Vec<S>(nx), Mat<S>(nx, nx),
                     Vec<S>(nx), Mat<S>(nx, nx)};
  return e;
}

template <typename S>
SmootherElement<S> smoother_identity(int nx) {
  return {Mat<S>::identity(nx), Vec<S>(nx), Mat<S>(nx, nx)};
}

// Filtering element for step k (1-based) per the PKF initialization
// equations; the k=1 element absorbs the prior via one predict/update.
template <typename S>
FilterElement<S> make_filter_element(const Lgssm<S>& m, std::size_t k,
                                     const Vec<S>& y) {
  const int nx = m.nx, ny = m.ny;
  const auto& h = m.h[k - 1];
  const auto& d = m.d[k - 1];
  const auto& r = m.r[k - 1];
  const auto& f = m.f[k - 1];
  FilterElement<S> e{Mat<S>(nx, nx), Vec<S>(nx), Mat<S>(nx, nx), Vec<S>(nx),
                     Mat<S>(nx, nx)};

  ScratchMat<S> s1, s2, s3, s4, s5;
  Mat<S> sk(ny, ny);  // innovation-like covariance of the element
  Vec<S> v(ny);       // y - H ref - d with ref = u_{k-1} (k>1) or x̄_{1|0}

  if (k == 1) {
    GaussianStats<S> prior{m.prior_mean, m.prior_cov};
    GaussianStats<S> pred = kf_predict(prior, m, 1);

    auto hp = s1.view(ny, nx);  // H P_{1|0}
    mat_mul(hp, h.view(), pred.cov.view());
    kseq_detail::mat_mul_nt(sk.view(), CMatView<S>(hp), h.view());
    mat_add(sk.view(), sk.view(), r.view());
    mat_symmetrize(sk.view());

    auto kt = s2.view(ny, nx);  // K^T = S^{-1} H P_{1|0}
    solve_spd(sk.view(), CMatView<S>(hp), kt);
    auto gain = s3.view(nx, ny);
    mat_transpose(gain, CMatView<S>(kt));

    mat_mul(v.view(), h.view(), pred.mean.view());
    mat_sub(v.view(), y.view(), v.view());
    mat_sub(v.view(), v.view(), d.view());

    mat_set_zero(e.a.view());
    mat_mul(e.b.view(), CMatView<S>(gain), v.view());
    mat_add(e.b.view(), e.b.view(), pred.mean.view());

    auto ks = s4.view(nx, ny);  // K S
    mat_mul(ks, CMatView<S>(gain), sk.view());
    auto ksk = s5.view(nx, nx);  // K S K^T
    kseq_detail::mat_mul_nt(ksk, CMatView<S>(ks), CMatView<S>(gain));
    mat_sub(e.c.view(), pred.cov.view(), CMatView<S>(ksk));
    mat_symmetrize(e.c.view());
  } else {
    const auto& q = m.q[k - 1];
    const auto& u = m.u[k - 1];

    auto hq = s1.view(ny, nx);  // H Q_{k-1}
    mat_mul(hq, h.view(), q.view());
    kseq_detail::mat_mul_nt(sk.view(), CMatView<S>(hq), h.view());
    mat_add(sk.view(), sk.view(), r.view());
    mat_symmetrize(sk.view());

    auto kt = s2.view(ny, nx);  // K^T = S^{-1} H Q
    solve_spd(sk.view(), CMatView<S>(hq), kt);
    auto gain = s3.view(nx, ny);
    mat_transpose(gain, CMatView<S>(kt));

    auto kh = s4.view(nx, nx);  // K H
    mat_mul(kh, CMatView<S>(gain), h.view());

    auto khf = s5.view(nx, nx);
    mat_mul(khf, CMatView<S>(kh), f.view());
    mat_sub(e.a.view(), f.view(), CMatView<S>(khf));

    mat_mul(v.view(), h.view(), u.view());
    mat_sub(v.view(), y.view(), v.view());
    mat_sub(v.view(), v.view(), d.view());
    mat_mul(e.b.view(), CMatView<S>(gain), v.view());
    mat_add(e.b.view(), e.b.view(), u.view());

    auto khq = s5.view(nx, nx);
    mat_mul(khq, CMatView<S>(kh), q.view());
    mat_sub(e.c.view(), q.view(), CMatView<S>(khq));
    mat_symmetrize(e.c.view());
  }

  // (η, J) = F^T H^T S^{-1} (v | H F) per the shared information term
  {
    auto sv = s1.view(ny, 1);  // S^{-1} v
    solve_spd(sk.view(), v.view(), sv);
    auto hv = s2.view(nx, 1);
    kseq_detail::mat_mul_tn(hv, h.view(), CMatView<S>(sv));
    kseq_detail::mat_mul_tn(e.eta.view(), f.view(), CMatView<S>(hv));

    auto hf = s2.view(ny, nx);  // H F
    mat_mul(hf, h.view(), f.view());
    auto w = s3.view(ny, nx);  // S^{-1} H F
    solve_spd(sk.view(), CMatView<S>(hf), w);
    auto hfw = s4.view(nx, nx);  // (H F)^T S^{-1} (H F)
    kseq_detail::mat_mul_tn(hfw, CMatView<S>(hf), CMatView<S>(w));
    mat_copy(e.jmat.view(), CMatView<S>(hfw));
    mat_symmetrize(e.jmat.view());
  }
  return e;
}

// Smoothing element for step k (1-based) of a length-t series.
template <typename S>
SmootherElement<S> make_smoother_element(const Lgssm<S>& m,
                                         const GaussianStats<S>& filtered,
                                         std::size_t k, std::size_t t) {
  const int nx = m.nx;
  SmootherElement<S> e{Mat<S>(nx, nx), Vec<S>(nx), Mat<S>(nx, nx)};
  if (k == t) {
    mat_set_zero(e.e.view());
    mat_copy(e.g.view(), filtered.mean.view());
    mat_copy(e.l.view(), filtered.cov.view());
    return e;
  }
  const auto& f = m.f[k];  // F_k maps step k to k+1
  const auto& q = m.q[k];
  const auto& u = m.u[k];
  ScratchMat<S> s1, s2, s3;

  auto fp = s1.view(nx, nx);  // F P_{k|k}
  mat_mul(fp, f.view(), filtered.cov.view());
  auto pp = s2.view(nx, nx);  // F P F^T + Q
  kseq_detail::mat_mul_nt(pp, CMatView<S>(fp), f.view());
  mat_add(pp, CMatView<S>(pp), q.view());
  mat_symmetrize(pp);

  auto et = s3.view(nx, nx);  // E^T = (F P F^T + Q)^{-1} F P
  solve_spd(CMatView<S>(pp), CMatView<S>(fp), et);
  mat_transpose(e.e.view(), CMatView<S>(et));

  auto fx = s1.view(nx, 1);  // F x̄ + u
  mat_mul(fx, f.view(), filtered.mean.view());
  mat_add(fx, CMatView<S>(fx), u.view());
  mat_mul(e.g.view(), e.e.view(), CMatView<S>(fx));
  mat_sub(e.g.view(), filtered.mean.view(), e.g.view());

  auto fp2 = s1.view(nx, nx);  // F P again (scratch was reused)
  mat_mul(fp2, f.view(), filtered.cov.view());
  auto efp = s2.view(nx, nx);
  mat_mul(efp, e.e.view(), CMatView<S>(fp2));
  mat_sub(e.l.view(), filtered.cov.view(), CMatView<S>(efp));
  mat_symmetrize(e.l.view());
  return e;
}

// ---------------------------------------------------------------------------
// Structure-of-arrays element storage implementing the scan handle API.

template <typename S>
class FilterElems {
 public:
  FilterElems(std::size_t n, int nx)
      : id_(detail::next_buffer_id()),
        nx_(nx),
        n_(n),
        a_(n * sq(), S(0)),
        b_(n * size_t(nx), S(0)),
        c_(n * sq(), S(0)),
        eta_(n * size_t(nx), S(0)),
        j_(n * sq(), S(0)) {}

  std::size_t size() const { return n_; }
  int dim() const { return nx_; }
  FilterElems make_like(std::size_t n) const { return FilterElems(n, nx_); }
  std::uint64_t slot_id(std::size_t i) const { return detail::slot(id_, i); }

  MatView<S> a(std::size_t i) { return {a_.data() + i * sq(), nx_, nx_}; }
  MatView<S> b(std::size_t i) { return {b_.data() + i * nx_, nx_, 1}; }
  MatView<S> c(std::size_t i) { return {c_.data() + i * sq(), nx_, nx_}; }
  MatView<S> eta(std::size_t i) { return {eta_.data() + i * nx_, nx_, 1}; }
  MatView<S> jmat(std::size_t i) { return {j_.data() + i * sq(), nx_, nx_}; }
  CMatView<S> a(std::size_t i) const { return {a_.data() + i * sq(), nx_, nx_}; }
  CMatView<S> b(std::size_t i) const { return {b_.data() + i * nx_, nx_, 1}; }
  CMatView<S> c(std::size_t i) const { return {c_.data() + i * sq(), nx_, nx_}; }
  CMatView<S> eta(std::size_t i) const {
    return {eta_.data() + i * nx_, nx_, 1};
  }
  CMatView<S> jmat(std::size_t i) const {
    return {j_.data() + i * sq(), nx_, nx_};
  }

  void set_identity(std::size_t i) {
    mat_set_identity(a(i));
    mat_set_zero(b(i));
    mat_set_zero(c(i));
    mat_set_zero(eta(i));
    mat_set_zero(jmat(i));
  }

  void set(std::size_t i, const FilterElement<S>& e) {
    mat_copy(a(i), e.a.view());
    mat_copy(b(i), e.b.view());
    mat_copy(c(i), e.c.view());
    mat_copy(eta(i), e.eta.view());
    mat_copy(jmat(i), e.jmat.view());
  }

  FilterElement<S> get(std::size_t i) const {
    FilterElement<S> e{Mat<S>(nx_, nx_), Vec<S>(nx_), Mat<S>(nx_, nx_),
                       Vec<S>(nx_), Mat<S>(nx_, nx_)};
    mat_copy(e.a.view(), a(i));
    mat_copy(e.b.view(), b(i));
    mat_copy(e.c.view(), c(i));
    mat_copy(e.eta.view(), eta(i));
    mat_copy(e.jmat.view(), jmat(i));
    return e;
  }

  void assign(std::size_t dst, const FilterElems& src, std::size_t si) {
    mat_copy(a(dst), src.a(si));
    mat_copy(b(dst), src.b(si));
    mat_copy(c(dst), src.c(si));
    mat_copy(eta(dst), src.eta(si));
    mat_copy(jmat(dst), src.jmat(si));
  }

  // Lemma 1 operator; fully alias-safe (dst may be the li or ri slot).
  void combine(std::size_t dst, const FilterElems& l, std::size_t li,
               const FilterElems& r, std::size_t ri) {
    const int nx = nx_;
    ScratchMat<S> sm, sn, s1, s2, s3, s4, s5, s6;

    auto mm = sm.view(nx, nx);  // I + C_i J_j
    mat_mul(mm, l.c(li), r.jmat(ri));
    for (int i = 0; i < nx; ++i) mm(i, i) += S(1);
    std::array<int, kMaxDim> mperm;
    lu_factor_inplace(mm, mperm.data());

    auto nn = sn.view(nx, nx);  // I + J_j C_i
    mat_mul(nn, r.jmat(ri), l.c(li));
    for (int i = 0; i < nx; ++i) nn(i, i) += S(1);
    std::array<int, kMaxDim> nperm;
    lu_factor_inplace(nn, nperm.data());

    // A' = A_j M^{-1} A_i
    auto x1 = s1.view(nx, nx);
    lu_solve(CMatView<S>(mm), mperm.data(), l.a(li), x1);
    auto na = s2.view(nx, nx);
    mat_mul(na, r.a(ri), CMatView<S>(x1));

    // b' = A_j M^{-1} (b_i + C_i η_j) + b_j
    auto bc = s1.view(nx, 1);
    mat_mul(bc, l.c(li), r.eta(ri));
    mat_add(bc, CMatView<S>(bc), l.b(li));
    auto x2 = s3.view(nx, 1);
    lu_solve(CMatView<S>(mm), mperm.data(), CMatView<S>(bc), x2);
    auto nb = s4.view(nx, 1);
    mat_mul(nb, r.a(ri), CMatView<S>(x2));
    mat_add(nb, CMatView<S>(nb), r.b(ri));

    // C' = A_j M^{-1} C_i A_j^T + C_j
    auto x3 = s1.view(nx, nx);
    lu_solve(CMatView<S>(mm), mperm.data(), l.c(li), x3);
    auto ac = s3.view(nx, nx);
    mat_mul(ac, r.a(ri), CMatView<S>(x3));
    auto nc = s5.view(nx, nx);
    kseq_detail::mat_mul_nt(nc, CMatView<S>(ac), r.a(ri));
    mat_add(nc, CMatView<S>(nc), r.c(ri));
    mat_symmetrize(nc);

    // η' = A_i^T N^{-1} (η_j - J_j b_i) + η_i
    auto jb = s1.view(nx, 1);
    mat_mul(jb, r.jmat(ri), l.b(li));
    mat_sub(jb, r.eta(ri), CMatView<S>(jb));
    auto y1 = s3.view(nx, 1);
    lu_solve(CMatView<S>(nn), nperm.data(), CMatView<S>(jb), y1);
    auto ne = s6.view(nx, 1);
    kseq_detail::mat_mul_tn(ne, l.a(li), CMatView<S>(y1));
    mat_add(ne, CMatView<S>(ne), l.eta(li));

    // J' = A_i^T N^{-1} J_j A_i + J_i
    auto y2 = s1.view(nx, nx);
    lu_solve(CMatView<S>(nn), nperm.data(), r.jmat(ri), y2);
    auto ja = s3.view(nx, nx);
    mat_mul(ja, CMatView<S>(y2), l.a(li));
    ScratchMat<S> s7;
    auto nj = s7.view(nx, nx);
    kseq_detail::mat_mul_tn(nj, l.a(li), CMatView<S>(ja));
    mat_add(nj, CMatView<S>(nj), l.jmat(li));
    mat_symmetrize(nj);

    mat_copy(a(dst), CMatView<S>(na));
    mat_copy(b(dst), CMatView<S>(nb));
    mat_copy(c(dst), CMatView<S>(nc));
    mat_copy(eta(dst), CMatView<S>(ne));
    mat_copy(jmat(dst), CMatView<S>(nj));
  }

 private:
  std::size_t sq() const { return std::size_t(nx_) * nx_; }
  std::uint64_t id_;
  int nx_;
  std::size_t n_;
  std::vector<S> a_, b_, c_, eta_, j_;
};

template <typename S>
class SmootherElems {
 public:
  SmootherElems(std::size_t n, int nx)
      : id_(detail::next_buffer_id()),
        nx_(nx),
        n_(n),
        e_(n * sq(), S(0)),
        g_(n * size_t(nx), S(0)),
        l_(n * sq(), S(0)) {}

  std::size_t size() const { return n_; }
  int dim() const { return nx_; }
  SmootherElems make_like(std::size_t n) const { return SmootherElems(n, nx_); }
  std::uint64_t slot_id(std::size_t i) const { return detail::slot(id_, i); }

  MatView<S> e(std::size_t i) { return {e_.data() + i * sq(), nx_, nx_}; }
  MatView<S> g(std::size_t i) { return {g_.data() + i * nx_, nx_, 1}; }
  MatView<S> l(std::size_t i) { return {l_.data() + i * sq(), nx_, nx_}; }
  CMatView<S> e(std::size_t i) const { return {e_.data() + i * sq(), nx_, nx_}; }
  CMatView<S> g(std::size_t i) const { return {g_.data() + i * nx_, nx_, 1}; }
  CMatView<S> l(std::size_t i) const { return {l_.data() + i * sq(), nx_, nx_}; }

  void set_identity(std::size_t i) {
    mat_set_identity(e(i));
    mat_set_zero(g(i));
    mat_set_zero(l(i));
  }

  void set(std::size_t i, const SmootherElement<S>& el) {
    mat_copy(e(i), el.e.view());
    mat_copy(g(i), el.g.view());
    mat_copy(l(i), el.l.view());
  }

  SmootherElement<S> get(std::size_t i) const {
    SmootherElement<S> el{Mat<S>(nx_, nx_), Vec<S>(nx_), Mat<S>(nx_, nx_)};
    mat_copy(el.e.view(), e(i));
    mat_copy(el.g.view(), g(i));
    mat_copy(el.l.view(), l(i));
    return el;
  }

  void assign(std::size_t dst, const SmootherElems& src, std::size_t si) {
    mat_copy(e(dst), src.e(si));
    mat_copy(g(dst), src.g(si));
    mat_copy(l(dst), src.l(si));
  }

  // Lemma 2 operator; alias-safe.
  void combine(std::size_t dst, const SmootherElems& l_, std::size_t li,
               const SmootherElems& r_, std::size_t ri) {
    const int nx = nx_;
    ScratchMat<S> s1, s2, s3;
    auto nei = s1.view(nx, nx);  // E_i E_j
    mat_mul(nei, l_.e(li), r_.e(ri));

    auto ng = s2.view(nx, 1);  // E_i g_j + g_i
    mat_mul(ng, l_.e(li), r_.g(ri));
    mat_add(ng, CMatView<S>(ng), l_.g(li));

    auto el = s3.view(nx, nx);  // E_i L_j E_i^T + L_i
    mat_mul(el, l_.e(li), r_.l(ri));
    ScratchMat<S> s4;
    auto nl = s4.view(nx, nx);
    kseq_detail::mat_mul_nt(nl, CMatView<S>(el), l_.e(li));
    mat_add(nl, CMatView<S>(nl), l_.l(li));
    mat_symmetrize(nl);

    mat_copy(e(dst), CMatView<S>(nei));
    mat_copy(g(dst), CMatView<S>(ng));
    mat_copy(l(dst), CMatView<S>(nl));
  }

 private:
  std::size_t sq() const { return std::size_t(nx_) * nx_; }
  std::uint64_t id_;
  int nx_;
  std::size_t n_;
  std::vector<S> e_, g_, l_;
};

// Standalone combines for property tests (associativity, identities).
template <typename S>
FilterElement<S> filter_combine(const FilterElement<S>& l,
                                const FilterElement<S>& r) {
  const int nx = l.a.rows();
  FilterElems<S> tmp(3, nx);
  tmp.set(0, l);
  tmp.set(1, r);
  tmp.combine(2, tmp, 0, tmp, 1);
  return tmp.get(2);
}

template <typename S>
SmootherElement<S> smoother_combine(const SmootherElement<S>& l,
                                    const SmootherElement<S>& r) {
  const int nx = l.e.rows();
  SmootherElems<S> tmp(3, nx);
  tmp.set(0, l);
  tmp.set(1, r);
  tmp.combine(2, tmp, 0, tmp, 1);
  return tmp.get(2);
}

}  // namespace parascan
