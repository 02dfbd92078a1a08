#pragma once

// Sequential reference algorithms: Kalman filter, RTS smoother, backward
// information filter, and the two-filter combination. These are the oracles
// the parallel methods are checked against, and are also what the benchmark
// CLI times as the sequential baselines.

#include <cstddef>
#include <vector>

#include "parascan/lgssm.hpp"
#include "parascan/mat.hpp"

namespace parascan {

namespace kseq_detail {

// out = a^T * b without materializing a^T at the call site.
template <typename S>
inline void mat_mul_tn(MatView<S> out, CMatView<S> a, CMatView<S> b) {
  ScratchMat<S> s;
  auto at = s.view(a.cols, a.rows);
  mat_transpose(at, a);
  mat_mul(out, CMatView<S>(at), b);
}

// out = a * b^T.
template <typename S>
inline void mat_mul_nt(MatView<S> out, CMatView<S> a, CMatView<S> b) {
  ScratchMat<S> s;
  auto bt = s.view(b.cols, b.rows);
  mat_transpose(bt, b);
  mat_mul(out, a, CMatView<S>(bt));
}

}  // namespace kseq_detail

// Prediction: (x̄, P) at k-1|k-1 -> k|k-1, using (F,u,Q) indexed k-1.
template <typename S>
GaussianStats<S> kf_predict(const GaussianStats<S>& stats, const Lgssm<S>& m,
                            std::size_t k) {
  const int nx = m.nx;
  const auto& f = m.f[k - 1];
  GaussianStats<S> out{Vec<S>(nx), Mat<S>(nx, nx)};

  mat_mul(out.mean.view(), f.view(), stats.mean.view());
  mat_add(out.mean.view(), out.mean.view(), m.u[k - 1].view());

  ScratchMat<S> s1;
  auto fp = s1.view(nx, nx);
  mat_mul(fp, f.view(), stats.cov.view());
  kseq_detail::mat_mul_nt(out.cov.view(), CMatView<S>(fp), f.view());
  mat_add(out.cov.view(), out.cov.view(), m.q[k - 1].view());
  mat_symmetrize(out.cov.view());
  return out;
}

// Update: (x̄, P) at k|k-1 with measurement y_k; the gain is applied through
// an SPD solve of S_k, never an explicit inverse.
template <typename S>
GaussianStats<S> kf_update(const GaussianStats<S>& pred, const Lgssm<S>& m,
                           std::size_t k, const Vec<S>& y) {
  const int nx = m.nx, ny = m.ny;
  const auto& h = m.h[k - 1];
  ScratchMat<S> s1, s2, s3, s4;

  auto hp = s1.view(ny, nx);  // H P
  mat_mul(hp, h.view(), pred.cov.view());
  auto sk = s2.view(ny, ny);  // S = H P H^T + R
  kseq_detail::mat_mul_nt(sk, CMatView<S>(hp), h.view());
  mat_add(sk, CMatView<S>(sk), m.r[k - 1].view());
  mat_symmetrize(sk);

  auto kt = s3.view(ny, nx);  // K^T = S^{-1} H P
  solve_spd(CMatView<S>(sk), CMatView<S>(hp), kt);

  ScratchMat<S> sv;
  auto v = sv.view(ny, 1);  // innovation y - H x̄ - d
  mat_mul(v, h.view(), pred.mean.view());
  mat_sub(v, y.view(), CMatView<S>(v));
  mat_sub(v, CMatView<S>(v), m.d[k - 1].view());

  GaussianStats<S> out{Vec<S>(nx), Mat<S>(nx, nx)};
  auto gain = s4.view(nx, ny);
  mat_transpose(gain, CMatView<S>(kt));
  mat_mul(out.mean.view(), CMatView<S>(gain), CMatView<S>(v));
  mat_add(out.mean.view(), out.mean.view(), pred.mean.view());

  auto khp = s1.view(nx, nx);  // reuses hp's scratch after K H P is formed
  {
    ScratchMat<S> tmp;
    auto t = tmp.view(nx, nx);
    mat_mul(t, CMatView<S>(gain), CMatView<S>(hp));
    mat_copy(khp, CMatView<S>(t));
  }
  mat_sub(out.cov.view(), pred.cov.view(), CMatView<S>(khp));
  mat_symmetrize(out.cov.view());
  return out;
}

template <typename S>
std::vector<GaussianStats<S>> kf_run(const Lgssm<S>& m,
                                     const Measurements<S>& ys) {
  std::vector<GaussianStats<S>> out;
  out.reserve(m.t);
  GaussianStats<S> cur{m.prior_mean, m.prior_cov};
  for (std::size_t k = 1; k <= m.t; ++k) {
    cur = kf_update(kf_predict(cur, m, k), m, k, ys[k - 1]);
    out.push_back(cur);
  }
  return out;
}

// RTS backward pass over the filtered stats, G_k = P_{k|k} F_k^T P_{k+1|k}^{-1}.
template <typename S>
std::vector<GaussianStats<S>> rts_run(const Lgssm<S>& m,
                                      const std::vector<GaussianStats<S>>& filtered) {
  const int nx = m.nx;
  std::vector<GaussianStats<S>> out(filtered);
  for (std::size_t k = m.t - 1; k >= 1; --k) {
    const GaussianStats<S> pred = kf_predict(filtered[k - 1], m, k + 1);
    ScratchMat<S> s1, s2, s3;
    auto fp = s1.view(nx, nx);  // F_k P_{k|k}
    mat_mul(fp, m.f[k].view(), filtered[k - 1].cov.view());
    auto gt = s2.view(nx, nx);  // G^T = P_{k+1|k}^{-1} F_k P_{k|k}
    solve_spd(pred.cov.view(), CMatView<S>(fp), gt);
    auto g = s3.view(nx, nx);
    mat_transpose(g, CMatView<S>(gt));

    ScratchMat<S> s4, s5;
    auto dv = s4.view(nx, 1);  // x̄_{k+1|T} - x̄_{k+1|k}
    mat_sub(dv, out[k].mean.view(), pred.mean.view());
    mat_mul(out[k - 1].mean.view(), CMatView<S>(g), CMatView<S>(dv));
    mat_add(out[k - 1].mean.view(), out[k - 1].mean.view(),
            filtered[k - 1].mean.view());

    auto dp = s4.view(nx, nx);  // P_{k+1|T} - P_{k+1|k}
    mat_sub(dp, out[k].cov.view(), pred.cov.view());
    auto gdp = s5.view(nx, nx);
    mat_mul(gdp, CMatView<S>(g), CMatView<S>(dp));
    kseq_detail::mat_mul_nt(out[k - 1].cov.view(), CMatView<S>(gdp),
                            CMatView<S>(g));
    mat_add(out[k - 1].cov.view(), out[k - 1].cov.view(),
            filtered[k - 1].cov.view());
    mat_symmetrize(out[k - 1].cov.view());
  }
  return out;
}

namespace kseq_detail {

// (η, J) += H^T R^{-1} (y - d), H^T R^{-1} H for the given 1-based step.
template <typename S>
void bif_add_measurement(InfoStats<S>& s, const Lgssm<S>& m, std::size_t k,
                         const Vec<S>& y) {
  const int nx = m.nx, ny = m.ny;
  const auto& h = m.h[k - 1];
  ScratchMat<S> s1, s2, s3;
  auto rinv_h = s1.view(ny, nx);  // R^{-1} H
  solve_spd(m.r[k - 1].view(), h.view(), rinv_h);
  auto hrh = s2.view(nx, nx);
  mat_mul_tn(hrh, h.view(), CMatView<S>(rinv_h));
  mat_add(s.jmat.view(), s.jmat.view(), CMatView<S>(hrh));
  mat_symmetrize(s.jmat.view());

  auto yd = s3.view(ny, 1);
  mat_sub(yd, y.view(), m.d[k - 1].view());
  auto rinv_yd = s1.view(ny, 1);
  solve_spd(m.r[k - 1].view(), CMatView<S>(yd), rinv_yd);
  auto add = s2.view(nx, 1);
  mat_mul_tn(add, h.view(), CMatView<S>(rinv_yd));
  mat_add(s.eta.view(), s.eta.view(), CMatView<S>(add));
}

// Backward prediction (η, J) at k|k:T -> k-1|k:T through (F,Q,u) indexed k-1.
template <typename S>
InfoStats<S> bif_predict(const InfoStats<S>& s, const Lgssm<S>& m,
                         std::size_t k) {
  const int nx = m.nx;
  const auto& f = m.f[k - 1];
  ScratchMat<S> s1, s2, s3;
  auto mm = s1.view(nx, nx);  // I + J Q
  mat_mul(mm, s.jmat.view(), m.q[k - 1].view());
  for (int i = 0; i < nx; ++i) mm(i, i) += S(1);

  auto rhs = s2.view(nx, nx + 1);  // [η - J u | J F] solved in one pass
  {
    ScratchMat<S> st;
    auto ju = st.view(nx, 1);
    mat_mul(ju, s.jmat.view(), m.u[k - 1].view());
    for (int i = 0; i < nx; ++i) rhs(i, 0) = s.eta[i] - ju(i, 0);
    auto jf = st.view(nx, nx);
    mat_mul(jf, s.jmat.view(), f.view());
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < nx; ++j) rhs(i, j + 1) = jf(i, j);
  }
  auto sol = s3.view(nx, nx + 1);
  solve(CMatView<S>(mm), CMatView<S>(rhs), sol);

  InfoStats<S> out{Vec<S>(nx), Mat<S>(nx, nx)};
  {
    ScratchMat<S> st;
    auto col = st.view(nx, 1);
    for (int i = 0; i < nx; ++i) col(i, 0) = sol(i, 0);
    mat_mul_tn(out.eta.view(), f.view(), CMatView<S>(col));
    auto rest = s1.view(nx, nx);
    for (int i = 0; i < nx; ++i)
      for (int j = 0; j < nx; ++j) rest(i, j) = sol(i, j + 1);
    mat_mul_tn(out.jmat.view(), f.view(), CMatView<S>(rest));
    mat_symmetrize(out.jmat.view());
  }
  return out;
}

}  // namespace kseq_detail

// Backward information filter; slot k-1 of the result holds the
// post-prediction pair (η_{k|k+1:T}, J_{k|k+1:T}). The last slot is zero.
template <typename S>
std::vector<InfoStats<S>> bif_run(const Lgssm<S>& m, const Measurements<S>& ys) {
  const int nx = m.nx;
  std::vector<InfoStats<S>> out;
  out.reserve(m.t);
  for (std::size_t i = 0; i < m.t; ++i)
    out.push_back(InfoStats<S>{Vec<S>(nx), Mat<S>(nx, nx)});

  InfoStats<S> upd{Vec<S>(nx), Mat<S>(nx, nx)};  // η_{k|k:T}, J_{k|k:T}
  kseq_detail::bif_add_measurement(upd, m, m.t, ys[m.t - 1]);
  for (std::size_t k = m.t; k >= 2; --k) {
    out[k - 2] = kseq_detail::bif_predict(upd, m, k);
    upd = out[k - 2];
    kseq_detail::bif_add_measurement(upd, m, k - 1, ys[k - 2]);
  }
  return out;
}

// Two-filter combination: fuse the filtered (x̄, P) with the backward
// information pair via (I + P J)^{-1} applied by one LU factorization.
template <typename S>
GaussianStats<S> tf_combine(const GaussianStats<S>& filtered,
                            const InfoStats<S>& info) {
  const int nx = filtered.mean.len();
  ScratchMat<S> s1, s2, s3;
  auto mm = s1.view(nx, nx);  // I + P J
  mat_mul(mm, filtered.cov.view(), info.jmat.view());
  for (int i = 0; i < nx; ++i) mm(i, i) += S(1);

  std::array<int, kMaxDim> perm;
  lu_factor_inplace(mm, perm.data());

  GaussianStats<S> out{Vec<S>(nx), Mat<S>(nx, nx)};
  auto rhs = s2.view(nx, 1);  // x̄ + P η
  mat_mul(rhs, filtered.cov.view(), info.eta.view());
  mat_add(rhs, CMatView<S>(rhs), filtered.mean.view());
  lu_solve(CMatView<S>(mm), perm.data(), CMatView<S>(rhs), out.mean.view());

  lu_solve(CMatView<S>(mm), perm.data(), filtered.cov.view(), out.cov.view());
  mat_symmetrize(out.cov.view());
  return out;
}

template <typename S>
std::vector<GaussianStats<S>> tfs_run(const Lgssm<S>& m,
                                      const Measurements<S>& ys) {
  auto filtered = kf_run(m, ys);
  auto info = bif_run(m, ys);
  std::vector<GaussianStats<S>> out;
  out.reserve(m.t);
  for (std::size_t k = 0; k < m.t; ++k)
    out.push_back(tf_combine(filtered[k], info[k]));
  return out;
}

}  // namespace parascan
