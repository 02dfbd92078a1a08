#pragma once

// Shared helpers for the test binaries: independent eigenvalue oracle
// (cyclic Jacobi), random matrices, and error metrics.

#include <algorithm>
#include <cmath>
#include <vector>

#include "parascan/lgssm.hpp"
#include "parascan/mat.hpp"
#include "parascan/model_gen.hpp"

namespace testutil {

using parascan::CMatView;
using parascan::Mat;
using parascan::Vec;

// Eigenvalues of a symmetric matrix by cyclic Jacobi rotations. Independent
// of the library's factorizations, so it can act as a PSD oracle.
inline std::vector<double> sym_eigenvalues(const Mat<double>& a) {
  const int n = a.rows();
  Mat<double> w = a;
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += w(i, j) * w(i, j);
    if (off < 1e-26) break;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(w(p, q)) < 1e-300) continue;
        const double theta = (w(q, q) - w(p, p)) / (2.0 * w(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double wkp = w(k, p), wkq = w(k, q);
          w(k, p) = c * wkp - s * wkq;
          w(k, q) = s * wkp + c * wkq;
        }
        for (int k = 0; k < n; ++k) {
          const double wpk = w(p, k), wqk = w(q, k);
          w(p, k) = c * wpk - s * wqk;
          w(q, k) = s * wpk + c * wqk;
        }
      }
    }
  }
  std::vector<double> ev(n);
  for (int i = 0; i < n; ++i) ev[i] = w(i, i);
  std::sort(ev.begin(), ev.end());
  return ev;
}

inline double min_eigenvalue(const Mat<double>& a) {
  return sym_eigenvalues(a).front();
}

inline Mat<double> random_mat(std::uint64_t seed, int r, int c) {
  parascan::gen_detail::GaussianStream g(seed);
  Mat<double> m(r, c);
  g.fill(m.view());
  return m;
}

inline Mat<double> random_spd_mat(std::uint64_t seed, int n) {
  parascan::gen_detail::GaussianStream g(seed);
  return parascan::gen_detail::random_spd(g, n);
}

inline Vec<double> random_vec(std::uint64_t seed, int n) {
  parascan::gen_detail::GaussianStream g(seed);
  Vec<double> v(n);
  g.fill(v.view());
  return v;
}

inline double max_abs_diff(CMatView<double> a, CMatView<double> b) {
  double m = 0;
  for (int i = 0; i < a.rows * a.cols; ++i)
    m = std::max(m, std::abs(a.d[i] - b.d[i]));
  return m;
}

// max |a - b| / (1 + |b|) over means and covariances of two stats series.
inline double max_rel_err_stats(
    const std::vector<parascan::GaussianStats<double>>& a,
    const std::vector<parascan::GaussianStats<double>>& b) {
  double worst = 0;
  for (std::size_t k = 0; k < b.size(); ++k) {
    for (int i = 0; i < b[k].mean.len(); ++i)
      worst = std::max(worst, std::abs(a[k].mean[i] - b[k].mean[i]) /
                                  (1.0 + std::abs(b[k].mean[i])));
    for (int i = 0; i < b[k].cov.rows(); ++i)
      for (int j = 0; j < b[k].cov.cols(); ++j)
        worst = std::max(worst, std::abs(a[k].cov(i, j) - b[k].cov(i, j)) /
                                    (1.0 + std::abs(b[k].cov(i, j))));
  }
  return worst;
}

}  // namespace testutil
