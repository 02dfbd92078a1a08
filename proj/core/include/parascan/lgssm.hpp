#pragma once

// Linear-Gaussian state-space model containers, generic over the scalar.
//
// Index convention: the transition triple (F[k], u[k], Q[k]) for k = 0..T-1
// moves the state from step k to step k+1 (so F[0] acts on the prior), and
// the measurement triple (H[k], d[k], R[k]) for k = 0..T-1 belongs to
// measurement y[k], i.e. to step k+1 in 1-based numbering.

#include <cstddef>
#include <vector>

#include "parascan/mat.hpp"

namespace parascan {

template <typename S>
struct GaussianStats {
  Vec<S> mean;
  Mat<S> cov;
};

template <typename S>
struct InfoStats {
  Vec<S> eta;
  Mat<S> jmat;
};

template <typename S>
struct Lgssm {
  std::size_t t = 0;
  int nx = 0;
  int ny = 0;
  std::vector<Mat<S>> f;  // F_0 .. F_{T-1}
  std::vector<Vec<S>> u;  // u_0 .. u_{T-1}
  std::vector<Mat<S>> q;  // Q_0 .. Q_{T-1}, SPD
  std::vector<Mat<S>> h;  // H_1 .. H_T
  std::vector<Vec<S>> d;  // d_1 .. d_T
  std::vector<Mat<S>> r;  // R_1 .. R_T, SPD
  Vec<S> prior_mean;      // x̄_{0|0}
  Mat<S> prior_cov;       // P_{0|0}, SPD
};

template <typename S>
using Measurements = std::vector<Vec<S>>;  // y_1 .. y_T

namespace detail {
template <typename To, typename From>
Mat<To> convert_mat(const Mat<From>& a) {
  Mat<To> out(a.rows(), a.cols());
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      out(i, j) = scalar_from_double<To>(to_double(a(i, j)));
  return out;
}
template <typename To, typename From>
Vec<To> convert_vec(const Vec<From>& a) {
  Vec<To> out(a.len());
  for (int i = 0; i < a.len(); ++i)
    out[i] = scalar_from_double<To>(to_double(a[i]));
  return out;
}
}  // namespace detail

// Scalar-type conversion (e.g. f64 reference model -> f32 or counted run).
template <typename To, typename From>
Lgssm<To> convert_model(const Lgssm<From>& m) {
  Lgssm<To> out;
  out.t = m.t;
  out.nx = m.nx;
  out.ny = m.ny;
  for (auto& a : m.f) out.f.push_back(detail::convert_mat<To>(a));
  for (auto& a : m.u) out.u.push_back(detail::convert_vec<To>(a));
  for (auto& a : m.q) out.q.push_back(detail::convert_mat<To>(a));
  for (auto& a : m.h) out.h.push_back(detail::convert_mat<To>(a));
  for (auto& a : m.d) out.d.push_back(detail::convert_vec<To>(a));
  for (auto& a : m.r) out.r.push_back(detail::convert_mat<To>(a));
  out.prior_mean = detail::convert_vec<To>(m.prior_mean);
  out.prior_cov = detail::convert_mat<To>(m.prior_cov);
  return out;
}

template <typename To, typename From>
Measurements<To> convert_measurements(const Measurements<From>& ys) {
  Measurements<To> out;
  for (auto& y : ys) out.push_back(detail::convert_vec<To>(y));
  return out;
}

}  // namespace parascan
