#pragma once

// Seeded random model and data generation. Models are always drawn in double
// precision (convert afterwards for f32 or counted runs, so every precision
// sees the same model) from per-(step, role) counter-mode splitmix64 streams;
// the stream seeds are derived with a splitmix64 mixer so that neighbouring
// steps are decorrelated. Gaussians use the Marsaglia polar method. The whole
// pipeline is integer/IEEE-exact, so a seed is bit-stable across platforms.

#include <cstdint>
#include <random>

#include "parascan/lgssm.hpp"
#include "parascan/mat.hpp"

namespace parascan {

namespace gen_detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t step,
                                 std::uint64_t role) {
  return splitmix64(splitmix64(seed ^ (step * 0x9e3779b97f4a7c15ull)) ^
                    (role * 0xd1b54a32d192ed03ull));
}

// Marsaglia polar normal sampler over a counter-mode splitmix64 stream
// (cheap to seed, so a fresh stream per (step, role) costs nothing).
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : state_(seed) {}

  double operator()() {
    if (have_) {
      have_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform() - 1.0;
      v = 2.0 * uniform() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_ = true;
    return u * f;
  }

  void fill(MatView<double> a) {
    for (int i = 0; i < a.rows * a.cols; ++i) a.d[i] = (*this)();
  }

 private:
  double uniform() {
    return double(splitmix64(state_++) >> 11) * 0x1.0p-53;
  }
  std::uint64_t state_;
  bool have_ = false;
  double spare_ = 0;
};

enum Role : std::uint64_t {
  kRoleF = 0,
  kRoleU,
  kRoleQ,
  kRoleH,
  kRoleD,
  kRoleR,
  kRolePriorMean,
  kRolePriorCov,
  kRoleStateNoise,
  kRoleMeasNoise,
  kRoleInitState,
};

inline constexpr double kSpdJitter = 1e-6;

// Ξ Ξ^T + εI for a fresh Gaussian Ξ.
inline Mat<double> random_spd(GaussianStream& g, int n) {
  Mat<double> xi(n, n);
  g.fill(xi.view());
  Mat<double> out(n, n);
  ScratchMat<double> s;
  auto xt = s.view(n, n);
  mat_transpose(xt, xi.view());
  mat_mul(out.view(), xi.view(), CMatView<double>(xt));
  for (int i = 0; i < n; ++i) out(i, i) += kSpdJitter;
  mat_symmetrize(out.view());
  return out;
}

}  // namespace gen_detail

// Random time-varying model: F_k = 0.99 * Q-factor of a Gaussian matrix
// (spectral norm 0.99), Q_k/R_k/P_{0|0} of the form ΞΞ^T + 1e-6 I, all other
// quantities unit Gaussian. Bit-stable for a fixed seed across platforms.
inline Lgssm<double> gen_model(std::uint64_t seed, int nx, int ny,
                               std::size_t t) {
  using namespace gen_detail;
  Lgssm<double> m;
  m.t = t;
  m.nx = nx;
  m.ny = ny;
  for (std::size_t k = 0; k < t; ++k) {
    {
      GaussianStream g(stream_seed(seed, k, kRoleF));
      Mat<double> raw(nx, nx);
      g.fill(raw.view());
      Mat<double> q(nx, nx);
      qr_qfactor(q.view(), raw.view());
      for (int i = 0; i < nx * nx; ++i) q.data()[i] *= 0.99;
      m.f.push_back(q);
    }
    {
      GaussianStream g(stream_seed(seed, k, kRoleU));
      Vec<double> u(nx);
      g.fill(u.view());
      m.u.push_back(u);
    }
    {
      GaussianStream g(stream_seed(seed, k, kRoleQ));
      m.q.push_back(random_spd(g, nx));
    }
    {
      GaussianStream g(stream_seed(seed, k, kRoleH));
      Mat<double> h(ny, nx);
      g.fill(h.view());
      m.h.push_back(h);
    }
    {
      GaussianStream g(stream_seed(seed, k, kRoleD));
      Vec<double> d(ny);
      g.fill(d.view());
      m.d.push_back(d);
    }
    {
      GaussianStream g(stream_seed(seed, k, kRoleR));
      m.r.push_back(random_spd(g, ny));
    }
  }
  {
    GaussianStream g(stream_seed(seed, 0, kRolePriorMean));
    m.prior_mean = Vec<double>(nx);
    g.fill(m.prior_mean.view());
  }
  {
    GaussianStream g(stream_seed(seed, 0, kRolePriorCov));
    m.prior_cov = random_spd(g, nx);
  }
  return m;
}

// Ancestral sampling of a measurement series from the model.
inline Measurements<double> simulate_data(const Lgssm<double>& m,
                                          std::uint64_t seed) {
  using namespace gen_detail;
  const int nx = m.nx, ny = m.ny;
  Measurements<double> ys;
  ys.reserve(m.t);

  Vec<double> x(nx);
  {
    GaussianStream g(stream_seed(seed, 0, kRoleInitState));
    Mat<double> l(nx, nx);
    cholesky(l.view(), m.prior_cov.view());
    Vec<double> z(nx);
    g.fill(z.view());
    mat_mul(x.view(), l.view(), z.view());
    mat_add(x.view(), x.view(), m.prior_mean.view());
  }

  for (std::size_t k = 0; k < m.t; ++k) {
    Vec<double> xn(nx);
    mat_mul(xn.view(), m.f[k].view(), x.view());
    mat_add(xn.view(), xn.view(), m.u[k].view());
    {
      GaussianStream g(stream_seed(seed, k, kRoleStateNoise));
      Mat<double> l(nx, nx);
      cholesky(l.view(), m.q[k].view());
      Vec<double> z(nx), n(nx);
      g.fill(z.view());
      mat_mul(n.view(), l.view(), z.view());
      mat_add(xn.view(), xn.view(), n.view());
    }
    x = xn;

    Vec<double> y(ny);
    mat_mul(y.view(), m.h[k].view(), x.view());
    mat_add(y.view(), y.view(), m.d[k].view());
    {
      GaussianStream g(stream_seed(seed, k, kRoleMeasNoise));
      Mat<double> l(ny, ny);
      cholesky(l.view(), m.r[k].view());
      Vec<double> z(ny), n(ny);
      g.fill(z.view());
      mat_mul(n.view(), l.view(), z.view());
      mat_add(y.view(), y.view(), n.view());
    }
    ys.push_back(y);
  }
  return ys;
}

}  // namespace parascan
