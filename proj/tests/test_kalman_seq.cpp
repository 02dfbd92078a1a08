#include <doctest.h>

#include <vector>

#include "parascan/kalman_seq.hpp"
#include "parascan/model_gen.hpp"
#include "test_util.hpp"

using namespace parascan;

namespace {

// scalar model: F=1, u=0, Q=1, H=1, d=0, R=1, prior N(0, 1)
Lgssm<double> scalar_model(std::size_t t) {
  Lgssm<double> m;
  m.t = t;
  m.nx = 1;
  m.ny = 1;
  for (std::size_t k = 0; k < t; ++k) {
    m.f.push_back(Mat<double>::identity(1));
    m.u.push_back(Vec<double>(1));
    m.q.push_back(Mat<double>::identity(1));
    m.h.push_back(Mat<double>::identity(1));
    m.d.push_back(Vec<double>(1));
    m.r.push_back(Mat<double>::identity(1));
  }
  m.prior_mean = Vec<double>(1);
  m.prior_cov = Mat<double>::identity(1);
  return m;
}

Measurements<double> ones(std::size_t t) {
  Measurements<double> ys;
  for (std::size_t k = 0; k < t; ++k) {
    Vec<double> y(1);
    y[0] = 1.0;
    ys.push_back(y);
  }
  return ys;
}

// independent information-form fusion: cov = (P^{-1} + J)^{-1},
// mean = cov (P^{-1} x̄ + η)
GaussianStats<double> fusion_oracle(const GaussianStats<double>& fs,
                                    const InfoStats<double>& info) {
  const int nx = fs.mean.len();
  Mat<double> pinv(nx, nx), prec(nx, nx);
  solve_spd(fs.cov.view(), Mat<double>::identity(nx).view(), pinv.view());
  mat_add(prec.view(), pinv.view(), info.jmat.view());

  Vec<double> rhs(nx);
  mat_mul(rhs.view(), pinv.view(), fs.mean.view());
  mat_add(rhs.view(), rhs.view(), info.eta.view());

  GaussianStats<double> out{Vec<double>(nx), Mat<double>(nx, nx)};
  solve_spd(prec.view(), rhs.view(), out.mean.view());
  solve_spd(prec.view(), Mat<double>::identity(nx).view(), out.cov.view());
  return out;
}

}  // namespace

TEST_CASE("scalar kalman filter hand values") {
  const auto m = scalar_model(2);
  const auto kf = kf_run(m, ones(2));
  CHECK(kf[0].mean[0] == doctest::Approx(2.0 / 3.0));
  CHECK(kf[0].cov(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(kf[1].mean[0] == doctest::Approx(7.0 / 8.0));
  CHECK(kf[1].cov(0, 0) == doctest::Approx(5.0 / 8.0));
}

TEST_CASE("scalar rts smoother hand values") {
  const auto m = scalar_model(2);
  const auto rts = rts_run(m, kf_run(m, ones(2)));
  CHECK(rts[0].mean[0] == doctest::Approx(3.0 / 4.0));
  CHECK(rts[0].cov(0, 0) == doctest::Approx(1.0 / 2.0));
  CHECK(rts[1].mean[0] == doctest::Approx(7.0 / 8.0));
  CHECK(rts[1].cov(0, 0) == doctest::Approx(5.0 / 8.0));
}

TEST_CASE("scalar backward information filter hand values") {
  const auto m = scalar_model(2);
  const auto info = bif_run(m, ones(2));
  // slot 0 holds the post-prediction pair (η_{1|2:2}, J_{1|2:2}) = (1/2, 1/2)
  CHECK(info[0].eta[0] == doctest::Approx(0.5));
  CHECK(info[0].jmat(0, 0) == doctest::Approx(0.5));
  // last slot carries no future information
  CHECK(info[1].eta[0] == 0.0);
  CHECK(info[1].jmat(0, 0) == 0.0);
}

TEST_CASE("two-filter smoother equals rts on the scalar model") {
  const auto m = scalar_model(2);
  const auto ys = ones(2);
  const auto tfs = tfs_run(m, ys);
  CHECK(tfs[0].mean[0] == doctest::Approx(3.0 / 4.0));
  CHECK(tfs[0].cov(0, 0) == doctest::Approx(1.0 / 2.0));
}

TEST_CASE("rts and two-filter smoothers agree on seeded models") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto m = gen_model(seed, 4, 2, 50);
    const auto ys = simulate_data(m, seed + 1000);
    const auto rts = rts_run(m, kf_run(m, ys));
    const auto tfs = tfs_run(m, ys);
    REQUIRE(testutil::max_rel_err_stats(tfs, rts) < 1e-9);
  }
}

TEST_CASE("filtered and smoothed covariances stay symmetric positive definite") {
  const auto m = gen_model(42, 5, 3, 40);
  const auto ys = simulate_data(m, 43);
  const auto kf = kf_run(m, ys);
  const auto rts = rts_run(m, kf);
  for (std::size_t k = 0; k < m.t; ++k) {
    for (int i = 0; i < 5; ++i)
      for (int j = 0; j < 5; ++j) {
        CHECK(kf[k].cov(i, j) == kf[k].cov(j, i));
        CHECK(rts[k].cov(i, j) == rts[k].cov(j, i));
      }
    CHECK(testutil::min_eigenvalue(kf[k].cov) > 0.0);
    CHECK(testutil::min_eigenvalue(rts[k].cov) > 0.0);
  }
}

TEST_CASE("tf_combine matches the information-form fusion oracle") {
  for (std::uint64_t seed = 200; seed < 230; ++seed) {
    const int nx = 4;
    GaussianStats<double> fs{testutil::random_vec(seed, nx),
                             testutil::random_spd_mat(seed + 1, nx)};
    InfoStats<double> info{testutil::random_vec(seed + 2, nx),
                           testutil::random_spd_mat(seed + 3, nx)};
    const auto got = tf_combine(fs, info);
    const auto want = fusion_oracle(fs, info);
    REQUIRE(testutil::max_abs_diff(got.mean.view(), want.mean.view()) < 1e-10);
    REQUIRE(testutil::max_abs_diff(got.cov.view(), want.cov.view()) < 1e-10);
  }
}

TEST_CASE("tf_combine with zero information is the identity") {
  const int nx = 3;
  GaussianStats<double> fs{testutil::random_vec(7, nx),
                           testutil::random_spd_mat(8, nx)};
  InfoStats<double> zero{Vec<double>(nx), Mat<double>(nx, nx)};
  const auto got = tf_combine(fs, zero);
  CHECK(testutil::max_abs_diff(got.mean.view(), fs.mean.view()) < 1e-14);
  CHECK(testutil::max_abs_diff(got.cov.view(), fs.cov.view()) < 1e-14);
}
