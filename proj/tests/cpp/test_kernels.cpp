#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "gmrk/kernels.hpp"

using namespace gmrk;

TEST_CASE("integrated Wiener closed-form spot values") {
  KernelModel q1 = KernelModel::integrated_wiener(1);
  CHECK(k(q1, 1.0, 1.0) == doctest::Approx(1.0 / 3).epsilon(1e-15));
  CHECK(k(q1, 2.0, 1.0) == doctest::Approx(5.0 / 6).epsilon(1e-15));
  CHECK(k(q1, 1.0, 2.0) == doctest::Approx(5.0 / 6).epsilon(1e-15));

  KernelModel q2 = KernelModel::integrated_wiener(2);
  CHECK(k(q2, 1.0, 1.0) == doctest::Approx(1.0 / 20).epsilon(1e-15));

  KernelModel q3 = KernelModel::integrated_wiener(3);
  CHECK(k(q3, 1.0, 1.0) == doctest::Approx(1.0 / 252).epsilon(1e-15));
}

TEST_CASE("integration ladder: dkd of k_q equals k_(q-1)") {
  std::mt19937 rng(42);
  std::uniform_real_distribution<double> dist(0.1, 5.0);
  for (int q = 1; q <= 3; ++q) {
    KernelModel kq = KernelModel::integrated_wiener(q, 2.5);
    KernelModel kq1 = KernelModel::integrated_wiener(q - 1, 2.5);
    for (int i = 0; i < 50; ++i) {
      const double t = dist(rng), t2 = dist(rng);
      CHECK(dkd(kq, t, t2) ==
            doctest::Approx(k(kq1, t, t2)).epsilon(1e-12));
    }
  }
}

TEST_CASE("squared-exponential surfaces") {
  KernelModel se = KernelModel::squared_exponential(1.0, 1.0);
  CHECK(kd(se, 0.7, 0.7) == 0.0);
  CHECK(k(se, 1.0, 2.0) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  CHECK(dkd(se, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  // kd and dk are antisymmetric in the argument roles
  CHECK(kd(se, 1.3, 0.4) == doctest::Approx(-dk(se, 1.3, 0.4)).epsilon(1e-15));
}

TEST_CASE("finite differences confirm every derivative surface") {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> dist(0.3, 3.0);
  std::vector<KernelModel> models = {
      KernelModel::integrated_wiener(1), KernelModel::integrated_wiener(2),
      KernelModel::integrated_wiener(3), KernelModel::squared_exponential(1.0, 0.8)};
  const double d = 1e-5;
  for (const auto& m : models) {
    int checked = 0;
    while (checked < 100) {
      const double t = dist(rng), t2 = dist(rng);
      if (std::abs(t - t2) < 0.05) continue;  // keep the stencil off the diagonal kink
      ++checked;
      const double fd_kd = (k(m, t, t2 + d) - k(m, t, t2 - d)) / (2 * d);
      const double fd_dk = (k(m, t + d, t2) - k(m, t - d, t2)) / (2 * d);
      const double fd_dkd = (k(m, t + d, t2 + d) - k(m, t + d, t2 - d) - k(m, t - d, t2 + d) +
                             k(m, t - d, t2 - d)) /
                            (4 * d * d);
      CHECK(kd(m, t, t2) == doctest::Approx(fd_kd).epsilon(1e-5));
      CHECK(dk(m, t, t2) == doctest::Approx(fd_dk).epsilon(1e-5));
      CHECK(dkd(m, t, t2) == doctest::Approx(fd_dkd).epsilon(1e-5));
    }
  }
}

TEST_CASE("Gram matrices are positive semi-definite") {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> dist(0.2, 4.0);
  std::vector<KernelModel> models = {
      KernelModel::integrated_wiener(0), KernelModel::integrated_wiener(1),
      KernelModel::integrated_wiener(2), KernelModel::integrated_wiener(3),
      KernelModel::squared_exponential(2.0, 1.5)};
  for (const auto& m : models) {
    for (int trial = 0; trial < 5; ++trial) {
      const int n = 3 + static_cast<int>(rng() % 6);
      Eigen::MatrixXd G(n, n);
      std::vector<double> ts;
      for (int i = 0; i < n; ++i) ts.push_back(dist(rng));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) G(i, j) = k(m, ts[i], ts[j]);
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
      CHECK(es.eigenvalues().minCoeff() >= -1e-9 * G.trace());
    }
  }
}

TEST_CASE("output scale acts linearly") {
  KernelModel unit = KernelModel::integrated_wiener(2, 1.0);
  KernelModel four = KernelModel::integrated_wiener(2, 4.0);
  for (double t : {0.5, 1.0, 2.5}) {
    for (double t2 : {0.4, 1.7}) {
      CHECK(k(four, t, t2) == doctest::Approx(4.0 * k(unit, t, t2)).epsilon(1e-15));
      CHECK(dkd(four, t, t2) == doctest::Approx(4.0 * dkd(unit, t, t2)).epsilon(1e-15));
    }
  }
}

TEST_CASE("domain guards") {
  KernelModel q1 = KernelModel::integrated_wiener(1);
  CHECK_THROWS_AS(k(q1, -1.0, 1.0), DomainError);
  CHECK_THROWS_AS(k(q1, 1.0, 0.0), DomainError);
  CHECK_THROWS_AS(dkd(KernelModel::integrated_wiener(0), 1.0, 1.0), DomainError);
  CHECK_THROWS_AS(KernelModel::integrated_wiener(4), DomainError);
  CHECK_THROWS_AS(KernelModel::squared_exponential(1.0, 0.0), DomainError);
}

TEST_CASE("stationary chain rule reproduces the SE surfaces") {
  const double theta2 = 1.7, lam = 0.9, h = 0.6;
  StationaryKernel1D kr;
  kr.k = [&](double r) { return theta2 * std::exp(-r * h * h / (2 * lam * lam)); };
  kr.dk_dr = [&](double r) { return -h * h / (2 * lam * lam) * kr.k(r); };
  kr.d2k_dr2 = [&](double r) { return h * h * h * h / (4 * lam * lam * lam * lam) * kr.k(r); };
  KernelModel se = KernelModel::squared_exponential(theta2, lam);

  for (double t : {0.0, 0.3, 1.1}) {
    for (double t2 : {0.0, 0.8}) {
      auto s = stationary_derivatives(kr, h, t, t2);
      CHECK(s.k == doctest::Approx(k(se, t, t2)).epsilon(1e-12));
      CHECK(s.kd == doctest::Approx(kd(se, t, t2)).epsilon(1e-12));
      CHECK(s.dkd == doctest::Approx(dkd(se, t, t2)).epsilon(1e-12));
    }
  }
  // on the diagonal: kd vanishes, dkd = -(2/h^2) dk/dr at 0
  auto s0 = stationary_derivatives(kr, h, 1.0, 1.0);
  CHECK(s0.kd == 0.0);
  CHECK(s0.dkd == doctest::Approx(-2.0 / (h * h) * kr.dk_dr(0.0)).epsilon(1e-14));
}
