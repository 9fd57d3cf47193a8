#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>

#include "eit/common.hpp"
#include "eit/rng.hpp"
#include "eit/sampling.hpp"
#include "support.hpp"

using namespace eit;

TEST_CASE("squared-exponential kernel values") {
  const double omega = 0.5, ell = 0.8;
  CHECK(sq_exp_kernel(0.0, omega, ell) == omega * omega);
  // half-correlation distance ell*sqrt(2 ln 2)
  const double r_half = ell * std::sqrt(2.0 * std::log(2.0));
  CHECK(sq_exp_kernel(r_half, omega, ell) ==
        doctest::Approx(0.5 * omega * omega).epsilon(1e-12));
}

TEST_CASE("covariance factor reproduces the kernel matrix") {
  const Mesh m = make_rect2d(3, 2);
  const double omega = 0.5, ell = 0.6;
  double jitter = 0;
  const Eigen::MatrixXd F = build_covariance_factor(m, omega, ell, false, &jitter);
  const Eigen::MatrixXd G = F * F.transpose();
  for (Eigen::Index i = 0; i < m.node_count(); ++i)
    for (Eigen::Index j = 0; j < m.node_count(); ++j) {
      const double want =
          sq_exp_kernel((m.nodes.row(i) - m.nodes.row(j)).norm(), omega, ell) +
          (i == j ? jitter : 0.0);
      CHECK(G(i, j) == doctest::Approx(want).epsilon(1e-8));
    }
}

TEST_CASE("infinite correlation length collapses to a constant field") {
  const Mesh m = make_rect2d(3, 3);
  const double omega = 0.4;
  const Eigen::MatrixXd F = build_covariance_factor(m, omega, 1e9);
  const Eigen::MatrixXd G = F * F.transpose();
  CHECK((G.array() - omega * omega).abs().maxCoeff() < 1e-6 * omega * omega);
  // rank-1 behavior: second singular value at jitter scale
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(G);
  CHECK(svd.singularValues()[1] < 1e-6 * svd.singularValues()[0]);
}

TEST_CASE("omega = 0 returns the background exactly") {
  const Mesh m = make_rect2d(3, 3);
  const Eigen::VectorXd sigma0 =
      Eigen::VectorXd::Constant(m.node_count(), 0.93);
  const FieldPrior prior = build_field_prior(m, sigma0, 0.0, 1.0, 0.01, 1e-3);
  CHECK((sample_sigma(prior, 5) - sigma0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Monte-Carlo mean of log sigma") {
  const Mesh m = make_rect2d(4, 3);
  const double omega = 0.5;
  const Eigen::VectorXd sigma0 = Eigen::VectorXd::Constant(m.node_count(), 1.3);
  const FieldPrior prior = build_field_prior(m, sigma0, omega, 0.7, 0.01, 0.0);

  const int draws = 2000;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(m.node_count());
  for (int d = 0; d < draws; ++d)
    acc += sample_sigma(prior, split_seed(99, d)).array().log().matrix();
  acc /= draws;
  const double bound = 3.0 * omega / std::sqrt(double(draws));
  CHECK((acc.array() - std::log(1.3)).abs().maxCoeff() < bound);
}

TEST_CASE("Monte-Carlo covariance of log sigma at node pairs") {
  const Mesh m = make_rect2d(4, 3);
  const double omega = 0.5, ell = 0.7;
  const Eigen::VectorXd sigma0 = Eigen::VectorXd::Ones(m.node_count());
  const FieldPrior prior = build_field_prior(m, sigma0, omega, ell, 0.01, 0.0);

  const int draws = 5000;
  Eigen::MatrixXd samples(m.node_count(), draws);
  for (int d = 0; d < draws; ++d)
    samples.col(d) = sample_sigma(prior, split_seed(4242, d)).array().log();
  const Eigen::VectorXd mean = samples.rowwise().mean();

  // ten pairs at distances below 1.2*ell so the target entries are sizable
  int checked = 0;
  for (Eigen::Index i = 0; i < m.node_count() && checked < 10; i += 3)
    for (Eigen::Index j = i + 1; j < m.node_count() && checked < 10; j += 5) {
      const double dist = (m.nodes.row(i) - m.nodes.row(j)).norm();
      if (dist > 1.2 * ell) continue;
      double cov = 0;
      for (int d = 0; d < draws; ++d)
        cov += (samples(i, d) - mean[i]) * (samples(j, d) - mean[j]);
      cov /= draws - 1;
      const double want = sq_exp_kernel(dist, omega, ell);
      CHECK(std::abs(cov - want) < 0.10 * want);
      ++checked;
    }
  CHECK(checked == 10);
}

TEST_CASE("contact draws") {
  const Mesh m = make_rect2d(2, 2);
  const Eigen::VectorXd sigma0 = Eigen::VectorXd::Ones(m.node_count());

  SUBCASE("eta = 0 is the degenerate distribution") {
    const FieldPrior prior = build_field_prior(m, sigma0, 0.3, 1.0, 0.007, 0.0);
    const Eigen::VectorXd z = sample_contacts(prior, 16, 9);
    CHECK((z.array() == 0.007).all());
  }
  SUBCASE("eta = 5e-4 stays within one percent of the level") {
    const FieldPrior prior = build_field_prior(m, sigma0, 0.3, 1.0, 0.007, 5e-4);
    for (int d = 0; d < 200; ++d) {
      const Eigen::VectorXd z = sample_contacts(prior, 16, split_seed(3, d));
      CHECK(((z.array() / 0.007 - 1.0).abs() < 0.01).all());
    }
  }
  SUBCASE("seed determinism") {
    const FieldPrior prior = build_field_prior(m, sigma0, 0.3, 1.0, 0.007, 5e-4);
    CHECK(sample_contacts(prior, 8, 77) == sample_contacts(prior, 8, 77));
    CHECK(sample_sigma(prior, 31) == sample_sigma(prior, 31));
  }
}

TEST_CASE("samples are strictly positive") {
  const Mesh m = make_rect2d(3, 3);
  const Eigen::VectorXd sigma0 = Eigen::VectorXd::Constant(m.node_count(), 0.2);
  const FieldPrior prior = build_field_prior(m, sigma0, 1.5, 0.3, 0.002, 0.1);
  for (int d = 0; d < 50; ++d) {
    CHECK((sample_sigma(prior, split_seed(1, d)).array() > 0).all());
    CHECK((sample_contacts(prior, 12, split_seed(2, d)).array() > 0).all());
  }
}

TEST_CASE("low-rank factor matches the dense kernel") {
  const Mesh m = make_rect2d(6, 5);
  const double omega = 0.5, ell = 0.5;
  const Eigen::MatrixXd Fd = build_covariance_factor(m, omega, ell, false);
  const Eigen::MatrixXd Fl = build_covariance_factor(m, omega, ell, true);
  const Eigen::MatrixXd Gd = Fd * Fd.transpose();
  const Eigen::MatrixXd Gl = Fl * Fl.transpose();
  CHECK((Gd - Gl).cwiseAbs().maxCoeff() < 1e-6 * omega * omega);
}

TEST_CASE("invalid prior parameters are rejected") {
  const Mesh m = make_rect2d(2, 2);
  const Eigen::VectorXd ok = Eigen::VectorXd::Ones(m.node_count());
  CHECK_THROWS_AS(build_covariance_factor(m, -0.5, 1.0), Error);
  CHECK_THROWS_AS(build_covariance_factor(m, 0.5, 0.0), Error);
  CHECK_THROWS_AS(build_field_prior(m, -ok, 0.5, 1.0, 0.01, 0.0), Error);
  CHECK_THROWS_AS(build_field_prior(m, ok, 0.5, 1.0, -0.01, 0.0), Error);
}
