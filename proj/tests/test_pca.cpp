#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "bandsel/pca.hpp"

using namespace bandsel;

namespace {

Eigen::MatrixXd random_symmetric(int n, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j <= i; ++j) m(i, j) = m(j, i) = gauss(rng);
  return m;
}

Dataset<> random_dataset(int n, int bands, std::uint32_t seed) {
  std::mt19937 rng(seed);
  std::normal_distribution<double> gauss;
  Dataset<> d;
  d.samples.resize(n, bands);
  d.labels = Eigen::VectorXi::Ones(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < bands; ++j)
      d.samples(i, j) = gauss(rng) * (j + 1);
  return d;
}

}  // namespace

TEST_CASE("diagonal matrix decomposes trivially") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(2, 2);
  m(0, 0) = 4;
  m(1, 1) = 1;
  auto e = symmetric_eigen(m);
  CHECK(e.eigenvalues[0] == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(e.eigenvectors(0, 0)) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(e.eigenvectors(1, 1)) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("collinear data has a vanishing second eigenvalue") {
  Dataset<> d;
  d.samples.resize(5, 2);
  for (int i = 0; i < 5; ++i) {
    d.samples(i, 0) = 0.3 * i - 1.0;
    d.samples(i, 1) = 0.3 * i - 1.0;  // y = x
  }
  d.labels = Eigen::VectorXi::Ones(5);
  auto e = covariance_eigen(d);
  CHECK(std::abs(e.eigenvalues[1]) <= 1e-9);
}

TEST_CASE("decomposition invariants on random symmetric matrices") {
  for (std::uint32_t seed : {1u, 2u, 3u, 4u}) {
    auto m = random_symmetric(6, seed);
    auto e = symmetric_eigen(m);
    CAPTURE(seed);

    // reconstruction
    Eigen::MatrixXd rebuilt = e.eigenvectors *
                              e.eigenvalues.asDiagonal() *
                              e.eigenvectors.transpose();
    CHECK((rebuilt - m).cwiseAbs().maxCoeff() <= 1e-8);

    // descending order, orthonormal columns, eigenpair residuals
    for (Eigen::Index i = 0; i < 6; ++i) {
      if (i > 0) CHECK(e.eigenvalues[i] <= e.eigenvalues[i - 1]);
      CHECK(std::abs(e.eigenvectors.col(i).norm() - 1.0) <= 1e-9);
      for (Eigen::Index j = i + 1; j < 6; ++j)
        CHECK(std::abs(e.eigenvectors.col(i).dot(e.eigenvectors.col(j))) <=
              1e-7);
      const double scale = std::max(1.0, std::abs(e.eigenvalues[i]));
      CHECK((m * e.eigenvectors.col(i) -
             e.eigenvalues[i] * e.eigenvectors.col(i))
                .norm() <= 1e-6 * scale);
    }
    CHECK(e.eigenvalues.sum() ==
          doctest::Approx(m.trace()).epsilon(1e-8).scale(1));
  }
}

TEST_CASE("psd covariance keeps eigenvalues above -1e-9") {
  auto d = random_dataset(40, 6, 11);
  auto e = covariance_eigen(d);
  CHECK(e.eigenvalues.minCoeff() >= -1e-9);
}

TEST_CASE("band score equals the band variance") {
  auto d = random_dataset(60, 5, 21);
  auto e = covariance_eigen(d);
  auto ranking = rank_pca(e);
  auto cov = covariance_matrix<double>(d.samples);
  for (std::size_t r = 0; r < ranking.order.size(); ++r) {
    const Eigen::Index band = ranking.order[r];
    CHECK(ranking.scores[r] ==
          doctest::Approx(cov(band, band)).epsilon(1e-8));
  }
}

TEST_CASE("variance ordering with tie-break") {
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(3, 3);
  m(0, 0) = 1;
  m(1, 1) = 9;
  m(2, 2) = 4;
  auto ranking = rank_pca(symmetric_eigen(m));
  CHECK(ranking.order == std::vector<Eigen::Index>{1, 2, 0});

  Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(3, 3);
  auto isotropic = rank_pca(symmetric_eigen(eye));
  CHECK(isotropic.order == std::vector<Eigen::Index>{0, 1, 2});
}

TEST_CASE("solver instantiates for float") {
  Eigen::MatrixXf m = Eigen::MatrixXf::Zero(2, 2);
  m(0, 0) = 3.0f;
  m(1, 1) = 1.0f;
  auto e = symmetric_eigen(m);
  CHECK(e.eigenvalues[0] == doctest::Approx(3.0f));
  CHECK(e.eigenvalues[1] == doctest::Approx(1.0f));
}

TEST_CASE("ranking survives sample reordering") {
  auto d = random_dataset(50, 4, 31);
  Dataset<> reversed;
  reversed.samples = d.samples.colwise().reverse();
  reversed.labels = d.labels;
  auto a = rank_pca(covariance_eigen(d));
  auto b = rank_pca(covariance_eigen(reversed));
  CHECK(a.order == b.order);
}
