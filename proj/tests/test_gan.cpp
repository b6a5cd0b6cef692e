#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>

#include "pggan/gan.hpp"

using namespace pggan;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::vector<double> random_scores(Rng& rng, std::size_t n) {
  std::vector<double> s(n);
  for (auto& x : s) x = rng.uniform(0.02, 0.98);
  return s;
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-8}); }

// Worst relative error of grad against central differences of f.
double fd_check(std::vector<double> x, const VectorXd& grad, const std::function<double(const std::vector<double>&)>& f,
                double h = 1e-6) {
  double worst = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = x[i];
    x[i] = saved + h;
    const double up = f(x);
    x[i] = saved - h;
    const double down = f(x);
    x[i] = saved;
    worst = std::max(worst, rel_err(grad[static_cast<Eigen::Index>(i)], (up - down) / (2 * h)));
  }
  return worst;
}

Partition random_partition(Rng& rng, std::size_t n) {
  Partition p;
  for (std::size_t i = 0; i < n; ++i) (rng.below(2) ? p.real_like : p.fake_like).push_back(i);
  return p;
}

std::vector<std::size_t> iota(std::size_t lo, std::size_t hi) {
  std::vector<std::size_t> v;
  for (std::size_t i = lo; i < hi; ++i) v.push_back(i);
  return v;
}

MatrixXd random_matrix(Eigen::Index r, Eigen::Index c, Rng& rng) {
  MatrixXd m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-1, 1);
  return m;
}

Normalizer random_normalizer(Rng& rng, int dim) {
  Normalizer n;
  n.traj_mean.resize(dim);
  n.traj_std.resize(dim);
  for (int i = 0; i < dim; ++i) {
    n.traj_mean[i] = rng.uniform(-10, 50);
    n.traj_std[i] = rng.uniform(0.5, 20);
  }
  return n;
}

const NetShape kSmall{4, 8, 2};

}  // namespace

TEST_CASE("network specs") {
  const auto g = GeneratorNet::make_spec(NetShape{}, 200);
  CHECK(g.layer_widths == std::vector<int>{18, 128, 128, 200});
  CHECK(g.hidden_activation == Activation::relu);
  CHECK(g.output_activation == Activation::identity);
  const auto d = DiscriminatorNet::make_spec(NetShape{}, 200);
  CHECK(d.layer_widths == std::vector<int>{202, 128, 128, 1});
  CHECK(d.output_activation == Activation::sigmoid);
}

TEST_CASE("generate") {
  Rng rng(1);
  GeneratorNet gen = GeneratorNet::create(kSmall, 10, rng);
  const MatrixXd z = random_matrix(4, 3, rng);
  const MatrixXd lab = random_matrix(2, 3, rng);

  GeneratorNet zero = gen;
  zero.params = zero_params(gen.spec);
  CHECK(generate(zero, z, lab).output.isZero());

  CHECK(generate(gen, z, lab).output == generate(gen, z, lab).output);

  MatrixXd stacked(6, 3);
  stacked << z, lab;
  CHECK(generate(gen, z, lab).output == mlp_forward(gen.spec, gen.params, stacked).output);

  CHECK_THROWS(generate(gen, random_matrix(3, 3, rng), lab));
  CHECK_THROWS(generate(gen, z, random_matrix(3, 3, rng)));
  CHECK_THROWS(generate(gen, z, random_matrix(2, 2, rng)));
}

TEST_CASE("discriminate") {
  Rng rng(2);
  DiscriminatorNet disc = DiscriminatorNet::create(kSmall, 10, rng);
  const MatrixXd x = random_matrix(10, 5, rng);
  const MatrixXd lab = random_matrix(2, 5, rng);

  DiscriminatorNet zero = disc;
  zero.params = zero_params(disc.spec);
  CHECK((discriminate(zero, x, lab).output.array() == 0.5).all());

  const MatrixXd s = discriminate(disc, x, lab).output;
  CHECK(s == discriminate(disc, x, lab).output);
  CHECK((s.array() > 0).all());
  CHECK((s.array() < 1).all());

  MatrixXd stacked(12, 5);
  stacked << x, lab;
  const auto tape = mlp_forward(disc.spec, disc.params, stacked);
  for (int j = 0; j < 5; ++j) {
    const double pre = tape.pre.back()(0, j);
    CHECK(s(0, j) == doctest::Approx(1 / (1 + std::exp(-pre))).epsilon(1e-14));
  }
  CHECK_THROWS(discriminate(disc, random_matrix(9, 5, rng), lab));
}

TEST_CASE("clamp_score") {
  CHECK(clamp_score(0.0) == kScoreMin);
  CHECK(clamp_score(1.0) == kScoreMax);
  CHECK(clamp_score(0.3) == 0.3);
}

TEST_CASE("disc_loss_gan") {
  const std::vector<double> hi(4, kScoreMax), lo(4, kScoreMin), half(4, 0.5);
  CHECK(disc_loss_gan(hi, lo).loss == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(disc_loss_gan(half, half).loss == doctest::Approx(2 * std::numbers::ln2).epsilon(1e-14));
  CHECK_THROWS(disc_loss_gan({}, half));
  CHECK_THROWS(disc_loss_gan(half, {}));
  CHECK(std::isfinite(disc_loss_gan(std::vector<double>{0.0}, std::vector<double>{1.0}).loss));

  Rng rng(3);
  for (int t = 0; t < 20; ++t) {
    const auto r = random_scores(rng, 1 + rng.below(8));
    const auto f = random_scores(rng, 1 + rng.below(8));
    const auto res = disc_loss_gan(r, f);
    CHECK(fd_check(r, res.real_grad, [&](const auto& x) { return disc_loss_gan(x, f).loss; }) < 1e-5);
    CHECK(fd_check(f, res.fake_grad, [&](const auto& x) { return disc_loss_gan(r, x).loss; }) < 1e-5);
  }
}

TEST_CASE("gen_loss_gan") {
  const std::vector<double> half(3, 0.5);
  CHECK(gen_loss_gan(half).loss == doctest::Approx(std::log(0.5)).epsilon(1e-14));
  const std::vector<double> one(3, 1.0);
  CHECK(std::isfinite(gen_loss_gan(one).loss));
  CHECK(gen_loss_gan(one).loss == doctest::Approx(std::log(1e-7)).epsilon(1e-6));
  CHECK_THROWS(gen_loss_gan({}));

  Rng rng(4);
  for (int t = 0; t < 20; ++t) {
    const auto f = random_scores(rng, 1 + rng.below(8));
    CHECK(fd_check(f, gen_loss_gan(f).grad, [](const auto& x) { return gen_loss_gan(x).loss; }) < 1e-5);
    CHECK(fd_check(f, gen_loss_gan_nonsaturating(f).grad,
                   [](const auto& x) { return gen_loss_gan_nonsaturating(x).loss; }) < 1e-5);
  }
  CHECK(gen_loss_gan_nonsaturating(half).loss == doctest::Approx(std::numbers::ln2));
}

TEST_CASE("partition_by_residual") {
  const ProjectileModel model;
  const PhysicsParams& p = model.params();
  Rng rng(5);
  std::vector<Label> labels;
  std::vector<Trajectory> exact;
  for (int i = 0; i < 6; ++i) {
    labels.push_back({rng.uniform(1, 100), rng.uniform(0, 90)});
    exact.push_back(exact_trajectory(labels.back(), p));
  }
  CHECK(partition_by_residual(exact, labels, 1e-12, model).real_like.size() == 6);

  std::vector<Trajectory> zeros(6, Trajectory::Zero(2, p.n_steps));
  for (auto& l : labels) l.v0_mag = 80;
  const Partition all_fake = partition_by_residual(zeros, labels, 1e-3, model);
  CHECK(all_fake.real_like.empty());
  CHECK(all_fake.fake_like.size() == 6);

  // Uniform displacement d in x gives residual d^2.
  const std::vector<double> wanted{0.4, 5.0, 2.5};
  std::vector<Trajectory> shifted;
  std::vector<Label> three(labels.begin(), labels.begin() + 3);
  for (int i = 0; i < 3; ++i) {
    Trajectory t = exact_trajectory(three[i], p);
    t.row(0).array() += std::sqrt(wanted[i]);
    shifted.push_back(t);
    CHECK(model.mean_residual(t, three[i]) == doctest::Approx(wanted[i]).epsilon(1e-12));
  }
  const Partition part = partition_by_residual(shifted, three, 2.5 * (1 + 1e-12), model);
  CHECK(part.real_like == std::vector<std::size_t>{0, 2});
  CHECK(part.fake_like == std::vector<std::size_t>{1});

  const std::vector<double> res{0.4, 5.0, 2.5};
  CHECK(partition_residuals(res, 2.5).real_like == std::vector<std::size_t>{0, 2});

  CHECK_THROWS(partition_by_residual(shifted, labels, 1.0, model));
  CHECK_THROWS(partition_residuals(res, 0.0));
}

TEST_CASE("partition is monotone in epsilon") {
  Rng rng(6);
  for (int t = 0; t < 50; ++t) {
    std::vector<double> res(32);
    for (auto& r : res) r = std::exp(rng.uniform(-5, 5));
    const auto a = partition_residuals(res, 0.625).real_like;
    const auto b = partition_residuals(res, 2.5).real_like;
    CHECK(std::includes(b.begin(), b.end(), a.begin(), a.end()));
  }
}

TEST_CASE("disc_loss_pg") {
  const std::vector<double> hi(5, kScoreMax);
  Partition all_real{iota(0, 5), {}};
  CHECK(disc_loss_pg(hi, all_real).loss == doctest::Approx(0.0).epsilon(1e-6));

  Rng rng(7);
  const auto s = random_scores(rng, 6);
  Partition fake_only{{}, iota(0, 6)};
  double expected = 0;
  for (double x : s) expected -= std::log(1 - x);
  CHECK(disc_loss_pg(s, fake_only).loss == doctest::Approx(expected / 6).epsilon(1e-14));
  CHECK(disc_loss_pg(s, Partition{}).loss == 0.0);

  for (int t = 0; t < 20; ++t) {
    const auto sc = random_scores(rng, 2 + rng.below(10));
    const Partition part = random_partition(rng, sc.size());
    CHECK(fd_check(sc, disc_loss_pg(sc, part).grad, [&](const auto& x) { return disc_loss_pg(x, part).loss; }) <
          1e-5);
  }

  Partition bad{{7}, {}};
  CHECK_THROWS(disc_loss_pg(s, bad));
}

TEST_CASE("disc_loss_pg with provenance partition equals disc_loss_gan") {
  Rng rng(8);
  for (int t = 0; t < 50; ++t) {
    const auto real = random_scores(rng, 1 + rng.below(16));
    const auto fake = random_scores(rng, 1 + rng.below(16));
    std::vector<double> all(real);
    all.insert(all.end(), fake.begin(), fake.end());
    const Partition part{iota(0, real.size()), iota(real.size(), all.size())};
    const auto pg = disc_loss_pg(all, part);
    const auto gan = disc_loss_gan(real, fake);
    CHECK(std::abs(pg.loss - gan.loss) <= 1e-12);
    CHECK((pg.grad.head(real.size()) - gan.real_grad).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK((pg.grad.tail(fake.size()) - gan.fake_grad).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("gen_loss_pg") {
  Rng rng(9);
  const auto s = random_scores(rng, 6);
  const Partition none_fake{iota(0, 6), {}};
  const auto r0 = gen_loss_pg(s, none_fake);
  CHECK(r0.loss == 0.0);
  CHECK(r0.grad.isZero());

  const std::vector<double> half(4, 0.5);
  CHECK(gen_loss_pg(half, Partition{{}, iota(0, 4)}).loss == doctest::Approx(std::log(0.5)).epsilon(1e-14));

  for (int t = 0; t < 20; ++t) {
    const auto sc = random_scores(rng, 2 + rng.below(10));
    const Partition part = random_partition(rng, sc.size());
    for (auto* fn : {&gen_loss_pg, &gen_loss_pg_nonsaturating}) {
      const auto res = fn(sc, part);
      for (std::size_t i : part.real_like) CHECK(res.grad[static_cast<Eigen::Index>(i)] == 0.0);
      for (std::size_t i : part.fake_like) CHECK(res.grad[static_cast<Eigen::Index>(i)] != 0.0);
      CHECK(fd_check(sc, res.grad, [&](const auto& x) { return fn(x, part).loss; }) < 1e-5);
    }
  }
}

TEST_CASE("pi_penalty") {
  const ProjectileModel model;
  Rng rng(10);
  const Normalizer n = random_normalizer(rng, 200);
  const Label l{35, 50};
  const VectorXd exact_norm = n.normalize(exact_trajectory(l, model.params()));

  const auto zero = pi_penalty(exact_norm, l, n, PiWeight{0.1}, model);
  CHECK(zero.value < 1e-12);
  CHECK(zero.grad.cwiseAbs().maxCoeff() < 1e-9);

  VectorXd x(200);
  for (auto& v : x) v = rng.uniform(-2, 2);
  const auto off = pi_penalty(x, l, n, PiWeight{0.0}, model);
  CHECK(off.value == 0.0);
  CHECK(off.grad.isZero());

  const auto on = pi_penalty(x, l, n, PiWeight{0.1}, model);
  CHECK(on.value == doctest::Approx(0.1 * model.mean_residual(n.denormalize_trajectory(x), l)).epsilon(1e-14));

  CHECK_THROWS(pi_penalty(VectorXd::Zero(10), l, n, PiWeight{}, model));
  CHECK_THROWS(pi_penalty(x, l, n, PiWeight{-1}, model));
}

TEST_CASE("pi_penalty gradient matches finite differences") {
  const ProjectileModel model;
  Rng rng(11);
  const double h = 1e-6;
  for (int t = 0; t < 10; ++t) {
    const Normalizer n = random_normalizer(rng, 200);
    const Label l{rng.uniform(1, 100), rng.uniform(0, 90)};
    VectorXd x(200);
    for (auto& v : x) v = rng.uniform(-2, 2);
    const PiWeight w{rng.uniform(0.01, 1)};
    const VectorXd g = pi_penalty(x, l, n, w, model).grad;
    VectorXd fd(g.size());
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double saved = x[i];
      x[i] = saved + h;
      const double up = pi_penalty(x, l, n, w, model).value;
      x[i] = saved - h;
      const double down = pi_penalty(x, l, n, w, model).value;
      x[i] = saved;
      fd[i] = (up - down) / (2 * h);
    }
    CHECK((g - fd).norm() / g.norm() < 1e-5);
  }
}

TEST_CASE("epsilon schedule") {
  const auto s = EpsilonSchedule::reference();
  CHECK(epsilon_schedule(10'000, s) == 5.0);
  CHECK(epsilon_schedule(15'000, s) == 5.0);
  CHECK(epsilon_schedule(19'999, s) == 5.0);
  CHECK(epsilon_schedule(20'000, s) == 2.5);
  CHECK(epsilon_schedule(30'000, s) == 1.25);
  CHECK(epsilon_schedule(69'999, s) == 1.25);
  CHECK(epsilon_schedule(70'000, s) == 0.625);
  CHECK(epsilon_schedule(99'999, s) == 0.625);
  CHECK(s.target() == 0.625);
  CHECK_THROWS_AS(epsilon_schedule(9'999, s), std::out_of_range);

  const auto half = s.scaled(0.5);
  CHECK(half.at(20'000) == 1.25);
  CHECK(half.bands().size() == 4);

  CHECK_THROWS(EpsilonSchedule(std::vector<EpsilonBand>{}));
  CHECK_THROWS(EpsilonSchedule({{10, 1.0}, {10, 0.5}}));
  CHECK_THROWS(EpsilonSchedule({{10, 1.0}, {20, 2.0}}));
  CHECK_THROWS(EpsilonSchedule({{10, 0.0}}));
  CHECK_NOTHROW(EpsilonSchedule({{10, 1.0}, {20, 1.0}}));
}
