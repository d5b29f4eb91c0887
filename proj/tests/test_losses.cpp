#include <doctest.h>

#include <cmath>

#include "caslearn/error.hpp"
#include "caslearn/losses.hpp"
#include "caslearn/rng.hpp"

using namespace caslearn;
using ad::Tape;
using ad::Var;

namespace {

// independent oracle: plain-double softmax cross-entropy of each anchor's
// similarity row with the partner as the true class, by direct summation
double nt_xent_oracle(const std::vector<std::vector<double>>& z, double tau) {
  const int m = static_cast<int>(z.size());
  auto cosine = [](const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0, aa = 0, bb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      ab += a[i] * b[i];
      aa += a[i] * a[i];
      bb += b[i] * b[i];
    }
    return ab / (std::sqrt(aa) * std::sqrt(bb));
  };
  double total = 0.0;
  for (int i = 0; i < m; ++i) {
    const int partner = i ^ 1;
    double denom = 0.0;
    for (int k = 0; k < m; ++k)
      if (k != i) denom += std::exp(cosine(z[static_cast<size_t>(i)], z[static_cast<size_t>(k)]) / tau);
    total += -std::log(std::exp(cosine(z[static_cast<size_t>(i)], z[static_cast<size_t>(partner)]) / tau) / denom);
  }
  return total / m;
}

std::vector<std::vector<double>> random_views(Rng& rng, int pairs, int dim) {
  std::vector<std::vector<double>> z;
  for (int i = 0; i < 2 * pairs; ++i) {
    std::vector<double> v(static_cast<size_t>(dim));
    for (double& x : v) x = rng.uniform(-1.0, 1.0);
    // keep away from the zero vector
    v[0] += v[0] >= 0 ? 0.5 : -0.5;
    z.push_back(std::move(v));
  }
  return z;
}

double nt_xent_value(const std::vector<std::vector<double>>& z, double tau) {
  Tape tape;
  std::vector<Var> views;
  for (const auto& v : z) views.push_back(tape.leaf(1, static_cast<int>(v.size()), v));
  return nt_xent_loss(tape, views, tau).scalar();
}

}  // namespace

TEST_CASE("contrastive loss is exactly zero for a single pair") {
  Rng rng(1);
  for (int trial = 0; trial < 10; ++trial) {
    auto z = random_views(rng, 1, 5);
    CHECK(nt_xent_value(z, 0.1) == 0.0);
  }
}

TEST_CASE("contrastive loss matches the hand-computed two-pair case") {
  // pairs ((1,0),(1,0)) and ((0,1),(0,1)) at tau 1: every anchor sees
  // positive similarity 1 and negatives 0, so each loss is -log(e/(e+2))
  std::vector<std::vector<double>> z{{1, 0}, {1, 0}, {0, 1}, {0, 1}};
  const double expected = -std::log(std::exp(1.0) / (std::exp(1.0) + 2.0));
  CHECK(nt_xent_value(z, 1.0) == doctest::Approx(expected).epsilon(1e-12));
  CHECK(expected == doctest::Approx(0.5514).epsilon(1e-3));
}

TEST_CASE("contrastive loss equals the direct-summation oracle") {
  Rng rng(42);
  for (int trial = 0; trial < 60; ++trial) {
    const int pairs = 2 << (trial % 3);  // 2, 4, 8
    const double tau = (trial % 3 == 0) ? 0.05 : (trial % 3 == 1 ? 0.1 : 1.0);
    auto z = random_views(rng, pairs, 1 + static_cast<int>(rng.below(8)));
    CHECK(std::abs(nt_xent_value(z, tau) - nt_xent_oracle(z, tau)) < 1e-10);
  }
}

TEST_CASE("contrastive loss is scale and pair-permutation invariant") {
  Rng rng(7);
  auto z = random_views(rng, 4, 6);
  const double base = nt_xent_value(z, 0.1);

  auto scaled = z;
  for (auto& v : scaled)
    for (double& x : v) x *= 37.0;
  CHECK(std::abs(nt_xent_value(scaled, 0.1) - base) < 1e-9);

  // swap whole pairs around (pairing preserved)
  std::vector<std::vector<double>> permuted{z[4], z[5], z[0], z[1], z[6], z[7], z[2], z[3]};
  CHECK(std::abs(nt_xent_value(permuted, 0.1) - base) < 1e-12);
}

TEST_CASE("contrastive loss rejects degenerate batches") {
  Tape tape;
  std::vector<Var> one{tape.leaf(1, 2, std::vector<double>{1.0, 0.0})};
  CHECK_THROWS_AS(nt_xent_loss(tape, one, 0.1), Error);
  std::vector<Var> with_zero{tape.leaf(1, 2, std::vector<double>{1.0, 0.0}),
                             tape.leaf(1, 2, std::vector<double>{0.0, 0.0})};
  CHECK_THROWS_AS(nt_xent_loss(tape, with_zero, 0.1), Error);
}

TEST_CASE("msle matches its hand-computed cases") {
  Tape tape;
  // exact prediction: zero loss
  Var p1 = tape.leaf(1, 1, std::vector<double>{3.0});
  CHECK(msle_loss(tape, {p1}, {8}).scalar() == 0.0);

  // predicted 8 vs true 2 in log2: (3 - 1)^2 = 4
  Var p2 = tape.leaf(1, 1, std::vector<double>{3.0});
  CHECK(msle_loss(tape, {p2}, {2}).scalar() == doctest::Approx(4.0).epsilon(1e-12));

  // batch with log2 errors 1 and 3: (1 + 9) / 2 = 5
  Var a = tape.leaf(1, 1, std::vector<double>{1.0});
  Var b = tape.leaf(1, 1, std::vector<double>{3.0});
  CHECK(msle_loss(tape, {a, b}, {1, 1}).scalar() == doctest::Approx(5.0).epsilon(1e-12));

  CHECK_THROWS_AS(msle_loss(tape, {a}, {0}), Error);
  CHECK_THROWS_AS(msle_loss(tape, {}, {}), Error);

  CHECK(msle_value({3.0, 1.0}, {8, 2}) == doctest::Approx(0.0));
}

TEST_CASE("distillation loss measures teacher-student drift") {
  Tape tape;
  Var same = tape.leaf(1, 1, std::vector<double>{2.5});
  CHECK(distill_loss(tape, {same}, {2.5}).scalar() == 0.0);

  Var off = tape.leaf(1, 1, std::vector<double>{2.0});
  CHECK(distill_loss(tape, {off}, {3.0}).scalar() == doctest::Approx(1.0).epsilon(1e-12));

  // labeled and unlabeled entries weigh equally in the mean
  Var s1 = tape.leaf(1, 1, std::vector<double>{1.0});
  Var s2 = tape.leaf(1, 1, std::vector<double>{0.0});
  CHECK(distill_loss(tape, {s1, s2}, {0.0, 2.0}).scalar() == doctest::Approx((1.0 + 4.0) / 2.0));

  CHECK_THROWS_AS(distill_loss(tape, {}, {}), Error);
}

TEST_CASE("logistic loss behaves symmetrically") {
  Tape tape;
  Var zero = tape.leaf(1, 1, std::vector<double>{0.0});
  CHECK(logistic_loss(tape, {zero}, {1}).scalar() == doctest::Approx(std::log(2.0)).epsilon(1e-12));

  Var pos = tape.leaf(1, 1, std::vector<double>{2.0});
  Var neg = tape.leaf(1, 1, std::vector<double>{-2.0});
  CHECK(logistic_loss(tape, {pos}, {1}).scalar() ==
        doctest::Approx(logistic_loss(tape, {neg}, {0}).scalar()).epsilon(1e-12));

  // confident wrong answers cost more
  CHECK(logistic_loss(tape, {pos}, {0}).scalar() > logistic_loss(tape, {pos}, {1}).scalar());
}

TEST_CASE("loss gradients flow to every view") {
  Rng rng(3);
  auto z = random_views(rng, 2, 4);
  Tape tape;
  std::vector<Var> views;
  for (const auto& v : z) views.push_back(tape.leaf(1, 4, v));
  tape.backward(nt_xent_loss(tape, views, 0.1));
  for (const Var& v : views) {
    double norm = 0.0;
    for (double g : v.grad()) norm += std::abs(g);
    CHECK(norm > 0.0);
  }
}
