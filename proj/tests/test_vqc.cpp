#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "rtlsq/vqc.hpp"

namespace q = rtlsq::quantum;
namespace vq = rtlsq::vqc;
using q::ComplexVector;

namespace {

std::vector<double> random_features(rtlsq::Rng& rng, std::size_t n) {
  std::vector<double> f(n);
  for (double& x : f) x = rtlsq::uniform01(rng);
  return f;
}

double projected_score(const vq::VqcModel& m, const std::vector<double>& f, const std::vector<double>& g) {
  auto s = vq::vqc_scores(m, f);
  double acc = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) acc += g[i] * s[i];
  return acc;
}

}  // namespace

TEST(AngleEncode, Examples) {
  std::vector<double> zeros(10, 0.0);
  auto s = vq::angle_encode(zeros, 4);
  EXPECT_NEAR(std::abs(s.amplitudes()(0)), 1.0, 1e-15);

  std::vector<double> one{1.0};
  auto flipped = vq::angle_encode(one, 1);
  EXPECT_NEAR(std::abs(flipped.amplitudes()(1)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(flipped.amplitudes()(0)), 0.0, 1e-15);

  rtlsq::Rng rng = rtlsq::substream(1, "test");
  for (int t = 0; t < 20; ++t)
    EXPECT_NEAR(vq::angle_encode(random_features(rng, 10), 4).amplitudes().squaredNorm(), 1.0, 1e-10);

  std::vector<double> bad{0.5, 1.2};
  EXPECT_THROW(vq::angle_encode(bad, 2), rtlsq::DataError);
  std::vector<double> edge{-1e-10, 1.0 + 1e-10};
  EXPECT_NO_THROW(vq::angle_encode(edge, 2));
}

TEST(AngleEncode, DistinctInputsAreDistinguishable) {
  for (double a = 0.0; a <= 1.0; a += 0.125)
    for (double b = a + 0.125; b <= 1.0; b += 0.125) {
      std::vector<double> fa{a}, fb{b};
      auto sa = vq::angle_encode(fa, 1);
      auto sb = vq::angle_encode(fb, 1);
      EXPECT_LT(std::norm(sa.amplitudes().dot(sb.amplitudes())), 1.0 - 1e-6);
    }
}

TEST(AmplitudeEncode, Examples) {
  std::vector<double> basis{1, 0, 0, 0};
  EXPECT_NEAR(vq::amplitude_encode(basis, 2).amplitudes()(0).real(), 1.0, 1e-15);
  std::vector<double> flat{1, 1, 1, 1};
  auto u = vq::amplitude_encode(flat, 2);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(u.amplitudes()(i).real(), 0.5, 1e-15);
  std::vector<double> tri{3, 4};
  auto t = vq::amplitude_encode(tri, 1);
  EXPECT_NEAR(t.amplitudes()(0).real(), 0.6, 1e-15);
  EXPECT_NEAR(t.amplitudes()(1).real(), 0.8, 1e-15);

  std::vector<double> zero(3, 0.0);
  EXPECT_THROW(vq::amplitude_encode(zero, 2), rtlsq::DataError);
  std::vector<double> too_many(5, 1.0);
  EXPECT_THROW(vq::amplitude_encode(too_many, 2), rtlsq::ArgumentError);
}

TEST(Ansatz, ZeroParamsFixZeroState) {
  vq::VqcModel m{4, 3, std::vector<double>(24, 0.0)};
  auto out = vq::apply_ansatz(q::PureState::basis(4, 0), m);
  EXPECT_NEAR(std::abs(out.amplitudes()(0)), 1.0, 1e-15);
}

TEST(Ansatz, DepthZeroIsIdentity) {
  rtlsq::Rng rng = rtlsq::substream(2, "test");
  auto psi = q::haar_state(3, rng);
  vq::VqcModel m{3, 0, {}};
  EXPECT_LT((vq::apply_ansatz(psi, m).amplitudes() - psi.amplitudes()).norm(), 1e-15);
  std::vector<double> f(5, 0.0);
  for (double z : vq::vqc_scores(m, f)) EXPECT_EQ(z, 1.0);
}

TEST(Ansatz, PreservesNormAndRejectsMismatch) {
  rtlsq::Rng rng = rtlsq::substream(3, "test");
  for (auto ent : {vq::Entanglement::linear, vq::Entanglement::ring})
    for (int n : {2, 4, 6}) {
      auto m = vq::init_vqc(n, 3, 17, vq::Encoding::angle, ent);
      auto psi = q::haar_state(n, rng);
      ComplexVector raw = vq::detail::run_ansatz(psi.amplitudes(), m, m.params);
      EXPECT_NEAR(raw.squaredNorm(), 1.0, 1e-10);
    }
  auto m = vq::init_vqc(2, 1, 1);
  EXPECT_THROW(vq::apply_ansatz(q::PureState::basis(3, 0), m), rtlsq::ArgumentError);
}

TEST(Ansatz, RingDiffersFromLinear) {
  auto lin = vq::init_vqc(4, 2, 5, vq::Encoding::angle, vq::Entanglement::linear);
  auto ring = lin;
  ring.entanglement = vq::Entanglement::ring;
  std::vector<double> f{0.1, 0.7, 0.3, 0.9};
  auto a = vq::vqc_scores(lin, f);
  auto b = vq::vqc_scores(ring, f);
  double diff = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) diff += std::abs(a[i] - b[i]);
  EXPECT_GT(diff, 1e-6);
}

TEST(Expectations, Examples) {
  for (double z : vq::expectations(q::PureState::basis(3, 0), 3)) EXPECT_EQ(z, 1.0);
  auto z = vq::expectations(q::PureState::basis(2, 2), 2);  // |10>
  EXPECT_EQ(z[0], -1.0);
  EXPECT_EQ(z[1], 1.0);
  ComplexVector plus(2);
  plus << 1 / std::sqrt(2.0), 1 / std::sqrt(2.0);
  EXPECT_NEAR(vq::expectations(q::PureState::from_amplitudes(plus), 1)[0], 0.0, 1e-10);
}

TEST(Scores, BoundedAndDeterministic) {
  rtlsq::Rng rng = rtlsq::substream(4, "test");
  auto m = vq::init_vqc(6, 3, 9);
  for (int t = 0; t < 50; ++t) {
    auto f = random_features(rng, 7);
    auto a = vq::vqc_scores(m, f);
    auto b = vq::vqc_scores(m, f);
    EXPECT_EQ(a, b);
    for (double s : a) {
      EXPECT_GE(s, -1.0 - 1e-12);
      EXPECT_LE(s, 1.0 + 1e-12);
    }
  }
}

TEST(ParamShift, ZeroDownstreamGivesZero) {
  auto m = vq::init_vqc(4, 2, 3);
  std::vector<double> f(4, 0.5), g(4, 0.0);
  for (double d : vq::param_shift_grad(m, f, g)) EXPECT_EQ(d, 0.0);
}

TEST(ParamShift, SingleRotationAnalytic) {
  for (double theta : {-2.5, -0.3, 0.0, 0.8, 2.2}) {
    vq::VqcModel m{1, 1, {theta, 0.4}};
    std::vector<double> f{0.0}, g{1.0};
    auto grad = vq::param_shift_grad(m, f, g);
    EXPECT_NEAR(grad[0], -std::sin(theta), 1e-10);
    EXPECT_NEAR(grad[1], 0.0, 1e-12);
  }
}

TEST(ParamShift, MatchesCentralFiniteDifference) {
  rtlsq::Rng rng = rtlsq::substream(5, "test");
  const double h = 1e-5;
  for (int draw = 0; draw < 100; ++draw) {
    int n = 2 + 2 * static_cast<int>(rtlsq::uniform_index(rng, 3));
    auto m = vq::init_vqc(n, 1 + static_cast<int>(rtlsq::uniform_index(rng, 3)), 100 + draw,
                          vq::Encoding::angle,
                          draw % 2 ? vq::Entanglement::ring : vq::Entanglement::linear);
    auto f = random_features(rng, 10);
    std::vector<double> g(static_cast<std::size_t>(n));
    for (double& x : g) x = rtlsq::gaussian(rng);
    auto analytic = vq::param_shift_grad(m, f, g);
    double diff = 0.0, norm = 0.0;
    for (std::size_t k = 0; k < m.params.size(); ++k) {
      auto plus = m, minus = m;
      plus.params[k] += h;
      minus.params[k] -= h;
      double fd = (projected_score(plus, f, g) - projected_score(minus, f, g)) / (2 * h);
      diff += (fd - analytic[k]) * (fd - analytic[k]);
      norm += analytic[k] * analytic[k];
    }
    EXPECT_LT(std::sqrt(diff / norm), 1e-6) << "draw " << draw;
  }
}
