#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <set>

#include "onebit/channel.hpp"

namespace {

using onebit::cplx;
using onebit::CMatrix;
using onebit::CVector;
using onebit::SeedSpec;
using onebit::StreamPurpose;

TEST(GenerateChannel, Deterministic) {
  const SeedSpec seed{7, StreamPurpose::Channel, 0, 0};
  const auto a = onebit::generate_channel(1, 4, seed);
  const auto b = onebit::generate_channel(1, 4, seed);
  EXPECT_EQ(a.matrix(), b.matrix());
  EXPECT_EQ(a.k_users(), 1);
  EXPECT_EQ(a.m_antennas(), 4);
}

TEST(GenerateChannel, DistinctLabelsGiveDistinctStreams) {
  std::set<double> first_entries;
  for (std::uint64_t master : {1u, 2u}) {
    for (auto purpose : {StreamPurpose::Channel, StreamPurpose::Symbols, StreamPurpose::Noise}) {
      for (std::uint64_t trial : {0u, 1u, 1000u}) {
        const auto h = onebit::generate_channel(1, 1, {master, purpose, trial, 0});
        first_entries.insert(h.matrix()(0, 0).real());
      }
    }
  }
  EXPECT_EQ(first_entries.size(), 18u);
}

TEST(GenerateChannel, SmallerAntennaCountIsColumnPrefix) {
  const SeedSpec seed{3, StreamPurpose::Channel, 12, 0};
  const auto small = onebit::generate_channel(3, 32, seed);
  const auto large = onebit::generate_channel(3, 128, seed);
  EXPECT_EQ(small.matrix(), large.matrix().leftCols(32));
}

TEST(GenerateChannel, UnitVarianceEntries) {
  // 100 draws of 1000 entries = 1e5 samples.
  double sum_sq = 0.0;
  double sum_re_sq = 0.0;
  double sum_abs = 0.0;
  std::size_t count = 0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto h = onebit::generate_channel(1, 1000, {99, StreamPurpose::Channel, t, 0});
    for (Eigen::Index m = 0; m < h.m_antennas(); ++m) {
      const cplx z = h.matrix()(0, m);
      sum_sq += std::norm(z);
      sum_re_sq += z.real() * z.real();
      sum_abs += std::abs(z);
      ++count;
    }
  }
  const double n = static_cast<double>(count);
  EXPECT_NEAR(sum_sq / n, 1.0, 0.02);
  EXPECT_NEAR(sum_re_sq / n, 0.5, 0.01);
  EXPECT_NEAR(sum_abs / n, std::sqrt(std::numbers::pi / 4.0), 0.01);
}

TEST(GenerateChannel, RejectsZeroDimensions) {
  EXPECT_THROW(onebit::generate_channel(0, 4, {}), onebit::Error);
  EXPECT_THROW(onebit::generate_channel(2, 0, {}), onebit::Error);
}

TEST(ChannelMatrix, UserVectorIsConjugateRow) {
  CMatrix h(2, 2);
  h << cplx(1, 2), cplx(3, -4), cplx(0, 1), cplx(-1, 0);
  const onebit::ChannelMatrix ch(h);
  const CVector h1 = ch.user_vector(0);
  EXPECT_EQ(h1(0), cplx(1, -2));
  EXPECT_EQ(h1(1), cplx(3, 4));
  const auto single = onebit::ChannelMatrix::from_user_vector(h1);
  EXPECT_EQ(single.matrix().row(0), h.row(0));
}

TEST(ChannelMatrix, RejectsNonFinite) {
  CMatrix h(1, 2);
  h << cplx(1, 0), cplx(std::nan(""), 0);
  EXPECT_THROW(onebit::ChannelMatrix{h}, onebit::Error);
  EXPECT_THROW(onebit::ChannelMatrix{CMatrix(0, 3)}, onebit::Error);
}

TEST(SampleNoise, ZeroSigmaGivesZeros) {
  for (const auto& z : onebit::sample_noise(0.0, 16, {1, StreamPurpose::Noise, 0, 0})) {
    EXPECT_EQ(z, cplx(0.0, 0.0));
  }
}

TEST(SampleNoise, VariancePerRealDimension) {
  const auto z = onebit::sample_noise(1.0, 1000000, {5, StreamPurpose::Noise, 0, 0});
  double re_sq = 0.0;
  for (const auto& v : z) re_sq += v.real() * v.real();
  EXPECT_NEAR(re_sq / static_cast<double>(z.size()), 1.0, 0.01);

  const auto w = onebit::sample_noise(0.5, 1000000, {5, StreamPurpose::Noise, 1, 0});
  double total = 0.0;
  for (const auto& v : w) total += std::norm(v);
  EXPECT_NEAR(total / static_cast<double>(w.size()), 0.5, 0.01);
}

TEST(SampleNoise, DeterministicAndValidated) {
  const SeedSpec seed{8, StreamPurpose::Noise, 4, 9};
  EXPECT_EQ(onebit::sample_noise(0.3, 10, seed), onebit::sample_noise(0.3, 10, seed));
  try {
    onebit::sample_noise(-0.1, 1, seed);
    FAIL();
  } catch (const onebit::Error& e) {
    EXPECT_EQ(e.code(), onebit::Errc::InvalidParameter);
  }
}

TEST(ChannelNorms, Example) {
  CVector h(2);
  h << cplx(1, 0), cplx(0, 1);
  const auto n = onebit::channel_norms(h);
  EXPECT_DOUBLE_EQ(n.l1, 2.0);
  EXPECT_DOUBLE_EQ(n.l2, std::sqrt(2.0));
}

TEST(ChannelNorms, Hardening) {
  const int m = 1024;
  double l2_sq = 0.0;
  double l1 = 0.0;
  for (std::uint64_t t = 0; t < 100; ++t) {
    const auto h = onebit::generate_channel(1, m, {2024, StreamPurpose::Channel, t, 0});
    const auto n = onebit::channel_norms(h.user_vector(0));
    l2_sq += n.l2 * n.l2 / m;
    l1 += n.l1 / m;
  }
  EXPECT_NEAR(l2_sq / 100.0, 1.0, 0.01);
  EXPECT_NEAR(l1 / 100.0, std::sqrt(std::numbers::pi / 4.0), 0.01);
}

TEST(Rng, UniformIndexCoversRange) {
  onebit::Rng rng({1, StreamPurpose::Test, 0, 0});
  std::array<int, 16> counts{};
  for (int i = 0; i < 160000; ++i) ++counts[rng.uniform_index(16)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 500);
}

}  // namespace
