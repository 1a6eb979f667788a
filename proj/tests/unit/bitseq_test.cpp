#include "blockdisc/bitseq.hpp"

#include <gtest/gtest.h>

#include <sstream>
#include <thread>

#include "blockdisc/errors.hpp"
#include "support/oracles.hpp"

namespace blockdisc {
namespace {

TEST(Prng, SplitMix64MatchesReferenceVector) {
  std::uint64_t state = 0;
  EXPECT_EQ(splitmix64(state), 0xE220A8397B1DCDAFULL);
  EXPECT_EQ(splitmix64(state), 0x6E789E6AA1B965F4ULL);
  EXPECT_EQ(splitmix64(state), 0x06C45D188009454FULL);
}

TEST(Prng, Xoshiro256StarStarMatchesReferenceVector) {
  Xoshiro256StarStar rng(1, 2, 3, 4);
  EXPECT_EQ(rng(), 11520ULL);
  EXPECT_EQ(rng(), 0ULL);
  EXPECT_EQ(rng(), 1509978240ULL);
  EXPECT_EQ(rng(), 1215971899390074240ULL);
}

// Frozen stream outputs; changing the generator breaks every stored result.
TEST(Generate, FrozenTestVectors) {
  const auto t = generate(Seed{1, 0}, 192);
  ASSERT_EQ(t.words().size(), 3u);
  EXPECT_EQ(t.words()[0], 0x91AC046F8F943851ULL);
  EXPECT_EQ(t.words()[1], 0xDEE827459D2E99D0ULL);
  EXPECT_EQ(t.words()[2], 0x77158551ACBAB4EAULL);

  const auto u = generate(Seed{42, 7}, 128);
  EXPECT_EQ(u.words()[0], 0x5814A04C6444E0A6ULL);
  EXPECT_EQ(u.words()[1], 0x5D2A5EF66DB9B511ULL);

  EXPECT_EQ(to_text(generate(Seed{1, 0}, 16)), "1000101000011100\n");
}

TEST(Generate, EmptyAndDeterministic) {
  EXPECT_EQ(generate(Seed{3, 1}, 0).size(), 0u);
  EXPECT_EQ(generate(Seed{9, 4}, 1000), generate(Seed{9, 4}, 1000));
  EXPECT_NE(generate(Seed{9, 4}, 1000), generate(Seed{9, 5}, 1000));
}

TEST(Generate, PrefixStableAndPadBitsClear) {
  const auto long_seq = generate(Seed{5, 2}, 1000);
  const auto short_seq = generate(Seed{5, 2}, 77);
  for (std::size_t i = 0; i < 77; ++i) ASSERT_EQ(long_seq[i], short_seq[i]);
  EXPECT_EQ(short_seq.words().back() >> (77 % 64), 0u);
}

TEST(Generate, IndependentOfThreadSchedule) {
  std::vector<BitSequence> parallel(8);
  {
    std::vector<std::jthread> pool;
    for (std::uint64_t s = 0; s < 8; ++s) {
      pool.emplace_back([&parallel, s] { parallel[7 - s] = generate(Seed{11, 7 - s}, 4096); });
    }
  }
  for (std::uint64_t s = 0; s < 8; ++s) EXPECT_EQ(parallel[s], generate(Seed{11, s}, 4096));
}

// Ten documented seeds; binomial sd of the mean at 2^20 bits is 2^-11.
TEST(Generate, BitMeanNearOneHalf) {
  const std::uint64_t seeds[] = {1, 2, 3, 5, 8, 13, 21, 34, 55, 89};
  for (const auto seed : seeds) {
    const std::size_t n = std::size_t{1} << 20;
    const auto t = generate(Seed{seed, 0}, n);
    const double mean = 1.0 - static_cast<double>(zeros_in_prefix(t, n)) / static_cast<double>(n);
    EXPECT_NEAR(mean, 0.5, 0.01) << "seed " << seed;
  }
}

TEST(ReadText, ParsesBitsAndSkipsLineBreaks) {
  const auto t = parse_text("0101\n");
  ASSERT_EQ(t.size(), 4u);
  EXPECT_EQ(t.bit(0), 0u);
  EXPECT_EQ(t.bit(1), 1u);
  EXPECT_EQ(t.bit(2), 0u);
  EXPECT_EQ(t.bit(3), 1u);
  EXPECT_EQ(parse_text("01\r\n10\n"), parse_text("0110"));
  EXPECT_EQ(parse_text("").size(), 0u);
}

TEST(ReadText, RejectsOtherCharactersWithOffset) {
  try {
    parse_text("01x");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("offset 2"), std::string::npos) << e.what();
  }
  EXPECT_THROW(parse_text("01 1"), DataError);
}

TEST(Packed, RoundTripSmallAndLarge) {
  const auto small = BitSequence::from_bits(std::vector<std::uint8_t>{0, 1, 1});
  std::stringstream buf;
  write_packed(buf, small);
  EXPECT_EQ(buf.str().size(), 9u);
  EXPECT_EQ(static_cast<unsigned char>(buf.str()[8]), 0b110u);
  EXPECT_EQ(read_packed(buf), small);

  const auto big = generate(Seed{1, 0}, 1'000'000);
  std::stringstream big_buf;
  write_packed(big_buf, big);
  EXPECT_EQ(read_packed(big_buf), big);
}

TEST(Packed, HeaderIsLittleEndianBitCount) {
  std::stringstream buf;
  write_packed(buf, generate(Seed{1, 1}, 0x0102));
  const auto s = buf.str();
  EXPECT_EQ(static_cast<unsigned char>(s[0]), 0x02);
  EXPECT_EQ(static_cast<unsigned char>(s[1]), 0x01);
  for (int i = 2; i < 8; ++i) EXPECT_EQ(s[static_cast<std::size_t>(i)], 0);
  EXPECT_EQ(s.size(), 8u + 0x0102 / 8 + 1);
}

TEST(Packed, RejectsTruncatedAndMalformedStreams) {
  std::string header8(8, '\0');
  header8[0] = 8;
  std::stringstream truncated(header8);
  EXPECT_THROW(read_packed(truncated), DataError);

  std::stringstream short_header(std::string(5, '\0'));
  EXPECT_THROW(read_packed(short_header), DataError);

  std::string pad = header8;
  pad[0] = 3;
  pad.push_back(static_cast<char>(0xFF));  // bits 3..7 set past length 3
  std::stringstream bad_pad(pad);
  EXPECT_THROW(read_packed(bad_pad), DataError);

  std::string trailing = header8;
  trailing.push_back('\x01');
  trailing.push_back('\x02');
  std::stringstream extra(trailing);
  EXPECT_THROW(read_packed(extra), DataError);
}

TEST(RoundTrip, TextAndPackedOverRandomLengths) {
  for (std::uint64_t stream = 0; stream < 40; ++stream) {
    const std::size_t len = (stream * 37) % 300;
    const auto t = generate(Seed{77, stream}, len);
    EXPECT_EQ(parse_text(to_text(t)), t);
    std::stringstream buf;
    write_packed(buf, t);
    EXPECT_EQ(read_packed(buf), t);
  }
}

TEST(ZerosInPrefix, SmallCases) {
  const auto t = BitSequence::from_bits(std::vector<std::uint8_t>{0, 0, 1});
  EXPECT_EQ(zeros_in_prefix(t, 3), 2u);
  EXPECT_EQ(zeros_in_prefix(t, 0), 0u);
  EXPECT_THROW(zeros_in_prefix(t, 4), PreconditionError);
}

TEST(ZerosInPrefix, MatchesNaiveCountAndIsOneLipschitz) {
  const auto t = generate(Seed{2024, 0}, 1'000'000);
  const auto bits = oracle::bits_of(t);
  EXPECT_EQ(zeros_in_prefix(t, t.size()), oracle::naive_zeros(bits, t.size()));
  std::size_t previous = 0;
  for (std::size_t n = 1; n <= 5000; ++n) {
    const auto z = zeros_in_prefix(t, n);
    ASSERT_EQ(z, oracle::naive_zeros(bits, n));
    ASSERT_TRUE(z == previous || z == previous + 1);
    ASSERT_EQ(z + (n - z), n);
    previous = z;
  }
}

TEST(BitSequence, RejectsInconsistentConstruction) {
  EXPECT_THROW(BitSequence({0, 0}, 64), PreconditionError);
  EXPECT_THROW(BitSequence({0b100}, 2), PreconditionError);
  EXPECT_THROW(BitSequence::from_bits(std::vector<std::uint8_t>{0, 2}), PreconditionError);
  EXPECT_THROW(parse_text("01").bit(2), PreconditionError);
}

}  // namespace
}  // namespace blockdisc
