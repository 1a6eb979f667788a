#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace blockdisc {

/// Finite binary sequence t(0..N-1), packed LSB-first into 64-bit words.
///
/// Immutable once built; share freely across threads. Bits past `size()`
/// in the last word are always zero.
class BitSequence {
 public:
  BitSequence() = default;

  /// Takes ownership of packed words. Throws PreconditionError if the word
  /// count does not match `length` or if pad bits are set.
  BitSequence(std::vector<std::uint64_t> words, std::size_t length);

  static BitSequence from_bits(std::span<const std::uint8_t> bits);

  std::size_t size() const noexcept { return length_; }
  bool empty() const noexcept { return length_ == 0; }

  /// Unchecked access; requires i < size().
  unsigned operator[](std::size_t i) const noexcept {
    return static_cast<unsigned>((words_[i >> 6] >> (i & 63)) & 1u);
  }
  /// Checked access; throws PreconditionError past the end.
  unsigned bit(std::size_t i) const;

  std::span<const std::uint64_t> words() const noexcept { return words_; }

  friend bool operator==(const BitSequence&, const BitSequence&) = default;

 private:
  std::vector<std::uint64_t> words_;
  std::size_t length_ = 0;
};

/// Identifies one reproducible pseudo-random bit stream.
struct Seed {
  std::uint64_t master = 0;
  std::uint64_t stream = 0;

  friend bool operator==(const Seed&, const Seed&) = default;
};

// The generator: xoshiro256** whose 256-bit state is filled by four SplitMix64
// outputs started from splitmix_seed(master, stream). Each 64-bit output
// supplies the next 64 bits, LSB first. Frozen; test vectors live in
// tests/unit/bitseq_test.cpp.

/// One SplitMix64 step: advances `state` and returns the mixed output.
std::uint64_t splitmix64(std::uint64_t& state) noexcept;

class Xoshiro256StarStar {
 public:
  explicit Xoshiro256StarStar(std::uint64_t seed) noexcept;
  Xoshiro256StarStar(std::uint64_t s0, std::uint64_t s1, std::uint64_t s2,
                     std::uint64_t s3) noexcept;
  std::uint64_t operator()() noexcept;

 private:
  std::uint64_t s_[4];
};

/// Start value for the SplitMix64 seeding chain of stream `seed.stream`.
std::uint64_t stream_key(const Seed& seed) noexcept;

/// Deterministic fair-coin bits. Prefix-stable: generate(s, n) is a prefix of
/// generate(s, m) for n <= m.
BitSequence generate(const Seed& seed, std::size_t length);

/// Parses '0'/'1' characters; '\n' and '\r' are skipped. Throws DataError
/// naming the byte offset of the first other character.
BitSequence read_text(std::istream& in);
BitSequence parse_text(std::string_view text);
void write_text(std::ostream& out, const BitSequence& t, std::size_t line_width = 64);
std::string to_text(const BitSequence& t);

/// Packed format: u64 little-endian bit count, then ceil(N/8) bytes LSB-first
/// with zero pad bits.
BitSequence read_packed(std::istream& in);
void write_packed(std::ostream& out, const BitSequence& t);

/// |{i < n : t(i) = 0}|; throws PreconditionError if n > size().
std::size_t zeros_in_prefix(const BitSequence& t, std::size_t n);

}  // namespace blockdisc
