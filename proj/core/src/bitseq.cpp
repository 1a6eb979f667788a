#include "blockdisc/bitseq.hpp"

#include <bit>
#include <istream>
#include <iterator>
#include <new>
#include <ostream>
#include <sstream>

#include "blockdisc/errors.hpp"

namespace blockdisc {
namespace {

constexpr std::size_t words_for(std::size_t bits) { return (bits + 63) / 64; }

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::vector<std::uint64_t> allocate_words(std::size_t length) {
  try {
    return std::vector<std::uint64_t>(words_for(length), 0);
  } catch (const std::bad_alloc&) {
    throw ResourceError("cannot allocate bit sequence of length " + std::to_string(length));
  } catch (const std::length_error&) {
    throw ResourceError("cannot allocate bit sequence of length " + std::to_string(length));
  }
}

void mask_tail(std::vector<std::uint64_t>& words, std::size_t length) {
  if (length % 64 != 0) {
    words.back() &= (std::uint64_t{1} << (length % 64)) - 1;
  }
}

}  // namespace

BitSequence::BitSequence(std::vector<std::uint64_t> words, std::size_t length)
    : words_(std::move(words)), length_(length) {
  if (words_.size() != words_for(length_)) {
    throw PreconditionError("word count does not match bit length");
  }
  if (length_ % 64 != 0 && (words_.back() >> (length_ % 64)) != 0) {
    throw PreconditionError("pad bits beyond length must be zero");
  }
}

BitSequence BitSequence::from_bits(std::span<const std::uint8_t> bits) {
  auto words = allocate_words(bits.size());
  for (std::size_t i = 0; i < bits.size(); ++i) {
    if (bits[i] > 1) throw PreconditionError("bit values must be 0 or 1");
    words[i >> 6] |= std::uint64_t{bits[i]} << (i & 63);
  }
  return BitSequence(std::move(words), bits.size());
}

unsigned BitSequence::bit(std::size_t i) const {
  if (i >= length_) {
    throw PreconditionError("bit index " + std::to_string(i) + " out of range for length " +
                            std::to_string(length_));
  }
  return (*this)[i];
}

std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  return mix64(state);
}

Xoshiro256StarStar::Xoshiro256StarStar(std::uint64_t seed) noexcept {
  for (auto& s : s_) s = splitmix64(seed);
}

Xoshiro256StarStar::Xoshiro256StarStar(std::uint64_t s0, std::uint64_t s1, std::uint64_t s2,
                                       std::uint64_t s3) noexcept
    : s_{s0, s1, s2, s3} {}

std::uint64_t Xoshiro256StarStar::operator()() noexcept {
  const std::uint64_t result = std::rotl(s_[1] * 5, 7) * 9;
  const std::uint64_t t = s_[1] << 17;
  s_[2] ^= s_[0];
  s_[3] ^= s_[1];
  s_[1] ^= s_[2];
  s_[0] ^= s_[3];
  s_[2] ^= t;
  s_[3] = std::rotl(s_[3], 45);
  return result;
}

std::uint64_t stream_key(const Seed& seed) noexcept {
  return mix64(seed.master + mix64(seed.stream ^ 0xD1B54A32D192ED03ULL));
}

BitSequence generate(const Seed& seed, std::size_t length) {
  auto words = allocate_words(length);
  Xoshiro256StarStar rng(stream_key(seed));
  for (auto& w : words) w = rng();
  if (!words.empty()) mask_tail(words, length);
  return BitSequence(std::move(words), length);
}

BitSequence read_text(std::istream& in) {
  std::vector<std::uint64_t> words;
  std::size_t length = 0;
  std::size_t offset = 0;
  std::istreambuf_iterator<char> it(in), end;
  for (; it != end; ++it, ++offset) {
    const char c = *it;
    if (c == '\n' || c == '\r') continue;
    if (c != '0' && c != '1') {
      throw DataError("invalid character in bit text at offset " + std::to_string(offset));
    }
    if (length % 64 == 0) words.push_back(0);
    if (c == '1') words.back() |= std::uint64_t{1} << (length % 64);
    ++length;
  }
  return BitSequence(std::move(words), length);
}

BitSequence parse_text(std::string_view text) {
  std::istringstream in{std::string(text)};
  return read_text(in);
}

void write_text(std::ostream& out, const BitSequence& t, std::size_t line_width) {
  std::string line;
  line.reserve(line_width + 1);
  for (std::size_t i = 0; i < t.size(); ++i) {
    line.push_back(t[i] ? '1' : '0');
    if (line_width != 0 && line.size() == line_width) {
      line.push_back('\n');
      out << line;
      line.clear();
    }
  }
  if (!line.empty()) {
    line.push_back('\n');
    out << line;
  }
}

std::string to_text(const BitSequence& t) {
  std::ostringstream out;
  write_text(out, t);
  return out.str();
}

BitSequence read_packed(std::istream& in) {
  unsigned char header[8];
  if (!in.read(reinterpret_cast<char*>(header), 8)) {
    throw DataError("packed stream truncated inside the 8-byte length header");
  }
  std::uint64_t length = 0;
  for (int i = 7; i >= 0; --i) length = (length << 8) | header[i];

  const std::uint64_t payload = (length + 7) / 8;
  if (length > (std::uint64_t{1} << 46)) {
    throw DataError("packed length header " + std::to_string(length) + " is implausibly large");
  }
  auto words = allocate_words(static_cast<std::size_t>(length));
  std::vector<unsigned char> bytes(static_cast<std::size_t>(payload));
  if (payload != 0 &&
      !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(payload))) {
    throw DataError("packed stream truncated: header declares " + std::to_string(length) +
                    " bits but payload has " + std::to_string(in.gcount()) + " of " +
                    std::to_string(payload) + " bytes");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw DataError("packed stream has trailing bytes beyond declared length");
  }
  for (std::size_t b = 0; b < bytes.size(); ++b) {
    words[b >> 3] |= std::uint64_t{bytes[b]} << (8 * (b & 7));
  }
  if (length % 64 != 0 && (words.back() >> (length % 64)) != 0) {
    throw DataError("packed stream has nonzero pad bits");
  }
  return BitSequence(std::move(words), static_cast<std::size_t>(length));
}

void write_packed(std::ostream& out, const BitSequence& t) {
  const std::uint64_t length = t.size();
  char header[8];
  for (int i = 0; i < 8; ++i) header[i] = static_cast<char>((length >> (8 * i)) & 0xFF);
  out.write(header, 8);

  const std::size_t payload = (t.size() + 7) / 8;
  std::vector<char> bytes(payload);
  const auto words = t.words();
  for (std::size_t b = 0; b < payload; ++b) {
    bytes[b] = static_cast<char>((words[b >> 3] >> (8 * (b & 7))) & 0xFF);
  }
  out.write(bytes.data(), static_cast<std::streamsize>(payload));
}

std::size_t zeros_in_prefix(const BitSequence& t, std::size_t n) {
  if (n > t.size()) {
    throw PreconditionError("prefix length " + std::to_string(n) + " exceeds sequence length " +
                            std::to_string(t.size()));
  }
  const auto words = t.words();
  std::size_t ones = 0;
  const std::size_t full = n / 64;
  for (std::size_t w = 0; w < full; ++w) ones += static_cast<std::size_t>(std::popcount(words[w]));
  if (n % 64 != 0) {
    const std::uint64_t mask = (std::uint64_t{1} << (n % 64)) - 1;
    ones += static_cast<std::size_t>(std::popcount(words[full] & mask));
  }
  return n - ones;
}

}  // namespace blockdisc
