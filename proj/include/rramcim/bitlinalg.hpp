#pragma once

// Bit-packed GF(2) vectors and matrices, the exact matrix-vector product
// y_i = XOR_j (a_ij AND x_j), and the BMV1 text interchange format.
//
// Storage is LSB-first inside 64-bit words. Bits past size() are always zero,
// so word-wise popcount/compare never needs masking.

#include <bit>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "rramcim/errors.hpp"

namespace rramcim {

using Word = std::uint64_t;
inline constexpr std::size_t kWordBits = 64;

constexpr std::size_t words_for(std::size_t bits) noexcept {
  return (bits + kWordBits - 1) / kWordBits;
}

class BitVector {
public:
  BitVector() = default;
  explicit BitVector(std::size_t length) : length_(length), words_(words_for(length), 0) {}

  /// Parses a string of '0'/'1' characters; index 0 is the first character.
  static BitVector from_string(std::string_view bits) {
    BitVector v(bits.size());
    for (std::size_t i = 0; i < bits.size(); ++i) {
      if (bits[i] == '1') {
        v.set(i, true);
      } else if (bits[i] != '0') {
        throw ParseError("bit string contains '" + std::string(1, bits[i]) + "'");
      }
    }
    return v;
  }

  template <class Urbg>
  static BitVector random(std::size_t length, Urbg& rng, double density = 0.5) {
    BitVector v(length);
    std::bernoulli_distribution bit(density);
    for (std::size_t i = 0; i < length; ++i) {
      if (bit(rng)) v.set(i, true);
    }
    return v;
  }

  std::size_t size() const noexcept { return length_; }
  bool empty() const noexcept { return length_ == 0; }

  bool get(std::size_t i) const { return (words_[i / kWordBits] >> (i % kWordBits)) & Word{1}; }
  bool operator[](std::size_t i) const { return get(i); }

  void set(std::size_t i, bool value) {
    const Word mask = Word{1} << (i % kWordBits);
    if (value) {
      words_[i / kWordBits] |= mask;
    } else {
      words_[i / kWordBits] &= ~mask;
    }
  }

  void flip(std::size_t i) { words_[i / kWordBits] ^= Word{1} << (i % kWordBits); }

  std::size_t popcount() const noexcept {
    std::size_t n = 0;
    for (Word w : words_) n += static_cast<std::size_t>(std::popcount(w));
    return n;
  }

  std::span<const Word> words() const noexcept { return words_; }

  /// Contiguous sub-range [first, first + count) as a new vector.
  BitVector slice(std::size_t first, std::size_t count) const {
    if (first + count > length_) {
      throw DimensionError("slice [" + std::to_string(first) + ", " + std::to_string(first + count) +
                           ") exceeds length " + std::to_string(length_));
    }
    BitVector out(count);
    for (std::size_t i = 0; i < count; ++i) out.set(i, get(first + i));
    return out;
  }

  std::string to_string() const {
    std::string s(length_, '0');
    for (std::size_t i = 0; i < length_; ++i) {
      if (get(i)) s[i] = '1';
    }
    return s;
  }

  BitVector& operator^=(const BitVector& other) {
    require_same_length(other);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] ^= other.words_[w];
    return *this;
  }

  BitVector& operator&=(const BitVector& other) {
    require_same_length(other);
    for (std::size_t w = 0; w < words_.size(); ++w) words_[w] &= other.words_[w];
    return *this;
  }

  friend BitVector operator^(BitVector a, const BitVector& b) { return a ^= b; }
  friend BitVector operator&(BitVector a, const BitVector& b) { return a &= b; }
  friend bool operator==(const BitVector&, const BitVector&) = default;

private:
  void require_same_length(const BitVector& other) const {
    if (other.length_ != length_) {
      throw DimensionError("bit vector lengths differ: " + std::to_string(length_) + " vs " +
                           std::to_string(other.length_));
    }
  }

  std::size_t length_ = 0;
  std::vector<Word> words_;
};

class BitMatrix {
public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), stride_(words_for(cols)), words_(rows * stride_, 0) {}

  template <class Urbg>
  static BitMatrix random(std::size_t rows, std::size_t cols, Urbg& rng, double density = 0.5) {
    BitMatrix m(rows, cols);
    std::bernoulli_distribution bit(density);
    for (std::size_t i = 0; i < rows; ++i) {
      for (std::size_t j = 0; j < cols; ++j) {
        if (bit(rng)) m.set(i, j, true);
      }
    }
    return m;
  }

  static BitMatrix identity(std::size_t n) {
    BitMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  bool get(std::size_t i, std::size_t j) const {
    return (words_[i * stride_ + j / kWordBits] >> (j % kWordBits)) & Word{1};
  }

  void set(std::size_t i, std::size_t j, bool value) {
    Word& w = words_[i * stride_ + j / kWordBits];
    const Word mask = Word{1} << (j % kWordBits);
    w = value ? (w | mask) : (w & ~mask);
  }

  std::span<const Word> row_words(std::size_t i) const noexcept {
    return std::span<const Word>(words_).subspan(i * stride_, stride_);
  }

  BitVector row(std::size_t i) const {
    BitVector v(cols_);
    for (std::size_t j = 0; j < cols_; ++j) v.set(j, get(i, j));
    return v;
  }

  void set_row(std::size_t i, const BitVector& v) {
    if (v.size() != cols_) throw DimensionError("row length does not match matrix columns");
    for (std::size_t j = 0; j < cols_; ++j) set(i, j, v.get(j));
  }

  /// Columns [first, first + count) of every row.
  BitMatrix column_slice(std::size_t first, std::size_t count) const {
    if (first + count > cols_) {
      throw DimensionError("column slice exceeds matrix width " + std::to_string(cols_));
    }
    BitMatrix out(rows_, count);
    for (std::size_t i = 0; i < rows_; ++i) {
      for (std::size_t j = 0; j < count; ++j) out.set(i, j, get(i, first + j));
    }
    return out;
  }

  friend bool operator==(const BitMatrix&, const BitMatrix&) = default;

private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::size_t stride_ = 0;
  std::vector<Word> words_;
};

/// Hamming-weight parity.
inline bool parity(const BitVector& x) noexcept {
  Word acc = 0;
  for (Word w : x.words()) acc ^= w;
  return std::popcount(acc) & 1;
}

/// Exact GF(2) product: AND each row with x, XOR-reduce via popcount parity.
inline BitVector bmvm_exact(const BitMatrix& a, const BitVector& x) {
  if (x.size() != a.cols()) {
    throw DimensionError("bmvm: matrix has " + std::to_string(a.cols()) + " columns but vector has " +
                         std::to_string(x.size()) + " bits");
  }
  BitVector y(a.rows());
  const auto xw = x.words();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const auto rw = a.row_words(i);
    Word acc = 0;
    for (std::size_t w = 0; w < rw.size(); ++w) acc ^= rw[w] & xw[w];
    if (std::popcount(acc) & 1) y.set(i, true);
  }
  return y;
}

// ---------------------------------------------------------------------------
// BMV1 text format:
//   BMV1 <rows> <cols>
//   one line per row, exactly <cols> characters from {0,1}
// Vectors are stored as a single row.

inline void write_matrix(std::ostream& out, const BitMatrix& m) {
  out << "BMV1 " << m.rows() << ' ' << m.cols() << '\n';
  std::string line(m.cols(), '0');
  for (std::size_t i = 0; i < m.rows(); ++i) {
    for (std::size_t j = 0; j < m.cols(); ++j) line[j] = m.get(i, j) ? '1' : '0';
    out << line << '\n';
  }
}

inline BitMatrix read_matrix(std::istream& in) {
  std::string header;
  if (!std::getline(in, header)) throw ParseError("BMV1: missing header line");
  if (!header.empty() && header.back() == '\r') header.pop_back();

  std::istringstream hs(header);
  std::string magic;
  long long rows = -1;
  long long cols = -1;
  std::string trailing;
  if (!(hs >> magic >> rows >> cols) || magic != "BMV1" || rows < 0 || cols < 0 || (hs >> trailing)) {
    throw ParseError("BMV1: malformed header '" + header + "'");
  }

  BitMatrix m(static_cast<std::size_t>(rows), static_cast<std::size_t>(cols));
  std::string line;
  for (long long i = 0; i < rows; ++i) {
    if (!std::getline(in, line)) {
      throw ParseError("BMV1: expected " + std::to_string(rows) + " rows, found " + std::to_string(i));
    }
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (static_cast<long long>(line.size()) != cols) {
      throw ParseError("BMV1: row " + std::to_string(i) + " has " + std::to_string(line.size()) +
                       " bits, header declares " + std::to_string(cols));
    }
    for (long long j = 0; j < cols; ++j) {
      const char c = line[static_cast<std::size_t>(j)];
      if (c != '0' && c != '1') {
        throw ParseError("BMV1: invalid character in row " + std::to_string(i));
      }
      if (c == '1') m.set(static_cast<std::size_t>(i), static_cast<std::size_t>(j), true);
    }
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) {
      throw ParseError("BMV1: data after the declared " + std::to_string(rows) + " rows");
    }
  }
  return m;
}

inline void store_matrix(const BitMatrix& m, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  write_matrix(out, m);
  if (!out.flush()) throw IoError("write to '" + path + "' failed");
}

inline BitMatrix load_matrix(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  return read_matrix(in);
}

inline void store_vector(const BitVector& v, const std::string& path) {
  BitMatrix m(1, v.size());
  m.set_row(0, v);
  store_matrix(m, path);
}

inline BitVector load_vector(const std::string& path) {
  const BitMatrix m = load_matrix(path);
  if (m.rows() != 1) {
    throw ParseError("'" + path + "' holds " + std::to_string(m.rows()) + " rows; a vector needs exactly 1");
  }
  return m.row(0);
}

} // namespace rramcim
