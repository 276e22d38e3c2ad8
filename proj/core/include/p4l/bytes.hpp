#pragma once

#include <array>
#include <cstdint>
#include <cstring>
#include <gmpxx.h>
#include <stdexcept>
#include <string>
#include <vector>

namespace p4l {

using Bytes = std::vector<uint8_t>;

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Big-endian, length-prefixed writer used for every canonical encoding.
/// The layouts produced here are the wire format; field order is fixed and
/// signatures are computed over exactly these bytes.
class ByteWriter {
public:
  void put_u8(uint8_t v) { buf_.push_back(v); }
  void put_u16(uint16_t v);
  void put_u32(uint32_t v);
  void put_u64(uint64_t v);
  void put_i64(int64_t v) { put_u64(static_cast<uint64_t>(v)); }
  void put_f64(double v); // IEEE-754 bit pattern, big-endian
  void put_raw(const uint8_t* p, size_t n) { buf_.insert(buf_.end(), p, p + n); }
  void put_raw(const Bytes& b) { put_raw(b.data(), b.size()); }
  /// u32 length prefix + raw bytes.
  void put_blob(const Bytes& b);
  /// u32 length prefix + big-endian magnitude. Value must be >= 0.
  void put_mpz(const mpz_class& v);

  const Bytes& bytes() const { return buf_; }
  Bytes take() { return std::move(buf_); }

private:
  Bytes buf_;
};

class ByteReader {
public:
  explicit ByteReader(const Bytes& b) : data_(b.data()), size_(b.size()) {}
  ByteReader(const uint8_t* p, size_t n) : data_(p), size_(n) {}

  uint8_t get_u8();
  uint16_t get_u16();
  uint32_t get_u32();
  uint64_t get_u64();
  int64_t get_i64() { return static_cast<int64_t>(get_u64()); }
  double get_f64();
  void get_raw(uint8_t* out, size_t n);
  Bytes get_blob();
  mpz_class get_mpz();

  bool exhausted() const { return pos_ == size_; }
  size_t remaining() const { return size_ - pos_; }

private:
  void need(size_t n) const {
    if (size_ - pos_ < n) throw ParseError("byte stream truncated");
  }
  const uint8_t* data_;
  size_t size_;
  size_t pos_ = 0;
};

Bytes mpz_to_bytes(const mpz_class& v);
mpz_class mpz_from_bytes(const uint8_t* p, size_t n);

std::string to_hex(const uint8_t* p, size_t n);
std::string to_hex(const Bytes& b);
Bytes from_hex(const std::string& s);

/// BLAKE2b-128 over `data`, used for synergy ids and config hashes.
std::array<uint8_t, 16> hash128(const Bytes& data);

} // namespace p4l
