#include "p4l/bytes.hpp"

#include <sodium.h>

namespace p4l {

void ByteWriter::put_u16(uint16_t v) {
  buf_.push_back(static_cast<uint8_t>(v >> 8));
  buf_.push_back(static_cast<uint8_t>(v));
}

void ByteWriter::put_u32(uint32_t v) {
  for (int s = 24; s >= 0; s -= 8) buf_.push_back(static_cast<uint8_t>(v >> s));
}

void ByteWriter::put_u64(uint64_t v) {
  for (int s = 56; s >= 0; s -= 8) buf_.push_back(static_cast<uint8_t>(v >> s));
}

void ByteWriter::put_f64(double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof bits);
  put_u64(bits);
}

void ByteWriter::put_blob(const Bytes& b) {
  put_u32(static_cast<uint32_t>(b.size()));
  put_raw(b);
}

void ByteWriter::put_mpz(const mpz_class& v) {
  if (v < 0) throw std::invalid_argument("put_mpz: negative value");
  put_blob(mpz_to_bytes(v));
}

uint8_t ByteReader::get_u8() {
  need(1);
  return data_[pos_++];
}

uint16_t ByteReader::get_u16() {
  need(2);
  uint16_t v = static_cast<uint16_t>(data_[pos_] << 8 | data_[pos_ + 1]);
  pos_ += 2;
  return v;
}

uint32_t ByteReader::get_u32() {
  need(4);
  uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v = v << 8 | data_[pos_ + i];
  pos_ += 4;
  return v;
}

uint64_t ByteReader::get_u64() {
  need(8);
  uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v = v << 8 | data_[pos_ + i];
  pos_ += 8;
  return v;
}

double ByteReader::get_f64() {
  uint64_t bits = get_u64();
  double v;
  std::memcpy(&v, &bits, sizeof v);
  return v;
}

void ByteReader::get_raw(uint8_t* out, size_t n) {
  need(n);
  std::memcpy(out, data_ + pos_, n);
  pos_ += n;
}

Bytes ByteReader::get_blob() {
  uint32_t n = get_u32();
  need(n);
  Bytes b(data_ + pos_, data_ + pos_ + n);
  pos_ += n;
  return b;
}

mpz_class ByteReader::get_mpz() {
  Bytes b = get_blob();
  return mpz_from_bytes(b.data(), b.size());
}

Bytes mpz_to_bytes(const mpz_class& v) {
  if (v == 0) return {};
  size_t count = 0;
  Bytes out((mpz_sizeinbase(v.get_mpz_t(), 2) + 7) / 8);
  mpz_export(out.data(), &count, 1, 1, 1, 0, v.get_mpz_t());
  out.resize(count);
  return out;
}

mpz_class mpz_from_bytes(const uint8_t* p, size_t n) {
  mpz_class v;
  if (n > 0) mpz_import(v.get_mpz_t(), n, 1, 1, 1, 0, p);
  return v;
}

static const char* kHexDigits = "0123456789abcdef";

std::string to_hex(const uint8_t* p, size_t n) {
  std::string s;
  s.reserve(2 * n);
  for (size_t i = 0; i < n; ++i) {
    s.push_back(kHexDigits[p[i] >> 4]);
    s.push_back(kHexDigits[p[i] & 0xf]);
  }
  return s;
}

std::string to_hex(const Bytes& b) { return to_hex(b.data(), b.size()); }

static int hex_val(char c) {
  if (c >= '0' && c <= '9') return c - '0';
  if (c >= 'a' && c <= 'f') return c - 'a' + 10;
  if (c >= 'A' && c <= 'F') return c - 'A' + 10;
  throw ParseError("invalid hex digit");
}

Bytes from_hex(const std::string& s) {
  if (s.size() % 2 != 0) throw ParseError("odd-length hex string");
  Bytes out(s.size() / 2);
  for (size_t i = 0; i < out.size(); ++i)
    out[i] = static_cast<uint8_t>(hex_val(s[2 * i]) << 4 | hex_val(s[2 * i + 1]));
  return out;
}

std::array<uint8_t, 16> hash128(const Bytes& data) {
  std::array<uint8_t, 16> out{};
  crypto_generichash(out.data(), out.size(), data.data(), data.size(), nullptr, 0);
  return out;
}

} // namespace p4l
