#include "specdiff/core/binary_io.hpp"

#include <bit>
#include <cstring>

#include "specdiff/core/error.hpp"

namespace specdiff::binio {

namespace {

template <typename U>
void store_le(U v, unsigned char* out) {
  for (std::size_t i = 0; i < sizeof(U); ++i) out[i] = static_cast<unsigned char>((v >> (8 * i)) & 0xFFu);
}

template <typename U>
U load_le(const unsigned char* in) {
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(in[i]) << (8 * i);
  return v;
}

}  // namespace

Writer::Writer(const std::filesystem::path& path) : path_(path), out_(path, std::ios::binary | std::ios::trunc) {
  if (!out_) throw ConfigError("cannot open for writing: " + path.string());
}

void Writer::bytes(const void* p, std::size_t n) {
  out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  if (!out_) throw ConfigError("write failed: " + path_.string());
}

void Writer::magic(std::string_view tag) { bytes(tag.data(), tag.size()); }

void Writer::u32(std::uint32_t v) {
  unsigned char b[4];
  store_le(v, b);
  bytes(b, 4);
}

void Writer::i32(std::int32_t v) { u32(static_cast<std::uint32_t>(v)); }

void Writer::f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }

void Writer::u8(std::uint8_t v) { bytes(&v, 1); }

void Writer::f32s(std::span<const double> values) {
  std::vector<unsigned char> buf(values.size() * 4);
  for (std::size_t i = 0; i < values.size(); ++i)
    store_le(std::bit_cast<std::uint32_t>(static_cast<float>(values[i])), buf.data() + 4 * i);
  bytes(buf.data(), buf.size());
}

void Writer::close() {
  out_.close();
  if (!out_) throw ConfigError("close failed: " + path_.string());
}

Reader::Reader(const std::filesystem::path& path) : path_(path), in_(path, std::ios::binary) {
  if (!in_) throw ConfigError("cannot open for reading: " + path.string());
}

void Reader::bytes(void* p, std::size_t n) {
  in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
  if (static_cast<std::size_t>(in_.gcount()) != n) throw ConfigError("truncated file: " + path_.string());
}

void Reader::expect_magic(std::string_view tag) {
  std::string got(tag.size(), '\0');
  bytes(got.data(), got.size());
  if (got != tag) throw ConfigError("bad magic in " + path_.string() + ": expected " + std::string(tag));
}

std::uint32_t Reader::u32() {
  unsigned char b[4];
  bytes(b, 4);
  return load_le<std::uint32_t>(b);
}

std::int32_t Reader::i32() { return static_cast<std::int32_t>(u32()); }

float Reader::f32() { return std::bit_cast<float>(u32()); }

std::uint8_t Reader::u8() {
  std::uint8_t v;
  bytes(&v, 1);
  return v;
}

std::vector<double> Reader::f32s(std::size_t count) {
  std::vector<unsigned char> buf(count * 4);
  bytes(buf.data(), buf.size());
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i)
    out[i] = static_cast<double>(std::bit_cast<float>(load_le<std::uint32_t>(buf.data() + 4 * i)));
  return out;
}

void Reader::expect_end() {
  if (in_.peek() != std::char_traits<char>::eof()) throw ConfigError("trailing bytes in " + path_.string());
}

}  // namespace specdiff::binio
