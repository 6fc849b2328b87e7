#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace specdiff::binio {

/// Little-endian writer over an ofstream. Throws ConfigError on I/O failure.
class Writer {
 public:
  explicit Writer(const std::filesystem::path& path);
  void magic(std::string_view tag);
  void u32(std::uint32_t v);
  void i32(std::int32_t v);
  void f32(float v);
  void u8(std::uint8_t v);
  void f32s(std::span<const double> values);
  void close();

 private:
  void bytes(const void* p, std::size_t n);
  std::filesystem::path path_;
  std::ofstream out_;
};

/// Little-endian reader; every read checks for truncation.
class Reader {
 public:
  explicit Reader(const std::filesystem::path& path);
  /// Throws unless the next four bytes equal `tag`.
  void expect_magic(std::string_view tag);
  std::uint32_t u32();
  std::int32_t i32();
  float f32();
  std::uint8_t u8();
  std::vector<double> f32s(std::size_t count);
  /// Throws if bytes remain.
  void expect_end();

 private:
  void bytes(void* p, std::size_t n);
  std::filesystem::path path_;
  std::ifstream in_;
};

}  // namespace specdiff::binio
