#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "wildfusion/core/error.hpp"

namespace wf {

static_assert(std::endian::native == std::endian::little,
              "on-disk formats are little-endian; big-endian hosts need "
              "byte swapping");

/// Sequential writer for the little-endian binary artifact formats.
class BinaryWriter {
 public:
  explicit BinaryWriter(const std::string& path)
      : path_(path), out_(path, std::ios::binary) {
    if (!out_) throw InputError("cannot open for writing: " + path);
  }

  template <typename T>
  void write(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out_.write(reinterpret_cast<const char*>(&v), sizeof(T));
  }

  void write_bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }

  void close() {
    out_.close();
    if (!out_) throw InputError("write failed: " + path_);
  }

 private:
  std::string path_;
  std::ofstream out_;
};

/// Sequential reader that reports the byte offset of any truncation or
/// corruption.
class BinaryReader {
 public:
  explicit BinaryReader(const std::string& path) : path_(path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open for reading: " + path);
    data_.assign(std::istreambuf_iterator<char>(in),
                 std::istreambuf_iterator<char>());
  }

  template <typename T>
  T read() {
    static_assert(std::is_trivially_copyable_v<T>);
    if (offset_ + sizeof(T) > data_.size())
      throw FormatError(path_ + ": truncated at byte offset " +
                        std::to_string(offset_));
    T v;
    std::memcpy(&v, data_.data() + offset_, sizeof(T));
    offset_ += sizeof(T);
    return v;
  }

  void expect_magic(const char (&magic)[5]) {
    if (offset_ + 4 > data_.size())
      throw FormatError(path_ + ": truncated at byte offset " +
                        std::to_string(offset_));
    if (std::memcmp(data_.data() + offset_, magic, 4) != 0)
      throw FormatError(path_ + ": bad magic at byte offset " +
                        std::to_string(offset_) + ", expected \"" +
                        std::string(magic, 4) + "\"");
    offset_ += 4;
  }

  std::size_t offset() const { return offset_; }
  std::size_t size() const { return data_.size(); }
  bool at_end() const { return offset_ == data_.size(); }
  const std::string& path() const { return path_; }

  /// Guards count fields against ludicrous values from corrupt files.
  std::uint32_t read_count(std::uint32_t max) {
    const auto n = read<std::uint32_t>();
    if (n > max)
      throw FormatError(path_ + ": implausible count " + std::to_string(n) +
                        " at byte offset " +
                        std::to_string(offset_ - sizeof(std::uint32_t)));
    return n;
  }

 private:
  std::string path_;
  std::vector<char> data_;
  std::size_t offset_ = 0;
};

}  // namespace wf
