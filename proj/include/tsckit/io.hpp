#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace tsckit {

static_assert(std::endian::native == std::endian::little, "little-endian host required");

// Append-only binary buffer for versioned model/transform blobs.
class BlobWriter {
 public:
  void u8(uint8_t v) { raw(&v, 1); }
  void u32(uint32_t v) { raw(&v, 4); }
  void u64(uint64_t v) { raw(&v, 8); }
  void i32(int32_t v) { raw(&v, 4); }
  void f64(double v) { raw(&v, 8); }
  void str(const std::string& s) {
    u32(static_cast<uint32_t>(s.size()));
    raw(s.data(), s.size());
  }
  template <typename T>
  void vec(const std::vector<T>& v) {
    static_assert(std::is_trivially_copyable_v<T>);
    u64(v.size());
    raw(v.data(), v.size() * sizeof(T));
  }
  void magic(const char tag[4]) { raw(tag, 4); }

  const std::string& buffer() const { return buf_; }

 private:
  void raw(const void* p, std::size_t bytes) { buf_.append(static_cast<const char*>(p), bytes); }
  std::string buf_;
};

class BlobReader {
 public:
  explicit BlobReader(const std::string& buf) : buf_(buf) {}

  uint8_t u8() { return get<uint8_t>(); }
  uint32_t u32() { return get<uint32_t>(); }
  uint64_t u64() { return get<uint64_t>(); }
  int32_t i32() { return get<int32_t>(); }
  double f64() { return get<double>(); }
  std::string str() {
    uint32_t len = u32();
    need(len);
    std::string s(buf_.data() + pos_, len);
    pos_ += len;
    return s;
  }
  template <typename T>
  std::vector<T> vec() {
    static_assert(std::is_trivially_copyable_v<T>);
    uint64_t count = u64();
    need(count * sizeof(T));
    std::vector<T> v(count);
    std::memcpy(v.data(), buf_.data() + pos_, count * sizeof(T));
    pos_ += count * sizeof(T);
    return v;
  }
  void expect_magic(const char tag[4]) {
    need(4);
    if (std::memcmp(buf_.data() + pos_, tag, 4) != 0)
      throw std::runtime_error(std::string("bad blob magic, expected ") + std::string(tag, 4));
    pos_ += 4;
  }
  bool done() const { return pos_ == buf_.size(); }

 private:
  template <typename T>
  T get() {
    need(sizeof(T));
    T v;
    std::memcpy(&v, buf_.data() + pos_, sizeof(T));
    pos_ += sizeof(T);
    return v;
  }
  void need(std::size_t bytes) const {
    if (pos_ + bytes > buf_.size()) throw std::runtime_error("blob truncated");
  }
  const std::string& buf_;
  std::size_t pos_ = 0;
};

std::string read_binary_file(const std::filesystem::path& path);
void write_binary_file(const std::filesystem::path& path, const std::string& bytes);

// splitmix64; used to derive independent component seeds from one master seed.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

}  // namespace tsckit
