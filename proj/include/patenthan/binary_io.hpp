#pragma once

#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <string>

#include "patenthan/error.hpp"

namespace patenthan::binary {

static_assert(std::endian::native == std::endian::little, "binary formats assume a little-endian host");

template <typename T>
void put(std::ostream& out, T value) {
  char buf[sizeof(T)];
  std::memcpy(buf, &value, sizeof(T));
  out.write(buf, sizeof(T));
}

inline void put_bytes(std::ostream& out, const std::string& bytes) {
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

// Sequential reader that reports the byte offset of any short read.
class Reader {
 public:
  Reader(std::istream& in, std::string format) : in_(in), format_(std::move(format)) {}

  template <typename T>
  T get(const char* what) {
    char buf[sizeof(T)];
    read(buf, sizeof(T), what);
    T value;
    std::memcpy(&value, buf, sizeof(T));
    return value;
  }

  std::string get_bytes(std::size_t n, const char* what) {
    std::string s(n, '\0');
    if (n) read(s.data(), n, what);
    return s;
  }

  std::uint64_t offset() const { return offset_; }

  bool at_end() { return in_.peek() == std::char_traits<char>::eof(); }

 private:
  void read(char* dst, std::size_t n, const char* what) {
    in_.read(dst, static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) {
      throw InvalidInput("truncated " + format_ + " file: expected " + std::to_string(n) + " bytes of " + what +
                         " at byte offset " + std::to_string(offset_) + ", got " + std::to_string(in_.gcount()));
    }
    offset_ += n;
  }

  std::istream& in_;
  std::string format_;
  std::uint64_t offset_ = 0;
};

}  // namespace patenthan::binary
