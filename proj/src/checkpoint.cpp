#include "patenthan/checkpoint.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cmath>
#include <fstream>
#include <limits>

#include "patenthan/binary_io.hpp"
#include "patenthan/error.hpp"

namespace patenthan {

namespace {

constexpr char kMagic[4] = {'C', 'H', 'A', 'N'};

class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path) {
    fd_ = ::open(path.c_str(), O_CREAT | O_RDWR, 0644);
    if (fd_ < 0) throw IoError("cannot open lock file " + path.string());
    if (::flock(fd_, LOCK_EX) != 0) {
      ::close(fd_);
      throw IoError("cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

void round_to_float32(Matrix& m) {
  for (double& v : m.values()) v = static_cast<double>(static_cast<float>(v));
}

void write_checkpoint(std::ostream& out, const CheckpointConfig& config, std::span<const Parameter* const> params) {
  out.write(kMagic, 4);
  binary::put<std::uint32_t>(out, kCheckpointVersion);
  binary::put<std::uint32_t>(out, config.d_e);
  binary::put<std::uint32_t>(out, config.m);
  binary::put<std::uint32_t>(out, config.n_encoders);
  binary::put<std::uint32_t>(out, config.ffn_mult);
  binary::put<double>(out, config.dropout);
  binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(params.size()));
  for (const Parameter* p : params) {
    if (p->name.size() > std::numeric_limits<std::uint16_t>::max()) throw InvalidInput("parameter name too long");
    binary::put<std::uint16_t>(out, static_cast<std::uint16_t>(p->name.size()));
    binary::put_bytes(out, p->name);
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.rows()));
    binary::put<std::uint32_t>(out, static_cast<std::uint32_t>(p->value.cols()));
    for (double v : p->value.values()) {
      if (!std::isfinite(v)) throw NumericError("parameter " + p->name + " holds a non-finite value");
      binary::put<float>(out, static_cast<float>(v));
    }
  }
  if (!out) throw IoError("failed writing checkpoint");
}

Checkpoint read_checkpoint(std::istream& in) {
  binary::Reader r(in, "CHAN");
  if (r.get_bytes(4, "magic") != std::string(kMagic, 4)) throw InvalidInput("not a CHAN checkpoint file");
  const auto version = r.get<std::uint32_t>("version");
  if (version != kCheckpointVersion) {
    throw InvalidInput("unsupported CHAN version " + std::to_string(version));
  }
  Checkpoint ck;
  ck.config.d_e = r.get<std::uint32_t>("d_e");
  ck.config.m = r.get<std::uint32_t>("m");
  ck.config.n_encoders = r.get<std::uint32_t>("n_encoders");
  ck.config.ffn_mult = r.get<std::uint32_t>("ffn_mult");
  ck.config.dropout = r.get<double>("dropout");
  const auto count = r.get<std::uint32_t>("block count");
  for (std::uint32_t b = 0; b < count; ++b) {
    const auto name_len = r.get<std::uint16_t>("name length");
    std::string name = r.get_bytes(name_len, "name");
    const auto rows = r.get<std::uint32_t>("rows");
    const auto cols = r.get<std::uint32_t>("cols");
    Matrix value(rows, cols);
    for (double& v : value.values()) {
      const float f = r.get<float>("parameter data");
      if (!std::isfinite(f)) throw InvalidInput("parameter " + name + " holds a non-finite value");
      v = f;
    }
    ck.params.emplace_back(std::move(name), std::move(value));
  }
  if (!r.at_end()) throw InvalidInput("trailing bytes after CHAN data at byte offset " + std::to_string(r.offset()));
  return ck;
}

void save_checkpoint(const std::filesystem::path& path, const CheckpointConfig& config,
                     std::span<const Parameter* const> params) {
  FileLock lock(std::filesystem::path(path.string() + ".lock"));
  const std::filesystem::path tmp(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    write_checkpoint(out, config, params);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace patenthan
