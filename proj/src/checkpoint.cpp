#include "dbns/checkpoint.hpp"

#include <array>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <openssl/evp.h>

#include "dbns/errors.hpp"

namespace dbns {
namespace {

constexpr char kMagic[8] = {'D', 'B', 'N', 'S', 'C', 'K', 'P', '1'};
constexpr std::size_t kHashSize = 32;

std::array<unsigned char, kHashSize> sha256(const std::string& bytes) {
  std::array<unsigned char, kHashSize> out{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), out.data(), &len, EVP_sha256(), nullptr) != 1 || len != kHashSize) {
    throw CheckpointError("sha256 failed");
  }
  return out;
}

template <typename T>
void put(std::string& buf, T v) {
  static_assert(std::is_integral_v<T>);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    buf.push_back(static_cast<char>(static_cast<std::uint64_t>(v) >> (8 * i) & 0xff));
  }
}

class Reader {
 public:
  Reader(const std::string& data, std::size_t begin, std::size_t end) : data_(data), pos_(begin), end_(end) {}
  bool done() const { return pos_ == end_; }
  template <typename T>
  T get() {
    if (end_ - pos_ < sizeof(T)) throw CheckpointError("checkpoint record truncated");
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      v |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(v);
  }
  Reader sub(std::size_t len) {
    if (end_ - pos_ < len) throw CheckpointError("checkpoint record truncated");
    Reader r(data_, pos_, pos_ + len);
    pos_ += len;
    return r;
  }

 private:
  const std::string& data_;
  std::size_t pos_, end_;
};

void put_record(std::string& buf, const std::string& payload) {
  put<std::uint32_t>(buf, static_cast<std::uint32_t>(payload.size()));
  buf += payload;
}

}  // namespace

std::string sha256_hex(const std::string& bytes) {
  static const char* digits = "0123456789abcdef";
  std::string out;
  for (unsigned char c : sha256(bytes)) {
    out.push_back(digits[c >> 4]);
    out.push_back(digits[c & 15]);
  }
  return out;
}

void write_checkpoint(const std::string& path, const CensusCheckpoint& cp) {
  std::string buf(kMagic, sizeof kMagic);
  {
    std::string p;
    put<std::uint8_t>(p, 1);
    put(p, cp.header.lo);
    put(p, cp.header.hi);
    put(p, cp.header.length);
    put(p, cp.header.max_abs_summand);
    put(p, cp.header.max_abs_partial);
    put(p, cp.header.interval);
    put_record(buf, p);
  }
  for (const auto& iv : cp.done) {
    std::string p;
    put<std::uint8_t>(p, 2);
    put(p, iv.a);
    put(p, iv.b);
    put<std::uint64_t>(p, iv.misses.size());
    for (auto x : iv.misses) put(p, x);
    put_record(buf, p);
  }
  auto digest = sha256(buf);
  buf.append(reinterpret_cast<const char*>(digest.data()), digest.size());

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot open " + tmp + " for writing");
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw CheckpointError("write to " + tmp + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw CheckpointError("cannot rename " + tmp + ": " + ec.message());
}

CensusCheckpoint read_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint " + path);
  std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (data.size() < sizeof kMagic + kHashSize || std::memcmp(data.data(), kMagic, sizeof kMagic) != 0) {
    throw CheckpointError(path + " is not a census checkpoint");
  }
  const std::size_t body = data.size() - kHashSize;
  auto digest = sha256(data.substr(0, body));
  if (std::memcmp(digest.data(), data.data() + body, kHashSize) != 0) {
    throw CheckpointError(path + ": content hash mismatch");
  }

  CensusCheckpoint cp;
  Reader r(data, sizeof kMagic, body);
  bool have_header = false;
  while (!r.done()) {
    const auto len = r.get<std::uint32_t>();
    Reader rec = r.sub(len);
    const auto type = rec.get<std::uint8_t>();
    if (type == 1 && !have_header) {
      cp.header.lo = rec.get<std::int64_t>();
      cp.header.hi = rec.get<std::int64_t>();
      cp.header.length = rec.get<std::uint32_t>();
      cp.header.max_abs_summand = rec.get<std::uint64_t>();
      cp.header.max_abs_partial = rec.get<std::uint64_t>();
      cp.header.interval = rec.get<std::uint64_t>();
      have_header = true;
    } else if (type == 2 && have_header) {
      CensusCheckpoint::Interval iv;
      iv.a = rec.get<std::int64_t>();
      iv.b = rec.get<std::int64_t>();
      const auto n = rec.get<std::uint64_t>();
      if (n > len) throw CheckpointError("checkpoint interval record is inconsistent");
      for (std::uint64_t i = 0; i < n; ++i) iv.misses.push_back(rec.get<std::int64_t>());
      cp.done.push_back(std::move(iv));
    } else {
      throw CheckpointError("unexpected checkpoint record type " + std::to_string(type));
    }
    if (!rec.done()) throw CheckpointError("trailing bytes in checkpoint record");
  }
  if (!have_header) throw CheckpointError("checkpoint has no header record");
  return cp;
}

}  // namespace dbns
