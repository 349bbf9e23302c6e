// SGIX index file, all integers little-endian:
//   "SGIX" | u32 version | u32 dim | u64 count |
//   count x (u32 id_len | id bytes | dim x f32 | u32 meta_len | meta bytes) |
//   u32 crc32 of every preceding byte
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <zlib.h>

#include "sgak/error.hpp"
#include "sgak/retrieval.hpp"

namespace sgak {

namespace {

constexpr std::array<std::uint8_t, 4> kMagic = {'S', 'G', 'I', 'X'};

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  template <typename T>
  void uint(T value) {
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<std::uint8_t>((value >> (8 * i)) & 0xffu));
    }
  }
  void f32(float value) { uint(std::bit_cast<std::uint32_t>(value)); }
  void str(const std::string& s) {
    uint(static_cast<std::uint32_t>(s.size()));
    bytes(s.data(), s.size());
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }
  const std::vector<std::uint8_t>& buffer() const { return out_; }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> data) : data_(data) {}

  template <typename T>
  T uint() {
    need(sizeof(T));
    T value = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) value |= static_cast<T>(data_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    return value;
  }
  float f32() { return std::bit_cast<float>(uint<std::uint32_t>()); }
  std::string str() {
    const auto len = uint<std::uint32_t>();
    need(len);
    std::string s(reinterpret_cast<const char*>(data_.data() + pos_), len);
    pos_ += len;
    return s;
  }
  std::size_t remaining() const { return data_.size() - pos_; }

 private:
  void need(std::size_t n) const {
    if (n > remaining()) throw Error(ErrorCode::kFormatError, "index payload ends early");
  }

  std::span<const std::uint8_t> data_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(std::span<const std::uint8_t> bytes) {
  uLong crc = crc32(0L, Z_NULL, 0);
  // zlib takes uInt lengths; feed in chunks.
  std::size_t off = 0;
  while (off < bytes.size()) {
    const auto chunk = static_cast<uInt>(std::min<std::size_t>(bytes.size() - off, 1u << 30));
    crc = crc32(crc, bytes.data() + off, chunk);
    off += chunk;
  }
  return static_cast<std::uint32_t>(crc);
}

}  // namespace

std::vector<std::uint8_t> serialize_index(const RetrievalIndex& index) {
  Writer w;
  w.bytes(kMagic.data(), kMagic.size());
  w.uint(RetrievalIndex::kFormatVersion);
  w.uint(index.dim());
  w.uint(static_cast<std::uint64_t>(index.size()));
  for (const auto& e : index.entries()) {
    w.str(e.doc_id);
    for (float v : e.rep) w.f32(v);
    w.str(e.meta);
  }
  w.uint(crc_of(w.buffer()));
  return w.take();
}

RetrievalIndex deserialize_index(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kMagic.size() || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kBadMagic, "missing SGIX magic");
  }
  constexpr std::size_t kMinSize = 4 + 4 + 4 + 8 + 4;
  if (bytes.size() < kMinSize) {
    throw Error(ErrorCode::kChecksumMismatch, "file too short to carry a checksum");
  }
  const auto body = bytes.first(bytes.size() - 4);
  Reader trailer(bytes.last(4));
  const auto stored = trailer.uint<std::uint32_t>();
  const auto actual = crc_of(body);
  if (stored != actual) {
    throw Error(ErrorCode::kChecksumMismatch,
                fmt::format("stored crc {:08x}, computed {:08x}", stored, actual));
  }

  Reader r(body.subspan(kMagic.size()));
  const auto version = r.uint<std::uint32_t>();
  if (version != RetrievalIndex::kFormatVersion) {
    throw Error(ErrorCode::kVersionMismatch,
                fmt::format("file version {}, supported {}", version, RetrievalIndex::kFormatVersion));
  }
  const auto dim = r.uint<std::uint32_t>();
  const auto count = r.uint<std::uint64_t>();
  // Each entry needs at least 8 length bytes plus its floats.
  if (count > r.remaining() / (8 + 4 * static_cast<std::uint64_t>(dim))) {
    throw Error(ErrorCode::kFormatError, fmt::format("entry count {} exceeds payload", count));
  }
  std::vector<IndexEntry> entries;
  entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    IndexEntry e;
    e.doc_id = r.str();
    e.rep.resize(dim);
    for (auto& v : e.rep) v = r.f32();
    e.meta = r.str();
    entries.push_back(std::move(e));
  }
  if (r.remaining() != 0) throw Error(ErrorCode::kFormatError, "trailing bytes after entries");
  return RetrievalIndex::from_entries(dim, std::move(entries));
}

void save_index(const RetrievalIndex& index, const std::filesystem::path& path) {
  const auto bytes = serialize_index(index);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoFailure, fmt::format("cannot open '{}' for writing", path.string()));
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoFailure, fmt::format("write to '{}' failed", path.string()));
}

RetrievalIndex load_index(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoFailure, fmt::format("cannot open '{}'", path.string()));
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_index(bytes);
}

}  // namespace sgak
