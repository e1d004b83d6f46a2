#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include "qdl/errors.hpp"
#include "qdl/lvalues.hpp"

namespace qdl {

namespace {

constexpr unsigned char kMagic[4] = {'Q', 'L', 'M', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 16;
constexpr std::size_t kRecordSize = 24;

void put_u32(std::vector<unsigned char>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
void put_u64(std::vector<unsigned char>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<unsigned char>(v >> (8 * i)));
}
std::uint32_t get_u32(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}
std::uint64_t get_u64(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

}  // namespace

std::vector<unsigned char> cache_encode(std::span<const LValueRecord> records) {
  std::vector<unsigned char> out;
  out.reserve(kHeaderSize + kRecordSize * records.size());
  for (unsigned char b : kMagic) out.push_back(b);
  put_u32(out, kVersion);
  put_u64(out, records.size());
  std::uint64_t prev = 0;
  for (const LValueRecord& r : records) {
    if (r.d.d() <= prev) {
      throw StorageError("cache records must be strictly ascending in d (d = " +
                         std::to_string(r.d.d()) + ")");
    }
    prev = r.d.d();
    put_u64(out, r.d.d());
    put_u64(out, std::bit_cast<std::uint64_t>(r.value));
    put_u64(out, std::bit_cast<std::uint64_t>(r.abs_error));
  }
  return out;
}

std::vector<LValueRecord> cache_decode(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4) throw FormatError("truncated header", bytes.size());
  if (std::memcmp(bytes.data(), kMagic, 4) != 0) throw FormatError("bad magic, expected QLM1", 0);
  if (bytes.size() < kHeaderSize) throw FormatError("truncated header", bytes.size());
  const std::uint32_t version = get_u32(bytes.data() + 4);
  if (version != kVersion) {
    throw FormatError("unsupported version " + std::to_string(version), 4);
  }
  const std::uint64_t count = get_u64(bytes.data() + 8);
  const std::uint64_t available = (bytes.size() - kHeaderSize) / kRecordSize;
  if (count > available) {
    throw FormatError("count field " + std::to_string(count) + " exceeds the " +
                          std::to_string(available) + " complete records present",
                      kHeaderSize + available * kRecordSize);
  }
  const std::uint64_t expected_size = kHeaderSize + count * kRecordSize;
  if (bytes.size() != expected_size) {
    throw FormatError("trailing bytes after last record", expected_size);
  }
  std::vector<LValueRecord> out(count);
  std::uint64_t prev = 0;
  for (std::uint64_t i = 0; i < count; ++i) {
    const unsigned char* p = bytes.data() + kHeaderSize + i * kRecordSize;
    const std::uint64_t d = get_u64(p);
    if (d <= prev || (d & 1U) == 0) {
      throw FormatError("record d = " + std::to_string(d) + " is not odd and ascending",
                        kHeaderSize + i * kRecordSize);
    }
    prev = d;
    out[i].d = FamilyIndex::trusted(d);
    out[i].value = std::bit_cast<double>(get_u64(p + 8));
    out[i].abs_error = std::bit_cast<double>(get_u64(p + 16));
    out[i].method = LMethod::Afe;
  }
  return out;
}

void cache_store(std::span<const LValueRecord> records, const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = cache_encode(records);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw StorageError("cannot open cache file for writing: " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  f.close();
  if (!f) throw StorageError("failed writing cache file: " + path.string());
}

std::vector<LValueRecord> cache_load(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw CoverageError("cache file not found: " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)),
                                   std::istreambuf_iterator<char>());
  return cache_decode(bytes);
}

}  // namespace qdl
