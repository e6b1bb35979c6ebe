#include "seqemo/data/feature_cache.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "seqemo/common.hpp"

namespace seqemo {

static_assert(std::endian::native == std::endian::little,
              "cache serialization assumes a little-endian host");
static_assert(sizeof(float) == 4);

namespace {

constexpr char kMagic[4] = {'M', 'F', 'C', 'C'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::vector<char>& buf, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  buf.insert(buf.end(), b, b + 4);
}

std::uint32_t get_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, 4);
  return v;
}

}  // namespace

void feature_cache_write(const FeatureMatrix& features, const std::string& path) {
  const auto& t = features.coefficients;
  if (t.shape().size() != 2)
    throw ShapeError(cat("feature cache expects a matrix, got rank ", t.shape().size()));

  std::vector<char> buf;
  buf.reserve(16 + static_cast<size_t>(t.size()) * 4);
  buf.insert(buf.end(), kMagic, kMagic + 4);
  put_u32(buf, kVersion);
  put_u32(buf, static_cast<std::uint32_t>(t.shape()[0]));
  put_u32(buf, static_cast<std::uint32_t>(t.shape()[1]));
  const char* payload = reinterpret_cast<const char*>(t.data());
  buf.insert(buf.end(), payload, payload + t.size() * 4);

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(cat("cannot write cache ", path));
  out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
  if (!out) throw IoError(cat("write failed for cache ", path));
}

FeatureMatrix feature_cache_read(const std::string& path) {
  std::ifstream in(path, std::ios::binary | std::ios::ate);
  if (!in) throw CacheError(cat("cannot open cache ", path, "; regenerate it"));
  const auto file_size = static_cast<std::int64_t>(in.tellg());
  in.seekg(0);

  if (file_size < 16)
    throw CacheError(cat("cache ", path, " is truncated; regenerate it"));
  std::vector<char> buf(static_cast<size_t>(file_size));
  in.read(buf.data(), file_size);
  if (!in) throw CacheError(cat("cache ", path, " is unreadable; regenerate it"));

  if (std::memcmp(buf.data(), kMagic, 4) != 0)
    throw CacheError(cat("cache ", path, " has a bad magic; regenerate it"));
  if (get_u32(buf.data() + 4) != kVersion)
    throw CacheError(cat("cache ", path, " has unsupported version ",
                         get_u32(buf.data() + 4), "; regenerate it"));
  const std::int64_t rows = get_u32(buf.data() + 8);
  const std::int64_t cols = get_u32(buf.data() + 12);
  if (rows <= 0 || cols <= 0 || file_size != 16 + rows * cols * 4)
    throw CacheError(cat("cache ", path, " size does not match its header; "
                         "regenerate it"));

  FeatureMatrix f{Tensor<float>({rows, cols})};
  std::memcpy(f.coefficients.data(), buf.data() + 16,
              static_cast<size_t>(rows * cols) * 4);
  return f;
}

}  // namespace seqemo
