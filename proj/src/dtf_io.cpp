#include "shapeseed/dtf_io.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace shapeseed {

namespace {

static_assert(std::endian::native == std::endian::little ||
                  std::endian::native == std::endian::big,
              "mixed-endian hosts are not supported");
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

constexpr std::array<char, 4> kMagic = {'S', 'E', 'G', 'T'};
constexpr std::uint8_t kVersion = 0x01;
constexpr std::uint8_t kDtypeReal32 = 0x01;

std::uint32_t to_le(std::uint32_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    return std::byteswap(v);
  }
  return v;
}

void put_u32(std::ofstream& out, std::uint32_t v) {
  const std::uint32_t le = to_le(v);
  out.write(reinterpret_cast<const char*>(&le), 4);
}

std::uint32_t get_u32(std::ifstream& in) {
  std::uint32_t v = 0;
  in.read(reinterpret_cast<char*>(&v), 4);
  return to_le(v);
}

}  // namespace

void write_dtf(const std::string& path, const Tensor3& tensor) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("write_dtf: cannot open " + path);
  }
  out.write(kMagic.data(), kMagic.size());
  const std::uint8_t head[4] = {kVersion, kDtypeReal32, 0, 0};
  out.write(reinterpret_cast<const char*>(head), 4);
  put_u32(out, static_cast<std::uint32_t>(tensor.height()));
  put_u32(out, static_cast<std::uint32_t>(tensor.width()));
  put_u32(out, static_cast<std::uint32_t>(tensor.channels()));
  if constexpr (std::endian::native == std::endian::little) {
    out.write(reinterpret_cast<const char*>(tensor.flat().data()),
              static_cast<std::streamsize>(tensor.size() * 4));
  } else {
    for (float f : tensor.flat()) {
      std::uint32_t bits;
      std::memcpy(&bits, &f, 4);
      put_u32(out, bits);
    }
  }
  if (!out) {
    throw std::runtime_error("write_dtf: write failed for " + path);
  }
}

Tensor3 read_dtf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("read_dtf: cannot open " + path);
  }
  std::array<char, 4> magic{};
  in.read(magic.data(), magic.size());
  std::uint8_t head[4] = {0, 0, 0, 0};
  in.read(reinterpret_cast<char*>(head), 4);
  if (!in || magic != kMagic) {
    throw std::runtime_error("read_dtf: bad magic in " + path);
  }
  if (head[0] != kVersion) {
    throw std::runtime_error("read_dtf: unsupported version in " + path);
  }
  if (head[1] != kDtypeReal32) {
    throw std::runtime_error("read_dtf: unsupported dtype in " + path);
  }
  const std::uint32_t h = get_u32(in);
  const std::uint32_t w = get_u32(in);
  const std::uint32_t c = get_u32(in);
  if (!in) {
    throw std::runtime_error("read_dtf: truncated header in " + path);
  }
  constexpr std::uint64_t kMaxElems = 1ull << 31;
  const std::uint64_t n = static_cast<std::uint64_t>(h) * w * c;
  if (h < 1 || w < 1 || n > kMaxElems) {
    throw std::runtime_error("read_dtf: implausible dimensions in " + path);
  }
  std::vector<float> data(static_cast<std::size_t>(n));
  if constexpr (std::endian::native == std::endian::little) {
    in.read(reinterpret_cast<char*>(data.data()),
            static_cast<std::streamsize>(n * 4));
    if (!in || in.gcount() != static_cast<std::streamsize>(n * 4)) {
      throw std::runtime_error("read_dtf: truncated payload in " + path);
    }
  } else {
    for (auto& f : data) {
      const std::uint32_t bits = get_u32(in);
      std::memcpy(&f, &bits, 4);
    }
    if (!in) {
      throw std::runtime_error("read_dtf: truncated payload in " + path);
    }
  }
  return Tensor3::from_data(static_cast<int>(h), static_cast<int>(w),
                            static_cast<int>(c), std::move(data));
}

}  // namespace shapeseed
