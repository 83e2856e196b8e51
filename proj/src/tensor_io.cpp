// SPDX-License-Identifier: MIT
#include "gotd/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace gotd {

static_assert(std::endian::native == std::endian::little,
              "tensor files are little-endian; byte swapping is not wired up");

namespace {

constexpr char kMagic[4] = {'G', 'O', 'T', 'D'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_pod(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
void read_pod(std::istream& in, T& v, const char* what) {
  in.read(reinterpret_cast<char*>(&v), sizeof(T));
  GOTD_CHECK(in.gcount() == static_cast<std::streamsize>(sizeof(T)),
             std::string("tensor file truncated while reading ") + what);
}

}  // namespace

void write_tensor(std::ostream& out, const DenseTensor& x) {
  out.write(kMagic, 4);
  write_pod(out, kVersion);
  write_pod(out, static_cast<std::uint64_t>(x.order()));
  for (std::size_t d : x.dims()) write_pod(out, static_cast<std::uint64_t>(d));
  out.write(reinterpret_cast<const char*>(x.data()),
            static_cast<std::streamsize>(sizeof(double) * x.size()));
  GOTD_CHECK(out.good(), "tensor write failed");
}

void write_tensor_file(const std::string& path, const DenseTensor& x) {
  std::ofstream out(path, std::ios::binary);
  GOTD_CHECK(out.good(), "cannot open '" + path + "' for writing");
  write_tensor(out, x);
}

DenseTensor read_tensor(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  GOTD_CHECK(in.gcount() == 4 && std::memcmp(magic, kMagic, 4) == 0,
             "not a tensor file (bad magic)");
  std::uint32_t version = 0;
  read_pod(in, version, "version");
  GOTD_CHECK(version == kVersion, "unsupported tensor file version");
  std::uint64_t order = 0;
  read_pod(in, order, "mode count");
  GOTD_CHECK(order >= 1, "tensor file declares zero modes");
  GOTD_CHECK(order <= 64, "tensor file declares an implausible mode count");

  std::vector<std::size_t> dims(order);
  std::uint64_t count = 1;
  for (std::uint64_t k = 0; k < order; ++k) {
    std::uint64_t d = 0;
    read_pod(in, d, "dimensions");
    GOTD_CHECK(d >= 1, "tensor file declares a zero dimension");
    GOTD_CHECK(count <= UINT64_MAX / d, "tensor file dimensions overflow");
    count *= d;
    dims[k] = static_cast<std::size_t>(d);
  }
  GOTD_CHECK(count <= (UINT64_MAX / sizeof(double)),
             "tensor file dimensions overflow");

  DenseTensor x(dims);
  in.read(reinterpret_cast<char*>(x.data()),
          static_cast<std::streamsize>(sizeof(double) * x.size()));
  GOTD_CHECK(in.gcount() ==
                 static_cast<std::streamsize>(sizeof(double) * x.size()),
             "tensor file truncated while reading values");
  return x;
}

DenseTensor read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  GOTD_CHECK(in.good(), "cannot open '" + path + "'");
  return read_tensor(in);
}

}  // namespace gotd
