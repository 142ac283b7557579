#pragma once

#include <bit>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "affect/errors.hpp"

// Raw little-endian binary helpers shared by the dataset and checkpoint
// writers.
namespace affect::io::detail {

static_assert(std::endian::native == std::endian::little,
              "binary formats are written natively on little-endian hosts");

inline void write_bytes(std::ofstream& out, const void* data, std::size_t size) {
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw DataError("io: short write");
}

inline void read_bytes(std::ifstream& in, void* data, std::size_t size) {
  in.read(static_cast<char*>(data), static_cast<std::streamsize>(size));
  if (in.gcount() != static_cast<std::streamsize>(size)) throw DataError("io: short read");
}

template <class T>
void write_pod(std::ofstream& out, T value) {
  write_bytes(out, &value, sizeof(T));
}

template <class T>
T read_pod(std::ifstream& in) {
  T value{};
  read_bytes(in, &value, sizeof(T));
  return value;
}

constexpr char kTensorMagic[8] = {'A', 'F', 'T', 'E', 'N', 'S', 'R', '1'};
constexpr char kCheckpointMagic[8] = {'A', 'F', 'C', 'K', 'P', 'T', '0', '1'};
constexpr std::uint8_t kDTypeF64 = 0;

// Single-tensor container: magic, dtype, ndim, dims, raw doubles.
void write_tensor_file(const std::string& path, const std::vector<long long>& dims,
                       const std::vector<double>& data);
std::pair<std::vector<long long>, std::vector<double>> read_tensor_file(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace affect::io::detail
