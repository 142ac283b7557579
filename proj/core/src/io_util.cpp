#include "io_util.hpp"

#include <cstring>
#include <sstream>

namespace affect::io::detail {

void write_tensor_file(const std::string& path, const std::vector<long long>& dims,
                       const std::vector<double>& data) {
  long long numel = 1;
  for (long long d : dims) numel *= d;
  if (numel != static_cast<long long>(data.size())) {
    throw DataError("tensor file: dims do not match data size for " + path);
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("tensor file: cannot open " + path + " for writing");
  write_bytes(out, kTensorMagic, sizeof(kTensorMagic));
  write_pod<std::uint8_t>(out, kDTypeF64);
  write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(dims.size()));
  for (long long d : dims) write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(d));
  if (!data.empty()) write_bytes(out, data.data(), data.size() * sizeof(double));
}

std::pair<std::vector<long long>, std::vector<double>> read_tensor_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("tensor file: cannot open " + path);
  char magic[8];
  read_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, kTensorMagic, sizeof(magic)) != 0) {
    throw DataError("tensor file: bad magic in " + path);
  }
  const auto dtype = read_pod<std::uint8_t>(in);
  if (dtype != kDTypeF64) throw DataError("tensor file: unsupported dtype in " + path);
  const auto ndim = read_pod<std::uint8_t>(in);
  std::vector<long long> dims(ndim);
  long long numel = 1;
  for (auto& d : dims) {
    d = static_cast<long long>(read_pod<std::uint64_t>(in));
    numel *= d;
  }
  std::vector<double> data(static_cast<std::size_t>(numel));
  if (numel > 0) read_bytes(in, data.data(), data.size() * sizeof(double));
  return {std::move(dims), std::move(data)};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("io: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("io: cannot open " + path + " for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw DataError("io: short write to " + path);
}

}  // namespace affect::io::detail
