#include "affect/checkpoint.hpp"

#include <cstring>

#include "io_util.hpp"

namespace affect::io {

using autograd::Tensor;

void save_checkpoint(const std::vector<std::pair<std::string, Tensor>>& tensors,
                     const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("checkpoint: cannot open " + path + " for writing");
  detail::write_bytes(out, detail::kCheckpointMagic, sizeof(detail::kCheckpointMagic));
  detail::write_pod<std::uint32_t>(out, 1);  // version
  detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(tensors.size()));

  std::string index;
  for (const auto& [name, t] : tensors) {
    index += name + " f64 ";
    for (std::size_t i = 0; i < t.shape().size(); ++i) {
      if (i) index += "x";
      index += std::to_string(t.shape()[i]);
    }
    index += " " + std::to_string(static_cast<long long>(out.tellp())) + "\n";

    detail::write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
    detail::write_bytes(out, name.data(), name.size());
    detail::write_pod<std::uint8_t>(out, detail::kDTypeF64);
    detail::write_pod<std::uint8_t>(out, static_cast<std::uint8_t>(t.shape().size()));
    for (int d : t.shape()) detail::write_pod<std::uint64_t>(out, static_cast<std::uint64_t>(d));
    if (!t.data().empty()) {
      detail::write_bytes(out, t.data().data(), t.data().size() * sizeof(double));
    }
  }
  detail::write_text_file(path + ".idx", index);
}

std::map<std::string, Tensor> load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("checkpoint: cannot open " + path);
  char magic[8];
  detail::read_bytes(in, magic, sizeof(magic));
  if (std::memcmp(magic, detail::kCheckpointMagic, sizeof(magic)) != 0) {
    throw DataError("checkpoint: bad magic in " + path);
  }
  const auto version = detail::read_pod<std::uint32_t>(in);
  if (version != 1) throw DataError("checkpoint: unsupported version");
  const auto count = detail::read_pod<std::uint32_t>(in);

  std::map<std::string, Tensor> out;
  for (std::uint32_t i = 0; i < count; ++i) {
    const auto name_len = detail::read_pod<std::uint32_t>(in);
    std::string name(name_len, '\0');
    detail::read_bytes(in, name.data(), name_len);
    const auto dtype = detail::read_pod<std::uint8_t>(in);
    if (dtype != detail::kDTypeF64) throw DataError("checkpoint: unsupported dtype for " + name);
    const auto ndim = detail::read_pod<std::uint8_t>(in);
    autograd::Shape shape(ndim);
    long long numel = 1;
    for (auto& d : shape) {
      d = static_cast<int>(detail::read_pod<std::uint64_t>(in));
      numel *= d;
    }
    std::vector<double> data(static_cast<std::size_t>(numel));
    if (numel > 0) detail::read_bytes(in, data.data(), data.size() * sizeof(double));
    out.emplace(std::move(name), Tensor::from_data(std::move(shape), std::move(data)));
  }
  return out;
}

}  // namespace affect::io
