#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "affect/tensor.hpp"

namespace affect::io {

// Named-tensor archive (name, dtype, shape, raw little-endian doubles)
// plus a human-readable text index at <path>.idx. Round-trips exactly.
void save_checkpoint(const std::vector<std::pair<std::string, autograd::Tensor>>& tensors,
                     const std::string& path);
std::map<std::string, autograd::Tensor> load_checkpoint(const std::string& path);

}  // namespace affect::io
