#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "affect/features.hpp"

namespace affect::io {

// Dataset directory layout:
//   manifest.json            schema, class names, block widths, seed, counts
//   labels.csv               index,class,subject,split rows
//   <block>.bin              one binary tensor per feature block
// Round-trips bit-exactly: load(save(ds)) == ds and re-saving produces
// byte-identical files.
void save_dataset(const features::Dataset& ds, const std::string& dir, std::uint64_t seed);
features::Dataset load_dataset(const std::string& dir);
std::uint64_t dataset_seed(const std::string& dir);

// Raw multimodal recordings (the preprocess command's input): one
// subdirectory per recording with meta.json and per-modality tensors.
void save_recordings(const std::vector<features::Recording>& recordings, const std::string& dir);
std::vector<features::Recording> load_recordings(const std::string& dir);
features::Recording load_recording(const std::string& dir, int index);
std::size_t recording_count(const std::string& dir);

}  // namespace affect::io
