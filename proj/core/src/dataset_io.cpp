#include "affect/dataset_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <json.hpp>

#include "io_util.hpp"

namespace affect::io {

namespace fs = std::filesystem;
using features::Dataset;
using features::Recording;
using features::Sample;
using features::Split;

namespace {

struct BlockSpec {
  const char* name;
  std::vector<long long> dims;  // per-sample dims
};

std::vector<BlockSpec> block_specs() {
  return {
      {"eeg_raw", {features::kEEGChannels, features::kEpochEEGSamples}},
      {"psd", {features::kEEGChannels * 5}},
      {"de", {features::kEEGChannels * 5}},
      {"stats", {features::kEEGChannels * 20}},
      {"asym", {3}},
      {"hrv", {7}},
      {"eda", {8}},
      {"hr", {7}},
      {"temp", {6}},
      {"personality", {5}},
  };
}

std::vector<double> block_of(const Sample& s, const std::string& name) {
  if (name == "eeg_raw") return s.eeg_raw;
  if (name == "psd") return s.eeg.psd;
  if (name == "de") return s.eeg.de;
  if (name == "stats") return s.eeg.stats;
  if (name == "asym") return {s.eeg.asym.begin(), s.eeg.asym.end()};
  if (name == "hrv") return {s.peripheral.hrv.begin(), s.peripheral.hrv.end()};
  if (name == "eda") return {s.peripheral.eda.begin(), s.peripheral.eda.end()};
  if (name == "hr") return {s.peripheral.hr.begin(), s.peripheral.hr.end()};
  if (name == "temp") return {s.peripheral.temp.begin(), s.peripheral.temp.end()};
  if (name == "personality") {
    std::vector<double> v;
    for (int x : s.personality.big5) v.push_back(x);
    return v;
  }
  throw DataError("dataset io: unknown block " + name);
}

void block_into(Sample& s, const std::string& name, const double* data, long long width) {
  auto copy_arr = [&](auto& arr) {
    if (width != static_cast<long long>(arr.size())) throw DataError("dataset io: width mismatch in " + name);
    for (std::size_t i = 0; i < arr.size(); ++i) arr[i] = data[i];
  };
  if (name == "eeg_raw") {
    s.eeg_raw.assign(data, data + width);
  } else if (name == "psd") {
    s.eeg.psd.assign(data, data + width);
  } else if (name == "de") {
    s.eeg.de.assign(data, data + width);
  } else if (name == "stats") {
    s.eeg.stats.assign(data, data + width);
  } else if (name == "asym") {
    copy_arr(s.eeg.asym);
  } else if (name == "hrv") {
    copy_arr(s.peripheral.hrv);
  } else if (name == "eda") {
    copy_arr(s.peripheral.eda);
  } else if (name == "hr") {
    copy_arr(s.peripheral.hr);
  } else if (name == "temp") {
    copy_arr(s.peripheral.temp);
  } else if (name == "personality") {
    for (std::size_t i = 0; i < 5; ++i) s.personality.big5[i] = static_cast<int>(data[i]);
  } else {
    throw DataError("dataset io: unknown block " + name);
  }
}

}  // namespace

void save_dataset(const Dataset& ds, const std::string& dir, std::uint64_t seed) {
  fs::create_directories(dir);
  const long long n = static_cast<long long>(ds.samples.size());

  nlohmann::json manifest;
  manifest["schema_version"] = 1;
  manifest["seed"] = seed;
  manifest["n_samples"] = n;
  manifest["classes"] = features::emotion_names();
  manifest["class_counts"] = ds.class_counts;
  nlohmann::json blocks;
  for (const BlockSpec& spec : block_specs()) {
    blocks[spec.name] = spec.dims;
  }
  manifest["feature_blocks"] = blocks;
  detail::write_text_file(dir + "/manifest.json", manifest.dump(2) + "\n");

  for (const BlockSpec& spec : block_specs()) {
    std::vector<long long> dims;
    dims.push_back(n);
    long long width = 1;
    for (long long d : spec.dims) {
      dims.push_back(d);
      width *= d;
    }
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(n * width));
    for (const Sample& s : ds.samples) {
      std::vector<double> block = block_of(s, spec.name);
      if (static_cast<long long>(block.size()) != width) {
        throw DataError("dataset io: sample block " + std::string(spec.name) + " has wrong width");
      }
      data.insert(data.end(), block.begin(), block.end());
    }
    detail::write_tensor_file(dir + "/" + spec.name + ".bin", dims, data);
  }

  std::string labels = "index,class,subject,split\n";
  char buf[96];
  for (long long i = 0; i < n; ++i) {
    const Sample& s = ds.samples[static_cast<std::size_t>(i)];
    std::snprintf(buf, sizeof(buf), "%lld,%d,%d,%d\n", i, static_cast<int>(s.label), s.subject_id,
                  ds.split[static_cast<std::size_t>(i)] == Split::Train ? 0 : 1);
    labels += buf;
  }
  detail::write_text_file(dir + "/labels.csv", labels);
}

std::uint64_t dataset_seed(const std::string& dir) {
  nlohmann::json manifest = nlohmann::json::parse(detail::read_text_file(dir + "/manifest.json"));
  return manifest.at("seed").get<std::uint64_t>();
}

Dataset load_dataset(const std::string& dir) {
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(detail::read_text_file(dir + "/manifest.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("dataset io: bad manifest: " + std::string(e.what()));
  }
  if (manifest.at("schema_version").get<int>() != 1) {
    throw DataError("dataset io: unsupported schema version");
  }
  const long long n = manifest.at("n_samples").get<long long>();

  Dataset ds;
  ds.samples.resize(static_cast<std::size_t>(n));
  ds.split.assign(static_cast<std::size_t>(n), Split::Test);

  for (const BlockSpec& spec : block_specs()) {
    auto [dims, data] = detail::read_tensor_file(dir + "/" + spec.name + ".bin");
    long long width = 1;
    for (std::size_t i = 1; i < dims.size(); ++i) width *= dims[i];
    if (dims.empty() || dims[0] != n) {
      throw DataError("dataset io: block " + std::string(spec.name) + " has wrong sample count");
    }
    for (long long i = 0; i < n; ++i) {
      block_into(ds.samples[static_cast<std::size_t>(i)], spec.name,
                 data.data() + i * width, width);
    }
  }

  const std::string labels = detail::read_text_file(dir + "/labels.csv");
  std::size_t pos = labels.find('\n');
  if (pos == std::string::npos) throw DataError("dataset io: empty labels.csv");
  long long row = 0;
  while (pos + 1 < labels.size() && row < n) {
    const std::size_t end = labels.find('\n', pos + 1);
    const std::string line = labels.substr(pos + 1, end - pos - 1);
    long long index;
    int cls, subject, split;
    if (std::sscanf(line.c_str(), "%lld,%d,%d,%d", &index, &cls, &subject, &split) != 4) {
      throw DataError("dataset io: malformed labels row '" + line + "'");
    }
    if (index != row) throw DataError("dataset io: labels rows out of order");
    ds.samples[static_cast<std::size_t>(row)].label = features::emotion_from_index(cls);
    ds.samples[static_cast<std::size_t>(row)].subject_id = subject;
    ds.split[static_cast<std::size_t>(row)] = split == 0 ? Split::Train : Split::Test;
    ++row;
    pos = end;
  }
  if (row != n) throw DataError("dataset io: labels.csv row count mismatch");
  ds.recount();
  return ds;
}

namespace {

void save_signal(const std::string& path, const dsp::Signal& s) {
  detail::write_tensor_file(path, {s.channels, s.length()}, s.samples);
}

dsp::Signal load_signal(const std::string& path, double fs) {
  auto [dims, data] = detail::read_tensor_file(path);
  if (dims.size() != 2) throw DataError("recording io: expected 2-d signal tensor in " + path);
  dsp::Signal s;
  s.channels = static_cast<int>(dims[0]);
  s.fs = fs;
  s.samples = std::move(data);
  return s;
}

}  // namespace

void save_recordings(const std::vector<Recording>& recordings, const std::string& dir) {
  fs::create_directories(dir);
  nlohmann::json top;
  top["schema_version"] = 1;
  top["n_recordings"] = recordings.size();
  detail::write_text_file(dir + "/recordings.json", top.dump(2) + "\n");

  char name[32];
  for (std::size_t i = 0; i < recordings.size(); ++i) {
    std::snprintf(name, sizeof(name), "rec_%05zu", i);
    const std::string sub = dir + "/" + name;
    fs::create_directories(sub);
    const Recording& r = recordings[i];

    nlohmann::json meta;
    meta["label"] = static_cast<int>(r.label);
    meta["subject_id"] = r.subject_id;
    meta["personality"] = r.personality.big5;
    meta["fs"] = {{"eeg", r.eeg.fs}, {"bvp", r.bvp.fs}, {"eda", r.eda.fs}, {"temp", r.temp.fs}};
    detail::write_text_file(sub + "/meta.json", meta.dump(2) + "\n");

    save_signal(sub + "/eeg.bin", r.eeg);
    save_signal(sub + "/bvp.bin", r.bvp);
    save_signal(sub + "/eda.bin", r.eda);
    save_signal(sub + "/temp.bin", r.temp);
  }
}

std::size_t recording_count(const std::string& dir) {
  nlohmann::json top;
  try {
    top = nlohmann::json::parse(detail::read_text_file(dir + "/recordings.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("recording io: bad recordings.json: " + std::string(e.what()));
  }
  return top.at("n_recordings").get<std::size_t>();
}

Recording load_recording(const std::string& dir, int index) {
  char name[32];
  std::snprintf(name, sizeof(name), "rec_%05d", index);
  const std::string sub = dir + "/" + name;
  nlohmann::json meta;
  try {
    meta = nlohmann::json::parse(detail::read_text_file(sub + "/meta.json"));
  } catch (const nlohmann::json::exception& e) {
    throw DataError("recording io: bad meta in " + sub + ": " + e.what());
  }
  Recording r;
  r.label = features::emotion_from_index(meta.at("label").get<int>());
  r.subject_id = meta.at("subject_id").get<int>();
  const auto pers = meta.at("personality");
  for (std::size_t j = 0; j < 5; ++j) r.personality.big5[j] = pers.at(j).get<int>();
  r.eeg = load_signal(sub + "/eeg.bin", meta.at("fs").at("eeg").get<double>());
  r.bvp = load_signal(sub + "/bvp.bin", meta.at("fs").at("bvp").get<double>());
  r.eda = load_signal(sub + "/eda.bin", meta.at("fs").at("eda").get<double>());
  r.temp = load_signal(sub + "/temp.bin", meta.at("fs").at("temp").get<double>());
  return r;
}

std::vector<Recording> load_recordings(const std::string& dir) {
  const std::size_t n = recording_count(dir);
  std::vector<Recording> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(load_recording(dir, static_cast<int>(i)));
  return out;
}

}  // namespace affect::io
