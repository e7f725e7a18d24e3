#include "faithful/dataset.hpp"

#include "faithful/error.hpp"
#include "faithful/image.hpp"
#include "faithful/rng.hpp"
#include "faithful/tensor_io.hpp"

#include <algorithm>
#include <cstdio>

namespace faithful {

namespace fs = std::filesystem;

namespace {

bool is_frame_file(const fs::path& p) {
  return p.extension() == ".png" || p.extension() == ".tensor";
}

std::vector<fs::path> frame_files(const fs::path& dir) {
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && is_frame_file(entry.path())) files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  return files;
}

std::pair<int, int> frame_size(const fs::path& p) {
  if (p.extension() == ".png") return png_size(p);
  const Tensor h = load_tensor_header(p);
  if (h.shape.size() != 3 || h.shape[2] != 3)
    throw InputError("frame tensor " + p.filename().string() + " is not (H, W, 3)");
  return {h.shape[0], h.shape[1]};
}

Eigen::Vector3d read_ground_truth(const fs::path& file) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(file));
  } catch (const nlohmann::json::exception& e) {
    throw InputError("malformed ground truth: " + std::string(e.what()));
  }
  if (!j.contains("illuminant") || !j["illuminant"].is_array() || j["illuminant"].size() != 3)
    throw InputError("ground truth must hold a 3-element illuminant");
  const auto v = j["illuminant"].get<std::vector<double>>();
  return make_illuminant(Eigen::Vector3d(v[0], v[1], v[2]));
}

}  // namespace

std::vector<std::string> DatasetManifest::fold_ids(int fold) const {
  std::vector<std::string> out;
  for (const std::string& id : ids)
    if (auto it = folds.find(id); it != folds.end() && it->second == fold) out.push_back(id);
  return out;
}

std::vector<std::string> DatasetManifest::train_ids(int fold) const {
  std::vector<std::string> out;
  for (const std::string& id : ids)
    if (auto it = folds.find(id); it != folds.end() && it->second != fold) out.push_back(id);
  return out;
}

void to_json(nlohmann::json& j, const DatasetManifest& m) {
  nlohmann::json seqs = nlohmann::json::array();
  for (const std::string& id : m.ids) {
    nlohmann::json s{{"id", id}, {"frames", m.frameCounts.at(id)}};
    if (auto it = m.folds.find(id); it != m.folds.end()) s["fold"] = it->second;
    seqs.push_back(s);
  }
  j = nlohmann::json{{"root", m.root.string()}, {"foldCount", m.foldCount}, {"sequences", seqs}};
}

void from_json(const nlohmann::json& j, DatasetManifest& m) {
  m = DatasetManifest{};
  m.root = j.value("root", std::string{});
  m.foldCount = j.value("foldCount", 0);
  for (const auto& s : j.at("sequences")) {
    const auto id = s.at("id").get<std::string>();
    m.ids.push_back(id);
    m.frameCounts[id] = s.at("frames").get<int>();
    if (s.contains("fold")) m.folds[id] = s["fold"].get<int>();
  }
}

DatasetLoad load_dataset(const fs::path& root) {
  if (!fs::is_directory(root)) throw InputError("dataset root " + root.string() + " is not a directory");
  DatasetLoad out;
  out.manifest.root = root;

  std::vector<fs::path> dirs;
  for (const auto& entry : fs::directory_iterator(root))
    if (entry.is_directory()) dirs.push_back(entry.path());
  std::sort(dirs.begin(), dirs.end());

  for (const fs::path& dir : dirs) {
    const std::string id = dir.filename().string();
    try {
      if (!fs::exists(dir / kGroundTruthFile)) throw InputError("missing ground truth record");
      read_ground_truth(dir / kGroundTruthFile);
      const auto files = frame_files(dir);
      if (files.empty()) throw InputError("no frames");
      const auto size = frame_size(files.front());
      for (const fs::path& f : files)
        if (frame_size(f) != size)
          throw InputError("frame " + f.filename().string() + " differs in size from the first frame");
      out.manifest.ids.push_back(id);
      out.manifest.frameCounts[id] = static_cast<int>(files.size());
    } catch (const Error& e) {
      out.errors.push_back({id, e.what()});
    }
  }

  if (fs::exists(root / kManifestFile)) {
    const DatasetManifest stored = load_manifest(root / kManifestFile);
    out.manifest.foldCount = stored.foldCount;
    for (const auto& [id, fold] : stored.folds)
      if (out.manifest.frameCounts.count(id)) out.manifest.folds[id] = fold;
  }
  return out;
}

FrameSequence load_sequence(const DatasetManifest& manifest, const std::string& id) {
  if (!manifest.frameCounts.count(id)) throw LookupError("unknown sequence '" + id + "'");
  const fs::path dir = manifest.root / id;
  FrameSequence seq;
  seq.id = id;
  seq.illuminant = read_ground_truth(dir / kGroundTruthFile);
  for (const fs::path& f : frame_files(dir)) {
    Image img = read_frame(f);
    if ((img.data < 0.0).any() || (img.data > 1.0).any() || !img.data.allFinite())
      throw InputError("frame " + f.string() + " has values outside [0, 1]");
    seq.frames.push_back(std::move(img));
  }
  if (static_cast<int>(seq.frames.size()) != manifest.frameCounts.at(id))
    throw InputError("sequence '" + id + "' frame count changed since the manifest was built");
  return seq;
}

std::vector<FrameSequence> load_sequences(const DatasetManifest& manifest,
                                          const std::vector<std::string>& ids) {
  std::vector<FrameSequence> out;
  out.reserve(ids.size());
  for (const std::string& id : ids) out.push_back(load_sequence(manifest, id));
  return out;
}

void save_sequence(const fs::path& root, const FrameSequence& seq) {
  const fs::path dir = root / seq.id;
  for (std::size_t t = 0; t < seq.frames.size(); ++t) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%03zu.tensor", t);
    save_tensor(dir / name, image_to_tensor(seq.frames[t]));
  }
  const nlohmann::json gt{{"illuminant", {seq.illuminant[0], seq.illuminant[1], seq.illuminant[2]}}};
  write_file_atomic(dir / kGroundTruthFile, gt.dump(2) + "\n");
}

void save_manifest(const DatasetManifest& manifest, const fs::path& path) {
  write_file_atomic(path, nlohmann::json(manifest).dump(2) + "\n");
}

DatasetManifest load_manifest(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path)).get<DatasetManifest>();
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("malformed manifest " + path.string() + ": " + e.what());
  }
}

DatasetManifest kfold_split(DatasetManifest manifest, int k, std::uint64_t seed) {
  const int n = static_cast<int>(manifest.ids.size());
  if (k < 2 || k > n)
    throw InputError("kfold_split: k must lie in [2, " + std::to_string(n) + "], got " + std::to_string(k));
  std::vector<std::string> order = manifest.ids;
  std::sort(order.begin(), order.end());
  Rng rng(derive_seed(seed, hash_string("kfold")));
  for (int i = n - 1; i > 0; --i)
    std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i + 1))]);
  manifest.folds.clear();
  for (int i = 0; i < n; ++i) manifest.folds[order[i]] = i % k;
  manifest.foldCount = k;
  return manifest;
}

}  // namespace faithful
