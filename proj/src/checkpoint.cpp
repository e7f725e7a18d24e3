#include "faithful/checkpoint.hpp"

#include "faithful/error.hpp"
#include "faithful/tensor_io.hpp"

#include <fstream>
#include <sstream>

namespace faithful {

namespace {
constexpr const char* kFormat = "faithful-checkpoint";
constexpr int kVersion = 1;
}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& model, std::uint64_t seed,
                     const nlohmann::json& meta) {
  const auto& entries = model.network().parameters().entries();
  nlohmann::ordered_json header;
  header["format"] = kFormat;
  header["version"] = kVersion;
  header["spec"] = nlohmann::json(model.spec());
  header["seed"] = seed;
  header["parameters"] = nlohmann::ordered_json::array();
  for (const auto& [name, var] : entries)
    header["parameters"].push_back({{"name", name}, {"shape", var.shape()}});
  header["meta"] = meta;

  std::ostringstream out(std::ios::binary);
  out << header.dump() << '\n';
  for (const auto& [name, var] : entries) write_tensor(out, Tensor{var.shape(), var.value(), DType::F64});
  write_file_atomic(path, out.str());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw PersistenceError("cannot open checkpoint " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw PersistenceError("empty checkpoint " + path.string());
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("checkpoint header is not valid JSON: " + std::string(e.what()));
  }
  if (header.value("format", std::string{}) != kFormat || header.value("version", 0) != kVersion)
    throw PersistenceError(path.string() + " is not a version " + std::to_string(kVersion) + " checkpoint");

  const std::uint64_t seed = header.at("seed").get<std::uint64_t>();
  Model model = build_model(header.at("spec").get<ModelSpec>(), seed);
  const auto& entries = model.network().parameters().entries();
  const auto& stored = header.at("parameters");
  if (stored.size() != entries.size())
    throw PersistenceError("checkpoint parameter count does not match the model");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const auto& [name, var] = entries[i];
    if (stored[i].at("name").get<std::string>() != name)
      throw PersistenceError("checkpoint parameter " + std::to_string(i) + " is '" +
                             stored[i]["name"].get<std::string>() + "', model expects '" + name + "'");
    Tensor t = read_tensor(in);
    if (t.shape != var.shape())
      throw PersistenceError("checkpoint parameter '" + name + "' has shape " + ad::to_string(t.shape) +
                             ", model expects " + ad::to_string(var.shape()));
    Var v = var;
    v.mutable_value() = t.data;
  }
  return {std::move(model), seed, header.value("meta", nlohmann::json::object())};
}

}  // namespace faithful
