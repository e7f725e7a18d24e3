#pragma once

// Results store layout under <out>:
//   runs/<runId>.json          one RunRecord per file
//   checkpoints/<name>.ckpt
//   masks/<runId>/<item>.<spatial|temporal>.tensor
//   verdicts/<test>.json
// Run ids may contain '/' and map to nested paths.

#include "faithful/metrics.hpp"
#include "faithful/model.hpp"
#include "faithful/model_spec.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace faithful {

struct RunRecord {
  std::string runId;
  ModelSpec spec;
  WeightSource weightSource;
  int fold = 0;
  std::vector<std::string> itemIds;
  std::vector<double> perItemErrors;
  ErrorSummary summary;
  std::vector<std::string> maskRefs;
  double wallTimeSeconds = 0.0;
  std::map<std::string, std::uint64_t> seeds;

  double mae() const { return summary.mean; }
  friend bool operator==(const RunRecord&, const RunRecord&) = default;
};

void to_json(nlohmann::json& j, const RunRecord& r);
/// Throws PersistenceError when the summary does not match perItemErrors.
void from_json(const nlohmann::json& j, RunRecord& r);

class ResultsStore {
 public:
  explicit ResultsStore(std::filesystem::path root);

  const std::filesystem::path& root() const { return root_; }
  bool has(const std::string& run_id) const;
  /// Atomic write; replaces any previous record with the same id.
  void put(const RunRecord& record) const;
  /// Throws LookupError for unknown ids.
  RunRecord get(const std::string& run_id) const;
  std::vector<std::string> list() const;

  std::filesystem::path record_path(const std::string& run_id) const;
  std::filesystem::path checkpoint_path(const std::string& name) const;
  std::filesystem::path mask_dir(const std::string& run_id) const;
  std::filesystem::path verdict_path(const std::string& name) const;

 private:
  std::filesystem::path root_;
};

enum class ExportFormat { Json, Csv };
ExportFormat parse_export_format(std::string_view s);

/// Writes the named runs to `path`. Throws LookupError for unknown ids.
void export_results(const ResultsStore& store, const std::vector<std::string>& run_ids,
                    ExportFormat format, const std::filesystem::path& path);
std::string export_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> import_results_json(const std::filesystem::path& path);

}  // namespace faithful
