#include "faithful/results.hpp"

#include "faithful/error.hpp"
#include "faithful/tensor_io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace faithful {

namespace fs = std::filesystem;

namespace {

void check_run_id(const std::string& id) {
  if (id.empty() || id.front() == '/' || id.find("..") != std::string::npos)
    throw InputError("invalid run id '" + id + "'");
}

bool close(double a, double b) { return std::fabs(a - b) <= 1e-9 * std::max(1.0, std::fabs(b)); }

}  // namespace

void to_json(nlohmann::json& j, const RunRecord& r) {
  j = nlohmann::json{{"runId", r.runId},
                     {"spec", r.spec},
                     {"weightSource", r.weightSource},
                     {"fold", r.fold},
                     {"summary", r.summary},
                     {"itemIds", r.itemIds},
                     {"perItemErrors", r.perItemErrors},
                     {"maskRefs", r.maskRefs},
                     {"wallTimeSeconds", r.wallTimeSeconds},
                     {"seeds", r.seeds}};
}

void from_json(const nlohmann::json& j, RunRecord& r) {
  r.runId = j.at("runId").get<std::string>();
  r.spec = j.at("spec").get<ModelSpec>();
  r.weightSource = j.at("weightSource").get<WeightSource>();
  r.fold = j.at("fold").get<int>();
  r.summary = j.at("summary").get<ErrorSummary>();
  r.itemIds = j.value("itemIds", std::vector<std::string>{});
  r.perItemErrors = j.at("perItemErrors").get<std::vector<double>>();
  r.maskRefs = j.value("maskRefs", std::vector<std::string>{});
  r.wallTimeSeconds = j.value("wallTimeSeconds", 0.0);
  r.seeds = j.value("seeds", std::map<std::string, std::uint64_t>{});

  const ErrorSummary recomputed = summarize_errors(r.perItemErrors);
  const ErrorSummary& s = r.summary;
  if (!(close(s.mean, recomputed.mean) && close(s.median, recomputed.median) &&
        close(s.trimean, recomputed.trimean) && close(s.best25, recomputed.best25) &&
        close(s.worst25, recomputed.worst25) && close(s.worst5, recomputed.worst5)))
    throw PersistenceError("run '" + r.runId + "': summary does not match its per-item errors");
  r.summary.n = recomputed.n;
}

ResultsStore::ResultsStore(fs::path root) : root_(std::move(root)) {}

fs::path ResultsStore::record_path(const std::string& run_id) const {
  check_run_id(run_id);
  return root_ / "runs" / (run_id + ".json");
}

fs::path ResultsStore::checkpoint_path(const std::string& name) const {
  check_run_id(name);
  return root_ / "checkpoints" / (name + ".ckpt");
}

fs::path ResultsStore::mask_dir(const std::string& run_id) const {
  check_run_id(run_id);
  return root_ / "masks" / run_id;
}

fs::path ResultsStore::verdict_path(const std::string& name) const { return root_ / "verdicts" / (name + ".json"); }

bool ResultsStore::has(const std::string& run_id) const { return fs::exists(record_path(run_id)); }

void ResultsStore::put(const RunRecord& record) const {
  write_file_atomic(record_path(record.runId), nlohmann::json(record).dump(2) + "\n");
}

RunRecord ResultsStore::get(const std::string& run_id) const {
  const fs::path p = record_path(run_id);
  if (!fs::exists(p)) throw LookupError("unknown run '" + run_id + "'");
  try {
    return nlohmann::json::parse(read_file(p)).get<RunRecord>();
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("malformed run record " + p.string() + ": " + e.what());
  }
}

std::vector<std::string> ResultsStore::list() const {
  std::vector<std::string> ids;
  const fs::path dir = root_ / "runs";
  if (!fs::exists(dir)) return ids;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    std::string rel = fs::relative(entry.path(), dir).generic_string();
    ids.push_back(rel.substr(0, rel.size() - 5));
  }
  std::sort(ids.begin(), ids.end());
  return ids;
}

ExportFormat parse_export_format(std::string_view s) {
  if (s == "JSON" || s == "json") return ExportFormat::Json;
  if (s == "CSV" || s == "csv") return ExportFormat::Csv;
  throw ConfigurationError("unknown export format '" + std::string(s) + "'");
}

std::string export_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << "runId,config,contextualSpatial,contextualTemporal,weightSource,fold,n,mean,median,trimean,"
         "best25,worst25,worst5\n";
  char buf[512];
  for (const RunRecord& r : records) {
    const ErrorSummary& s = r.summary;
    std::snprintf(buf, sizeof buf, "%s,%s,%d,%d,%s,%d,%zu,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  r.runId.c_str(), r.spec.label().c_str(), r.spec.spatialContextual ? 1 : 0,
                  r.spec.temporalContextual ? 1 : 0,
                  std::string(to_string(r.weightSource.kind)).c_str(), r.fold, s.n, s.mean, s.median,
                  s.trimean, s.best25, s.worst25, s.worst5);
    out << buf;
  }
  return out.str();
}

void export_results(const ResultsStore& store, const std::vector<std::string>& run_ids,
                    ExportFormat format, const fs::path& path) {
  std::vector<RunRecord> records;
  for (const std::string& id : run_ids) records.push_back(store.get(id));
  if (format == ExportFormat::Json)
    write_file_atomic(path, nlohmann::json(records).dump(2) + "\n");
  else
    write_file_atomic(path, export_csv(records));
}

std::vector<RunRecord> import_results_json(const fs::path& path) {
  try {
    return nlohmann::json::parse(read_file(path)).get<std::vector<RunRecord>>();
  } catch (const nlohmann::json::exception& e) {
    throw PersistenceError("malformed results file " + path.string() + ": " + e.what());
  }
}

}  // namespace faithful
