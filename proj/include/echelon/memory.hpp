#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "echelon/scenario.hpp"

namespace echelon {

enum class RecordSource { rl_log, live };

std::string to_string(RecordSource s);
RecordSource record_source_from_string(const std::string& s);

struct Provenance {
  int episode = 0;
  int period = 0;
  RecordSource source = RecordSource::live;

  bool operator==(const Provenance&) const = default;
};

/// One (state, action, reward) experience of a single stage.
struct MemoryRecord {
  std::vector<double> state_vec;
  Units action = 0;
  Money reward = 0;
  Provenance provenance;

  bool operator==(const MemoryRecord&) const = default;
};

struct SimilarCase {
  MemoryRecord record;
  double distance = 0;
  std::size_t index = 0;  // insertion position inside the store

  bool operator==(const SimilarCase&) const = default;
};

/// Append-only episodic memory of one stage with exact nearest-neighbour lookup.
///
/// One retrieval computes |M| Euclidean distances of dimension d and partially sorts
/// them, i.e. O(|M| d + |M| log K + K).
class MemoryStore {
 public:
  MemoryStore(int stage, std::size_t dimension) : stage_(stage), dimension_(dimension) {}

  int stage() const { return stage_; }
  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  const std::vector<MemoryRecord>& records() const { return records_; }

  /// Throws DomainError on dimension mismatch.
  void insert(MemoryRecord rec);

  /// K nearest records, then only those strictly closer than tau. Ascending distance,
  /// earlier insertion first on ties.
  std::vector<SimilarCase> retrieve(std::span<const double> query, std::size_t k, double tau) const;

  bool operator==(const MemoryStore&) const = default;

 private:
  int stage_;
  std::size_t dimension_;
  std::vector<MemoryRecord> records_;
};

/// One store per stage, dimensioned from the scenario's lead times.
class MemoryBank {
 public:
  explicit MemoryBank(const ScenarioSpec& spec);

  std::size_t num_stages() const { return stores_.size(); }
  MemoryStore& stage(int m);
  const MemoryStore& stage(int m) const;
  std::size_t total_records() const;

  bool operator==(const MemoryBank&) const = default;

 private:
  std::vector<MemoryStore> stores_;
};

struct RejectedLine {
  std::size_t line = 0;
  std::string reason;
};

struct ImportReport {
  std::vector<std::size_t> counts;  // per stage
  std::vector<RejectedLine> rejected;
};

/// Reads a JSON Lines memory log:
///   {"stage":0,"episode":1,"period":3,"state_vec":[...],"action":4,"reward":-8,"source":"rl_log"}
/// Good lines are appended to their stage; bad ones are reported with their 1-based line
/// number. In strict mode any bad line throws IngestError before anything is appended.
/// A missing file always throws IngestError.
ImportReport import_log(MemoryBank& bank, const std::string& path, bool strict = false);

/// Writes every record of every stage, stage-major in insertion order. Returns the count.
std::size_t export_log(const MemoryBank& bank, const std::string& path);

/// Serialises one record as a single JSON line (no trailing newline).
std::string to_log_line(int stage, const MemoryRecord& rec);

}  // namespace echelon
