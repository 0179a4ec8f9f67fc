#include "echelon/memory.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

#include "echelon/env.hpp"
#include "echelon/errors.hpp"

namespace echelon {

using nlohmann::json;

std::string to_string(RecordSource s) { return s == RecordSource::rl_log ? "rl_log" : "live"; }

RecordSource record_source_from_string(const std::string& s) {
  if (s == "rl_log") return RecordSource::rl_log;
  if (s == "live") return RecordSource::live;
  throw DomainError("unknown record source '" + s + "'");
}

void MemoryStore::insert(MemoryRecord rec) {
  if (rec.state_vec.size() != dimension_) {
    throw DomainError("stage " + std::to_string(stage_) + " expects state vectors of dimension " +
                      std::to_string(dimension_) + ", got " + std::to_string(rec.state_vec.size()));
  }
  records_.push_back(std::move(rec));
}

std::vector<SimilarCase> MemoryStore::retrieve(std::span<const double> query, std::size_t k, double tau) const {
  if (query.size() != dimension_) {
    throw DomainError("query dimension " + std::to_string(query.size()) + " does not match store dimension " +
                      std::to_string(dimension_));
  }
  if (tau < 0) throw DomainError("threshold must be non-negative");
  const std::size_t n = records_.size();
  k = std::min(k, n);
  if (k == 0) return {};

  std::vector<std::pair<double, std::size_t>> dist(n);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& v = records_[i].state_vec;
    double acc = 0;
    for (std::size_t j = 0; j < dimension_; ++j) {
      const double d = query[j] - v[j];
      acc += d * d;
    }
    dist[i] = {std::sqrt(acc), i};
  }
  // pair ordering gives (distance, insertion index), which is the tie-break we want.
  std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

  std::vector<SimilarCase> out;
  for (std::size_t i = 0; i < k; ++i) {
    if (!(dist[i].first < tau)) break;
    out.push_back({records_[dist[i].second], dist[i].first, dist[i].second});
  }
  return out;
}

MemoryBank::MemoryBank(const ScenarioSpec& spec) {
  stores_.reserve(spec.stages.size());
  for (const auto& s : spec.stages) {
    stores_.emplace_back(s.stage_index, static_cast<std::size_t>(state_dimension(s.lead_time)));
  }
}

MemoryStore& MemoryBank::stage(int m) {
  if (m < 0 || static_cast<std::size_t>(m) >= stores_.size()) throw DomainError("no memory store for stage " + std::to_string(m));
  return stores_[m];
}

const MemoryStore& MemoryBank::stage(int m) const {
  if (m < 0 || static_cast<std::size_t>(m) >= stores_.size()) throw DomainError("no memory store for stage " + std::to_string(m));
  return stores_[m];
}

std::size_t MemoryBank::total_records() const {
  return std::accumulate(stores_.begin(), stores_.end(), std::size_t{0},
                         [](std::size_t acc, const MemoryStore& s) { return acc + s.size(); });
}

std::string to_log_line(int stage, const MemoryRecord& rec) {
  json j;
  j["stage"] = stage;
  j["episode"] = rec.provenance.episode;
  j["period"] = rec.provenance.period;
  j["state_vec"] = rec.state_vec;
  j["action"] = rec.action;
  j["reward"] = rec.reward;
  j["source"] = to_string(rec.provenance.source);
  return j.dump();
}

namespace {

struct ParsedLine {
  int stage = 0;
  MemoryRecord record;
};

ParsedLine parse_line(const std::string& text, const MemoryBank& bank) {
  json j = json::parse(text);  // throws json::parse_error
  if (!j.is_object()) throw DomainError("record is not a JSON object");
  for (const char* key : {"stage", "episode", "period", "state_vec", "action", "reward", "source"}) {
    if (!j.contains(key)) throw DomainError(std::string("missing field '") + key + "'");
  }
  if (!j["stage"].is_number_integer()) throw DomainError("stage must be an integer");
  if (!j["action"].is_number_integer()) throw DomainError("action must be an integer");
  if (!j["reward"].is_number()) throw DomainError("reward must be a number");
  if (!j["state_vec"].is_array()) throw DomainError("state_vec must be an array");
  ParsedLine p;
  p.stage = j["stage"].get<int>();
  if (p.stage < 0 || static_cast<std::size_t>(p.stage) >= bank.num_stages()) {
    throw DomainError("stage " + std::to_string(p.stage) + " out of range");
  }
  for (const auto& x : j["state_vec"]) {
    if (!x.is_number()) throw DomainError("state_vec entries must be numbers");
    p.record.state_vec.push_back(x.get<double>());
  }
  const auto dim = bank.stage(p.stage).dimension();
  if (p.record.state_vec.size() != dim) {
    throw DomainError("state_vec has " + std::to_string(p.record.state_vec.size()) + " entries, stage " +
                      std::to_string(p.stage) + " expects " + std::to_string(dim));
  }
  p.record.action = j["action"].get<Units>();
  p.record.reward = j["reward"].get<double>();
  p.record.provenance.episode = j["episode"].get<int>();
  p.record.provenance.period = j["period"].get<int>();
  p.record.provenance.source = record_source_from_string(j["source"].get<std::string>());
  return p;
}

}  // namespace

ImportReport import_log(MemoryBank& bank, const std::string& path, bool strict) {
  std::ifstream in(path);
  if (!in) throw IngestError("cannot open memory log " + path);

  ImportReport report;
  report.counts.assign(bank.num_stages(), 0);
  std::vector<ParsedLine> good;
  std::string text;
  std::size_t line_no = 0;
  while (std::getline(in, text)) {
    ++line_no;
    if (std::all_of(text.begin(), text.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    try {
      good.push_back(parse_line(text, bank));
    } catch (const std::exception& e) {
      report.rejected.push_back({line_no, e.what()});
    }
  }
  if (strict && !report.rejected.empty()) {
    std::ostringstream msg;
    msg << "memory log " << path << " has malformed lines:";
    for (const auto& r : report.rejected) msg << "\n  line " << r.line << ": " << r.reason;
    throw IngestError(msg.str());
  }
  for (auto& p : good) {
    bank.stage(p.stage).insert(std::move(p.record));
    ++report.counts[p.stage];
  }
  return report;
}

std::size_t export_log(const MemoryBank& bank, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write memory log " + path);
  std::size_t n = 0;
  for (std::size_t m = 0; m < bank.num_stages(); ++m) {
    for (const auto& rec : bank.stage(static_cast<int>(m)).records()) {
      out << to_log_line(static_cast<int>(m), rec) << '\n';
      ++n;
    }
  }
  if (!out) throw IoError("failed writing memory log " + path);
  return n;
}

}  // namespace echelon
