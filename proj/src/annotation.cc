#include "natdisc/annotation.h"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <mutex>
#include <unordered_set>

#include "json.hpp"
#include "natdisc/text_util.h"

namespace natdisc {
namespace {

using json = nlohmann::json;

int64_t NowSeconds() {
  return std::chrono::duration_cast<std::chrono::seconds>(
             std::chrono::system_clock::now().time_since_epoch())
      .count();
}

int BinaryField(const json& j, std::string_view name) {
  std::string key(name);
  if (!j.contains(key)) throw InputError("missing field \"" + key + "\"");
  const json& v = j[key];
  if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
  if (v.is_number_integer()) {
    auto n = v.get<long long>();
    if (n == 0 || n == 1) return static_cast<int>(n);
  }
  throw InputError("field \"" + key + "\" must be 0 or 1");
}

std::string StringField(const json& j, const char* name) {
  if (!j.contains(name) || !j[name].is_string()) {
    throw InputError(std::string("missing string field \"") + name + "\"");
  }
  return j[name].get<std::string>();
}

}  // namespace

Outcome AggregateVotes(int positive_votes) {
  if (positive_votes < 0 || positive_votes > kRaters) {
    throw ContractError("vote count out of range: " +
                        std::to_string(positive_votes));
  }
  if (positive_votes * 2 > kRaters) return Outcome::kYes;
  if (positive_votes * 2 < kRaters) return Outcome::kNo;
  return Outcome::kNeedsAdjudication;
}

KappaResult FleissKappa(const std::vector<int>& positive_votes, int raters) {
  if (raters < 2) throw ContractError("kappa needs at least 2 raters");
  if (positive_votes.size() < 2) throw ContractError("kappa needs at least 2 items");
  const double n = raters;
  const double items = static_cast<double>(positive_votes.size());
  long long total_pos = 0;
  double sum_p = 0;
  for (int c : positive_votes) {
    if (c < 0 || c > raters) {
      throw ContractError("vote count " + std::to_string(c) + " outside [0, " +
                          std::to_string(raters) + "]");
    }
    total_pos += c;
    const double a = c;
    const double b = raters - c;
    sum_p += (a * a + b * b - n) / (n * (n - 1));
  }
  KappaResult r;
  const long long total = static_cast<long long>(positive_votes.size()) * raters;
  if (total_pos == 0 || total_pos == total) return r;  // one category only
  const double p1 = static_cast<double>(total_pos) / static_cast<double>(total);
  const double p0 = 1.0 - p1;
  const double pe = p0 * p0 + p1 * p1;
  const double pbar = sum_p / items;
  r.status = KappaResult::Status::kDefined;
  r.value = (pbar - pe) / (1.0 - pe);
  return r;
}

AgreementBreakdown AgreementBreakdownOf(const std::vector<int>& positive_votes) {
  if (positive_votes.empty()) throw ContractError("no items");
  std::array<size_t, 3> counts{};
  for (int c : positive_votes) {
    if (c < 0 || c > kRaters) throw ContractError("vote count out of range");
    int m = std::max(c, kRaters - c);
    ++counts[m - 2];
  }
  AgreementBreakdown b;
  b.items = positive_votes.size();
  const double n = static_cast<double>(b.items);
  b.agree_2of4 = counts[0] / n;
  b.agree_3of4 = counts[1] / n;
  b.agree_4of4 = counts[2] / n;
  return b;
}

std::string AgreementJson(const AgreementReport& report) {
  json j;
  j["complete_samples"] = report.complete_samples;
  j["dimensions"] = json::object();
  for (Dimension d : kAllDimensions) {
    json dj;
    auto it = report.dimensions.find(d);
    if (it == report.dimensions.end()) {
      dj["status"] = "insufficient";
      dj["kappa"] = nullptr;
    } else {
      const auto& a = it->second;
      dj["status"] = a.kappa.defined() ? "defined" : "undefined";
      dj["kappa"] = a.kappa.defined() ? json(a.kappa.value) : json(nullptr);
      dj["agree_2of4"] = a.breakdown.agree_2of4;
      dj["agree_3of4"] = a.breakdown.agree_3of4;
      dj["agree_4of4"] = a.breakdown.agree_4of4;
      dj["items"] = a.breakdown.items;
    }
    j["dimensions"][std::string(DimensionName(d))] = dj;
  }
  return j.dump(2);
}

std::vector<AnnotationTask> LoadTasks(const std::filesystem::path& path) {
  std::vector<AnnotationTask> tasks;
  std::string ext = AsciiLowerCopy(path.extension().string());
  if (ext == ".csv") {
    CsvTable t = CsvTable::Load(path);
    size_t id = t.column("sample_id");
    size_t text = t.column("text");
    for (size_t r = 0; r < t.rows(); ++r) tasks.push_back({t.at(r, id), t.at(r, text)});
  } else {
    auto lines = ReadLines(path);
    for (size_t i = 0; i < lines.size(); ++i) {
      if (Trim(lines[i]).empty()) continue;
      std::string where = path.string() + ": line " + std::to_string(i + 1);
      json j;
      try {
        j = json::parse(lines[i]);
      } catch (const json::parse_error&) {
        throw InputError(where + ": malformed record");
      }
      AnnotationTask task;
      if (j.contains("sample_id") && j["sample_id"].is_string()) {
        task.sample_id = j["sample_id"].get<std::string>();
      } else if (j.contains("sent_id") && j["sent_id"].is_string()) {
        task.sample_id = j["sent_id"].get<std::string>();
      } else {
        throw InputError(where + ": record has no sample_id");
      }
      if (!j.contains("text") || !j["text"].is_string()) {
        throw InputError(where + ": record has no text");
      }
      task.text = j["text"].get<std::string>();
      tasks.push_back(std::move(task));
    }
  }
  if (tasks.empty()) throw InputError(path.string() + ": no tasks");
  return tasks;
}

std::string RecordToJson(const AnnotationRecord& record) {
  json j = {{"sample_id", record.sample_id},
            {"annotator_id", record.annotator_id}};
  for (Dimension d : kAllDimensions) j[std::string(DimensionName(d))] = record.label(d);
  j["timestamp"] = record.timestamp;
  return j.dump();
}

AnnotationRecord RecordFromJson(const std::string& body) {
  json j;
  try {
    j = json::parse(body);
  } catch (const json::parse_error&) {
    throw InputError("annotation body is not valid JSON");
  }
  if (!j.is_object()) throw InputError("annotation body must be an object");
  AnnotationRecord r;
  r.sample_id = StringField(j, "sample_id");
  r.annotator_id = StringField(j, "annotator_id");
  for (Dimension d : kAllDimensions) {
    r.labels[static_cast<size_t>(d)] = BinaryField(j, DimensionName(d));
  }
  if (j.contains("timestamp") && j["timestamp"].is_number_integer()) {
    r.timestamp = j["timestamp"].get<int64_t>();
  }
  return r;
}

AnnotationStore::AnnotationStore(std::vector<AnnotationTask> tasks,
                                 std::vector<std::string> annotators,
                                 std::optional<std::filesystem::path> log)
    : tasks_(std::move(tasks)), annotators_(std::move(annotators)) {
  if (annotators_.size() != static_cast<size_t>(kRaters)) {
    throw ContractError("exactly " + std::to_string(kRaters) +
                        " annotators are required, got " +
                        std::to_string(annotators_.size()));
  }
  std::unordered_set<std::string> seen;
  for (const auto& a : annotators_) {
    if (a.empty() || !seen.insert(a).second) {
      throw ContractError("annotator ids must be non-empty and distinct");
    }
  }
  for (size_t i = 0; i < tasks_.size(); ++i) {
    if (tasks_[i].sample_id.empty()) throw InputError("task with empty sample_id");
    if (!task_index_.emplace(tasks_[i].sample_id, i).second) {
      throw InputError("duplicate task \"" + tasks_[i].sample_id + "\"");
    }
  }
  slots_.resize(tasks_.size());
  if (!log) return;
  if (std::filesystem::exists(*log)) {
    auto lines = ReadLines(*log);
    for (size_t i = 0; i < lines.size(); ++i) {
      if (Trim(lines[i]).empty()) continue;
      std::string where = log->string() + ": line " + std::to_string(i + 1);
      try {
        json j = json::parse(lines[i]);
        std::string event = StringField(j, "event");
        if (event == "annotation") {
          SubmitLocked(RecordFromJson(lines[i]));
        } else if (event == "adjudication") {
          AdjudicationEntry e;
          e.sample_id = StringField(j, "sample_id");
          auto dim = ParseDimension(StringField(j, "dimension"));
          if (!dim) throw InputError("unknown dimension");
          e.dimension = *dim;
          e.value = BinaryField(j, "value");
          e.resolver_id = StringField(j, "resolver_id");
          e.timestamp = j.value("timestamp", int64_t{0});
          ResolveLocked(e);
        } else {
          throw InputError("unknown event \"" + event + "\"");
        }
      } catch (const json::exception&) {
        throw InputError(where + ": malformed event");
      } catch (const Error& e) {
        throw InputError(where + ": " + e.what());
      }
    }
  }
  log_ = std::move(log);
}

size_t AnnotationStore::TaskIndex(const std::string& sample_id) const {
  auto it = task_index_.find(sample_id);
  if (it == task_index_.end()) {
    throw UnknownIdError("unknown sample \"" + sample_id + "\"");
  }
  return it->second;
}

size_t AnnotationStore::AnnotatorIndex(const std::string& annotator_id) const {
  for (size_t i = 0; i < annotators_.size(); ++i) {
    if (annotators_[i] == annotator_id) return i;
  }
  throw UnknownIdError("unknown annotator \"" + annotator_id + "\"");
}

bool AnnotationStore::Complete(const Slot& slot) const {
  for (const auto& r : slot.records) {
    if (!r) return false;
  }
  return true;
}

int AnnotationStore::Votes(const Slot& slot, Dimension dim) const {
  int c = 0;
  for (const auto& r : slot.records) c += r ? r->label(dim) : 0;
  return c;
}

void AnnotationStore::AppendLog(const std::string& line) {
  if (!log_) return;
  if (log_->has_parent_path()) std::filesystem::create_directories(log_->parent_path());
  std::ofstream out(*log_, std::ios::app | std::ios::binary);
  out << line << '\n';
  out.flush();
  if (!out) throw Error("cannot append to " + log_->string());
}

void AnnotationStore::SubmitLocked(const AnnotationRecord& record) {
  size_t t = TaskIndex(record.sample_id);
  size_t a = AnnotatorIndex(record.annotator_id);
  for (int v : record.labels) {
    if (v != 0 && v != 1) throw ContractError("labels must be 0 or 1");
  }
  slots_[t].records[a] = record;
}

void AnnotationStore::Submit(const AnnotationRecord& record) {
  AnnotationRecord r = record;
  if (r.timestamp == 0) r.timestamp = NowSeconds();
  std::unique_lock lock(mu_);
  SubmitLocked(r);
  json j = json::parse(RecordToJson(r));
  j["event"] = "annotation";
  AppendLog(j.dump());
}

std::optional<AnnotationTask> AnnotationStore::NextTask(
    const std::string& annotator_id) const {
  std::shared_lock lock(mu_);
  size_t a = AnnotatorIndex(annotator_id);
  for (size_t t = 0; t < tasks_.size(); ++t) {
    if (!slots_[t].records[a]) return tasks_[t];
  }
  return std::nullopt;
}

std::optional<AnnotationRecord> AnnotationStore::Find(
    const std::string& sample_id, const std::string& annotator_id) const {
  std::shared_lock lock(mu_);
  return slots_[TaskIndex(sample_id)].records[AnnotatorIndex(annotator_id)];
}

std::array<Outcome, 3> AnnotationStore::Aggregate(
    const std::string& sample_id) const {
  std::shared_lock lock(mu_);
  const Slot& slot = slots_[TaskIndex(sample_id)];
  if (!Complete(slot)) {
    throw ContractError("sample \"" + sample_id + "\" is not fully annotated");
  }
  std::array<Outcome, 3> out{};
  for (Dimension d : kAllDimensions) {
    out[static_cast<size_t>(d)] = AggregateVotes(Votes(slot, d));
  }
  return out;
}

std::vector<PendingAdjudication> AnnotationStore::Pending() const {
  std::shared_lock lock(mu_);
  std::vector<PendingAdjudication> out;
  for (size_t t = 0; t < tasks_.size(); ++t) {
    const Slot& slot = slots_[t];
    if (!Complete(slot)) continue;
    for (Dimension d : kAllDimensions) {
      if (AggregateVotes(Votes(slot, d)) != Outcome::kNeedsAdjudication ||
          slot.adjudicated[static_cast<size_t>(d)]) {
        continue;
      }
      PendingAdjudication p{tasks_[t].sample_id, tasks_[t].text, d, {}};
      for (size_t a = 0; a < annotators_.size(); ++a) {
        p.votes[annotators_[a]] = slot.records[a]->label(d);
      }
      out.push_back(std::move(p));
    }
  }
  return out;
}

void AnnotationStore::ResolveLocked(const AdjudicationEntry& entry) {
  size_t t = TaskIndex(entry.sample_id);
  Slot& slot = slots_[t];
  auto di = static_cast<size_t>(entry.dimension);
  if (!Complete(slot) ||
      AggregateVotes(Votes(slot, entry.dimension)) != Outcome::kNeedsAdjudication ||
      slot.adjudicated[di]) {
    throw NotPendingError("sample \"" + entry.sample_id + "\" has no pending " +
                          std::string(DimensionName(entry.dimension)) +
                          " adjudication");
  }
  if (entry.value != 0 && entry.value != 1) {
    throw ContractError("adjudicated value must be 0 or 1");
  }
  if (entry.resolver_id.empty()) throw ContractError("resolver id is empty");
  slot.adjudicated[di] = entry.value;
  audit_.push_back(entry);
}

void AnnotationStore::Resolve(const std::string& sample_id, Dimension dimension,
                              int value, const std::string& resolver_id,
                              int64_t timestamp) {
  AdjudicationEntry e{sample_id, dimension, value, resolver_id,
                      timestamp ? timestamp : NowSeconds()};
  std::unique_lock lock(mu_);
  ResolveLocked(e);
  json j = {{"event", "adjudication"},
            {"sample_id", e.sample_id},
            {"dimension", DimensionName(e.dimension)},
            {"value", e.value},
            {"resolver_id", e.resolver_id},
            {"timestamp", e.timestamp}};
  AppendLog(j.dump());
}

std::optional<GoldSample> AnnotationStore::GoldLocked(size_t t) const {
  const Slot& slot = slots_[t];
  if (!Complete(slot)) return std::nullopt;
  GoldSample g;
  g.sample_id = tasks_[t].sample_id;
  g.text = tasks_[t].text;
  bool adjudicated = false;
  bool unanimous = true;
  for (Dimension d : kAllDimensions) {
    auto di = static_cast<size_t>(d);
    int c = Votes(slot, d);
    if (c != 0 && c != kRaters) unanimous = false;
    switch (AggregateVotes(c)) {
      case Outcome::kYes: g.labels[di] = 1; break;
      case Outcome::kNo: g.labels[di] = 0; break;
      case Outcome::kNeedsAdjudication:
        if (!slot.adjudicated[di]) return std::nullopt;
        g.labels[di] = *slot.adjudicated[di];
        adjudicated = true;
        break;
    }
  }
  g.DeriveNature();
  g.resolution = adjudicated ? Resolution::kAdjudicated
                 : unanimous ? Resolution::kUnanimous
                             : Resolution::kMajority;
  return g;
}

std::optional<GoldSample> AnnotationStore::Gold(const std::string& sample_id) const {
  std::shared_lock lock(mu_);
  return GoldLocked(TaskIndex(sample_id));
}

std::vector<GoldSample> AnnotationStore::ExportGold() const {
  std::shared_lock lock(mu_);
  std::vector<GoldSample> out;
  std::vector<std::string> blockers;
  size_t incomplete = 0;
  for (size_t t = 0; t < tasks_.size(); ++t) {
    auto g = GoldLocked(t);
    if (g) {
      out.push_back(std::move(*g));
    } else {
      if (!Complete(slots_[t])) ++incomplete;
      blockers.push_back(tasks_[t].sample_id);
    }
  }
  if (!blockers.empty()) {
    std::string msg = "cannot export gold: " + std::to_string(blockers.size()) +
                      " unresolved sample(s) (" +
                      std::to_string(blockers.size() - incomplete) +
                      " pending adjudication, " + std::to_string(incomplete) +
                      " incomplete):";
    for (size_t i = 0; i < blockers.size() && i < 20; ++i) msg += " " + blockers[i];
    if (blockers.size() > 20) msg += " ...";
    throw UnresolvedError(msg, std::move(blockers));
  }
  return out;
}

AgreementReport AnnotationStore::Agreement() const {
  std::shared_lock lock(mu_);
  AgreementReport report;
  std::array<std::vector<int>, 3> votes;
  for (const Slot& slot : slots_) {
    if (!Complete(slot)) continue;
    ++report.complete_samples;
    for (Dimension d : kAllDimensions) {
      votes[static_cast<size_t>(d)].push_back(Votes(slot, d));
    }
  }
  if (report.complete_samples < 2) return report;
  for (Dimension d : kAllDimensions) {
    const auto& v = votes[static_cast<size_t>(d)];
    report.dimensions[d] = {FleissKappa(v), AgreementBreakdownOf(v)};
  }
  return report;
}

std::map<std::string, size_t> AnnotationStore::Progress() const {
  std::shared_lock lock(mu_);
  std::map<std::string, size_t> out;
  for (size_t a = 0; a < annotators_.size(); ++a) {
    size_t n = 0;
    for (const Slot& slot : slots_) n += slot.records[a] ? 1 : 0;
    out[annotators_[a]] = n;
  }
  return out;
}

size_t AnnotationStore::CompleteSamples() const {
  std::shared_lock lock(mu_);
  size_t n = 0;
  for (const Slot& slot : slots_) n += Complete(slot) ? 1 : 0;
  return n;
}

std::vector<AdjudicationEntry> AnnotationStore::audit() const {
  std::shared_lock lock(mu_);
  return audit_;
}

}  // namespace natdisc
