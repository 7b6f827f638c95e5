#ifndef NATDISC_ANNOTATION_H_
#define NATDISC_ANNOTATION_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <shared_mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "natdisc/common.h"
#include "natdisc/gold.h"

namespace natdisc {

inline constexpr int kRaters = 4;

struct AnnotationRecord {
  std::string sample_id;
  std::string annotator_id;
  std::array<int, 3> labels{};  // indexed by Dimension, each 0 or 1
  int64_t timestamp = 0;        // unix seconds

  int label(Dimension d) const { return labels[static_cast<size_t>(d)]; }
};

enum class Outcome { kNo, kYes, kNeedsAdjudication };

// Majority of kRaters binary votes given the number of 1-votes:
// 3-4 -> Yes, 0-1 -> No, 2 -> NeedsAdjudication.
Outcome AggregateVotes(int positive_votes);

// Fleiss' kappa for binary items. Undefined when every rating on every item
// fell into one category (expected agreement is 1).
struct KappaResult {
  enum class Status { kDefined, kUndefined };
  Status status = Status::kUndefined;
  double value = 0;  // meaningful only when defined

  bool defined() const { return status == Status::kDefined; }
};

// |positive_votes[i]| is how many of |raters| put item i in category 1.
// Throws ContractError for fewer than 2 items, raters < 2 or counts outside
// [0, raters].
KappaResult FleissKappa(const std::vector<int>& positive_votes,
                        int raters = kRaters);

// Share of items whose larger side has 2, 3 or 4 of the kRaters votes.
struct AgreementBreakdown {
  double agree_2of4 = 0;
  double agree_3of4 = 0;
  double agree_4of4 = 0;
  size_t items = 0;
};

AgreementBreakdown AgreementBreakdownOf(const std::vector<int>& positive_votes);

struct DimensionAgreement {
  KappaResult kappa;
  AgreementBreakdown breakdown;
};

struct AgreementReport {
  size_t complete_samples = 0;  // samples with all kRaters records
  // Empty when fewer than 2 samples are complete.
  std::map<Dimension, DimensionAgreement> dimensions;
};

std::string AgreementJson(const AgreementReport& report);

struct AnnotationTask {
  std::string sample_id;
  std::string text;
};

// Tasks from jsonl ({sample_id|sent_id, text}) or csv (sample_id,text).
std::vector<AnnotationTask> LoadTasks(const std::filesystem::path& path);

struct PendingAdjudication {
  std::string sample_id;
  std::string text;
  Dimension dimension = Dimension::kWater;
  std::map<std::string, int> votes;  // annotator -> label
};

struct AdjudicationEntry {
  std::string sample_id;
  Dimension dimension = Dimension::kWater;
  int value = 0;
  std::string resolver_id;
  int64_t timestamp = 0;
};

class NotPendingError : public ContractError {
 public:
  using ContractError::ContractError;
};

class UnknownIdError : public InputError {
 public:
  using InputError::InputError;
};

// Raised by ExportGold; blockers() lists the samples holding it up.
class UnresolvedError : public ContractError {
 public:
  UnresolvedError(const std::string& message, std::vector<std::string> blockers)
      : ContractError(message), blockers_(std::move(blockers)) {}
  const std::vector<std::string>& blockers() const { return blockers_; }

 private:
  std::vector<std::string> blockers_;
};

// Labels from a fixed set of kRaters annotators over a fixed task set. Reads
// run concurrently; writes are serialized. With a log path every accepted
// submission and resolution is appended as a jsonl event, and the log is
// replayed on construction.
class AnnotationStore {
 public:
  AnnotationStore(std::vector<AnnotationTask> tasks,
                  std::vector<std::string> annotators,
                  std::optional<std::filesystem::path> log = std::nullopt);

  // Latest submission per (sample, annotator) wins. Throws UnknownIdError
  // for unknown ids, ContractError for non-binary labels.
  void Submit(const AnnotationRecord& record);

  // First task, in task order, the annotator has not labeled yet.
  std::optional<AnnotationTask> NextTask(const std::string& annotator_id) const;
  std::optional<AnnotationRecord> Find(const std::string& sample_id,
                                       const std::string& annotator_id) const;

  // Per-dimension outcome from the votes alone. Throws ContractError while
  // any annotator is missing.
  std::array<Outcome, 3> Aggregate(const std::string& sample_id) const;

  std::vector<PendingAdjudication> Pending() const;

  // Throws NotPendingError unless (sample, dimension) is an unresolved 2-2
  // split.
  void Resolve(const std::string& sample_id, Dimension dimension, int value,
               const std::string& resolver_id, int64_t timestamp = 0);

  // The final labels once the sample is complete and has no open split.
  std::optional<GoldSample> Gold(const std::string& sample_id) const;

  // All tasks, in task order. Throws UnresolvedError if any sample is
  // incomplete or has an open split.
  std::vector<GoldSample> ExportGold() const;

  AgreementReport Agreement() const;
  std::map<std::string, size_t> Progress() const;  // annotator -> records
  size_t CompleteSamples() const;

  const std::vector<AnnotationTask>& tasks() const { return tasks_; }
  const std::vector<std::string>& annotators() const { return annotators_; }
  std::vector<AdjudicationEntry> audit() const;

 private:
  struct Slot {
    std::array<std::optional<AnnotationRecord>, kRaters> records;
    std::array<std::optional<int>, 3> adjudicated;
  };

  size_t TaskIndex(const std::string& sample_id) const;
  size_t AnnotatorIndex(const std::string& annotator_id) const;
  bool Complete(const Slot& slot) const;
  int Votes(const Slot& slot, Dimension dim) const;
  std::optional<GoldSample> GoldLocked(size_t task) const;
  void SubmitLocked(const AnnotationRecord& record);
  void ResolveLocked(const AdjudicationEntry& entry);
  void AppendLog(const std::string& line);

  std::vector<AnnotationTask> tasks_;
  std::vector<std::string> annotators_;
  std::unordered_map<std::string, size_t> task_index_;
  std::optional<std::filesystem::path> log_;
  mutable std::shared_mutex mu_;
  std::vector<Slot> slots_;
  std::vector<AdjudicationEntry> audit_;
};

std::string RecordToJson(const AnnotationRecord& record);
AnnotationRecord RecordFromJson(const std::string& body);

}  // namespace natdisc

#endif  // NATDISC_ANNOTATION_H_
