#ifndef NATDISC_PRELABEL_H_
#define NATDISC_PRELABEL_H_

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "natdisc/common.h"
#include "natdisc/corpus.h"

namespace natdisc {

enum class Verdict { kNo, kYes };

// The model's answer could not be read as "Yes|No <0-100>".
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::string raw)
      : Error(message), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Transport-level failure talking to a scoring backend. Retried.
class BackendError : public Error {
 public:
  using Error::Error;
};

struct ParsedResponse {
  Verdict verdict = Verdict::kNo;
  int confidence = 0;
};

struct PreLabelScore {
  std::string sent_id;
  Dimension dimension = Dimension::kWater;
  Verdict verdict = Verdict::kNo;
  int confidence = 0;
  // confidence when the verdict is Yes, otherwise 0.
  int effective_score = 0;
};

PreLabelScore MakeScore(std::string sent_id, Dimension dimension,
                        ParsedResponse parsed);

enum class ScoreBand { kZero, kLowMid, kHigh };

inline constexpr int kHighBandThreshold = 75;

// 0 -> Zero, 1..74 -> LowMid, 75..100 -> High.
ScoreBand BandOf(int effective_score);
std::string_view BandName(ScoreBand band);

// The pre-label prompt with |guideline| and |text| substituted verbatim
// (no escaping: a '|' or '>' inside the inputs ends up in the prompt as-is).
// Throws ContractError on empty inputs.
std::string RenderPrompt(std::string_view guideline, std::string_view text);

// Guideline string used in prompts for |dimension|.
std::string PromptGuideline(Dimension dimension);

// First case-insensitive "yes"/"no" word, then the first integer after it.
// Throws ParseError when either is missing or the integer exceeds 100.
ParsedResponse ParseResponse(std::string_view raw);

// Request = rendered prompt, response = raw model text. Implementations must
// be safe to call from several threads at once.
class ScorerBackend {
 public:
  virtual ~ScorerBackend() = default;
  virtual std::string Complete(const std::string& prompt) = 0;
};

// Offline stand-in: answers from keyword presence in the prompt's text.
// No keyword -> "No, 95"; one distinct keyword -> "Yes, 60"; two or more ->
// "Yes, <80 + 5 per extra keyword, capped at 100>".
class KeywordMockBackend : public ScorerBackend {
 public:
  explicit KeywordMockBackend(Dimension dimension) : dimension_(dimension) {}
  std::string Complete(const std::string& prompt) override;
  size_t calls() const;

 private:
  Dimension dimension_;
  mutable std::mutex mu_;
  size_t calls_ = 0;
};

// Replays fixed answers keyed by SHA-256 of the prompt.
class ScriptedBackend : public ScorerBackend {
 public:
  explicit ScriptedBackend(std::map<std::string, std::string> by_prompt_hash,
                           std::optional<std::string> fallback = std::nullopt)
      : answers_(std::move(by_prompt_hash)), fallback_(std::move(fallback)) {}
  std::string Complete(const std::string& prompt) override;

 private:
  std::map<std::string, std::string> answers_;
  std::optional<std::string> fallback_;
};

struct HttpBackendConfig {
  std::string endpoint;  // e.g. http://localhost:8080/v1/chat/completions
  std::string model;
  std::string token_env = "NATDISC_API_TOKEN";
  std::chrono::seconds timeout{60};
};

// POSTs an OpenAI-style chat-completion request
// {"model", "messages":[{"role":"user","content":prompt}], "temperature":0}
// and reads choices[0].message.content (or a top-level "response" string).
// The bearer token is read from the environment variable named in the
// config; it is never written to disk.
class HttpJsonBackend : public ScorerBackend {
 public:
  explicit HttpJsonBackend(HttpBackendConfig config);
  std::string Complete(const std::string& prompt) override;

 private:
  HttpBackendConfig config_;
  std::string scheme_host_port_;
  std::string path_;
};

// Append-only jsonl store of scores, also used as the response cache.
// Entries are keyed by (dimension, sent_id) for resume and by
// (dimension, sha256(text)) for cache hits on repeated sentences.
class ScoreStore {
 public:
  // In-memory store (nothing persisted).
  ScoreStore() = default;
  // Loads existing records from |path| if it exists; new records are
  // appended to it.
  explicit ScoreStore(std::filesystem::path path);

  std::optional<PreLabelScore> Find(Dimension dim,
                                    const std::string& sent_id) const;
  std::optional<ParsedResponse> FindByText(Dimension dim,
                                           const std::string& text_hash) const;
  void Append(const PreLabelScore& score, const std::string& text_hash);
  size_t size() const;

 private:
  static std::string Key(Dimension dim, const std::string& id);

  std::optional<std::filesystem::path> path_;
  mutable std::mutex mu_;
  std::unordered_map<std::string, PreLabelScore> by_sent_;
  std::unordered_map<std::string, ParsedResponse> by_text_;
  size_t records_ = 0;
};

struct BatchOptions {
  unsigned parallelism = 4;
  int max_attempts = 3;
  std::chrono::milliseconds backoff_base{200};  // doubles per retry
  // Defaults to PromptGuideline(dimension) when empty.
  std::string guideline;
};

struct BatchFailure {
  std::string sent_id;
  std::string error;
  int attempts = 0;
};

struct BatchResult {
  std::vector<PreLabelScore> scores;  // candidate order
  std::vector<BatchFailure> failures;
  size_t backend_calls = 0;  // requests sent, including retries
  size_t reused = 0;         // served from the store without a request
};

// Scores at most |budget| candidates (the first ones). Candidates already in
// |store| are never re-queried. Per-sentence failures land in the manifest;
// new scores are appended to |store| in candidate order as they complete.
BatchResult PrelabelBatch(const std::vector<Sentence>& candidates,
                          Dimension dimension, ScorerBackend& backend,
                          size_t budget, ScoreStore& store,
                          const BatchOptions& options = {});

// n_total / 3 per band (remainder to Zero, then LowMid), shortfall moved to
// the other bands; uniform without replacement. Output grouped Zero, LowMid,
// High, each in draw order. Throws ContractError if n_total < 3 or fewer
// scores than n_total.
std::vector<std::string> BandBalancedSample(
    const std::vector<PreLabelScore>& scores, size_t n_total, uint64_t seed);

std::string ScoreToJson(const PreLabelScore& score,
                        const std::string& text_hash = "");
PreLabelScore ScoreFromJson(const std::string& line);

// Loads a score jsonl file (as written by ScoreStore).
std::vector<PreLabelScore> LoadScores(const std::filesystem::path& path);

}  // namespace natdisc

#endif  // NATDISC_PRELABEL_H_
