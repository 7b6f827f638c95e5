#include "natdisc/prelabel.h"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <fstream>
#include <thread>

#include "json.hpp"
#include "natdisc/guidelines.h"
#include "natdisc/keywords.h"
#include "natdisc/parallel.h"
#include "natdisc/sampling.h"
#include "natdisc/text_util.h"

namespace natdisc {

namespace {

using json = nlohmann::json;

constexpr std::string_view kPromptHead =
    "In the following you will be provided with a guideline enclosed in <> "
    "and a text enclosed in ||.\n"
    "Your task is to label the text with the guideline. Read the text and "
    "assign a \"Yes\" if the text adheres to the guideline, \"No\" "
    "otherwise.\n"
    "\n"
    "Please stricly follow the following answer format: answer with \"Yes\" "
    "or \"No\" and then provide a number between 0-100 of how sure you are "
    "(100 signaling very sure).\n"
    "\n"
    "Provided guideline: <";
constexpr std::string_view kPromptMiddle = ">\n\nProvided text: |";
constexpr std::string_view kPromptTail = "|";

bool IsAlpha(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z');
}

// The text between the last "Provided text: |" and the final '|'.
std::string_view PromptText(std::string_view prompt) {
  constexpr std::string_view kMarker = "Provided text: |";
  size_t start = prompt.rfind(kMarker);
  if (start == std::string_view::npos) return prompt;
  start += kMarker.size();
  size_t end = prompt.rfind('|');
  if (end == std::string_view::npos || end < start) return prompt.substr(start);
  return prompt.substr(start, end - start);
}

}  // namespace

PreLabelScore MakeScore(std::string sent_id, Dimension dimension,
                        ParsedResponse parsed) {
  PreLabelScore s;
  s.sent_id = std::move(sent_id);
  s.dimension = dimension;
  s.verdict = parsed.verdict;
  s.confidence = parsed.confidence;
  s.effective_score = parsed.verdict == Verdict::kYes ? parsed.confidence : 0;
  return s;
}

ScoreBand BandOf(int effective_score) {
  if (effective_score <= 0) return ScoreBand::kZero;
  if (effective_score < kHighBandThreshold) return ScoreBand::kLowMid;
  return ScoreBand::kHigh;
}

std::string_view BandName(ScoreBand band) {
  switch (band) {
    case ScoreBand::kZero:
      return "zero";
    case ScoreBand::kLowMid:
      return "low_mid";
    case ScoreBand::kHigh:
      return "high";
  }
  return "??";
}

std::string RenderPrompt(std::string_view guideline, std::string_view text) {
  if (guideline.empty()) throw ContractError("render_prompt: empty guideline");
  if (text.empty()) throw ContractError("render_prompt: empty text");
  std::string out;
  out.reserve(kPromptHead.size() + guideline.size() + kPromptMiddle.size() +
              text.size() + kPromptTail.size());
  out.append(kPromptHead);
  out.append(guideline);
  out.append(kPromptMiddle);
  out.append(text);
  out.append(kPromptTail);
  return out;
}

std::string PromptGuideline(Dimension dimension) {
  return BuiltinGuideline(dimension).positive;
}

ParsedResponse ParseResponse(std::string_view raw) {
  size_t i = 0;
  std::optional<Verdict> verdict;
  while (i < raw.size() && !verdict) {
    if (!IsAlpha(raw[i])) {
      ++i;
      continue;
    }
    size_t start = i;
    while (i < raw.size() && IsAlpha(raw[i])) ++i;
    std::string word = AsciiLowerCopy(raw.substr(start, i - start));
    if (word == "yes") verdict = Verdict::kYes;
    if (word == "no") verdict = Verdict::kNo;
  }
  if (!verdict) {
    throw ParseError("no Yes/No verdict in response", std::string(raw));
  }
  while (i < raw.size() && !(raw[i] >= '0' && raw[i] <= '9')) ++i;
  if (i == raw.size()) {
    throw ParseError("no confidence number in response", std::string(raw));
  }
  size_t start = i;
  while (i < raw.size() && raw[i] >= '0' && raw[i] <= '9') ++i;
  std::string_view digits = raw.substr(start, i - start);
  while (digits.size() > 1 && digits.front() == '0') digits.remove_prefix(1);
  int value = digits.size() > 3 ? 1000 : std::stoi(std::string(digits));
  if (value > 100) {
    throw ParseError("confidence out of range 0-100", std::string(raw));
  }
  return {*verdict, value};
}

std::string KeywordMockBackend::Complete(const std::string& prompt) {
  {
    std::lock_guard<std::mutex> lock(mu_);
    ++calls_;
  }
  std::vector<uint32_t> matched;
  KeywordSet::Builtin(dimension_).matcher().MatchedPatterns(PromptText(prompt),
                                                            matched);
  if (matched.empty()) return "No, 95";
  if (matched.size() == 1) return "Yes, 60";
  int score = std::min<int>(100, 80 + 5 * static_cast<int>(matched.size() - 2));
  return "Yes, " + std::to_string(score);
}

size_t KeywordMockBackend::calls() const {
  std::lock_guard<std::mutex> lock(mu_);
  return calls_;
}

std::string ScriptedBackend::Complete(const std::string& prompt) {
  auto it = answers_.find(Sha256Hex(prompt));
  if (it != answers_.end()) return it->second;
  if (fallback_) return *fallback_;
  throw BackendError("scripted backend: no answer for prompt");
}

ScoreStore::ScoreStore(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(*path_)) return;
  std::vector<std::string> lines = ReadLines(*path_);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    PreLabelScore s;
    std::string hash;
    try {
      s = ScoreFromJson(lines[i]);
      json j = json::parse(lines[i]);
      hash = j.value("text_hash", "");
    } catch (const std::exception& e) {
      throw InputError(path_->string() + ": bad score record at line " +
                       std::to_string(i + 1) + ": " + e.what());
    }
    by_sent_[Key(s.dimension, s.sent_id)] = s;
    if (!hash.empty()) {
      by_text_[Key(s.dimension, hash)] = {s.verdict, s.confidence};
    }
    ++records_;
  }
}

std::string ScoreStore::Key(Dimension dim, const std::string& id) {
  return std::string(DimensionName(dim)) + '\t' + id;
}

std::optional<PreLabelScore> ScoreStore::Find(Dimension dim,
                                              const std::string& sent_id) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = by_sent_.find(Key(dim, sent_id));
  if (it == by_sent_.end()) return std::nullopt;
  return it->second;
}

std::optional<ParsedResponse> ScoreStore::FindByText(
    Dimension dim, const std::string& text_hash) const {
  std::lock_guard<std::mutex> lock(mu_);
  auto it = by_text_.find(Key(dim, text_hash));
  if (it == by_text_.end()) return std::nullopt;
  return it->second;
}

void ScoreStore::Append(const PreLabelScore& score,
                        const std::string& text_hash) {
  std::lock_guard<std::mutex> lock(mu_);
  if (path_) {
    if (path_->has_parent_path()) {
      std::filesystem::create_directories(path_->parent_path());
    }
    std::ofstream out(*path_, std::ios::app | std::ios::binary);
    if (!out) throw InputError("cannot append to " + path_->string());
    out << ScoreToJson(score, text_hash) << '\n';
    out.flush();
  }
  by_sent_[Key(score.dimension, score.sent_id)] = score;
  if (!text_hash.empty()) {
    by_text_[Key(score.dimension, text_hash)] = {score.verdict,
                                                 score.confidence};
  }
  ++records_;
}

size_t ScoreStore::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return records_;
}

BatchResult PrelabelBatch(const std::vector<Sentence>& candidates,
                          Dimension dimension, ScorerBackend& backend,
                          size_t budget, ScoreStore& store,
                          const BatchOptions& options) {
  if (budget < 1) throw ContractError("prelabel: budget must be >= 1");
  const size_t n = std::min(budget, candidates.size());
  const std::string guideline = options.guideline.empty()
                                    ? PromptGuideline(dimension)
                                    : options.guideline;

  // Per candidate: resumed record, or the index of the query job whose
  // answer it shares (identical text is only sent once).
  std::vector<std::optional<PreLabelScore>> resumed(n);
  std::vector<std::string> hashes(n);
  std::vector<size_t> job_of(n, SIZE_MAX);
  std::vector<size_t> job_leader;  // candidate index sending the request
  std::unordered_map<std::string, size_t> job_by_hash;
  BatchResult result;
  for (size_t i = 0; i < n; ++i) {
    hashes[i] = Sha256Hex(candidates[i].text);
    if ((resumed[i] = store.Find(dimension, candidates[i].sent_id))) {
      ++result.reused;
      continue;
    }
    auto [it, inserted] = job_by_hash.emplace(hashes[i], job_leader.size());
    if (inserted) job_leader.push_back(i);
    job_of[i] = it->second;
  }

  struct JobOutcome {
    std::optional<ParsedResponse> parsed;
    bool from_cache = false;
    std::string error;
    int attempts = 0;
  };
  std::vector<JobOutcome> outcomes(job_leader.size());
  std::vector<char> done(job_leader.size(), 0);
  std::atomic<size_t> calls{0};
  std::mutex commit_mu;
  size_t next_commit = 0;  // first candidate not yet committed

  // Commits candidates in order up to the first one whose job is pending.
  auto commit_ready = [&] {
    while (next_commit < n) {
      size_t i = next_commit;
      if (!resumed[i]) {
        size_t j = job_of[i];
        if (!done[j]) return;
        if (outcomes[j].parsed) {
          store.Append(MakeScore(candidates[i].sent_id, dimension,
                                 *outcomes[j].parsed),
                       hashes[i]);
        }
      }
      ++next_commit;
    }
  };

  ParallelFor(job_leader.size(), std::max(1u, options.parallelism),
              [&](size_t j) {
                const Sentence& s = candidates[job_leader[j]];
                JobOutcome outcome;
                if (auto cached = store.FindByText(dimension, hashes[job_leader[j]])) {
                  outcome.parsed = *cached;
                  outcome.from_cache = true;
                } else {
                  const std::string prompt = RenderPrompt(guideline, s.text);
                  auto delay = options.backoff_base;
                  for (int attempt = 1; attempt <= options.max_attempts; ++attempt) {
                    outcome.attempts = attempt;
                    try {
                      calls.fetch_add(1);
                      outcome.parsed = ParseResponse(backend.Complete(prompt));
                      outcome.error.clear();
                      break;
                    } catch (const ParseError& e) {
                      outcome.error = std::string(e.what()) + ": " + e.raw();
                      break;
                    } catch (const std::exception& e) {
                      outcome.error = e.what();
                      if (attempt < options.max_attempts && delay.count() > 0) {
                        std::this_thread::sleep_for(delay);
                        delay *= 2;
                      }
                    }
                  }
                }
                std::lock_guard<std::mutex> lock(commit_mu);
                outcomes[j] = std::move(outcome);
                done[j] = 1;
                commit_ready();
              });
  {
    std::lock_guard<std::mutex> lock(commit_mu);
    commit_ready();
  }

  for (size_t i = 0; i < n; ++i) {
    if (resumed[i]) {
      result.scores.push_back(*resumed[i]);
      continue;
    }
    const JobOutcome& o = outcomes[job_of[i]];
    if (o.parsed) {
      if (o.from_cache || job_leader[job_of[i]] != i) ++result.reused;
      result.scores.push_back(MakeScore(candidates[i].sent_id, dimension, *o.parsed));
    } else {
      result.failures.push_back({candidates[i].sent_id, o.error, o.attempts});
    }
  }
  result.backend_calls = calls.load();
  return result;
}

std::vector<std::string> BandBalancedSample(
    const std::vector<PreLabelScore>& scores, size_t n_total, uint64_t seed) {
  if (n_total < 3) throw ContractError("band sample: n_total must be >= 3");
  if (scores.size() < n_total) {
    throw ContractError("band sample: only " + std::to_string(scores.size()) +
                        " scored sentences for n_total=" +
                        std::to_string(n_total));
  }
  std::vector<std::vector<size_t>> bands(3);
  for (size_t i = 0; i < scores.size(); ++i) {
    bands[static_cast<size_t>(BandOf(scores[i].effective_score))].push_back(i);
  }
  std::vector<size_t> available = {bands[0].size(), bands[1].size(),
                                   bands[2].size()};
  std::vector<size_t> quota = AllocateQuotas(available, n_total);
  Rng rng(seed);
  std::vector<std::string> out;
  for (size_t b = 0; b < 3; ++b) {
    for (size_t k : SampleIndices(bands[b].size(), quota[b], rng)) {
      out.push_back(scores[bands[b][k]].sent_id);
    }
  }
  return out;
}

std::string ScoreToJson(const PreLabelScore& score,
                        const std::string& text_hash) {
  json j = {{"sent_id", score.sent_id},
            {"dimension", std::string(DimensionName(score.dimension))},
            {"verdict", score.verdict == Verdict::kYes ? "Yes" : "No"},
            {"confidence", score.confidence},
            {"effective_score", score.effective_score}};
  if (!text_hash.empty()) j["text_hash"] = text_hash;
  return j.dump();
}

PreLabelScore ScoreFromJson(const std::string& line) {
  json j = json::parse(line);
  auto dim = ParseDimension(j.at("dimension").get<std::string>());
  if (!dim) throw InputError("unknown dimension in score record");
  const std::string verdict = j.at("verdict").get<std::string>();
  if (verdict != "Yes" && verdict != "No") {
    throw InputError("verdict must be Yes or No");
  }
  int confidence = j.at("confidence").get<int>();
  if (confidence < 0 || confidence > 100) {
    throw InputError("confidence out of range");
  }
  return MakeScore(j.at("sent_id").get<std::string>(), *dim,
                   {verdict == "Yes" ? Verdict::kYes : Verdict::kNo,
                    confidence});
}

std::vector<PreLabelScore> LoadScores(const std::filesystem::path& path) {
  std::vector<PreLabelScore> out;
  std::vector<std::string> lines = ReadLines(path);
  for (size_t i = 0; i < lines.size(); ++i) {
    if (Trim(lines[i]).empty()) continue;
    try {
      out.push_back(ScoreFromJson(lines[i]));
    } catch (const std::exception& e) {
      throw InputError(path.string() + ": bad score record at line " +
                       std::to_string(i + 1) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace natdisc
