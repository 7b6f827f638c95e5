#include "natdisc/corpus.h"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "json.hpp"

#include "natdisc/parallel.h"
#include "natdisc/text_util.h"

namespace natdisc {

namespace {

using json = nlohmann::json;

// Closing punctuation allowed after a terminator, ASCII and UTF-8 curly.
constexpr std::string_view kClosersAscii = "\"')]";
constexpr std::string_view kRightDoubleQuote = "\xE2\x80\x9D";
constexpr std::string_view kRightSingleQuote = "\xE2\x80\x99";
constexpr std::string_view kLeftDoubleQuote = "\xE2\x80\x9C";
constexpr std::string_view kLeftSingleQuote = "\xE2\x80\x98";

std::string_view StripClosers(std::string_view tok) {
  for (;;) {
    if (!tok.empty() && kClosersAscii.find(tok.back()) != std::string_view::npos) {
      tok.remove_suffix(1);
    } else if (tok.ends_with(kRightDoubleQuote) ||
               tok.ends_with(kRightSingleQuote)) {
      tok.remove_suffix(3);
    } else {
      return tok;
    }
  }
}

std::string_view StripOpeners(std::string_view tok) {
  for (;;) {
    if (!tok.empty() && (tok.front() == '"' || tok.front() == '\'' ||
                         tok.front() == '(' || tok.front() == '[')) {
      tok.remove_prefix(1);
    } else if (tok.starts_with(kLeftDoubleQuote) ||
               tok.starts_with(kLeftSingleQuote)) {
      tok.remove_prefix(3);
    } else {
      return tok;
    }
  }
}

bool EndsWithTerminator(std::string_view tok) {
  tok = StripClosers(tok);
  return !tok.empty() &&
         (tok.back() == '.' || tok.back() == '!' || tok.back() == '?');
}

bool StartsUpper(std::string_view tok) {
  tok = StripOpeners(tok);
  return !tok.empty() && tok.front() >= 'A' && tok.front() <= 'Z';
}

bool IsAbbreviation(std::string_view tok) {
  std::string key = AsciiLowerCopy(StripClosers(StripOpeners(tok)));
  const auto& list = AbbreviationList();
  return std::find(list.begin(), list.end(), key) != list.end();
}

const json& Require(const json& record, const char* field, size_t line,
                    const std::string& where) {
  auto it = record.find(field);
  if (it == record.end() || !it->is_string()) {
    throw InputError(where + ": malformed record at line " +
                     std::to_string(line) + " (missing string field \"" +
                     field + "\")");
  }
  return *it;
}

void IngestJsonl(const std::filesystem::path& path, CorpusStore& store) {
  std::vector<std::string> lines = ReadLines(path);
  const std::string where = path.string();
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t line_no = i + 1;
    if (Trim(lines[i]).empty()) continue;
    json record;
    try {
      record = json::parse(lines[i]);
    } catch (const json::parse_error&) {
      throw InputError(where + ": malformed record at line " +
                       std::to_string(line_no) + " (invalid JSON)");
    }
    if (!record.is_object()) {
      throw InputError(where + ": malformed record at line " +
                       std::to_string(line_no) + " (not an object)");
    }
    Document doc;
    doc.doc_id = Require(record, "doc_id", line_no, where).get<std::string>();
    const std::string kind =
        Require(record, "source_kind", line_no, where).get<std::string>();
    doc.text = Require(record, "text", line_no, where).get<std::string>();
    auto parsed = ParseSourceKind(kind);
    if (!parsed) {
      throw InputError(where + ": malformed record at line " +
                       std::to_string(line_no) + " (unknown source_kind \"" +
                       kind + "\")");
    }
    doc.source_kind = *parsed;
    if (auto meta = record.find("meta"); meta != record.end()) {
      if (!meta->is_object()) {
        throw InputError(where + ": malformed record at line " +
                         std::to_string(line_no) + " (meta is not an object)");
      }
      for (const auto& [key, value] : meta->items()) {
        doc.meta[key] = value.is_string() ? value.get<std::string>()
                                          : value.dump();
      }
    }
    try {
      store.AddDocument(std::move(doc));
    } catch (const InputError& e) {
      throw InputError(where + ": line " + std::to_string(line_no) + ": " +
                       e.what());
    }
  }
}

void IngestTextDir(const std::filesystem::path& dir, SourceKind kind,
                   CorpusStore& store) {
  std::vector<std::filesystem::path> files;
  std::vector<std::pair<std::filesystem::path, SourceKind>> subdirs;
  std::error_code ec;
  for (const auto& entry : std::filesystem::directory_iterator(dir, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".txt") {
      files.push_back(entry.path());
    } else if (entry.is_directory()) {
      if (auto sub = ParseSourceKind(entry.path().filename().string())) {
        subdirs.emplace_back(entry.path(), *sub);
      }
    }
  }
  if (ec) throw InputError("cannot read directory: " + dir.string());
  std::sort(files.begin(), files.end());
  std::sort(subdirs.begin(), subdirs.end());
  for (const auto& file : files) {
    Document doc;
    doc.doc_id = file.stem().string();
    doc.source_kind = kind;
    doc.text = ReadFile(file);
    store.AddDocument(std::move(doc));
  }
  for (const auto& [sub, sub_kind] : subdirs) {
    IngestTextDir(sub, sub_kind, store);
  }
}

}  // namespace

void CorpusStore::AddDocument(Document doc) {
  if (doc.doc_id.empty()) throw InputError("document with empty doc_id");
  if (Trim(doc.text).empty()) {
    throw InputError("document " + doc.doc_id + " has empty text");
  }
  if (doc_index_.count(doc.doc_id)) {
    throw InputError("duplicate doc_id \"" + doc.doc_id + "\"");
  }
  doc_index_.emplace(doc.doc_id, documents_.size());
  documents_.push_back(std::move(doc));
}

void CorpusStore::AddSentence(Sentence sentence,
                              std::optional<SourceKind> source) {
  std::string_view trimmed = Trim(sentence.text);
  if (trimmed.empty()) {
    throw InputError("sentence " + sentence.sent_id + " has empty text");
  }
  sentence.text = std::string(trimmed);
  sentence.token_count = static_cast<int>(SplitWhitespace(sentence.text).size());
  if (const Document* doc = FindDocument(sentence.doc_id)) {
    source = doc->source_kind;
  }
  has_sentences_.insert(sentence.doc_id);
  sentences_.push_back(std::move(sentence));
  sentence_sources_.push_back(source);
}

void CorpusStore::SegmentAll(unsigned threads) {
  std::vector<size_t> todo;
  for (size_t i = 0; i < documents_.size(); ++i) {
    if (!has_sentences_.count(documents_[i].doc_id)) todo.push_back(i);
  }
  std::vector<std::vector<Sentence>> parts(todo.size());
  ParallelFor(todo.size(), threads, [&](size_t i) {
    parts[i] = SegmentSentences(documents_[todo[i]]);
  });
  for (size_t i = 0; i < todo.size(); ++i) {
    const Document& doc = documents_[todo[i]];
    has_sentences_.insert(doc.doc_id);
    for (auto& s : parts[i]) {
      sentences_.push_back(std::move(s));
      sentence_sources_.push_back(doc.source_kind);
    }
  }
}

const Document* CorpusStore::FindDocument(std::string_view doc_id) const {
  auto it = doc_index_.find(std::string(doc_id));
  return it == doc_index_.end() ? nullptr : &documents_[it->second];
}

CorpusStore IngestDocuments(const std::vector<std::filesystem::path>& paths,
                            IngestFormat format,
                            const IngestOptions& options) {
  CorpusStore store;
  for (const auto& path : paths) {
    if (format == IngestFormat::kJsonl) {
      IngestJsonl(path, store);
    } else {
      if (!std::filesystem::is_directory(path)) {
        throw InputError("not a directory: " + path.string());
      }
      IngestTextDir(path, options.default_source_kind, store);
    }
  }
  return store;
}

void IngestSentencesJsonl(const std::filesystem::path& path,
                          CorpusStore& store) {
  std::vector<std::string> lines = ReadLines(path);
  const std::string where = path.string();
  std::unordered_map<std::string, int> last_ordinal;
  std::unordered_set<std::string> seen_ids;
  for (size_t i = 0; i < lines.size(); ++i) {
    const size_t line_no = i + 1;
    if (Trim(lines[i]).empty()) continue;
    json record;
    try {
      record = json::parse(lines[i]);
    } catch (const json::parse_error&) {
      throw InputError(where + ": malformed record at line " +
                       std::to_string(line_no) + " (invalid JSON)");
    }
    Sentence s;
    s.sent_id = Require(record, "sent_id", line_no, where).get<std::string>();
    s.doc_id = Require(record, "doc_id", line_no, where).get<std::string>();
    s.text = Require(record, "text", line_no, where).get<std::string>();
    auto ord = record.find("ordinal");
    if (ord == record.end() || !ord->is_number_integer() ||
        ord->get<long long>() < 0) {
      throw InputError(where + ": malformed record at line " +
                       std::to_string(line_no) +
                       " (ordinal must be a non-negative integer)");
    }
    s.ordinal = ord->get<int>();
    if (!seen_ids.insert(s.sent_id).second) {
      throw InputError(where + ": duplicate sent_id \"" + s.sent_id +
                       "\" at line " + std::to_string(line_no));
    }
    auto last = last_ordinal.find(s.doc_id);
    if (last != last_ordinal.end() && s.ordinal <= last->second) {
      throw InputError(where + ": ordinal not increasing within document \"" +
                       s.doc_id + "\" at line " + std::to_string(line_no));
    }
    last_ordinal[s.doc_id] = s.ordinal;
    std::optional<SourceKind> source;
    if (auto kind = record.find("source_kind");
        kind != record.end() && kind->is_string()) {
      source = ParseSourceKind(kind->get<std::string>());
      if (!source) {
        throw InputError(where + ": malformed record at line " +
                         std::to_string(line_no) + " (unknown source_kind)");
      }
    }
    store.AddSentence(std::move(s), source);
  }
}

const std::vector<std::string>& AbbreviationList() {
  static const std::vector<std::string> kList = {
      "mr.",   "mrs.",  "ms.",   "dr.",   "prof.", "sr.",   "jr.",
      "st.",   "inc.",  "corp.", "co.",   "ltd.",  "plc.",  "llc.",
      "bros.", "u.s.",  "u.k.",  "u.n.",  "e.u.",  "e.g.",  "i.e.",
      "vs.",   "approx.", "no.", "nos.",  "fig.",  "dept.", "est.",
      "jan.",  "feb.",  "mar.",  "apr.",  "jun.",  "jul.",  "aug.",
      "sep.",  "sept.", "oct.",  "nov.",  "dec.",  "mt.",   "ft.",
      "cf.",   "al.",   "gov.",  "gen.",  "rep.",  "sen.",  "rev.",
  };
  return kList;
}

std::vector<Sentence> SegmentSentences(const Document& document) {
  std::vector<std::string_view> tokens = SplitWhitespace(document.text);
  std::vector<Sentence> out;
  size_t start = 0;
  auto emit = [&](size_t end) {
    Sentence s;
    s.doc_id = document.doc_id;
    s.ordinal = static_cast<int>(out.size());
    s.sent_id = document.doc_id + "#" + std::to_string(s.ordinal);
    for (size_t i = start; i < end; ++i) {
      if (i > start) s.text.push_back(' ');
      s.text.append(tokens[i]);
    }
    s.token_count = static_cast<int>(end - start);
    out.push_back(std::move(s));
    start = end;
  };
  for (size_t i = 0; i < tokens.size(); ++i) {
    if (!EndsWithTerminator(tokens[i])) continue;
    const bool last = i + 1 == tokens.size();
    if (last) break;
    if (StartsUpper(tokens[i + 1]) && !IsAbbreviation(tokens[i])) emit(i + 1);
  }
  if (start < tokens.size()) emit(tokens.size());
  return out;
}

SentenceStats ComputeSentenceStats(std::vector<int> token_counts) {
  if (token_counts.empty()) {
    throw ContractError("corpus stats: no sentences in scope");
  }
  std::sort(token_counts.begin(), token_counts.end());
  const size_t n = token_counts.size();
  SentenceStats st;
  st.count = n;
  double sum = 0;
  for (int c : token_counts) sum += c;
  st.mean = sum / static_cast<double>(n);
  double ss = 0;
  for (int c : token_counts) ss += (c - st.mean) * (c - st.mean);
  st.std = n > 1 ? std::sqrt(ss / static_cast<double>(n - 1)) : 0.0;
  // Nearest rank: the ceil(p * n)-th smallest value (1-based).
  auto rank = [&](size_t num, size_t den) {
    size_t r = (num * n + den - 1) / den;
    return token_counts[std::max<size_t>(r, 1) - 1];
  };
  st.min = token_counts.front();
  st.p25 = rank(1, 4);
  st.p50 = rank(1, 2);
  st.p75 = rank(3, 4);
  st.max = token_counts.back();
  return st;
}

SentenceStats CorpusStats(const CorpusStore& store,
                          std::optional<SourceKind> filter) {
  std::vector<int> counts;
  const auto& sentences = store.sentences();
  for (size_t i = 0; i < sentences.size(); ++i) {
    if (filter && store.sentence_source(i) != filter) continue;
    counts.push_back(sentences[i].token_count);
  }
  return ComputeSentenceStats(std::move(counts));
}

void WriteSentencesJsonl(const CorpusStore& store,
                         const std::filesystem::path& path) {
  std::string out;
  const auto& sentences = store.sentences();
  for (size_t i = 0; i < sentences.size(); ++i) {
    const Sentence& s = sentences[i];
    json record = {{"sent_id", s.sent_id},
                   {"doc_id", s.doc_id},
                   {"ordinal", s.ordinal},
                   {"text", s.text}};
    if (auto kind = store.sentence_source(i)) {
      record["source_kind"] = std::string(SourceKindCode(*kind));
    }
    out += record.dump();
    out.push_back('\n');
  }
  WriteFile(path, out);
}

}  // namespace natdisc
