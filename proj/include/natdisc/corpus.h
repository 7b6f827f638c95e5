#ifndef NATDISC_CORPUS_H_
#define NATDISC_CORPUS_H_

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "natdisc/common.h"

namespace natdisc {

struct Document {
  std::string doc_id;
  SourceKind source_kind = SourceKind::kAnnualReport;
  std::string text;
  // company_id, country, industry_code, year, quarter; all optional.
  std::map<std::string, std::string> meta;
};

struct Sentence {
  std::string sent_id;  // "<doc_id>#<ordinal>"
  std::string doc_id;
  int ordinal = 0;
  std::string text;
  int token_count = 0;
};

// Token-count summary over a set of sentences. Quantiles are nearest-rank.
struct SentenceStats {
  size_t count = 0;
  double mean = 0;
  double std = 0;  // sample standard deviation (n - 1); 0 for a single value
  int min = 0;
  int p25 = 0;
  int p50 = 0;
  int p75 = 0;
  int max = 0;
};

enum class IngestFormat { kJsonl, kPlainTextDir };

struct IngestOptions {
  // Source kind for plain-text files not under an AR/SR/EC subdirectory.
  SourceKind default_source_kind = SourceKind::kAnnualReport;
};

// Documents plus their sentences. Built by a single writer, then read-only.
class CorpusStore {
 public:
  // Throws InputError on a duplicate doc_id or empty text.
  void AddDocument(Document doc);

  // Adds a pre-segmented sentence. Its document need not be present; the
  // source kind is taken from the document when it is, otherwise from
  // |source|.
  void AddSentence(Sentence sentence,
                   std::optional<SourceKind> source = std::nullopt);

  // Segments every document that has no sentences yet, document-parallel.
  void SegmentAll(unsigned threads = 1);

  const std::vector<Document>& documents() const { return documents_; }
  const std::vector<Sentence>& sentences() const { return sentences_; }
  std::optional<SourceKind> sentence_source(size_t index) const {
    return sentence_sources_[index];
  }
  const Document* FindDocument(std::string_view doc_id) const;

 private:
  std::vector<Document> documents_;
  std::unordered_map<std::string, size_t> doc_index_;
  std::vector<Sentence> sentences_;
  std::vector<std::optional<SourceKind>> sentence_sources_;
  std::unordered_set<std::string> has_sentences_;
};

// Loads documents from jsonl files ({doc_id, source_kind, text, meta?}) or
// from directories of .txt files (doc_id = file stem). Ingestion order is
// preserved. Throws InputError on unreadable input, malformed records and
// duplicate ids.
CorpusStore IngestDocuments(const std::vector<std::filesystem::path>& paths,
                            IngestFormat format,
                            const IngestOptions& options = {});

// Loads pre-segmented sentences ({sent_id, doc_id, ordinal, text,
// source_kind?}) into |store|.
void IngestSentencesJsonl(const std::filesystem::path& path,
                          CorpusStore& store);

// Abbreviations (lowercase, with their periods) that never end a sentence.
const std::vector<std::string>& AbbreviationList();

// Rule-based splitter: a whitespace token ending in '.', '!' or '?'
// (optionally followed by closing quotes/brackets) ends a sentence when it
// is the last token or the next token starts with an uppercase letter
// (after any opening quotes/brackets), unless the token is a listed
// abbreviation. Sentence text is its tokens joined by single spaces.
std::vector<Sentence> SegmentSentences(const Document& document);

// Throws ContractError when no sentence is in scope.
SentenceStats CorpusStats(const CorpusStore& store,
                          std::optional<SourceKind> filter = std::nullopt);
SentenceStats ComputeSentenceStats(std::vector<int> token_counts);

void WriteSentencesJsonl(const CorpusStore& store,
                         const std::filesystem::path& path);

}  // namespace natdisc

#endif  // NATDISC_CORPUS_H_
