#ifndef NATDISC_CASESTUDY_H_
#define NATDISC_CASESTUDY_H_

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "natdisc/common.h"
#include "natdisc/gold.h"

namespace natdisc {

// One model- or gold-labeled sentence of a transcript.
struct LabeledSentence {
  std::string doc_id;
  std::string sent_id;
  std::array<int, 4> labels{};  // indexed by GoldLabel
};

// jsonl {doc_id, sent_id, water, forest, biodiversity, nature}. A missing
// nature field is derived; a nature value below the OR of the three is an
// error.
std::vector<LabeledSentence> LoadLabeledSentences(const std::filesystem::path& path);

struct TranscriptMeta {
  std::string doc_id;
  std::string company_id;
  std::string year;
  std::string country;
};

// csv with doc_id,company_id,year,country.
std::vector<TranscriptMeta> LoadTranscriptMeta(const std::filesystem::path& path);

// csv with two columns, key then value (e.g. company_id,ff49).
std::map<std::string, std::string> LoadMapping(const std::filesystem::path& path);

struct TranscriptScore {
  std::string doc_id;
  std::string company_id;
  std::string year;
  std::array<size_t, 4> positives{};  // indexed by GoldLabel
  size_t total_sentences = 0;

  double exposure(GoldLabel l) const {
    return static_cast<double>(positives[static_cast<size_t>(l)]) /
           static_cast<double>(total_sentences);
  }
};

// Throws ContractError on an empty transcript.
TranscriptScore ScoreTranscript(const std::vector<LabeledSentence>& sentences,
                                const TranscriptMeta& meta);

struct CompanyExposure {
  std::string company_id;
  std::string year;
  std::array<double, 4> mean{};  // unweighted over the year's calls
  size_t n_calls = 0;
};

// Groups by (company, year); output sorted by company then year.
std::vector<CompanyExposure> CompanyYearlyExposure(
    const std::vector<TranscriptScore>& scores);

struct IndustryExposure {
  int rank = 0;  // 1 = highest nature exposure
  std::string code;
  // Unweighted over companies; a company enters with the unweighted mean
  // of its yearly exposures.
  std::array<double, 4> mean{};
  size_t n_companies = 0;
};

struct Exclusion {
  std::string id;      // company or transcript
  std::string reason;
};

struct IndustryTable {
  std::vector<IndustryExposure> rows;  // by rank
  std::vector<Exclusion> excluded;     // sorted by id
};

// Descending nature exposure; ties go to the numerically lower FF49 code
// (then the lexically lower one). Companies absent from the map are
// excluded and listed. Throws ContractError if nothing is covered.
IndustryTable IndustryAggregate(const std::vector<CompanyExposure>& companies,
                                const std::map<std::string, std::string>& industry_map);

struct CountryMentionRate {
  std::string country;
  size_t calls = 0;
  size_t calls_with_mention = 0;  // >= 1 nature-positive sentence
  double rate = 0;
};

struct CountryTable {
  std::vector<CountryMentionRate> rows;  // sorted by country
  std::vector<Exclusion> excluded;
};

// |transcript_country| maps doc_id -> country; transcripts without one are
// excluded. Throws ContractError if nothing is covered.
CountryTable CountryMentionRates(
    const std::vector<TranscriptScore>& scores,
    const std::map<std::string, std::string>& transcript_country);

struct CaseStudyInput {
  std::vector<LabeledSentence> sentences;
  std::vector<TranscriptMeta> meta;
  std::map<std::string, std::string> industry_map;  // company -> FF49 code
  // company -> country; when empty the metadata country is used. Companies
  // missing from a non-empty map are excluded from the country table.
  std::map<std::string, std::string> country_map;
};

struct CaseStudyResult {
  std::vector<TranscriptScore> transcripts;  // sorted by doc_id
  std::vector<CompanyExposure> companies;
  IndustryTable industries;
  CountryTable countries;
  // Transcripts with labels but no metadata, or metadata but no sentences.
  std::vector<Exclusion> excluded_transcripts;
};

CaseStudyResult RunCaseStudy(const CaseStudyInput& input);

// CSV renderings; all are byte-identical under input permutation.
std::string TranscriptCsv(const std::vector<TranscriptScore>& t);
std::string CompanyCsv(const std::vector<CompanyExposure>& c);
std::string IndustryCsv(const IndustryTable& t, size_t top_n = 20);
std::string CountryCsv(const CountryTable& t);
std::string ExclusionCsv(const CaseStudyResult& r);
// Long format for plotting: table,key,dimension,value.
std::string PlotCsv(const CaseStudyResult& r, size_t top_n = 20);

}  // namespace natdisc

#endif  // NATDISC_CASESTUDY_H_
