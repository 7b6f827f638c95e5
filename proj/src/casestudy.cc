#include "natdisc/casestudy.h"

#include <algorithm>
#include <cmath>
#include <charconv>
#include <set>
#include <unordered_set>

#include <fmt/format.h>

#include "json.hpp"
#include "natdisc/parallel.h"
#include "natdisc/text_util.h"

namespace natdisc {
namespace {

using json = nlohmann::json;

constexpr size_t kNature = static_cast<size_t>(GoldLabel::kNature);

int ReadLabel(const json& v, const std::string& where) {
  if (v.is_boolean()) return v.get<bool>() ? 1 : 0;
  if (v.is_number_integer()) {
    auto n = v.get<long long>();
    if (n == 0 || n == 1) return static_cast<int>(n);
  }
  throw InputError(where + ": label must be 0 or 1, got " + v.dump());
}

std::string Num(double v) { return fmt::format("{:.6f}", v); }

std::optional<long long> AsInt(const std::string& s) {
  long long v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size()) return std::nullopt;
  return v;
}

bool CodeLess(const std::string& a, const std::string& b) {
  auto ia = AsInt(a);
  auto ib = AsInt(b);
  if (ia && ib && *ia != *ib) return *ia < *ib;
  if (ia.has_value() != ib.has_value()) return ia.has_value();
  return a < b;
}

// Exposures of the same industry come from identical arithmetic, but two
// industries can land on the same value through different sums.
bool SameExposure(double a, double b) { return std::abs(a - b) <= 1e-12; }

void SortExclusions(std::vector<Exclusion>& v) {
  std::sort(v.begin(), v.end(), [](const Exclusion& a, const Exclusion& b) {
    return std::tie(a.id, a.reason) < std::tie(b.id, b.reason);
  });
}

}  // namespace

std::vector<LabeledSentence> LoadLabeledSentences(const std::filesystem::path& path) {
  std::vector<LabeledSentence> out;
  std::unordered_set<std::string> seen;
  size_t line_no = 0;
  for (const auto& line : ReadLines(path)) {
    ++line_no;
    if (Trim(line).empty()) continue;
    std::string where = path.string() + ":" + std::to_string(line_no);
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      throw InputError(where + ": " + e.what());
    }
    if (!j.is_object() || !j.contains("doc_id") || !j.contains("sent_id")) {
      throw InputError(where + ": need doc_id and sent_id");
    }
    LabeledSentence s;
    s.doc_id = j["doc_id"].is_string() ? j["doc_id"].get<std::string>() : j["doc_id"].dump();
    s.sent_id = j["sent_id"].is_string() ? j["sent_id"].get<std::string>() : j["sent_id"].dump();
    int any = 0;
    for (Dimension d : kAllDimensions) {
      std::string key(DimensionName(d));
      if (!j.contains(key)) throw InputError(where + ": missing \"" + key + "\"");
      int v = ReadLabel(j[key], where);
      s.labels[static_cast<size_t>(ToGoldLabel(d))] = v;
      any |= v;
    }
    if (j.contains("nature")) {
      s.labels[kNature] = ReadLabel(j["nature"], where);
      if (s.labels[kNature] < any) {
        throw InputError(where + ": nature is 0 but a dimension is positive");
      }
    } else {
      s.labels[kNature] = any;
    }
    if (!seen.insert(s.doc_id + '\x1f' + s.sent_id).second) {
      throw InputError(where + ": duplicate sentence " + s.doc_id + "/" + s.sent_id);
    }
    out.push_back(std::move(s));
  }
  return out;
}

std::vector<TranscriptMeta> LoadTranscriptMeta(const std::filesystem::path& path) {
  CsvTable t = CsvTable::Load(path);
  size_t doc = t.column("doc_id");
  size_t company = t.column("company_id");
  size_t year = t.column("year");
  std::optional<size_t> country;
  if (t.has_column("country")) country = t.column("country");
  std::vector<TranscriptMeta> out;
  std::unordered_set<std::string> seen;
  for (size_t r = 0; r < t.rows(); ++r) {
    TranscriptMeta m{t.at(r, doc), t.at(r, company), t.at(r, year),
                     country ? t.at(r, *country) : ""};
    if (m.doc_id.empty() || m.company_id.empty()) {
      throw InputError(path.string() + ": row " + std::to_string(r + 2) +
                       " lacks doc_id or company_id");
    }
    if (!seen.insert(m.doc_id).second) {
      throw InputError(path.string() + ": duplicate doc_id \"" + m.doc_id + "\"");
    }
    out.push_back(std::move(m));
  }
  return out;
}

std::map<std::string, std::string> LoadMapping(const std::filesystem::path& path) {
  CsvTable t = CsvTable::Load(path);
  if (t.header().size() < 2) {
    throw InputError(path.string() + ": mapping needs two columns");
  }
  std::map<std::string, std::string> out;
  for (size_t r = 0; r < t.rows(); ++r) {
    const std::string& key = t.at(r, 0);
    const std::string& value = t.at(r, 1);
    if (key.empty() || value.empty()) continue;
    auto [it, fresh] = out.emplace(key, value);
    if (!fresh && it->second != value) {
      throw InputError(path.string() + ": conflicting values for \"" + key + "\"");
    }
  }
  return out;
}

TranscriptScore ScoreTranscript(const std::vector<LabeledSentence>& sentences,
                                const TranscriptMeta& meta) {
  if (sentences.empty()) {
    throw ContractError("transcript \"" + meta.doc_id + "\" has no sentences");
  }
  TranscriptScore s;
  s.doc_id = meta.doc_id;
  s.company_id = meta.company_id;
  s.year = meta.year;
  s.total_sentences = sentences.size();
  for (const auto& sent : sentences) {
    for (size_t l = 0; l < 4; ++l) s.positives[l] += sent.labels[l] ? 1 : 0;
  }
  return s;
}

std::vector<CompanyExposure> CompanyYearlyExposure(
    const std::vector<TranscriptScore>& scores) {
  std::map<std::pair<std::string, std::string>, std::vector<const TranscriptScore*>> groups;
  for (const auto& s : scores) groups[{s.company_id, s.year}].push_back(&s);
  std::vector<CompanyExposure> out;
  for (auto& [key, calls] : groups) {
    std::sort(calls.begin(), calls.end(),
              [](const TranscriptScore* a, const TranscriptScore* b) {
                return a->doc_id < b->doc_id;
              });
    CompanyExposure c{key.first, key.second, {}, calls.size()};
    for (GoldLabel l : kAllGoldLabels) {
      double sum = 0;
      for (const auto* t : calls) sum += t->exposure(l);
      c.mean[static_cast<size_t>(l)] = sum / static_cast<double>(calls.size());
    }
    out.push_back(std::move(c));
  }
  return out;
}

IndustryTable IndustryAggregate(const std::vector<CompanyExposure>& companies,
                                const std::map<std::string, std::string>& industry_map) {
  // company -> yearly rows, kept in year order for a fixed summation order.
  std::map<std::string, std::vector<const CompanyExposure*>> by_company;
  for (const auto& c : companies) by_company[c.company_id].push_back(&c);

  IndustryTable table;
  std::map<std::string, std::vector<std::array<double, 4>>> by_code;
  for (auto& [company, years] : by_company) {
    auto it = industry_map.find(company);
    if (it == industry_map.end()) {
      table.excluded.push_back({company, "no industry code"});
      continue;
    }
    std::sort(years.begin(), years.end(),
              [](const CompanyExposure* a, const CompanyExposure* b) {
                return a->year < b->year;
              });
    std::array<double, 4> mean{};
    for (size_t l = 0; l < 4; ++l) {
      double sum = 0;
      for (const auto* y : years) sum += y->mean[l];
      mean[l] = sum / static_cast<double>(years.size());
    }
    by_code[it->second].push_back(mean);
  }
  if (by_code.empty()) {
    throw ContractError("no company has an industry code");
  }
  for (const auto& [code, members] : by_code) {
    IndustryExposure row;
    row.code = code;
    row.n_companies = members.size();
    for (size_t l = 0; l < 4; ++l) {
      double sum = 0;
      for (const auto& m : members) sum += m[l];
      row.mean[l] = sum / static_cast<double>(members.size());
    }
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(),
            [](const IndustryExposure& a, const IndustryExposure& b) {
              double x = a.mean[kNature];
              double y = b.mean[kNature];
              if (!SameExposure(x, y)) return x > y;
              return CodeLess(a.code, b.code);
            });
  for (size_t i = 0; i < table.rows.size(); ++i) {
    table.rows[i].rank = static_cast<int>(i + 1);
  }
  SortExclusions(table.excluded);
  return table;
}

CountryTable CountryMentionRates(
    const std::vector<TranscriptScore>& scores,
    const std::map<std::string, std::string>& transcript_country) {
  CountryTable table;
  std::map<std::string, CountryMentionRate> rows;
  for (const auto& s : scores) {
    auto it = transcript_country.find(s.doc_id);
    if (it == transcript_country.end() || it->second.empty()) {
      table.excluded.push_back({s.doc_id, "no country"});
      continue;
    }
    auto& row = rows[it->second];
    row.country = it->second;
    ++row.calls;
    if (s.positives[kNature] > 0) ++row.calls_with_mention;
  }
  if (rows.empty()) throw ContractError("no transcript has a country");
  for (auto& [country, row] : rows) {
    row.rate = static_cast<double>(row.calls_with_mention) /
               static_cast<double>(row.calls);
    table.rows.push_back(row);
  }
  SortExclusions(table.excluded);
  return table;
}

CaseStudyResult RunCaseStudy(const CaseStudyInput& input) {
  std::map<std::string, std::vector<LabeledSentence>> by_doc;
  for (const auto& s : input.sentences) by_doc[s.doc_id].push_back(s);
  std::map<std::string, const TranscriptMeta*> meta;
  for (const auto& m : input.meta) {
    if (!meta.emplace(m.doc_id, &m).second) {
      throw InputError("duplicate metadata for \"" + m.doc_id + "\"");
    }
  }

  CaseStudyResult r;
  std::vector<std::pair<const TranscriptMeta*, const std::vector<LabeledSentence>*>> work;
  for (const auto& [doc, m] : meta) {
    auto it = by_doc.find(doc);
    if (it == by_doc.end()) {
      r.excluded_transcripts.push_back({doc, "no labeled sentences"});
      continue;
    }
    work.emplace_back(m, &it->second);
  }
  r.transcripts.resize(work.size());
  ParallelFor(work.size(), DefaultThreads(), [&](size_t i) {
    r.transcripts[i] = ScoreTranscript(*work[i].second, *work[i].first);
  });
  std::map<std::string, std::string> country_of;
  for (const auto& [m, sentences] : work) {
    const std::string& doc = m->doc_id;
    if (input.country_map.empty()) {
      country_of[doc] = m->country;
    } else if (auto c = input.country_map.find(m->company_id);
               c != input.country_map.end()) {
      country_of[doc] = c->second;
    }
  }
  for (const auto& [doc, sentences] : by_doc) {
    if (!meta.count(doc)) r.excluded_transcripts.push_back({doc, "no metadata"});
  }
  if (r.transcripts.empty()) {
    throw InputError("no transcript has both labeled sentences and metadata");
  }
  SortExclusions(r.excluded_transcripts);
  r.companies = CompanyYearlyExposure(r.transcripts);
  r.industries = IndustryAggregate(r.companies, input.industry_map);
  r.countries = CountryMentionRates(r.transcripts, country_of);
  return r;
}

std::string TranscriptCsv(const std::vector<TranscriptScore>& t) {
  std::string out =
      "doc_id,company_id,year,total_sentences,water_pos,forest_pos,"
      "biodiversity_pos,nature_pos,water,forest,biodiversity,nature\n";
  for (const auto& s : t) {
    std::vector<std::string> f = {s.doc_id, s.company_id, s.year,
                                  std::to_string(s.total_sentences)};
    for (size_t l = 0; l < 4; ++l) f.push_back(std::to_string(s.positives[l]));
    for (GoldLabel l : kAllGoldLabels) f.push_back(Num(s.exposure(l)));
    out += CsvLine(f);
  }
  return out;
}

std::string CompanyCsv(const std::vector<CompanyExposure>& c) {
  std::string out = "company_id,year,n_calls,water,forest,biodiversity,nature\n";
  for (const auto& e : c) {
    std::vector<std::string> f = {e.company_id, e.year, std::to_string(e.n_calls)};
    for (double m : e.mean) f.push_back(Num(m));
    out += CsvLine(f);
  }
  return out;
}

std::string IndustryCsv(const IndustryTable& t, size_t top_n) {
  std::string out = "rank,ff49,n_companies,water,forest,biodiversity,nature\n";
  size_t n = top_n ? std::min(top_n, t.rows.size()) : t.rows.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& r = t.rows[i];
    std::vector<std::string> f = {std::to_string(r.rank), r.code,
                                  std::to_string(r.n_companies)};
    for (double m : r.mean) f.push_back(Num(m));
    out += CsvLine(f);
  }
  return out;
}

std::string CountryCsv(const CountryTable& t) {
  std::string out = "country,calls,calls_with_mention,rate\n";
  for (const auto& r : t.rows) {
    out += CsvLine({r.country, std::to_string(r.calls),
                    std::to_string(r.calls_with_mention), Num(r.rate)});
  }
  return out;
}

std::string ExclusionCsv(const CaseStudyResult& r) {
  std::string out = "scope,id,reason\n";
  for (const auto& e : r.excluded_transcripts) out += CsvLine({"transcript", e.id, e.reason});
  for (const auto& e : r.industries.excluded) out += CsvLine({"industry", e.id, e.reason});
  for (const auto& e : r.countries.excluded) out += CsvLine({"country", e.id, e.reason});
  return out;
}

std::string PlotCsv(const CaseStudyResult& r, size_t top_n) {
  std::string out = "table,key,dimension,value\n";
  size_t n = top_n ? std::min(top_n, r.industries.rows.size()) : r.industries.rows.size();
  for (size_t i = 0; i < n; ++i) {
    const auto& row = r.industries.rows[i];
    for (GoldLabel l : kAllGoldLabels) {
      out += CsvLine({"industry", row.code, std::string(GoldLabelName(l)),
                      Num(row.mean[static_cast<size_t>(l)])});
    }
  }
  for (const auto& c : r.countries.rows) {
    out += CsvLine({"country", c.country, "nature", Num(c.rate)});
  }
  return out;
}

}  // namespace natdisc
