#include "natdisc/cli.h"

#include <chrono>
#include <functional>
#include <iostream>
#include <map>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "json.hpp"
#include "natdisc/annotation.h"
#include "natdisc/annotation_server.h"
#include "natdisc/baseline.h"
#include "natdisc/casestudy.h"
#include "natdisc/corpus.h"
#include "natdisc/eval.h"
#include "natdisc/gold.h"
#include "natdisc/keywords.h"
#include "natdisc/parallel.h"
#include "natdisc/prelabel.h"
#include "natdisc/text_util.h"

namespace natdisc {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

// Bad flag values found after parsing; mapped to the usage exit status.
class UsageError : public Error {
 public:
  using Error::Error;
};

struct Common {
  uint64_t seed = 42;
  std::string out = "out";
  unsigned threads = 0;
};

// Files read and written by one run, for the manifest.
class RunLog {
 public:
  RunLog(const Common& common, std::ostream& out) : common_(common), out_(out) {}

  const Common& common() const { return common_; }
  std::ostream& out() { return out_; }
  unsigned threads() const { return common_.threads ? common_.threads : DefaultThreads(); }

  void Input(const fs::path& p) { inputs_.push_back(p); }
  fs::path OutPath(const std::string& name) {
    fs::create_directories(common_.out);
    return fs::path(common_.out) / name;
  }
  fs::path Write(const std::string& name, std::string_view content) {
    fs::path p = OutPath(name);
    WriteFile(p, content);
    outputs_.push_back(p);
    return p;
  }
  void Output(const fs::path& p) { outputs_.push_back(p); }

  json Manifest() const {
    json in = json::array();
    for (const auto& p : inputs_) {
      json e{{"path", p.generic_string()}};
      std::error_code ec;
      e["sha256"] = fs::is_regular_file(p, ec) ? json(Sha256Hex(ReadFile(p))) : json(nullptr);
      in.push_back(e);
    }
    json outs = json::array();
    for (const auto& p : outputs_) {
      std::error_code ec;
      if (!fs::is_regular_file(p, ec)) continue;
      outs.push_back({{"path", p.generic_string()}, {"sha256", Sha256Hex(ReadFile(p))}});
    }
    return {{"inputs", in}, {"outputs", outs}};
  }

 private:
  const Common& common_;
  std::ostream& out_;
  std::vector<fs::path> inputs_;
  std::vector<fs::path> outputs_;
};

Dimension DimensionArg(const std::string& name) {
  auto d = ParseDimension(name);
  if (!d) throw UsageError("unknown dimension \"" + name + "\"");
  return *d;
}

std::vector<Dimension> DimensionsArg(const std::string& name) {
  if (name == "all") return {kAllDimensions.begin(), kAllDimensions.end()};
  return {DimensionArg(name)};
}

GoldLabel LabelArg(const std::string& name) {
  auto l = ParseGoldLabel(name);
  if (!l) throw UsageError("unknown label \"" + name + "\"");
  return *l;
}

// Either raw documents (segmented here) or pre-segmented sentences.
struct CorpusArgs {
  std::vector<std::string> corpus;
  std::string sentences;
  std::string format = "auto";
  std::string default_source = "AR";

  void Register(CLI::App* app) {
    app->add_option("--corpus", corpus, "Document jsonl files or .txt directories");
    app->add_option("--sentences", sentences, "Pre-segmented sentence jsonl");
    app->add_option("--format", format, "auto | jsonl | txt")
        ->check(CLI::IsMember({"auto", "jsonl", "txt"}));
    app->add_option("--default-source", default_source,
                    "Source kind of .txt files outside AR/SR/EC folders")
        ->check(CLI::IsMember({"AR", "SR", "EC"}));
  }

  CorpusStore Load(RunLog& log) const {
    if (corpus.empty() && sentences.empty()) {
      throw UsageError("need --corpus or --sentences");
    }
    CorpusStore store;
    if (!corpus.empty()) {
      std::vector<fs::path> paths(corpus.begin(), corpus.end());
      IngestFormat f = IngestFormat::kJsonl;
      if (format == "txt" || (format == "auto" && fs::is_directory(paths.front()))) {
        f = IngestFormat::kPlainTextDir;
      }
      IngestOptions opts;
      opts.default_source_kind = *ParseSourceKind(default_source);
      for (const auto& p : paths) log.Input(p);
      store = IngestDocuments(paths, f, opts);
    }
    if (!sentences.empty()) {
      log.Input(sentences);
      IngestSentencesJsonl(sentences, store);
    }
    store.SegmentAll(log.threads());
    return store;
  }
};

struct Candidate {
  std::string sent_id;
  std::string text;
};

// jsonl records with at least sent_id (or sample_id) and text.
std::vector<Candidate> LoadCandidates(const fs::path& path) {
  std::vector<Candidate> out;
  size_t n = 0;
  for (const auto& line : ReadLines(path)) {
    ++n;
    if (Trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      throw InputError(path.string() + ":" + std::to_string(n) + ": invalid JSON");
    }
    std::string id = j.value("sent_id", j.value("sample_id", ""));
    if (id.empty() || !j.contains("text")) {
      throw InputError(path.string() + ":" + std::to_string(n) + ": need sent_id and text");
    }
    out.push_back({id, j["text"].get<std::string>()});
  }
  return out;
}

std::vector<std::string> SplitList(const std::string& s) {
  std::vector<std::string> out;
  for (auto& part : SplitChar(s, ',')) {
    std::string v(Trim(part));
    if (!v.empty()) out.push_back(v);
  }
  return out;
}

struct StoreArgs {
  std::string tasks;
  std::string annotators;
  std::string log;

  void Register(CLI::App* app, bool need_log) {
    app->add_option("--tasks", tasks, "Task jsonl or csv (sample_id, text)")->required();
    app->add_option("--annotators", annotators, "Four comma-separated annotator ids")
        ->required();
    auto* opt = app->add_option("--log", log, "Annotation event log (jsonl)");
    if (need_log) opt->required();
  }

  AnnotationStore Open(RunLog& run) const {
    run.Input(tasks);
    std::optional<fs::path> log_path;
    if (!log.empty()) {
      log_path = log;
      run.Input(log);
    }
    return AnnotationStore(LoadTasks(tasks), SplitList(annotators), log_path);
  }
};

std::string StatsRow(const std::string& scope, const SentenceStats& s) {
  return CsvLine({scope, std::to_string(s.count), fmt::format("{:.4f}", s.mean),
                  fmt::format("{:.4f}", s.std), std::to_string(s.min),
                  std::to_string(s.p25), std::to_string(s.p50),
                  std::to_string(s.p75), std::to_string(s.max)});
}

struct Subcommand {
  CLI::App* app;
  std::function<void(RunLog&)> run;
};

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Nature-disclosure dataset and evaluation toolkit", "natdisc"};
  app.require_subcommand(1);
  app.fallthrough();  // common flags may follow the subcommand
  app.set_version_flag("--version", kVersion);
  app.set_config("--config", "", "key=value config file; flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);

  Common common;
  app.add_option("--seed", common.seed, "Random seed")->capture_default_str();
  app.add_option("--out", common.out, "Output directory")->capture_default_str();
  app.add_option("--threads", common.threads, "Worker threads (0 = all cores)");

  std::vector<Subcommand> subs;
  subs.reserve(16);
  auto add = [&](const std::string& name, const std::string& help) {
    subs.push_back({app.add_subcommand(name, help), {}});
    return &subs.back();
  };

  // ingest
  CorpusArgs ingest_corpus;
  {
    auto* s = add("ingest", "Ingest documents and write segmented sentences");
    ingest_corpus.Register(s->app);
    s->run = [&](RunLog& log) {
      CorpusStore store = ingest_corpus.Load(log);
      fs::path p = log.OutPath("sentences.jsonl");
      WriteSentencesJsonl(store, p);
      log.Output(p);
      log.out() << store.documents().size() << " documents, "
                << store.sentences().size() << " sentences -> " << p.string() << "\n";
    };
  }

  // stats
  CorpusArgs stats_corpus;
  {
    auto* s = add("stats", "Sentence token-count statistics per source kind");
    stats_corpus.Register(s->app);
    s->run = [&](RunLog& log) {
      CorpusStore store = stats_corpus.Load(log);
      std::string csv = "scope,count,mean,std,min,p25,p50,p75,max\n";
      csv += StatsRow("all", CorpusStats(store));
      for (SourceKind k : kAllSourceKinds) {
        bool any = false;
        for (size_t i = 0; i < store.sentences().size() && !any; ++i) {
          any = store.sentence_source(i) == k;
        }
        if (any) csv += StatsRow(std::string(SourceKindCode(k)), CorpusStats(store, k));
      }
      log.Write("stats.csv", csv);
      log.out() << fmt::format("{:<6}{:>9}{:>10}{:>10}{:>6}{:>6}{:>6}{:>6}{:>7}\n", "scope",
                               "count", "mean", "std", "min", "p25", "p50", "p75", "max");
      auto rows = ParseCsv(csv);
      for (size_t r = 1; r < rows.size(); ++r) {
        const auto& v = rows[r];
        log.out() << fmt::format("{:<6}{:>9}{:>10}{:>10}{:>6}{:>6}{:>6}{:>6}{:>7}\n", v[0],
                                 v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]);
      }
    };
  }

  // kwmatch
  CorpusArgs kw_corpus;
  std::string kw_dimension = "all";
  std::string kw_file;
  {
    auto* s = add("kwmatch", "Keyword frequencies, buckets and per-sentence hits");
    kw_corpus.Register(s->app);
    s->app->add_option("--dimension", kw_dimension, "water | forest | biodiversity | all")
        ->capture_default_str();
    s->app->add_option("--keywords", kw_file, "Pattern file (single dimension only)");
    s->run = [&](RunLog& log) {
      auto dims = DimensionsArg(kw_dimension);
      if (!kw_file.empty() && dims.size() != 1) {
        throw UsageError("--keywords needs a single --dimension");
      }
      CorpusStore store = kw_corpus.Load(log);
      for (Dimension d : dims) {
        std::string name(DimensionName(d));
        KeywordSet set = kw_file.empty() ? KeywordSet::Builtin(d)
                                         : KeywordSet::Load(d, kw_file);
        if (!kw_file.empty()) log.Input(kw_file);
        FrequencyTable table = KeywordFrequencyTable(store, set, log.threads());
        std::optional<BucketAssignment> buckets;
        if (table.total_matched_sentences > 0) buckets = Bucketize(table);
        std::string csv = "pattern,count,bucket\n";
        for (size_t i = 0; i < table.patterns.size(); ++i) {
          csv += CsvLine({table.patterns[i], std::to_string(table.counts[i]),
                          buckets ? std::to_string(buckets->bucket[i]) : ""});
        }
        log.Write("kw_" + name + "_frequency.csv", csv);
        std::string hits;
        for (const auto& sent : store.sentences()) {
          auto h = MatchSentence(sent, set);
          if (h.empty()) continue;
          json pats = json::array();
          for (const auto& hit : h) pats.push_back(set.raws()[hit.pattern]);
          hits += json{{"sent_id", sent.sent_id}, {"patterns", pats}}.dump() + "\n";
        }
        log.Write("kw_" + name + "_matches.jsonl", hits);
        double rate = static_cast<double>(table.total_matched_sentences) /
                      static_cast<double>(table.total_sentences);
        log.out() << fmt::format("{:<13} matched {} / {} sentences ({:.2f}%, reference {:.2f}%)\n",
                                 name, table.total_matched_sentences, table.total_sentences,
                                 100 * rate, 100 * PublishedAppearanceRate(d));
      }
    };
  }

  // kwsample
  CorpusArgs kws_corpus;
  std::string kws_dimension;
  std::string kws_mode = "bucket";
  size_t kws_n = 0;
  size_t kws_cap = 0;
  {
    auto* s = add("kwsample", "Bucket-balanced or per-source keyword sample");
    kws_corpus.Register(s->app);
    s->app->add_option("--dimension", kws_dimension, "water | forest | biodiversity")
        ->required();
    s->app->add_option("--mode", kws_mode, "bucket | filter")
        ->check(CLI::IsMember({"bucket", "filter"}))
        ->capture_default_str();
    s->app->add_option("--n", kws_n, "Total sample size (bucket mode)");
    s->app->add_option("--per-source-cap", kws_cap, "Sentences per source kind (filter mode)");
    s->run = [&](RunLog& log) {
      Dimension d = DimensionArg(kws_dimension);
      CorpusStore store = kws_corpus.Load(log);
      const KeywordSet& set = KeywordSet::Builtin(d);
      std::string body;
      auto record = [&](size_t index) {
        const Sentence& sent = store.sentences()[index];
        json j{{"sent_id", sent.sent_id}, {"doc_id", sent.doc_id}, {"text", sent.text}};
        if (auto src = store.sentence_source(index)) j["source_kind"] = SourceKindCode(*src);
        return j;
      };
      size_t count = 0;
      if (kws_mode == "bucket") {
        if (kws_n == 0) throw UsageError("bucket mode needs --n");
        auto table = KeywordFrequencyTable(store, set, log.threads());
        auto picked = BucketBalancedSample(store, set, Bucketize(table), kws_n,
                                           log.common().seed);
        for (const auto& b : picked) {
          json j = record(b.index);
          j["bucket"] = b.bucket;
          body += j.dump() + "\n";
        }
        count = picked.size();
      } else {
        if (kws_cap == 0) throw UsageError("filter mode needs --per-source-cap");
        auto picked = KeywordFilterSample(store, set, kws_cap, log.common().seed);
        for (size_t i : picked) body += record(i).dump() + "\n";
        count = picked.size();
      }
      log.Write("kwsample_" + kws_dimension + ".jsonl", body);
      log.out() << count << " sentences sampled\n";
    };
  }

  // prelabel
  std::string pl_candidates;
  std::string pl_dimension;
  std::string pl_backend = "mock";
  HttpBackendConfig pl_http;
  long pl_timeout = 60;
  size_t pl_budget = 5000;
  unsigned pl_parallel = 4;
  std::string pl_scores;
  {
    auto* s = add("prelabel", "Score candidate sentences with an LLM backend");
    s->app->add_option("--candidates", pl_candidates, "jsonl with sent_id and text")
        ->required();
    s->app->add_option("--dimension", pl_dimension, "water | forest | biodiversity")
        ->required();
    s->app->add_option("--backend", pl_backend, "mock | http")
        ->check(CLI::IsMember({"mock", "http"}))
        ->capture_default_str();
    s->app->add_option("--endpoint", pl_http.endpoint, "Chat-completion URL (http backend)");
    s->app->add_option("--model", pl_http.model, "Model name sent to the backend");
    s->app->add_option("--token-env", pl_http.token_env,
                       "Environment variable holding the bearer token")
        ->capture_default_str();
    s->app->add_option("--timeout", pl_timeout, "Request timeout in seconds");
    s->app->add_option("--budget", pl_budget, "Maximum sentences scored")->capture_default_str();
    s->app->add_option("--parallelism", pl_parallel, "Requests in flight")
        ->capture_default_str();
    s->app->add_option("--scores", pl_scores,
                       "Score store (jsonl); reused across runs. Default <out>/scores_<dim>.jsonl");
    s->run = [&](RunLog& log) {
      Dimension d = DimensionArg(pl_dimension);
      if (pl_budget == 0) throw UsageError("--budget must be >= 1");
      log.Input(pl_candidates);
      std::vector<Sentence> cands;
      for (auto& c : LoadCandidates(pl_candidates)) {
        Sentence sent;
        sent.sent_id = std::move(c.sent_id);
        sent.text = std::move(c.text);
        cands.push_back(std::move(sent));
      }
      std::unique_ptr<ScorerBackend> backend;
      if (pl_backend == "mock") {
        backend = std::make_unique<KeywordMockBackend>(d);
      } else {
        if (pl_http.endpoint.empty()) throw UsageError("http backend needs --endpoint");
        pl_http.timeout = std::chrono::seconds(pl_timeout);
        backend = std::make_unique<HttpJsonBackend>(pl_http);
      }
      fs::path store_path = pl_scores.empty()
                                ? log.OutPath("scores_" + pl_dimension + ".jsonl")
                                : fs::path(pl_scores);
      ScoreStore store(store_path);
      BatchOptions opts;
      opts.parallelism = pl_parallel;
      BatchResult r = PrelabelBatch(cands, d, *backend, pl_budget, store, opts);
      log.Output(store_path);
      json failures = json::array();
      for (const auto& f : r.failures) {
        failures.push_back({{"sent_id", f.sent_id}, {"error", f.error}, {"attempts", f.attempts}});
      }
      log.Write("prelabel_failures_" + pl_dimension + ".json", failures.dump(2) + "\n");
      log.out() << r.scores.size() << " scored (" << r.reused << " reused, "
                << r.backend_calls << " backend calls), " << r.failures.size()
                << " failed\n";
    };
  }

  // bandsample
  std::string bs_scores;
  std::string bs_candidates;
  size_t bs_n = 0;
  {
    auto* s = add("bandsample", "Band-balanced sample of pre-labeled sentences");
    s->app->add_option("--scores", bs_scores, "Score jsonl from prelabel")->required();
    s->app->add_option("--candidates", bs_candidates, "jsonl with sent_id and text");
    s->app->add_option("--n", bs_n, "Total sample size")->required();
    s->run = [&](RunLog& log) {
      log.Input(bs_scores);
      auto scores = LoadScores(bs_scores);
      std::map<std::string, const PreLabelScore*> by_id;
      for (const auto& sc : scores) by_id[sc.sent_id] = &sc;
      std::map<std::string, std::string> text;
      if (!bs_candidates.empty()) {
        log.Input(bs_candidates);
        for (auto& c : LoadCandidates(bs_candidates)) text[c.sent_id] = c.text;
      }
      auto ids = BandBalancedSample(scores, bs_n, log.common().seed);
      std::string body;
      for (const auto& id : ids) {
        const PreLabelScore& sc = *by_id.at(id);
        json j{{"sample_id", id}, {"band", BandName(BandOf(sc.effective_score))},
               {"score", sc.effective_score}};
        if (!bs_candidates.empty()) {
          auto it = text.find(id);
          if (it == text.end()) throw InputError("no text for sampled id \"" + id + "\"");
          j["text"] = it->second;
        }
        body += j.dump() + "\n";
      }
      log.Write("bandsample.jsonl", body);
      log.out() << ids.size() << " sentences sampled\n";
    };
  }

  // annotate-serve
  StoreArgs serve_store;
  std::string serve_host = "127.0.0.1";
  int serve_port = 8080;
  std::string serve_ui;
  {
    auto* s = add("annotate-serve", "Run the annotation HTTP API in the foreground");
    serve_store.Register(s->app, true);
    s->app->add_option("--host", serve_host)->capture_default_str();
    s->app->add_option("--port", serve_port)->capture_default_str();
    s->app->add_option("--ui-dir", serve_ui, "Static UI files, served at /ui");
    s->run = [&](RunLog& log) {
      AnnotationStore store = serve_store.Open(log);
      AnnotationServer::Options opts;
      if (!serve_ui.empty()) opts.static_dir = serve_ui;
      AnnotationServer server(store, opts);
      int port = server.Bind(serve_host, serve_port);
      log.out() << "serving on http://" << serve_host << ":" << port << std::endl;
      server.Listen();
    };
  }

  // agreement
  StoreArgs agr_store;
  {
    auto* s = add("agreement", "Fleiss' kappa and agreement breakdown from a log");
    agr_store.Register(s->app, true);
    s->run = [&](RunLog& log) {
      AnnotationStore store = agr_store.Open(log);
      std::string j = AgreementJson(store.Agreement());
      log.Write("agreement.json", j + "\n");
      log.out() << j << "\n";
    };
  }

  // export-gold
  StoreArgs exp_store;
  {
    auto* s = add("export-gold", "Write the gold dataset once all splits are resolved");
    exp_store.Register(s->app, true);
    s->run = [&](RunLog& log) {
      AnnotationStore store = exp_store.Open(log);
      std::vector<GoldSample> gold;
      try {
        gold = store.ExportGold();
      } catch (const UnresolvedError& e) {
        for (const auto& b : e.blockers()) log.out() << "blocked: " << b << "\n";
        throw;
      }
      log.Write("gold.csv", GoldCsv(gold));
      log.Write("gold.jsonl", GoldJsonl(gold));
      log.Write("distribution.json", DistributionJson(DistributionOf(gold)) + "\n");
      log.out() << gold.size() << " gold samples\n";
    };
  }

  // baseline-eval
  std::string be_gold;
  std::string be_target = "biodiversity";
  std::string be_specific;
  std::string be_additional;
  {
    auto* s = add("baseline-eval", "Evaluate the two-layer keyword rule on gold data");
    s->app->add_option("--gold", be_gold, "Gold csv or jsonl")->required();
    s->app->add_option("--target", be_target, "biodiversity | nature")
        ->check(CLI::IsMember({"biodiversity", "nature"}))
        ->capture_default_str();
    s->app->add_option("--specific", be_specific, "Specific-layer pattern file");
    s->app->add_option("--additional", be_additional, "Additional-layer pattern file");
    s->run = [&](RunLog& log) {
      if (be_specific.empty() != be_additional.empty()) {
        throw UsageError("--specific and --additional go together");
      }
      log.Input(be_gold);
      GoldDataset gold = LoadGold(be_gold);
      std::optional<TwoLayerRule> custom;
      if (!be_specific.empty()) {
        log.Input(be_specific);
        log.Input(be_additional);
        custom = TwoLayerRule::Load(be_specific, be_additional);
      }
      auto report = EvaluateBaseline(gold, LabelArg(be_target),
                                     custom ? *custom : TwoLayerRule::Builtin(), 20,
                                     log.threads());
      log.Write("report.json", BaselineReportJson(report) + "\n");
      log.Write("confusion.csv", ConfusionCsv(report.confusion));
      const Metrics& m = report.metrics;
      log.out() << fmt::format("{} n={} F1={:.4f} acc={:.4f} P={:.4f} R={:.4f} ({:.3f}s)\n",
                               be_target, report.confusion.total(), m.f1, m.accuracy,
                               m.precision, m.recall, report.seconds);
    };
  }

  // folds
  std::string fo_gold;
  std::string fo_label = "nature";
  int fo_k = 5;
  {
    auto* s = add("folds", "Stratified k-fold split of a gold dataset");
    s->app->add_option("--gold", fo_gold, "Gold csv or jsonl")->required();
    s->app->add_option("--label", fo_label, "Label to stratify on")->capture_default_str();
    s->app->add_option("--k", fo_k, "Number of folds")->capture_default_str();
    s->run = [&](RunLog& log) {
      log.Input(fo_gold);
      FoldSpec spec = MakeFolds(LoadGold(fo_gold), LabelArg(fo_label), fo_k, log.common().seed);
      log.Write("folds.json", FoldSpecJson(spec) + "\n");
      for (size_t i = 0; i < spec.folds.size(); ++i) {
        log.out() << "fold " << i + 1 << ": " << spec.folds[i].size() << " samples\n";
      }
    };
  }

  // cv
  std::string cv_gold;
  std::string cv_folds;
  std::string cv_label = "nature";
  int cv_k = 5;
  std::string cv_runner = "files";
  std::string cv_predictions;
  std::string cv_model;
  double cv_threshold = 0.5;
  std::string cv_hyper;
  std::vector<std::string> cv_reports;
  std::string cv_metric = "f1";
  {
    auto* s = add("cv", "Cross-validate predictions, or tabulate saved reports");
    s->app->add_option("--gold", cv_gold, "Gold csv or jsonl");
    s->app->add_option("--folds", cv_folds, "FoldSpec json (made from --seed when absent)");
    s->app->add_option("--label", cv_label)->capture_default_str();
    s->app->add_option("--k", cv_k)->capture_default_str();
    s->app->add_option("--runner", cv_runner, "files | keyword-baseline | constant-0 | constant-1")
        ->check(CLI::IsMember({"files", "keyword-baseline", "constant-0", "constant-1"}))
        ->capture_default_str();
    s->app->add_option("--predictions", cv_predictions,
                       "Per-fold prediction path template containing {fold}");
    s->app->add_option("--model", cv_model, "Model name for file predictions");
    s->app->add_option("--threshold", cv_threshold)->capture_default_str();
    s->app->add_option("--hyper", cv_hyper, "Hyperparameter tag for the report");
    s->app->add_option("--reports", cv_reports, "Saved CV reports to tabulate instead");
    s->app->add_option("--metric", cv_metric, "f1 | accuracy | precision | recall")
        ->capture_default_str();
    s->run = [&](RunLog& log) {
      auto metric = ParseMetricName(cv_metric);
      if (!metric) throw UsageError("unknown metric \"" + cv_metric + "\"");
      if (!cv_reports.empty()) {
        std::vector<CVReport> reports;
        for (const auto& p : cv_reports) {
          log.Input(p);
          reports.push_back(ParseCVReport(ReadFile(p)));
        }
        ResultsTable t = MakeResultsTable(reports, *metric);
        log.Write("results_" + cv_metric + ".csv", t.Csv());
        log.Write("results_" + cv_metric + ".txt", t.Text());
        log.out() << t.Text();
        return;
      }
      if (cv_gold.empty()) throw UsageError("cv needs --gold or --reports");
      log.Input(cv_gold);
      GoldDataset gold = LoadGold(cv_gold);
      FoldSpec spec;
      if (!cv_folds.empty()) {
        log.Input(cv_folds);
        spec = LoadFoldSpec(cv_folds);
      } else {
        spec = MakeFolds(gold, LabelArg(cv_label), cv_k, log.common().seed);
        log.Write("folds.json", FoldSpecJson(spec) + "\n");
      }
      std::unique_ptr<PredictionRunner> runner;
      if (cv_runner == "files") {
        if (cv_predictions.empty() || cv_model.empty()) {
          throw UsageError("the files runner needs --predictions and --model");
        }
        auto files = std::make_unique<PredictionFileRunner>(cv_predictions, cv_model,
                                                            cv_threshold);
        for (int f = 1; f <= static_cast<int>(spec.folds.size()); ++f) {
          if (fs::exists(files->PathFor(f))) log.Input(files->PathFor(f));
        }
        runner = std::move(files);
      } else if (cv_runner == "keyword-baseline") {
        runner = std::make_unique<BaselineRunner>(TwoLayerRule::Builtin());
      } else {
        runner = std::make_unique<ConstantRunner>(cv_runner == "constant-1" ? 1 : 0);
      }
      CVReport report = CrossValidate(*runner, gold, spec, cv_hyper);
      std::string name = "cv_" + report.model + "_" + report.label +
                         (cv_hyper.empty() ? "" : "_" + cv_hyper) + ".json";
      log.Write(name, CVReportJson(report) + "\n");
      log.out() << fmt::format("{} on {}: {} {}\n", report.model, report.label, cv_metric,
                               FormatCell(MetricValue(report.mean, *metric),
                                          MetricValue(report.std, *metric)));
      if (!report.complete) {
        throw InputError("fold " + std::to_string(report.failed_fold.value_or(0)) +
                         " failed: " + report.error);
      }
    };
  }

  // casestudy
  std::string cs_sentences;
  std::string cs_meta;
  std::string cs_industry;
  std::string cs_country;
  size_t cs_top = 20;
  {
    auto* s = add("casestudy", "Company, industry and country exposure tables");
    s->app->add_option("--sentences", cs_sentences, "Labeled sentence jsonl")->required();
    s->app->add_option("--meta", cs_meta, "Transcript metadata csv")->required();
    s->app->add_option("--industry-map", cs_industry, "company_id,ff49 csv")->required();
    s->app->add_option("--country-map", cs_country, "company_id,country csv");
    s->app->add_option("--top-n", cs_top, "Industries shown (0 = all)")->capture_default_str();
    s->run = [&](RunLog& log) {
      CaseStudyInput in;
      log.Input(cs_sentences);
      log.Input(cs_meta);
      log.Input(cs_industry);
      in.sentences = LoadLabeledSentences(cs_sentences);
      in.meta = LoadTranscriptMeta(cs_meta);
      in.industry_map = LoadMapping(cs_industry);
      if (!cs_country.empty()) {
        log.Input(cs_country);
        in.country_map = LoadMapping(cs_country);
      }
      CaseStudyResult r = RunCaseStudy(in);
      log.Write("transcripts.csv", TranscriptCsv(r.transcripts));
      log.Write("companies.csv", CompanyCsv(r.companies));
      log.Write("industries.csv", IndustryCsv(r.industries, cs_top));
      log.Write("countries.csv", CountryCsv(r.countries));
      log.Write("exclusions.csv", ExclusionCsv(r));
      log.Write("plot.csv", PlotCsv(r, cs_top));
      log.out() << IndustryCsv(r.industries, cs_top) << CountryCsv(r.countries);
    };
  }

  // CLI11 wants argv order with the program name first, reversed.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const Subcommand* chosen = nullptr;
  for (const auto& s : subs) {
    if (s.app->parsed()) chosen = &s;
  }
  if (chosen == nullptr) {
    err << app.help();
    return kExitUsage;
  }

  RunLog log(common, out);
  int status = kExitOk;
  std::string error;
  try {
    chosen->run(log);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->app->help();
    return kExitUsage;
  } catch (const std::exception& e) {
    error = e.what();
    err << "error: " << error << "\n";
    status = kExitError;
  }

  try {
    json m = log.Manifest();
    m["tool"] = "natdisc";
    m["version"] = kVersion;
    m["subcommand"] = chosen->app->get_name();
    m["args"] = args;
    m["seed"] = common.seed;
    m["threads"] = common.threads;
    m["status"] = status == kExitOk ? "ok" : "error";
    if (!error.empty()) m["error"] = error;
    fs::create_directories(common.out);
    WriteFile(fs::path(common.out) / ("manifest-" + chosen->app->get_name() + ".json"),
              m.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "error: cannot write run manifest: " << e.what() << "\n";
    status = kExitError;
  }
  return status;
}

}  // namespace natdisc
