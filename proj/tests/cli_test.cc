#include "natdisc/cli.h"

#include <sstream>

#include "doctest.h"
#include "json.hpp"
#include "natdisc/annotation.h"
#include "natdisc/gold.h"
#include "natdisc/text_util.h"
#include "test_util.h"

namespace natdisc {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;
using testing::DataPath;
using testing::TempDir;

struct Run {
  int status;
  std::string out;
  std::string err;
};

Run Cli(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  int status = RunCli(args, out, err);
  return {status, out.str(), err.str()};
}

json ReadJson(const fs::path& p) { return json::parse(ReadFile(p)); }

// 20 documents of 10 fixture sentences each, source kinds rotating.
fs::path WriteCorpus(const TempDir& dir) {
  GoldDataset gold = LoadGold(DataPath("gold_fixture.csv"));
  const char* kinds[] = {"AR", "SR", "EC"};
  std::string body;
  for (size_t d = 0; d < 20; ++d) {
    std::string text;
    for (size_t i = 0; i < 10; ++i) {
      std::string s = gold.samples[d * 10 + i].text;
      if (!text.empty()) text += " ";
      text += s;
    }
    body += json{{"doc_id", "doc" + std::to_string(d)},
                 {"source_kind", kinds[d % 3]},
                 {"text", text}}
                .dump() +
            "\n";
  }
  fs::path p = dir / "corpus.jsonl";
  testing::WriteText(p, body);
  return p;
}

TEST_CASE("usage errors exit 2, runtime errors exit 1") {
  TempDir dir;
  std::string out = (dir / "o").string();
  CHECK(Cli({}).status == kExitUsage);
  auto unknown = Cli({"baseline-eval", "--gold", "g.csv", "--no-such-flag"});
  CHECK(unknown.status == kExitUsage);
  CHECK(unknown.err.find("Usage:") != std::string::npos);
  CHECK(Cli({"no-such-subcommand"}).status == kExitUsage);
  CHECK(Cli({"folds"}).status == kExitUsage);  // --gold is required
  CHECK(Cli({"--help"}).status == kExitOk);
  CHECK(Cli({"--version"}).out == std::string(kVersion) + "\n");
  CHECK(Cli({"baseline-eval", "--gold", DataPath("gold_fixture.csv").string(),
             "--target", "water", "--out", out})
            .status == kExitUsage);

  auto missing = Cli({"folds", "--gold", (dir / "absent.csv").string(), "--out", out});
  CHECK(missing.status == kExitError);
  auto m = ReadJson(dir / "o" / "manifest-folds.json");
  CHECK(m["status"] == "error");
  CHECK(m["outputs"].empty());
}

TEST_CASE("baseline-eval writes the report and a manifest with output hashes") {
  TempDir dir;
  auto r = Cli({"baseline-eval", "--gold", DataPath("gold_fixture.csv").string(),
                "--target", "biodiversity", "--out", (dir / "o").string()});
  REQUIRE(r.status == kExitOk);
  auto report = ReadJson(dir / "o" / "report.json");
  CHECK(report["confusion"]["tp"] == 28);
  CHECK(report["confusion"]["fp"] == 9);
  CHECK(report["reference"]["f1"] == 0.6303);
  CHECK(ReadFile(dir / "o" / "confusion.csv") ==
        "actual,predicted_0,predicted_1\n0,140,9\n1,23,28\n");

  auto m = ReadJson(dir / "o" / "manifest-baseline-eval.json");
  CHECK(m["subcommand"] == "baseline-eval");
  CHECK(m["version"] == kVersion);
  CHECK(m["seed"] == 42);
  REQUIRE(m["inputs"].size() == 1);
  CHECK(m["inputs"][0]["sha256"] == Sha256Hex(ReadFile(DataPath("gold_fixture.csv"))));
  REQUIRE(m["outputs"].size() == 2);
  for (const auto& o : m["outputs"]) {
    CHECK(o["sha256"] == Sha256Hex(ReadFile(o["path"].get<std::string>())));
  }
}

TEST_CASE("config file values apply and flags override them") {
  TempDir dir;
  fs::path cfg = dir / "run.conf";
  testing::WriteText(cfg, "# shared settings\nseed=7\nout=" + (dir / "a").string() +
                              "\n[folds]\ngold=" + DataPath("gold_fixture.csv").string() +
                              "\nk=4\n");
  REQUIRE(Cli({"folds", "--config", cfg.string()}).status == kExitOk);
  auto a = ReadJson(dir / "a" / "folds.json");
  CHECK(a["k"] == 4);
  CHECK(a["seed"] == 7);

  REQUIRE(Cli({"folds", "--config", cfg.string(), "--seed", "9", "--k", "5", "--out",
               (dir / "b").string()})
              .status == kExitOk);
  auto b = ReadJson(dir / "b" / "folds.json");
  CHECK(b["k"] == 5);
  CHECK(b["seed"] == 9);

  testing::WriteText(dir / "bad.conf", "sede=7\n");
  CHECK(Cli({"folds", "--config", (dir / "bad.conf").string(), "--gold",
             DataPath("gold_fixture.csv").string()})
            .status == kExitUsage);
}

TEST_CASE("same inputs and seed give byte-identical outputs") {
  TempDir dir;
  for (const char* o : {"x", "y"}) {
    std::string out = (dir / o).string();
    REQUIRE(Cli({"folds", "--gold", DataPath("gold_fixture.csv").string(), "--label",
                 "biodiversity", "--seed", "3", "--out", out})
                .status == kExitOk);
    REQUIRE(Cli({"casestudy", "--sentences", DataPath("casestudy/sentences.jsonl").string(),
                 "--meta", DataPath("casestudy/meta.csv").string(), "--industry-map",
                 DataPath("casestudy/industry.csv").string(), "--out", out})
                .status == kExitOk);
  }
  for (const char* f : {"folds.json", "industries.csv", "countries.csv", "plot.csv",
                        "transcripts.csv", "companies.csv", "exclusions.csv"}) {
    CHECK_MESSAGE(ReadFile(dir / "x" / f) == ReadFile(dir / "y" / f), f);
  }
  auto mx = ReadJson(dir / "x" / "manifest-casestudy.json");
  auto my = ReadJson(dir / "y" / "manifest-casestudy.json");
  REQUIRE(mx["outputs"].size() == my["outputs"].size());
  for (size_t i = 0; i < mx["outputs"].size(); ++i) {
    CHECK(mx["outputs"][i]["sha256"] == my["outputs"][i]["sha256"]);
  }
}

TEST_CASE("corpus to annotation tasks pipeline") {
  TempDir dir;
  fs::path corpus = WriteCorpus(dir);
  std::string out = (dir / "o").string();

  auto ingest = Cli({"ingest", "--corpus", corpus.string(), "--out", out});
  REQUIRE(ingest.status == kExitOk);
  CHECK(ingest.out.find("20 documents") != std::string::npos);
  fs::path sentences = dir / "o" / "sentences.jsonl";
  CHECK(ReadLines(sentences).size() >= 200);

  auto stats = Cli({"stats", "--sentences", sentences.string(), "--out", out});
  REQUIRE(stats.status == kExitOk);
  CHECK(stats.out.find("scope") != std::string::npos);
  auto rows = ParseCsv(ReadFile(dir / "o" / "stats.csv"));
  REQUIRE(rows.size() == 5);  // header, all, AR, SR, EC
  CHECK(rows[1][0] == "all");

  REQUIRE(Cli({"kwmatch", "--sentences", sentences.string(), "--dimension", "water", "--out",
               out})
              .status == kExitOk);
  CHECK(fs::exists(dir / "o" / "kw_water_frequency.csv"));
  CHECK(!ReadLines(dir / "o" / "kw_water_matches.jsonl").empty());

  REQUIRE(Cli({"kwsample", "--sentences", sentences.string(), "--dimension", "biodiversity",
               "--mode", "filter", "--per-source-cap", "20", "--out", out})
              .status == kExitOk);
  fs::path cands = dir / "o" / "kwsample_biodiversity.jsonl";
  size_t n_cands = ReadLines(cands).size();
  CHECK(n_cands > 9);
  CHECK(n_cands <= 60);

  auto pl = Cli({"prelabel", "--candidates", cands.string(), "--dimension", "biodiversity",
                 "--backend", "mock", "--out", out});
  REQUIRE(pl.status == kExitOk);
  fs::path scores = dir / "o" / "scores_biodiversity.jsonl";
  CHECK(ReadLines(scores).size() == n_cands);
  // A second run is served from the score store.
  auto again = Cli({"prelabel", "--candidates", cands.string(), "--dimension",
                    "biodiversity", "--out", out});
  CHECK(again.out.find("0 backend calls") != std::string::npos);

  auto bs = Cli({"bandsample", "--scores", scores.string(), "--candidates", cands.string(),
                 "--n", "9", "--seed", "5", "--out", out});
  REQUIRE(bs.status == kExitOk);
  fs::path tasks = dir / "o" / "bandsample.jsonl";
  auto loaded = LoadTasks(tasks);
  CHECK(loaded.size() == 9);
  CHECK(!loaded[0].text.empty());
}

TEST_CASE("agreement and export-gold read the annotation log") {
  TempDir dir;
  fs::path tasks = dir / "tasks.jsonl";
  testing::WriteText(tasks,
                     "{\"sample_id\":\"s1\",\"text\":\"Water use fell.\"}\n"
                     "{\"sample_id\":\"s2\",\"text\":\"Forest cover grew.\"}\n");
  fs::path log = dir / "events.jsonl";
  std::vector<std::string> raters = {"a", "b", "c", "d"};
  {
    AnnotationStore store(LoadTasks(tasks), raters, log);
    for (size_t i = 0; i < 4; ++i) {
      store.Submit({"s1", raters[i], {1, 0, 0}, 1});
      store.Submit({"s2", raters[i], {0, i < 2 ? 1 : 0, 0}, 1});  // forest split
    }
  }
  std::vector<std::string> base = {"--tasks", tasks.string(), "--annotators", "a,b,c,d",
                                   "--log", log.string(), "--out", (dir / "o").string()};
  auto with = [&](std::string sub) {
    std::vector<std::string> v = {std::move(sub)};
    v.insert(v.end(), base.begin(), base.end());
    return v;
  };
  auto agr = Cli(with("agreement"));
  REQUIRE(agr.status == kExitOk);
  auto a = ReadJson(dir / "o" / "agreement.json");
  CHECK(a["complete_samples"] == 2);

  auto blocked = Cli(with("export-gold"));
  CHECK(blocked.status == kExitError);
  CHECK(blocked.out.find("s2") != std::string::npos);
  CHECK_FALSE(fs::exists(dir / "o" / "gold.csv"));

  {
    AnnotationStore store(LoadTasks(tasks), raters, log);
    store.Resolve("s2", Dimension::kForest, 1, "a");
  }
  REQUIRE(Cli(with("export-gold")).status == kExitOk);
  auto gold = LoadGold(dir / "o" / "gold.csv");
  REQUIRE(gold.samples.size() == 2);
  CHECK(gold.samples[1].labels == std::array<int, 4>{0, 1, 0, 1});
}

TEST_CASE("cv reads per-fold prediction files and tabulates reports") {
  TempDir dir;
  std::string out = (dir / "o").string();
  std::string gold = DataPath("gold_fixture.csv").string();
  REQUIRE(Cli({"folds", "--gold", gold, "--label", "nature", "--out", out}).status == kExitOk);
  auto spec = ReadJson(dir / "o" / "folds.json");
  GoldDataset data = LoadGold(gold);
  std::map<std::string, int> truth;
  for (const auto& s : data.samples) truth[s.sample_id] = s.label(GoldLabel::kNature);
  // A perfect "model" written in the adapter format.
  for (size_t f = 0; f < spec["folds"].size(); ++f) {
    std::string body;
    for (const auto& id : spec["folds"][f]) {
      body += json{{"sample_id", id}, {"prob", truth[id] ? 0.9 : 0.1}}.dump() + "\n";
    }
    testing::WriteText(dir / ("pred_fold" + std::to_string(f + 1) + ".jsonl"), body);
  }
  auto cv = Cli({"cv", "--gold", gold, "--folds", (dir / "o" / "folds.json").string(),
                 "--predictions", (dir / "pred_fold{fold}.jsonl").string(), "--model",
                 "oracle", "--out", out});
  REQUIRE(cv.status == kExitOk);
  auto report = ReadJson(dir / "o" / "cv_oracle_nature.json");
  CHECK(report["complete"] == true);

  REQUIRE(Cli({"cv", "--gold", gold, "--folds", (dir / "o" / "folds.json").string(),
               "--runner", "constant-1", "--out", out})
              .status == kExitOk);
  auto table = Cli({"cv", "--reports", (dir / "o" / "cv_oracle_nature.json").string(),
                    (dir / "o" / "cv_constant-1_nature.json").string(), "--out", out});
  REQUIRE(table.status == kExitOk);
  CHECK(table.out.find("1.0000 (0.0000) *") != std::string::npos);

  fs::remove(dir / "pred_fold3.jsonl");
  auto partial = Cli({"cv", "--gold", gold, "--folds", (dir / "o" / "folds.json").string(),
                      "--predictions", (dir / "pred_fold{fold}.jsonl").string(), "--model",
                      "oracle", "--out", out});
  CHECK(partial.status == kExitError);
  auto p = ReadJson(dir / "o" / "cv_oracle_nature.json");
  CHECK(p["complete"] == false);
}

}  // namespace
}  // namespace natdisc
