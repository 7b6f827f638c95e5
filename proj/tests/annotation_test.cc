#include "natdisc/annotation.h"

#include <bitset>
#include <random>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"
#include "kappa_oracle.h"
#include "natdisc/annotation_server.h"
#include "natdisc/guidelines.h"
#include "natdisc/text_util.h"
#include "test_util.h"

namespace natdisc {
namespace {

using json = nlohmann::json;
using testing::HandKappaTables;
using testing::OracleKappaFromPositives;
using testing::Rational;
using testing::TempDir;

const std::vector<std::string> kAnnotators = {"a1", "a2", "a3", "a4"};

std::vector<AnnotationTask> Tasks(size_t n) {
  std::vector<AnnotationTask> t;
  for (size_t i = 0; i < n; ++i) {
    t.push_back({"s" + std::to_string(i), "Sentence " + std::to_string(i) + "."});
  }
  return t;
}

AnnotationRecord Rec(const std::string& sample, const std::string& annotator,
                     int water, int forest, int bio) {
  return {sample, annotator, {water, forest, bio}, 1700000000};
}

// Submits per-annotator votes for one sample: votes[d][a].
void Vote(AnnotationStore& store, const std::string& sample,
          const std::array<std::array<int, 4>, 3>& votes) {
  for (size_t a = 0; a < 4; ++a) {
    store.Submit(Rec(sample, kAnnotators[a], votes[0][a], votes[1][a], votes[2][a]));
  }
}

TEST_CASE("aggregate is the plain majority over all 16 vote patterns") {
  for (int mask = 0; mask < 16; ++mask) {
    int ones = static_cast<int>(std::bitset<4>(mask).count());
    int zeros = 4 - ones;
    Outcome expected = ones > zeros   ? Outcome::kYes
                       : zeros > ones ? Outcome::kNo
                                      : Outcome::kNeedsAdjudication;
    CHECK(AggregateVotes(ones) == expected);
  }
  CHECK_THROWS_AS(AggregateVotes(5), ContractError);
}

TEST_CASE("submit: stored, latest wins, unknown ids rejected") {
  AnnotationStore store(Tasks(3), kAnnotators);
  store.Submit(Rec("s0", "a1", 1, 0, 0));
  CHECK(store.Find("s0", "a1")->label(Dimension::kWater) == 1);
  CHECK(store.NextTask("a1")->sample_id == "s1");
  CHECK(store.NextTask("a2")->sample_id == "s0");
  CHECK(store.Progress().at("a1") == 1);

  store.Submit(Rec("s0", "a1", 0, 0, 0));
  CHECK(store.Find("s0", "a1")->label(Dimension::kWater) == 0);
  CHECK(store.Progress().at("a1") == 1);

  CHECK_THROWS_AS(store.Submit(Rec("s0", "zz", 1, 0, 0)), UnknownIdError);
  CHECK_THROWS_AS(store.Submit(Rec("nope", "a1", 1, 0, 0)), UnknownIdError);
  CHECK_THROWS_AS(store.Submit(Rec("s0", "a1", 2, 0, 0)), ContractError);
  CHECK_THROWS_AS(AnnotationStore(Tasks(1), {"a", "b", "c"}), ContractError);
  CHECK_THROWS_AS(AnnotationStore(Tasks(1), {"a", "b", "c", "a"}), ContractError);
}

TEST_CASE("aggregate_labels examples") {
  AnnotationStore store(Tasks(3), kAnnotators);
  Vote(store, "s0", {{{1, 1, 1, 0}, {1, 1, 0, 0}, {0, 0, 0, 0}}});
  auto out = store.Aggregate("s0");
  CHECK(out[0] == Outcome::kYes);
  CHECK(out[1] == Outcome::kNeedsAdjudication);
  CHECK(out[2] == Outcome::kNo);

  Vote(store, "s1", {{{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}});
  auto g = store.Gold("s1");
  REQUIRE(g);
  CHECK(g->resolution == Resolution::kUnanimous);
  CHECK(g->label(GoldLabel::kNature) == 0);

  store.Submit(Rec("s2", "a1", 1, 0, 0));
  CHECK_THROWS_AS(store.Aggregate("s2"), ContractError);
  CHECK_FALSE(store.Gold("s2"));
}

TEST_CASE("resolve_adjudication") {
  AnnotationStore store(Tasks(2), kAnnotators);
  Vote(store, "s0", {{{0, 0, 0, 1}, {1, 1, 0, 0}, {0, 0, 0, 0}}});
  auto pending = store.Pending();
  REQUIRE(pending.size() == 1);
  CHECK(pending[0].dimension == Dimension::kForest);
  CHECK(pending[0].votes.at("a1") == 1);
  CHECK(pending[0].votes.at("a4") == 0);
  CHECK_FALSE(store.Gold("s0"));

  store.Resolve("s0", Dimension::kForest, 1, "lead", 42);
  auto g = store.Gold("s0");
  REQUIRE(g);
  CHECK(g->label(GoldLabel::kForest) == 1);
  CHECK(g->label(GoldLabel::kWater) == 0);
  CHECK(g->label(GoldLabel::kNature) == 1);
  CHECK(g->resolution == Resolution::kAdjudicated);
  CHECK(store.Pending().empty());
  auto audit = store.audit();
  REQUIRE(audit.size() == 1);
  CHECK(audit[0].resolver_id == "lead");
  CHECK(audit[0].timestamp == 42);

  CHECK_THROWS_AS(store.Resolve("s0", Dimension::kForest, 0, "lead"), NotPendingError);
  CHECK_THROWS_AS(store.Resolve("s0", Dimension::kWater, 1, "lead"), NotPendingError);
  CHECK_THROWS_AS(store.Resolve("s1", Dimension::kWater, 1, "lead"), NotPendingError);
  CHECK_THROWS_AS(store.Resolve("zz", Dimension::kWater, 1, "lead"), UnknownIdError);

  AnnotationStore other(Tasks(1), kAnnotators);
  Vote(other, "s0", {{{1, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}});
  other.Resolve("s0", Dimension::kWater, 0, "lead");
  CHECK(other.Gold("s0")->label(GoldLabel::kNature) == 0);
}

TEST_CASE("fleiss kappa: hand tables, frozen values and oracle") {
  // Frozen from the rational oracle: 928/1440 = 29/45.
  KappaResult r = FleissKappa({4, 4, 0, 2});
  REQUIRE(r.defined());
  CHECK(std::abs(r.value - 0.64444444444444444) < 1e-9);
  CHECK(*OracleKappaFromPositives({4, 4, 0, 2}) == Rational(928, 1440));

  for (const auto& table : HandKappaTables()) {
    auto oracle = OracleKappaFromPositives(table.positives);
    REQUIRE(oracle);
    CHECK(*oracle == table.expected);
    KappaResult k = FleissKappa(table.positives);
    REQUIRE(k.defined());
    CHECK(std::abs(k.value - table.expected.value()) < 1e-9);
  }

  KappaResult perfect = FleissKappa({4, 0, 0, 4, 4});
  REQUIRE(perfect.defined());
  CHECK(perfect.value == 1.0);

  CHECK(FleissKappa({4, 4, 4}).status == KappaResult::Status::kUndefined);
  CHECK(FleissKappa({0, 0}).status == KappaResult::Status::kUndefined);
  CHECK_FALSE(OracleKappaFromPositives({0, 0}));

  CHECK_THROWS_AS(FleissKappa({2}), ContractError);
  CHECK_THROWS_AS(FleissKappa({2, 5}), ContractError);
}

TEST_CASE("fleiss kappa: category swap invariance and oracle on random tables") {
  std::mt19937_64 gen(20240611);
  for (int trial = 0; trial < 1000; ++trial) {
    size_t items = 2 + gen() % 30;
    std::vector<int> pos(items);
    std::vector<int> swapped(items);
    for (size_t i = 0; i < items; ++i) {
      pos[i] = static_cast<int>(gen() % 5);
      swapped[i] = 4 - pos[i];
    }
    KappaResult a = FleissKappa(pos);
    KappaResult b = FleissKappa(swapped);
    auto oracle = OracleKappaFromPositives(pos);
    REQUIRE(a.status == b.status);
    REQUIRE(a.defined() == oracle.has_value());
    if (a.defined()) {
      CHECK(std::abs(a.value - b.value) < 1e-12);
      CHECK(std::abs(a.value - oracle->value()) < 1e-9);
      CHECK(a.value <= 1.0);
    }
  }
}

TEST_CASE("agreement breakdown") {
  auto b = AgreementBreakdownOf({4, 3, 2});
  CHECK(b.agree_2of4 == doctest::Approx(1.0 / 3));
  CHECK(b.agree_3of4 == doctest::Approx(1.0 / 3));
  CHECK(b.agree_4of4 == doctest::Approx(1.0 / 3));
  // Majority side may be the zeros.
  auto c = AgreementBreakdownOf({0, 1, 3, 4});
  CHECK(c.agree_3of4 == 0.5);
  CHECK(c.agree_4of4 == 0.5);
  auto u = AgreementBreakdownOf({0, 4, 4});
  CHECK(u.agree_2of4 == 0);
  CHECK(u.agree_3of4 == 0);
  CHECK(u.agree_4of4 == 1);

  std::mt19937_64 gen(5);
  for (int t = 0; t < 200; ++t) {
    std::vector<int> v(1 + gen() % 50);
    for (auto& x : v) x = static_cast<int>(gen() % 5);
    auto r = AgreementBreakdownOf(v);
    size_t c2 = 0, c3 = 0, c4 = 0;
    for (int x : v) {
      int m = std::max(x, 4 - x);
      (m == 2 ? c2 : m == 3 ? c3 : c4)++;
    }
    CHECK(c2 + c3 + c4 == v.size());
    CHECK(r.agree_2of4 == static_cast<double>(c2) / v.size());
    CHECK(r.agree_4of4 == static_cast<double>(c4) / v.size());
  }
}

TEST_CASE("store agreement report") {
  AnnotationStore store(Tasks(4), kAnnotators);
  CHECK(store.Agreement().dimensions.empty());
  // Water votes per sample: 4, 4, 0, 2 ones.
  Vote(store, "s0", {{{1, 1, 1, 1}, {0, 0, 0, 0}, {0, 0, 0, 0}}});
  Vote(store, "s1", {{{1, 1, 1, 1}, {0, 0, 0, 0}, {0, 0, 0, 0}}});
  Vote(store, "s2", {{{0, 0, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}});
  CHECK(store.Agreement().complete_samples == 3);
  Vote(store, "s3", {{{1, 0, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}});
  auto report = store.Agreement();
  CHECK(report.complete_samples == 4);
  CHECK(report.dimensions.at(Dimension::kWater).kappa.value ==
        doctest::Approx(29.0 / 45).epsilon(1e-12));
  CHECK(report.dimensions.at(Dimension::kWater).breakdown.agree_2of4 == 0.25);
  CHECK_FALSE(report.dimensions.at(Dimension::kForest).kappa.defined());
  auto j = json::parse(AgreementJson(report));
  CHECK(j["dimensions"]["forest"]["status"] == "undefined");
  CHECK(j["dimensions"]["forest"]["kappa"].is_null());
  CHECK(j["dimensions"]["water"]["status"] == "defined");
}

TEST_CASE("export_gold") {
  AnnotationStore store(Tasks(10), kAnnotators);
  std::mt19937_64 gen(11);
  for (int i = 0; i < 10; ++i) {
    std::array<std::array<int, 4>, 3> v{};
    for (auto& dim : v) {
      int ones = static_cast<int>(gen() % 5);
      if (ones == 2) ones = 3;  // no splits in this pass
      for (int a = 0; a < 4; ++a) dim[a] = a < ones ? 1 : 0;
    }
    Vote(store, "s" + std::to_string(i), v);
  }
  auto gold = store.ExportGold();
  REQUIRE(gold.size() == 10);
  for (const auto& g : gold) {
    CHECK(g.label(GoldLabel::kNature) ==
          (g.label(GoldLabel::kWater) | g.label(GoldLabel::kForest) |
           g.label(GoldLabel::kBiodiversity)));
  }
  std::string csv = GoldCsv(gold);
  CHECK(csv.rfind("sample_id,text,water,forest,biodiversity,nature\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 11);
  auto dist = DistributionOf(gold);
  CHECK(dist.total == 10);
  size_t combos = 0;
  for (const auto& [k, v] : dist.combinations) combos += v;
  CHECK(combos == 10);
  CHECK(dist.positives[3] == 10 - dist.combinations["none"]);

  // One 2-2 split blocks export.
  Vote(store, "s4", {{{1, 1, 0, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}}});
  try {
    store.ExportGold();
    FAIL("export should be refused");
  } catch (const UnresolvedError& e) {
    CHECK(e.blockers() == std::vector<std::string>{"s4"});
    CHECK(std::string(e.what()).find("s4") != std::string::npos);
  }
  store.Resolve("s4", Dimension::kWater, 1, "lead");
  CHECK(store.ExportGold().size() == 10);
  CHECK(store.Gold("s4")->label(GoldLabel::kNature) == 1);
}

TEST_CASE("gold csv and jsonl round trip") {
  std::vector<GoldSample> samples(3);
  samples[0] = {"x1", "Plain text.", {1, 0, 0, 1}, Resolution::kUnanimous};
  samples[1] = {"x2", "Has, comma and \"quotes\"\nand newline", {0, 0, 0, 0},
                Resolution::kMajority};
  samples[2] = {"x3", "Forest.", {0, 1, 1, 1}, Resolution::kAdjudicated};
  auto csv = ParseGoldCsv(GoldCsv(samples), "mem");
  auto jl = ParseGoldJsonl(GoldJsonl(samples), "mem");
  for (const auto* ds : {&csv, &jl}) {
    REQUIRE(ds->samples.size() == 3);
    for (size_t i = 0; i < 3; ++i) {
      CHECK(ds->samples[i].sample_id == samples[i].sample_id);
      CHECK(ds->samples[i].text == samples[i].text);
      CHECK(ds->samples[i].labels == samples[i].labels);
    }
    for (GoldLabel l : kAllGoldLabels) CHECK(ds->has(l));
  }
  CHECK(jl.samples[2].resolution == Resolution::kAdjudicated);
  CHECK_FALSE(csv.samples[2].resolution);

  auto derived = ParseGoldCsv("sample_id,text,water,forest,biodiversity\na,t,0,1,0\n", "m");
  CHECK(derived.has(GoldLabel::kNature));
  CHECK(derived.samples[0].label(GoldLabel::kNature) == 1);

  auto bio_only = ParseGoldCsv("sample_id,text,biodiversity\na,t,1\n", "m");
  CHECK(bio_only.has(GoldLabel::kBiodiversity));
  CHECK_FALSE(bio_only.has(GoldLabel::kNature));
  CHECK_THROWS_AS(bio_only.Require(GoldLabel::kNature), InputError);
  CHECK_THROWS_AS(ParseGoldCsv("sample_id,text,water\na,t,2\n", "m"), InputError);
  CHECK_THROWS_AS(ParseGoldCsv("sample_id,text,water\na,t,1\na,u,0\n", "m"), InputError);
  CHECK_THROWS_AS(ParseGoldCsv("id,text\na,t\n", "m"), InputError);
}

TEST_CASE("log replay restores the store") {
  TempDir dir;
  auto log = dir / "annotations.jsonl";
  {
    AnnotationStore store(Tasks(3), kAnnotators, log);
    Vote(store, "s0", {{{1, 1, 0, 0}, {1, 1, 1, 1}, {0, 0, 0, 0}}});
    store.Submit(Rec("s1", "a2", 1, 1, 1));
    store.Submit(Rec("s1", "a2", 0, 1, 1));
    store.Resolve("s0", Dimension::kWater, 1, "lead", 7);
  }
  AnnotationStore back(Tasks(3), kAnnotators, log);
  CHECK(back.Find("s1", "a2")->label(Dimension::kWater) == 0);
  CHECK(back.Gold("s0")->label(GoldLabel::kWater) == 1);
  CHECK(back.audit().size() == 1);
  CHECK(back.Pending().empty());
  CHECK(back.Progress().at("a2") == 2);
  back.Submit(Rec("s2", "a1", 1, 0, 0));
  CHECK(ReadLines(log).size() == 8);

  testing::WriteText(dir / "bad.jsonl", "{\"event\":\"annotation\"}\n");
  CHECK_THROWS_AS(AnnotationStore(Tasks(3), kAnnotators, dir / "bad.jsonl"),
                  InputError);
}

TEST_CASE("concurrent submissions and reads") {
  AnnotationStore store(Tasks(50), kAnnotators);
  std::vector<std::thread> threads;
  for (size_t a = 0; a < 4; ++a) {
    threads.emplace_back([&, a] {
      for (int i = 0; i < 50; ++i) {
        store.Submit(Rec("s" + std::to_string(i), kAnnotators[a], i % 2, 0, 1));
        store.Agreement();
        store.Pending();
      }
    });
  }
  for (auto& t : threads) t.join();
  CHECK(store.CompleteSamples() == 50);
  for (const auto& [id, n] : store.Progress()) CHECK(n == 50);
  CHECK(store.ExportGold().size() == 50);
}

TEST_CASE("tasks load from jsonl and csv") {
  TempDir dir;
  testing::WriteText(dir / "t.jsonl",
                     "{\"sent_id\":\"d#0\",\"text\":\"One.\"}\n"
                     "{\"sample_id\":\"d#1\",\"text\":\"Two.\"}\n");
  auto t = LoadTasks(dir / "t.jsonl");
  REQUIRE(t.size() == 2);
  CHECK(t[0].sample_id == "d#0");
  testing::WriteText(dir / "t.csv", "sample_id,text\nq,\"a, b\"\n");
  CHECK(LoadTasks(dir / "t.csv")[0].text == "a, b");
}

struct LiveServer {
  explicit LiveServer(AnnotationStore& store) : server(store) {
    port = server.Bind("127.0.0.1", 0);
    thread = std::thread([this] { server.Listen(); });
    server.WaitUntilReady();
  }
  ~LiveServer() {
    server.Stop();
    thread.join();
  }
  AnnotationServer server;
  int port = 0;
  std::thread thread;
};

json Body(const httplib::Result& r) { return json::parse(r->body); }

TEST_CASE("http api round trip") {
  std::vector<AnnotationTask> tasks = {{"doc#0", "Water stress."},
                                       {"doc#1", "Forests."}};
  AnnotationStore store(tasks, kAnnotators);
  LiveServer live(store);
  httplib::Client client("127.0.0.1", live.port);

  auto next = client.Get("/tasks/next?annotator=a1");
  REQUIRE(next);
  CHECK(next->status == 200);
  json task = Body(next);
  CHECK(task["sample_id"] == "doc#0");
  CHECK(task["done"] == false);
  CHECK(task["guidelines"]["water"]["positive"] ==
        BuiltinGuideline(Dimension::kWater).positive);

  CHECK(client.Get("/tasks/next")->status == 400);
  CHECK(client.Get("/tasks/next?annotator=ghost")->status == 404);

  auto post = [&](const std::string& sample, const std::string& who, int w, int f,
                  int b) {
    json body = {{"sample_id", sample}, {"annotator_id", who},
                 {"water", w}, {"forest", f}, {"biodiversity", b}};
    return client.Post("/annotations", body.dump(), "application/json");
  };
  auto r = post("doc#0", "a1", 1, 0, 0);
  REQUIRE(r);
  CHECK(r->status == 200);
  CHECK(Body(client.Get("/progress"))["annotators"]["a1"] == 1);
  CHECK(Body(client.Get("/tasks/next?annotator=a1"))["sample_id"] == "doc#1");
  auto prior = Body(client.Get("/tasks/doc%230?annotator=a1"));
  CHECK(prior["prior"]["water"] == 1);
  CHECK(Body(client.Get("/tasks/doc%230?annotator=a2"))["prior"].is_null());

  CHECK(post("doc#0", "ghost", 1, 0, 0)->status == 404);
  CHECK(post("doc#9", "a1", 1, 0, 0)->status == 404);
  CHECK(post("doc#0", "a1", 3, 0, 0)->status == 400);
  CHECK(client.Post("/annotations", "{not json", "application/json")->status == 400);

  post("doc#0", "a2", 1, 0, 0);
  post("doc#0", "a3", 0, 1, 0);
  post("doc#0", "a4", 0, 0, 0);
  for (const auto& a : kAnnotators) post("doc#1", a, 0, 1, 0);

  json pending = Body(client.Get("/adjudications"))["pending"];
  REQUIRE(pending.size() == 1);
  CHECK(pending[0]["sample_id"] == "doc#0");
  CHECK(pending[0]["dimension"] == "water");
  CHECK(pending[0]["votes"]["a3"] == 0);

  json agreement = Body(client.Get("/agreement"));
  CHECK(agreement["complete_samples"] == 2);
  double served = agreement["dimensions"]["water"]["kappa"];
  CHECK(served == store.Agreement().dimensions.at(Dimension::kWater).kappa.value);

  json resolution = {{"dimension", "water"}, {"value", 1}, {"resolver_id", "a1"}};
  auto res = client.Post("/adjudications/doc%230", resolution.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(Body(res)["gold"]["nature"] == 1);
  CHECK(Body(res)["gold"]["resolution"] == "Adjudicated");
  auto again = client.Post("/adjudications/doc%230", resolution.dump(), "application/json");
  CHECK(again->status == 409);
  CHECK(client.Post("/adjudications/none", resolution.dump(), "application/json")->status == 404);
  CHECK(client.Post("/adjudications/doc%231", "{}", "application/json")->status == 400);
  CHECK(Body(client.Get("/adjudications"))["pending"].empty());
  CHECK(Body(client.Get("/tasks/next?annotator=a1"))["done"] == true);

  json guidelines = Body(client.Get("/guidelines"));
  CHECK(guidelines["forest"]["negative"] == BuiltinGuideline(Dimension::kForest).negative);
  CHECK(store.ExportGold().size() == 2);
}

}  // namespace
}  // namespace natdisc
