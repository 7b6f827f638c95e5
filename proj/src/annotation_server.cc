#include "natdisc/annotation_server.h"

#include "httplib.h"
#include "json.hpp"
#include "natdisc/guidelines.h"

namespace natdisc {
namespace {

using json = nlohmann::json;

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void Fail(httplib::Response& res, int status, const std::string& message) {
  Reply(res, status, {{"error", message}});
}

json GuidelinesJson() {
  json j = json::object();
  for (Dimension d : kAllDimensions) {
    const Guideline& g = BuiltinGuideline(d);
    j[std::string(DimensionName(d))] = {{"positive", g.positive},
                                        {"negative", g.negative}};
  }
  return j;
}

json LabelsJson(const AnnotationRecord& r) {
  json j = json::object();
  for (Dimension d : kAllDimensions) j[std::string(DimensionName(d))] = r.label(d);
  return j;
}

json GoldJson(const GoldSample& g) {
  json j = {{"sample_id", g.sample_id}, {"text", g.text}};
  for (GoldLabel l : kAllGoldLabels) j[std::string(GoldLabelName(l))] = g.label(l);
  if (g.resolution) j["resolution"] = ResolutionName(*g.resolution);
  return j;
}

// Runs |fn| and maps toolkit errors onto HTTP statuses.
template <typename Fn>
void Guard(httplib::Response& res, Fn&& fn) {
  try {
    fn();
  } catch (const UnknownIdError& e) {
    Fail(res, 404, e.what());
  } catch (const NotPendingError& e) {
    Fail(res, 409, e.what());
  } catch (const InputError& e) {
    Fail(res, 400, e.what());
  } catch (const ContractError& e) {
    Fail(res, 400, e.what());
  } catch (const json::exception& e) {
    Fail(res, 400, std::string("bad request body: ") + e.what());
  } catch (const std::exception& e) {
    Fail(res, 500, e.what());
  }
}

}  // namespace

AnnotationServer::AnnotationServer(AnnotationStore& store, Options options)
    : store_(store),
      options_(std::move(options)),
      server_(std::make_unique<httplib::Server>()) {
  Route();
}

AnnotationServer::~AnnotationServer() { Stop(); }

void AnnotationServer::Route() {
  httplib::Server& s = *server_;
  s.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                         {"Access-Control-Allow-Headers", "Content-Type"},
                         {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
  s.Options(".*", [](const httplib::Request&, httplib::Response& res) {
    res.status = 204;
  });

  s.Get("/guidelines", [](const httplib::Request&, httplib::Response& res) {
    Reply(res, 200, GuidelinesJson());
  });

  s.Get("/tasks/next", [this](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      if (!req.has_param("annotator")) {
        Fail(res, 400, "missing annotator parameter");
        return;
      }
      std::string annotator = req.get_param_value("annotator");
      auto task = store_.NextTask(annotator);
      if (!task) {
        Reply(res, 200, {{"done", true}, {"annotator", annotator}});
        return;
      }
      Reply(res, 200, {{"done", false},
                       {"annotator", annotator},
                       {"sample_id", task->sample_id},
                       {"text", task->text},
                       {"prior", nullptr},
                       {"guidelines", GuidelinesJson()}});
    });
  });

  s.Get(R"(/tasks/(.+))", [this](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      std::string sample_id = req.matches[1];
      if (!req.has_param("annotator")) {
        Fail(res, 400, "missing annotator parameter");
        return;
      }
      auto prior = store_.Find(sample_id, req.get_param_value("annotator"));
      std::string text;
      for (const auto& t : store_.tasks()) {
        if (t.sample_id == sample_id) text = t.text;
      }
      Reply(res, 200, {{"sample_id", sample_id},
                       {"text", text},
                       {"prior", prior ? LabelsJson(*prior) : json(nullptr)},
                       {"guidelines", GuidelinesJson()}});
    });
  });

  s.Post("/annotations", [this](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      AnnotationRecord r = RecordFromJson(req.body);
      store_.Submit(r);
      Reply(res, 200, {{"status", "stored"},
                       {"sample_id", r.sample_id},
                       {"annotator_id", r.annotator_id}});
    });
  });

  s.Get("/adjudications", [this](const httplib::Request&, httplib::Response& res) {
    Guard(res, [&] {
      json list = json::array();
      for (const auto& p : store_.Pending()) {
        list.push_back({{"sample_id", p.sample_id},
                        {"text", p.text},
                        {"dimension", DimensionName(p.dimension)},
                        {"votes", p.votes}});
      }
      Reply(res, 200, {{"pending", list}});
    });
  });

  s.Post(R"(/adjudications/(.+))",
         [this](const httplib::Request& req, httplib::Response& res) {
    Guard(res, [&] {
      std::string sample_id = req.matches[1];
      json body = json::parse(req.body);
      auto dim = ParseDimension(body.at("dimension").get<std::string>());
      if (!dim) throw InputError("unknown dimension");
      const json& v = body.at("value");
      int value = v.is_boolean() ? (v.get<bool>() ? 1 : 0) : v.get<int>();
      store_.Resolve(sample_id, *dim, value,
                     body.at("resolver_id").get<std::string>());
      auto gold = store_.Gold(sample_id);
      Reply(res, 200, {{"sample_id", sample_id},
                       {"dimension", DimensionName(*dim)},
                       {"value", value},
                       {"gold", gold ? GoldJson(*gold) : json(nullptr)}});
    });
  });

  s.Get("/agreement", [this](const httplib::Request&, httplib::Response& res) {
    Guard(res, [&] { Reply(res, 200, json::parse(AgreementJson(store_.Agreement()))); });
  });

  s.Get("/progress", [this](const httplib::Request&, httplib::Response& res) {
    Guard(res, [&] {
      Reply(res, 200, {{"annotators", store_.Progress()},
                       {"total_tasks", store_.tasks().size()},
                       {"complete_samples", store_.CompleteSamples()},
                       {"pending_adjudications", store_.Pending().size()}});
    });
  });

  if (options_.static_dir) {
    if (!s.set_mount_point("/ui", options_.static_dir->string())) {
      throw InputError("cannot serve static files from " +
                       options_.static_dir->string());
    }
  }
}

int AnnotationServer::Bind(const std::string& host, int port) {
  int bound = port == 0 ? server_->bind_to_any_port(host)
                        : (server_->bind_to_port(host, port) ? port : -1);
  if (bound <= 0) {
    throw Error("cannot bind " + host + ":" + std::to_string(port));
  }
  return bound;
}

void AnnotationServer::Listen() { server_->listen_after_bind(); }

void AnnotationServer::WaitUntilReady() { server_->wait_until_ready(); }

void AnnotationServer::Stop() {
  if (server_ && server_->is_running()) server_->stop();
}

}  // namespace natdisc
