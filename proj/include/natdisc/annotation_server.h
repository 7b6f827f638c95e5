#ifndef NATDISC_ANNOTATION_SERVER_H_
#define NATDISC_ANNOTATION_SERVER_H_

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "natdisc/annotation.h"

namespace httplib {
class Server;
}

namespace natdisc {

// JSON API over an AnnotationStore:
//   GET  /tasks/next?annotator=ID      next unlabeled task + guidelines
//   GET  /tasks/{sample_id}?annotator=ID  task + that annotator's prior labels
//   POST /annotations                  AnnotationRecord
//   GET  /adjudications                pending 2-2 splits
//   POST /adjudications/{sample_id}    {dimension, value, resolver_id}
//   GET  /agreement                    AgreementReport
//   GET  /progress                     per-annotator record counts
//   GET  /guidelines                   guideline texts per dimension
// Errors are {"error": message} with 400 (malformed), 404 (unknown id) or
// 409 (nothing pending to resolve).
class AnnotationServer {
 public:
  struct Options {
    std::optional<std::filesystem::path> static_dir;  // mounted at /ui
  };

  AnnotationServer(AnnotationStore& store, Options options);
  explicit AnnotationServer(AnnotationStore& store)
      : AnnotationServer(store, Options{}) {}
  ~AnnotationServer();

  // Port 0 picks a free port. Returns the bound port; throws Error on
  // failure.
  int Bind(const std::string& host, int port);
  // Serves until Stop(); call after Bind.
  void Listen();
  void WaitUntilReady();
  void Stop();

 private:
  void Route();

  AnnotationStore& store_;
  Options options_;
  std::unique_ptr<httplib::Server> server_;
};

}  // namespace natdisc

#endif  // NATDISC_ANNOTATION_SERVER_H_
