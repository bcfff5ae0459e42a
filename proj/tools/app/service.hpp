#pragma once

// HTTP service behind the annotation UI: question browsing, predictions and
// the append-only annotation store. Handlers are plain member functions so
// they can be exercised without a socket; mount() wires them to httplib.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "app/runtime.hpp"

namespace httplib {
class Server;
}

namespace tqa::app {

struct HttpResponse {
  int status = 200;
  std::string body;
  std::string content_type = "application/json";
};

struct Annotation {
  std::string question_id;
  std::string cell_id;
  std::string value;
  std::string annotator;
};

// {question_id, cell_id, value, annotator}
nlohmann::ordered_json to_json(const Annotation& a);

/// One compact JSON object per line, appended and fsynced before append()
/// returns. Appends are serialized; reads see whole lines only.
class AnnotationStore {
 public:
  explicit AnnotationStore(std::filesystem::path path);

  void append(const Annotation& a);
  std::string export_bytes() const;
  // Parsed records in file order; a torn final line is skipped.
  std::vector<Annotation> load() const;
  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  mutable std::mutex mu_;
};

class Service {
 public:
  Service(std::vector<QARecord> dataset, const Runtime& runtime, std::filesystem::path annotations_path);

  HttpResponse list_questions(const std::optional<std::string>& split) const;
  HttpResponse get_question(const std::string& id) const;
  HttpResponse predict(const std::string& id, const std::optional<std::string>& alpha) const;
  HttpResponse post_annotation(const std::string& body);
  HttpResponse export_annotations() const;
  HttpResponse annotation_report() const;

  void mount(httplib::Server& server);

 private:
  struct Entry {
    QARecord record;
    std::vector<LogicalTable> tables;
    std::optional<Error> clean_error;
  };

  const Entry* find(const std::string& id) const;
  std::optional<std::string> annotated_value(const Entry& entry, const Annotation& a) const;

  std::map<std::string, Entry> entries_;
  const Runtime& runtime_;
  AnnotationStore store_;
};

}  // namespace tqa::app
