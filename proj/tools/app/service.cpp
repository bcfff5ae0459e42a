#include "app/service.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <fstream>
#include <sstream>

#include <httplib.h>

#include "tqa/utf8.hpp"

namespace tqa::app {

namespace {

HttpResponse json_response(int status, const nlohmann::ordered_json& body) { return {status, body.dump(), "application/json"}; }

HttpResponse error_response(int status, std::string_view kind, std::string_view message) {
  nlohmann::ordered_json j;
  j["error"] = kind;
  j["message"] = message;
  return json_response(status, j);
}

int status_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::kProviderUnavailable:
    case ErrorCode::kLlmUnavailable:
      return 503;
    default:
      return 422;
  }
}

void write_all(int fd, const std::string& bytes) {
  std::size_t done = 0;
  while (done < bytes.size()) {
    const ssize_t n = ::write(fd, bytes.data() + done, bytes.size() - done);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIoError, std::string("annotation write failed: ") + std::strerror(errno));
    }
    done += static_cast<std::size_t>(n);
  }
}

std::optional<Annotation> annotation_from_json(const nlohmann::json& j, std::string* why) {
  if (!j.is_object()) {
    *why = "body must be a JSON object";
    return std::nullopt;
  }
  Annotation a;
  for (auto [field, dest] : {std::pair{"question_id", &a.question_id}, std::pair{"cell_id", &a.cell_id},
                             std::pair{"value", &a.value}, std::pair{"annotator", &a.annotator}}) {
    if (!j.contains(field) || !j[field].is_string()) {
      *why = std::string("\"") + field + "\" must be a string";
      return std::nullopt;
    }
    *dest = j[field].get<std::string>();
  }
  if (a.question_id.empty() || a.cell_id.empty()) {
    *why = "question_id and cell_id must be non-empty";
    return std::nullopt;
  }
  return a;
}

}  // namespace

nlohmann::ordered_json to_json(const Annotation& a) {
  nlohmann::ordered_json j;
  j["question_id"] = a.question_id;
  j["cell_id"] = a.cell_id;
  j["value"] = a.value;
  j["annotator"] = a.annotator;
  return j;
}

AnnotationStore::AnnotationStore(std::filesystem::path path) : path_(std::move(path)) {}

void AnnotationStore::append(const Annotation& a) {
  const std::string line = to_json(a).dump() + "\n";
  std::lock_guard lock(mu_);
  const bool existed = std::filesystem::exists(path_);
  const int fd = ::open(path_.c_str(), O_WRONLY | O_APPEND | O_CREAT | O_CLOEXEC, 0644);
  if (fd < 0) throw Error(ErrorCode::kIoError, "cannot open " + path_.string() + ": " + std::strerror(errno));
  try {
    write_all(fd, line);
    if (::fsync(fd) != 0) throw Error(ErrorCode::kIoError, std::string("fsync failed: ") + std::strerror(errno));
  } catch (...) {
    ::close(fd);
    throw;
  }
  ::close(fd);
  if (!existed) {
    // Make the new directory entry durable too.
    const auto dir = path_.has_parent_path() ? path_.parent_path() : std::filesystem::path(".");
    if (const int dfd = ::open(dir.c_str(), O_RDONLY | O_DIRECTORY | O_CLOEXEC); dfd >= 0) {
      ::fsync(dfd);
      ::close(dfd);
    }
  }
}

std::string AnnotationStore::export_bytes() const {
  std::lock_guard lock(mu_);
  std::ifstream in(path_, std::ios::binary);
  if (!in) return {};
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::vector<Annotation> AnnotationStore::load() const {
  std::vector<Annotation> out;
  std::istringstream in(export_bytes());
  std::string why;
  for (std::string line; std::getline(in, line);) {
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) continue;
    if (auto a = annotation_from_json(j, &why)) out.push_back(std::move(*a));
  }
  return out;
}

Service::Service(std::vector<QARecord> dataset, const Runtime& runtime, std::filesystem::path annotations_path)
    : runtime_(runtime), store_(std::move(annotations_path)) {
  for (auto& rec : dataset) {
    Entry e;
    try {
      e.tables = clean_document(RawDocument{rec.question_id, rec.document_html}, runtime.config().cell_id_attr);
    } catch (const Error& err) {
      e.clean_error = err;
    }
    const std::string id = rec.question_id;
    e.record = std::move(rec);
    entries_.emplace(id, std::move(e));
  }
}

const Service::Entry* Service::find(const std::string& id) const {
  const auto it = entries_.find(id);
  return it == entries_.end() ? nullptr : &it->second;
}

HttpResponse Service::list_questions(const std::optional<std::string>& split) const {
  std::optional<Split> wanted;
  if (split) {
    wanted = split_from_string(*split);
    if (!wanted) return error_response(422, "InvalidSplit", "split must be train, validation or test");
  }
  auto arr = nlohmann::ordered_json::array();
  for (const auto& [id, e] : entries_) {
    if (wanted && e.record.split != *wanted) continue;
    nlohmann::ordered_json j;
    j["question_id"] = id;
    j["question"] = e.record.question;
    arr.push_back(std::move(j));
  }
  return json_response(200, arr);
}

HttpResponse Service::get_question(const std::string& id) const {
  const Entry* e = find(id);
  if (e == nullptr) return error_response(404, "UnknownQuestionId", "no question '" + id + "'");
  nlohmann::ordered_json j;
  j["question_id"] = id;
  j["question"] = e->record.question;
  j["split"] = to_string(e->record.split);
  j["grid"] = e->tables.empty() ? nlohmann::ordered_json(nullptr) : to_json(e->tables.front());
  auto grids = nlohmann::ordered_json::array();
  for (const auto& t : e->tables) grids.push_back(to_json(t));
  j["grids"] = std::move(grids);
  // Gold is shown to annotators for validation questions only.
  if (e->record.split == Split::kValidation && e->record.gold_cell_id) j["gold_cell_id"] = *e->record.gold_cell_id;
  if (e->clean_error) j["error"] = e->clean_error->what();
  return json_response(200, j);
}

HttpResponse Service::predict(const std::string& id, const std::optional<std::string>& alpha_text) const {
  const Entry* e = find(id);
  if (e == nullptr) return error_response(404, "UnknownQuestionId", "no question '" + id + "'");
  double alpha = runtime_.config().alpha;
  if (alpha_text) {
    const auto [end, ec] = std::from_chars(alpha_text->data(), alpha_text->data() + alpha_text->size(), alpha);
    if (ec != std::errc() || end != alpha_text->data() + alpha_text->size() || !(alpha >= 0.0 && alpha <= 1.0)) {
      return error_response(422, "AlphaOutOfRange", "alpha must be a number in [0, 1]");
    }
  }
  if (e->clean_error) return error_response(422, error_name(e->clean_error->code()), e->clean_error->what());
  try {
    const PipelineConfig cfg = runtime_.pipeline();
    const auto scored = score_tables(e->record.question, e->tables, cfg.retrieval, runtime_.scorers());
    const Extraction ex = extract_scored(scored, e->tables, alpha);
    nlohmann::ordered_json j = to_json(make_prediction(id, ex, alpha));
    try {
      const UnitInfo unit =
          extract_unit(e->record.question, e->tables[ex.table_index], cfg.unit_strategy, runtime_.llm());
      j["unit"] = unit.unit_label;
      j["value"] = normalize_value(ex.raw_text, unit).canonical;
    } catch (const Error& err) {
      j["value"] = nullptr;
      j["error"] = err.what();
    }
    return json_response(200, j);
  } catch (const Error& err) {
    return error_response(status_for(err), error_name(err.code()), err.what());
  }
}

HttpResponse Service::post_annotation(const std::string& body) {
  const auto parsed = nlohmann::json::parse(body, nullptr, false);
  if (parsed.is_discarded()) return error_response(422, "InvalidBody", "body is not valid JSON");
  std::string why;
  const auto a = annotation_from_json(parsed, &why);
  if (!a) return error_response(422, "InvalidBody", why);
  const Entry* e = find(a->question_id);
  if (e == nullptr) return error_response(404, "UnknownQuestionId", "no question '" + a->question_id + "'");
  const bool known_cell = std::any_of(e->tables.begin(), e->tables.end(),
                                      [&](const LogicalTable& t) { return t.find(a->cell_id) != nullptr; });
  if (!known_cell) return error_response(422, "InvalidBody", "cell '" + a->cell_id + "' is not in the question's table");
  try {
    store_.append(*a);
  } catch (const nlohmann::json::exception& ex) {
    return error_response(422, "InvalidBody", ex.what());
  } catch (const Error& err) {
    return error_response(500, error_name(err.code()), err.what());
  }
  return json_response(201, to_json(*a));
}

HttpResponse Service::export_annotations() const { return {200, store_.export_bytes(), "application/x-ndjson"}; }

std::optional<std::string> Service::annotated_value(const Entry& entry, const Annotation& a) const {
  for (const auto& t : entry.tables) {
    if (t.find(a.cell_id) == nullptr) continue;
    try {
      const UnitInfo unit =
          extract_unit(entry.record.question, t, runtime_.pipeline().unit_strategy, runtime_.llm());
      return normalize_value(a.value, unit).canonical;
    } catch (const Error&) {
      break;
    }
  }
  // Not a number we can scale; score what the annotator typed.
  return utf8::trim(a.value);
}

HttpResponse Service::annotation_report() const {
  std::map<std::string, Annotation> latest;
  for (auto& a : store_.load()) latest.insert_or_assign(a.question_id, std::move(a));
  std::vector<Prediction> predictions;
  std::vector<QARecord> gold;
  for (const auto& [id, a] : latest) {
    const Entry* e = find(id);
    if (e == nullptr || !e->record.gold_cell_id || !e->record.gold_value) continue;
    Prediction p;
    p.question_id = id;
    p.cell_id = a.cell_id;
    p.value = annotated_value(*e, a);
    predictions.push_back(std::move(p));
    gold.push_back(e->record);
  }
  return json_response(200, to_json(evaluate(predictions, gold), false));
}

void Service::mount(httplib::Server& server) {
  auto send = [](httplib::Response& res, const HttpResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  };
  auto param = [](const httplib::Request& req, const char* name) -> std::optional<std::string> {
    if (!req.has_param(name)) return std::nullopt;
    return req.get_param_value(name);
  };
  server.Get("/questions", [this, send, param](const httplib::Request& req, httplib::Response& res) {
    send(res, list_questions(param(req, "split")));
  });
  server.Get("/questions/:id", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, get_question(req.path_params.at("id")));
  });
  server.Get("/predict/:id", [this, send, param](const httplib::Request& req, httplib::Response& res) {
    send(res, predict(req.path_params.at("id"), param(req, "alpha")));
  });
  server.Post("/annotations", [this, send](const httplib::Request& req, httplib::Response& res) {
    send(res, post_annotation(req.body));
  });
  server.Get("/annotations/export", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, export_annotations());
  });
  server.Get("/annotations/report", [this, send](const httplib::Request&, httplib::Response& res) {
    send(res, annotation_report());
  });
  server.set_post_routing_handler([](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Origin", "*");
  });
  server.Options(R"(.*)", [](const httplib::Request&, httplib::Response& res) {
    res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
    res.set_header("Access-Control-Allow-Headers", "Content-Type");
    res.status = 204;
  });
}

}  // namespace tqa::app
