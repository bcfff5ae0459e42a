#include <doctest.h>

#include <filesystem>
#include <thread>

#include <httplib.h>

#include "app/service.hpp"
#include "synthetic.hpp"

using namespace tqa;
using namespace tqa::app;

namespace {

struct ServiceFixture {
  ServiceFixture() {
    dataset = tqa::testing::synthetic_suite(6, 21);
    dataset[0].split = Split::kTrain;
    dataset[1].split = Split::kValidation;
    dataset[2].split = Split::kTest;
    dataset[3].split = Split::kTest;
    dataset[3].gold_cell_id.reset();
    dataset[3].gold_value.reset();
    store = std::filesystem::temp_directory_path() /
            ("tqa_service_" + std::to_string(::getpid()) + "_" + std::to_string(counter++) + ".jsonl");
    std::filesystem::remove(store);
  }
  ~ServiceFixture() { std::filesystem::remove(store); }

  static inline int counter = 0;
  std::vector<QARecord> dataset;
  std::filesystem::path store;
  Runtime runtime{AppConfig{}};
};

nlohmann::json body_of(const HttpResponse& r) { return nlohmann::json::parse(r.body); }

}  // namespace

TEST_SUITE("service") {
  TEST_CASE_FIXTURE(ServiceFixture, "question listing and split filter") {
    Service svc(dataset, runtime, store);
    CHECK(body_of(svc.list_questions(std::nullopt)).size() == 6);
    const auto test_only = body_of(svc.list_questions("test"));
    REQUIRE(test_only.size() == 2);
    CHECK(test_only[0].contains("question"));
    CHECK_FALSE(test_only[0].contains("gold_cell_id"));
    CHECK(svc.list_questions("bogus").status == 422);
  }

  TEST_CASE_FIXTURE(ServiceFixture, "gold is shown for validation and never for test") {
    Service svc(dataset, runtime, store);
    const auto v = body_of(svc.get_question(dataset[1].question_id));
    CHECK(v["gold_cell_id"] == *dataset[1].gold_cell_id);
    CHECK(v["grid"]["cells"].is_array());
    const auto t = svc.get_question(dataset[2].question_id);
    CHECK(t.status == 200);
    CHECK(t.body.find("gold") == std::string::npos);
    CHECK_FALSE(body_of(svc.get_question(dataset[0].question_id)).contains("gold_cell_id"));
    CHECK(svc.get_question("nope").status == 404);
  }

  TEST_CASE_FIXTURE(ServiceFixture, "predict endpoint") {
    Service svc(dataset, runtime, store);
    const auto r = svc.predict(dataset[0].question_id, std::nullopt);
    REQUIRE(r.status == 200);
    const auto j = body_of(r);
    CHECK(j["alpha"] == 0.21);
    CHECK(j["cell_id"] == *dataset[0].gold_cell_id);
    CHECK(j["value"] == *dataset[0].gold_value);
    CHECK(body_of(svc.predict(dataset[0].question_id, "1"))["alpha"] == 1.0);
    CHECK(svc.predict(dataset[0].question_id, "1.5").status == 422);
    CHECK(svc.predict(dataset[0].question_id, "x").status == 422);
    CHECK(svc.predict("nope", std::nullopt).status == 404);
    const auto test_pred = svc.predict(dataset[2].question_id, std::nullopt);
    CHECK(test_pred.body.find("gold") == std::string::npos);
  }

  TEST_CASE_FIXTURE(ServiceFixture, "annotations round-trip byte-exact and survive restarts") {
    const std::string body = "{\"question_id\":\"" + dataset[0].question_id + "\",\"cell_id\":\"" +
                             *dataset[0].gold_cell_id + "\",\"value\":\"１，０００\",\"annotator\":\"ann-1\"}";
    {
      Service svc(dataset, runtime, store);
      const auto r = svc.post_annotation(body);
      CHECK(r.status == 201);
      CHECK(svc.export_annotations().body == body + "\n");
    }
    Service again(dataset, runtime, store);
    CHECK(again.export_annotations().body == body + "\n");
  }

  TEST_CASE_FIXTURE(ServiceFixture, "invalid annotations") {
    Service svc(dataset, runtime, store);
    const std::string id = dataset[0].question_id;
    CHECK(svc.post_annotation("not json").status == 422);
    CHECK(svc.post_annotation("[]").status == 422);
    CHECK(svc.post_annotation(R"({"question_id":")" + id + R"(","cell_id":"r1c1","value":5,"annotator":"a"})").status == 422);
    CHECK(svc.post_annotation(R"({"question_id":")" + id + R"(","cell_id":"r99c99","value":"5","annotator":"a"})").status == 422);
    CHECK(svc.post_annotation(R"({"question_id":"nope","cell_id":"r1c1","value":"5","annotator":"a"})").status == 404);
    CHECK(svc.export_annotations().body.empty());
  }

  TEST_CASE_FIXTURE(ServiceFixture, "annotation report normalizes with the table unit") {
    Service svc(dataset, runtime, store);
    for (int i : {0, 1, 2}) {
      const auto& rec = dataset[i];
      // Annotators type the cell as printed; the report scales it by the unit.
      const auto tables = clean_document(RawDocument{rec.question_id, rec.document_html});
      const std::string raw = tables[0].find(*rec.gold_cell_id)->text;
      nlohmann::ordered_json a;
      a["question_id"] = rec.question_id;
      a["cell_id"] = i == 2 ? "r0c0" : *rec.gold_cell_id;
      a["value"] = raw;
      a["annotator"] = "ann";
      REQUIRE(svc.post_annotation(a.dump()).status == 201);
    }
    // A later answer replaces an earlier one for the same question.
    nlohmann::ordered_json fix;
    fix["question_id"] = dataset[2].question_id;
    fix["cell_id"] = *dataset[2].gold_cell_id;
    fix["value"] = "-99999999";
    fix["annotator"] = "ann";
    REQUIRE(svc.post_annotation(fix.dump()).status == 201);

    const auto report = body_of(svc.annotation_report());
    CHECK(report["n"] == 3);
    CHECK(report["cell_accuracy"] == 1.0);
    CHECK(report["value_accuracy"].get<double>() == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE_FIXTURE(ServiceFixture, "routes over HTTP") {
    Service svc(dataset, runtime, store);
    httplib::Server server;
    svc.mount(server);
    const int port = server.bind_to_any_port("127.0.0.1");
    std::thread t([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client client("127.0.0.1", port);

    auto res = client.Get("/questions?split=validation");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = client.Get("/questions/" + dataset[1].question_id);
    REQUIRE(res);
    CHECK(nlohmann::json::parse(res->body).contains("gold_cell_id"));
    res = client.Get("/predict/" + dataset[0].question_id + "?alpha=0.5");
    REQUIRE(res);
    CHECK(nlohmann::json::parse(res->body)["alpha"] == 0.5);
    const std::string body = "{\"question_id\":\"" + dataset[0].question_id + "\",\"cell_id\":\"r1c1\",\"value\":\"1\",\"annotator\":\"x\"}";
    res = client.Post("/annotations", body, "application/json");
    REQUIRE(res);
    CHECK(res->status == 201);
    res = client.Get("/annotations/export");
    REQUIRE(res);
    CHECK(res->body == body + "\n");
    res = client.Get("/annotations/report");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = client.Get("/questions/unknown");
    REQUIRE(res);
    CHECK(res->status == 404);

    server.stop();
    t.join();
  }

  TEST_CASE_FIXTURE(ServiceFixture, "concurrent appends are serialized") {
    Service svc(dataset, runtime, store);
    std::vector<std::thread> threads;
    for (int k = 0; k < 8; ++k) {
      threads.emplace_back([&, k] {
        for (int i = 0; i < 10; ++i) {
          const std::string body = "{\"question_id\":\"" + dataset[0].question_id +
                                   "\",\"cell_id\":\"r1c1\",\"value\":\"" + std::to_string(k * 100 + i) +
                                   "\",\"annotator\":\"t\"}";
          CHECK(svc.post_annotation(body).status == 201);
        }
      });
    }
    for (auto& t : threads) t.join();
    const std::string bytes = svc.export_annotations().body;
    CHECK(std::count(bytes.begin(), bytes.end(), '\n') == 80);
    AnnotationStore store_view(store);
    CHECK(store_view.load().size() == 80);
  }
}
