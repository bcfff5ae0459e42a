#include <csignal>
#include <cstdio>
#include <iostream>
#include <memory>

#include <CLI11.hpp>
#include <httplib.h>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "app/service.hpp"

namespace {

using tqa::app::kExitUsage;

httplib::Server* g_server = nullptr;

void handle_signal(int) {
  if (g_server != nullptr) g_server->stop();
}

int serve(const tqa::app::Runtime& runtime, const std::string& dataset_path, const std::string& host, int port,
          const std::string& annotations, const std::string& ui_dir) {
  tqa::app::Service service(tqa::load_dataset(dataset_path), runtime, annotations);
  httplib::Server server;
  service.mount(server);
  if (!ui_dir.empty() && !server.set_mount_point("/", ui_dir)) {
    std::cerr << "tqa: UI directory " << ui_dir << " does not exist\n";
    return tqa::app::kExitNoInput;
  }
  g_server = &server;
  std::signal(SIGINT, handle_signal);
  std::signal(SIGTERM, handle_signal);
  std::cerr << "tqa: serving " << dataset_path << " on http://" << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "tqa: cannot listen on " << host << ":" << port << "\n";
    return tqa::app::kExitUnavailable;
  }
  return tqa::app::kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Table question answering over HTML tables"};
  app.require_subcommand(1);

  std::string config_path;
  tqa::app::Settings flags;
  app.add_option("--config", config_path, "key = value config file (default $TQA_CONFIG)");
  auto setting = [&](const std::string& name, const std::string& key, const std::string& help) {
    app.add_option_function<std::string>(name, [&flags, key](const std::string& v) { flags[key] = v; }, help);
  };
  setting("--alpha", "alpha", "weight of the TF-IDF score in [0, 1] (default 0.21)");
  setting("--tokenizer", "tokenizer", "default | external");
  setting("--tokenizer-cmd", "tokenizer_cmd", "command of the external tokenizer");
  setting("--embed-endpoint", "embed_endpoint", "base URL of an /embed service (default: hash embedder)");
  setting("--llm-endpoint", "llm_endpoint", "chat-completions URL");
  setting("--llm-model", "llm_model", "model name sent to the LLM endpoint");
  setting("--unit-source", "unit_source", "llm | rule | auto");
  setting("--cache-size", "cache_size", "embedding cache entries");
  setting("--cell-id-attr", "cell_id_attr", "attribute holding dataset cell ids");
  setting("--workers", "workers", "worker threads for predict and sweep");

  std::string dataset;
  auto* clean = app.add_subcommand("clean", "Clean an HTML document and print its logical grids");
  std::string clean_input;
  std::string clean_format = "json";
  clean->add_option("input", clean_input, "HTML file")->required();
  clean->add_option("--out", clean_format, "json | html")->check(CLI::IsMember({"json", "html"}));

  auto* predict = app.add_subcommand("predict", "Answer every question of a dataset and score the answers");
  tqa::app::PredictOptions predict_opts;
  std::string method = "hybrid";
  predict->add_option("dataset", dataset, "dataset JSONL");
  predict->add_option("--method", method, "hybrid | tfidf | vector | llm")
      ->check(CLI::IsMember({"hybrid", "tfidf", "vector", "llm"}));
  predict->add_option("--out", predict_opts.out_path, "predictions JSONL (default stdout)");
  predict->add_option("--report", predict_opts.report_path, "write the evaluation report JSON here");

  auto* pairs = app.add_subcommand("pairs", "Build contrastive training pairs");
  tqa::app::PairsOptions pairs_opts;
  pairs->add_option("dataset", dataset, "dataset JSONL");
  pairs->add_option("--out", pairs_opts.out_path, "training pairs JSONL")->required();
  pairs->add_option("--valid-out", pairs_opts.valid_out_path, "validation pairs JSONL (default <out>.valid.jsonl)");
  pairs->add_option("--seed", pairs_opts.seed, "split seed");

  auto* sweep = app.add_subcommand("sweep", "Tune alpha on validation data");
  std::string sweep_out;
  sweep->add_option("dataset", dataset, "validation JSONL");
  sweep->add_option("--out", sweep_out, "CSV output (default stdout)");

  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP service for the annotation UI");
  std::string host = "127.0.0.1";
  int port = 8080;
  std::string annotations = "annotations.jsonl";
  std::string ui_dir;
  serve_cmd->add_option("dataset", dataset, "dataset JSONL");
  serve_cmd->add_option("--host", host, "bind address");
  serve_cmd->add_option("--port", port, "port")->check(CLI::Range(1, 65535));
  serve_cmd->add_option("--annotations", annotations, "append-only annotation store");
  serve_cmd->add_option("--ui-dir", ui_dir, "static files to serve at /");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (config_path.empty()) {
      if (const char* env = std::getenv("TQA_CONFIG"); env != nullptr) config_path = env;
    }
    const tqa::app::Settings file = config_path.empty() ? tqa::app::Settings{} : tqa::app::load_config_file(config_path);
    const tqa::app::AppConfig cfg = tqa::app::resolve_config(file, tqa::app::process_env_settings(), flags);

    if (*clean) {
      const auto format = clean_format == "html" ? tqa::app::CleanFormat::kHtml : tqa::app::CleanFormat::kJson;
      return tqa::app::run_clean(cfg, clean_input, format, std::cout, std::cerr);
    }
    if (dataset.empty()) dataset = cfg.dataset_path;
    if (dataset.empty()) {
      std::cerr << "tqa: no dataset given (positional argument or dataset_path)\n";
      return kExitUsage;
    }
    if (*pairs) return tqa::app::run_pairs(cfg, dataset, pairs_opts, std::cout, std::cerr);

    const tqa::app::Runtime runtime(cfg);
    if (*predict) {
      predict_opts.method = *tqa::method_from_string(method);
      return tqa::app::run_predict(runtime, dataset, predict_opts, std::cout, std::cerr);
    }
    if (*sweep) return tqa::app::run_sweep(runtime, dataset, sweep_out, std::cout, std::cerr);
    return serve(runtime, dataset, host, port, annotations, ui_dir);
  } catch (const tqa::app::UsageError& e) {
    std::cerr << "tqa: " << e.what() << "\n";
    return kExitUsage;
  } catch (const tqa::Error& e) {
    std::cerr << "tqa: " << e.what() << "\n";
    return tqa::app::exit_code_for(e.code());
  }
}
