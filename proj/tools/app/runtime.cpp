#include "app/runtime.hpp"

#include <sstream>

#include "tqa/error.hpp"

namespace tqa::app {

namespace {

std::vector<std::string> split_argv(const std::string& cmd) {
  std::istringstream in(cmd);
  std::vector<std::string> argv;
  for (std::string word; in >> word;) argv.push_back(word);
  return argv;
}

}  // namespace

Runtime::Runtime(AppConfig cfg) : cfg_(std::move(cfg)), unit_strategy_(effective_unit_strategy(cfg_)) {
  if (cfg_.tokenizer == "external") {
    auto argv = split_argv(cfg_.tokenizer_cmd);
    if (argv.empty()) throw Error(ErrorCode::kConfigError, "tokenizer 'external' needs tokenizer_cmd");
    tokenizer_ = std::make_unique<ExternalTokenizer>(std::move(argv));
  } else {
    tokenizer_ = std::make_unique<ScriptSegmenter>();
  }
  provider_ = make_embedding_provider(cfg_.embed_endpoint, cfg_.cache_size);
  if (!cfg_.llm_endpoint.empty()) {
    LlmSettings settings;
    settings.endpoint = cfg_.llm_endpoint;
    settings.model = cfg_.llm_model;
    settings.api_key = cfg_.llm_api_key;
    llm_ = std::make_unique<HttpLlmClient>(std::move(settings));
  }
}

PipelineConfig Runtime::pipeline() const {
  PipelineConfig p;
  p.retrieval.alpha = cfg_.alpha;
  p.unit_strategy = unit_strategy_;
  p.cell_id_attr = cfg_.cell_id_attr;
  p.workers = cfg_.workers;
  return p;
}

PipelineDeps Runtime::deps() const { return {tokenizer_.get(), provider_.get(), llm_.get()}; }

}  // namespace tqa::app
