#pragma once

// Owns the scorers and clients an AppConfig asks for.

#include <memory>

#include "app/config.hpp"
#include "tqa/eval.hpp"

namespace tqa::app {

class Runtime {
 public:
  /// Throws Error(ConfigError) for an external tokenizer without a command
  /// or unit_source=llm without an endpoint.
  explicit Runtime(AppConfig cfg);

  const AppConfig& config() const { return cfg_; }
  PipelineConfig pipeline() const;
  PipelineDeps deps() const;
  const LlmClient* llm() const { return llm_.get(); }
  Scorers scorers() const { return {tokenizer_.get(), provider_.get()}; }

 private:
  AppConfig cfg_;
  UnitStrategy unit_strategy_;
  std::unique_ptr<Tokenizer> tokenizer_;
  std::shared_ptr<const EmbeddingProvider> provider_;
  std::unique_ptr<LlmClient> llm_;
};

}  // namespace tqa::app
