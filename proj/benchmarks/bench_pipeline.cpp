#include <string>

#include <benchmark/benchmark.h>

#include "tqa/retrieval.hpp"
#include "tqa/units.hpp"

namespace {

std::string make_table(int rows, int cols) {
  std::string html = "<table class=\"x\"><tr><th>（単位：千円）</th>";
  for (int c = 0; c < cols; ++c) html += "<th colspan=\"1\">期" + std::to_string(c) + "</th>";
  html += "</tr>";
  for (int r = 0; r < rows; ++r) {
    html += "<tr><td style=\"a\">科目" + std::to_string(r) + "</td>";
    for (int c = 0; c < cols; ++c) html += "<td>" + std::to_string(1000 + r * cols + c) + "</td>";
    html += "</tr>";
  }
  return html + "</table>";
}

void BM_BuildGrid(benchmark::State& state) {
  const std::string html = make_table(static_cast<int>(state.range(0)), 8);
  for (auto _ : state) benchmark::DoNotOptimize(tqa::build_grid(html));
}
BENCHMARK(BM_BuildGrid)->Arg(10)->Arg(100);

void BM_StripAttributes(benchmark::State& state) {
  const std::string html = make_table(static_cast<int>(state.range(0)), 8);
  for (auto _ : state) benchmark::DoNotOptimize(tqa::strip_attributes(html));
}
BENCHMARK(BM_StripAttributes)->Arg(10)->Arg(100);

void BM_ExtractValue(benchmark::State& state) {
  const tqa::LogicalTable table = tqa::build_grid(make_table(static_cast<int>(state.range(0)), 8));
  const tqa::ScriptSegmenter tokenizer;
  const tqa::HashEmbeddingProvider provider;
  const tqa::Scorers scorers{&tokenizer, &provider};
  const tqa::RetrievalConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(tqa::extract_value("科目3の期5は？", table, cfg, scorers));
}
BENCHMARK(BM_ExtractValue)->Arg(10)->Arg(50);

void BM_NormalizeValue(benchmark::State& state) {
  const tqa::UnitInfo unit{"千円", *tqa::unit_scale("千円"), tqa::UnitSource::kRule};
  for (auto _ : state) benchmark::DoNotOptimize(tqa::normalize_value("△1,234,567.89", unit));
}
BENCHMARK(BM_NormalizeValue);

}  // namespace

BENCHMARK_MAIN();
