#include "tqa/lexical.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <csignal>
#include <cstdio>
#include <map>
#include <set>

#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "tqa/error.hpp"
#include "tqa/utf8.hpp"

extern char** environ;

namespace tqa {

namespace {

enum class Script { kSeparator, kAlnum, kHiragana, kKatakana, kHan, kOther };

Script classify(char32_t cp) {
  if (cp < 0x80) {
    if ((cp >= U'0' && cp <= U'9') || (cp >= U'a' && cp <= U'z') || (cp >= U'A' && cp <= U'Z')) {
      return Script::kAlnum;
    }
    return Script::kSeparator;
  }
  if (utf8::is_space(cp)) return Script::kSeparator;
  if (cp >= 0x00A1 && cp <= 0x00BF) return Script::kSeparator;
  if (cp == 0x00D7 || cp == 0x00F7) return Script::kSeparator;
  if (cp >= 0x00C0 && cp <= 0x052F) return Script::kAlnum;
  if (cp >= 0x3040 && cp <= 0x309F) return Script::kHiragana;
  if (cp == 0x30FB) return Script::kSeparator;
  if ((cp >= 0x30A0 && cp <= 0x30FF) || (cp >= 0x31F0 && cp <= 0x31FF) || (cp >= 0xFF66 && cp <= 0xFF9F)) {
    return Script::kKatakana;
  }
  if ((cp >= 0x4E00 && cp <= 0x9FFF) || (cp >= 0x3400 && cp <= 0x4DBF) || (cp >= 0xF900 && cp <= 0xFAFF) ||
      (cp >= 0x20000 && cp <= 0x3134F) || (cp >= 0x3005 && cp <= 0x3007)) {
    return Script::kHan;
  }
  // General punctuation, symbols, arrows, geometric shapes (incl. the
  // triangle negative markers), CJK punctuation, half-width punctuation.
  if ((cp >= 0x2000 && cp <= 0x2BFF) || (cp >= 0x3000 && cp <= 0x303F) || (cp >= 0xFF00 && cp <= 0xFF65) ||
      (cp >= 0xFE30 && cp <= 0xFE4F) || cp == utf8::kReplacement) {
    return Script::kSeparator;
  }
  return Script::kOther;
}

}  // namespace

TokenSequence ScriptSegmenter::tokenize(std::string_view text) const {
  TokenSequence tokens;
  std::string current;
  Script current_script = Script::kSeparator;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };
  std::size_t pos = 0;
  while (pos < text.size()) {
    char32_t cp = utf8::fold_width(utf8::next(text, pos));
    if (cp >= U'A' && cp <= U'Z') cp = cp - U'A' + U'a';
    const Script script = classify(cp);
    if (script == Script::kSeparator) {
      flush();
      current_script = script;
      continue;
    }
    if (script != current_script) flush();
    current_script = script;
    utf8::append(current, cp);
  }
  flush();
  return tokens;
}

TokenSequence tokenize(std::string_view text) {
  static const ScriptSegmenter segmenter;
  return segmenter.tokenize(text);
}

struct ExternalTokenizer::Process {
  pid_t pid = -1;
  int to_child = -1;
  FILE* from_child = nullptr;
};

ExternalTokenizer::ExternalTokenizer(std::vector<std::string> argv) : proc_(std::make_unique<Process>()) {
  if (argv.empty()) throw Error(ErrorCode::kConfigError, "external tokenizer command is empty");
  std::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0) {
    throw Error(ErrorCode::kIoError, "cannot create pipes for external tokenizer");
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  posix_spawn_file_actions_addclose(&actions, in_pipe[1]);
  posix_spawn_file_actions_addclose(&actions, out_pipe[0]);

  std::vector<char*> args;
  for (auto& a : argv) args.push_back(a.data());
  args.push_back(nullptr);
  const int rc = posix_spawnp(&proc_->pid, args[0], &actions, nullptr, args.data(), environ);
  posix_spawn_file_actions_destroy(&actions);
  close(in_pipe[0]);
  close(out_pipe[1]);
  if (rc != 0) {
    close(in_pipe[1]);
    close(out_pipe[0]);
    throw Error(ErrorCode::kConfigError, "cannot start external tokenizer '" + argv[0] + "'");
  }
  proc_->to_child = in_pipe[1];
  proc_->from_child = fdopen(out_pipe[0], "r");
}

ExternalTokenizer::~ExternalTokenizer() {
  if (proc_->to_child >= 0) close(proc_->to_child);
  if (proc_->from_child != nullptr) std::fclose(proc_->from_child);
  if (proc_->pid > 0) {
    int status = 0;
    waitpid(proc_->pid, &status, 0);
  }
}

TokenSequence ExternalTokenizer::tokenize(std::string_view text) const {
  std::string line(text);
  std::replace(line.begin(), line.end(), '\n', ' ');
  std::replace(line.begin(), line.end(), '\r', ' ');
  line.push_back('\n');

  std::lock_guard lock(mu_);
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = write(proc_->to_child, line.data() + written, line.size() - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      throw Error(ErrorCode::kIoError, "external tokenizer closed its input");
    }
    written += static_cast<std::size_t>(n);
  }
  std::string reply;
  int ch = 0;
  while ((ch = std::fgetc(proc_->from_child)) != EOF && ch != '\n') reply.push_back(static_cast<char>(ch));
  if (ch == EOF && reply.empty()) throw Error(ErrorCode::kIoError, "external tokenizer exited");

  TokenSequence tokens;
  std::size_t pos = 0;
  while (pos < reply.size()) {
    while (pos < reply.size() && (reply[pos] == ' ' || reply[pos] == '\t' || reply[pos] == '\r')) ++pos;
    const std::size_t start = pos;
    while (pos < reply.size() && reply[pos] != ' ' && reply[pos] != '\t' && reply[pos] != '\r') ++pos;
    if (pos > start) tokens.emplace_back(reply.substr(start, pos - start));
  }
  return tokens;
}

double TfidfModel::idf_of(std::string_view token) const {
  const auto it = vocabulary_.find(std::string(token));
  return it == vocabulary_.end() ? 0.0 : idf_[it->second];
}

std::vector<std::pair<std::size_t, double>> TfidfModel::vectorize(const TokenSequence& tokens) const {
  std::map<std::size_t, double> counts;
  for (const auto& t : tokens) {
    const auto it = vocabulary_.find(t);
    if (it != vocabulary_.end()) counts[it->second] += 1.0;
  }
  std::vector<std::pair<std::size_t, double>> vec;
  vec.reserve(counts.size());
  double norm_sq = 0.0;
  for (const auto& [index, count] : counts) {
    const double w = count * idf_[index];
    vec.emplace_back(index, w);
    norm_sq += w * w;
  }
  if (norm_sq > 0.0) {
    const double norm = std::sqrt(norm_sq);
    for (auto& entry : vec) entry.second /= norm;
  }
  return vec;
}

TfidfModel fit_tfidf(std::span<const TokenSequence> corpus) {
  if (corpus.empty()) throw Error(ErrorCode::kEmptyCorpus, "cannot fit TF-IDF on zero documents");
  std::map<std::string, std::size_t> df;
  for (const auto& doc : corpus) {
    const std::set<std::string> unique(doc.begin(), doc.end());
    for (const auto& t : unique) {
      if (!t.empty()) ++df[t];
    }
  }
  TfidfModel model;
  model.n_docs_ = corpus.size();
  model.idf_.reserve(df.size());
  const double n = static_cast<double>(corpus.size());
  for (const auto& [token, count] : df) {
    model.vocabulary_.emplace(token, model.idf_.size());
    model.idf_.push_back(std::log((1.0 + n) / (1.0 + static_cast<double>(count))) + 1.0);
  }
  return model;
}

double sparse_cosine(const std::vector<std::pair<std::size_t, double>>& a,
                     const std::vector<std::pair<std::size_t, double>>& b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& e : a) na += e.second * e.second;
  for (const auto& e : b) nb += e.second * e.second;
  if (na == 0.0 || nb == 0.0) return 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i].first == b[j].first) {
      dot += a[i].second * b[j].second;
      ++i;
      ++j;
    } else if (a[i].first < b[j].first) {
      ++i;
    } else {
      ++j;
    }
  }
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

double tfidf_score(const TokenSequence& q, const TokenSequence& d, const TfidfModel& model) {
  const double s = sparse_cosine(model.vectorize(q), model.vectorize(d));
  return std::clamp(s, 0.0, 1.0);
}

}  // namespace tqa
