#include "deephate/corpus.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "deephate/error.h"
#include "deephate/log.h"
#include "deephate/rng.h"

namespace deephate {
namespace {

std::vector<std::string> split_tabs(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t tab = line.find('\t', start);
    if (tab == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      return out;
    }
    out.emplace_back(line.substr(start, tab - start));
    start = tab + 1;
  }
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

bool getline_trimmed_cr(std::istream& in, std::string& line) {
  if (!std::getline(in, line)) return false;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  return true;
}

// Non-ASCII bytes are treated as word characters so UTF-8 words and emoji
// pass through intact.
bool is_word_byte(unsigned char c) { return std::isalnum(c) || c == '_' || c >= 0x80; }

bool starts_with_ci(std::string_view s, std::string_view prefix) {
  if (s.size() < prefix.size()) return false;
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    if (std::tolower(static_cast<unsigned char>(s[i])) != prefix[i]) return false;
  }
  return true;
}

std::string lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

void tokenize_chunk(std::string_view chunk, std::vector<std::string>& out) {
  std::size_t i = 0;
  const std::size_t n = chunk.size();
  auto word_at = [&](std::size_t j) {
    return j < n && is_word_byte(static_cast<unsigned char>(chunk[j]));
  };
  while (i < n) {
    std::string_view rest = chunk.substr(i);
    if (starts_with_ci(rest, "http://") || starts_with_ci(rest, "https://") ||
        starts_with_ci(rest, "www.")) {
      out.emplace_back("<url>");
      return;  // a URL runs to the next whitespace
    }
    const char c = chunk[i];
    if (c == '@' && word_at(i + 1)) {
      out.emplace_back("<user>");
      ++i;
      while (word_at(i)) ++i;
      continue;
    }
    if (c == '#' && word_at(i + 1)) {
      ++i;
      continue;
    }
    if (word_at(i)) {
      std::size_t j = i;
      while (word_at(j) || (chunk[j] == '\'' && j > i && word_at(j + 1))) ++j;
      out.push_back(lower(chunk.substr(i, j - i)));
      i = j;
      continue;
    }
    std::size_t j = i;
    while (j < n && !word_at(j)) {
      if ((chunk[j] == '@' || chunk[j] == '#') && word_at(j + 1)) break;
      ++j;
    }
    out.emplace_back(chunk.substr(i, j - i));
    i = j;
  }
}

std::string join_tokens(const std::vector<std::string>& tokens) {
  std::string s;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (i) s += ' ';
    s += tokens[i];
  }
  return s;
}

}  // namespace

std::string_view sentiment_name(SentimentLabel label) {
  switch (label) {
    case SentimentLabel::kNegative: return "negative";
    case SentimentLabel::kNeutral: return "neutral";
    case SentimentLabel::kPositive: return "positive";
  }
  return "neutral";
}

std::optional<SentimentLabel> parse_sentiment(std::string_view name) {
  if (name == "negative") return SentimentLabel::kNegative;
  if (name == "neutral") return SentimentLabel::kNeutral;
  if (name == "positive") return SentimentLabel::kPositive;
  return std::nullopt;
}

ClassScheme::ClassScheme(std::vector<std::string> names) : names_(std::move(names)) {
  if (names_.size() < 2) throw Error("class scheme needs at least two classes");
  std::set<std::string> seen;
  for (const auto& n : names_) {
    if (!seen.insert(n).second) throw Error("duplicate class name: " + n);
  }
}

std::optional<int> ClassScheme::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i] == name) return static_cast<int>(i);
  }
  return std::nullopt;
}

Vocabulary::Vocabulary() {
  add(std::string(kPadToken));
  add(std::string(kUnkToken));
}

Vocabulary::Vocabulary(const std::vector<std::string>& tokens) : Vocabulary() {
  for (const auto& t : tokens) add(t);
}

void Vocabulary::add(std::string token) {
  if (token_to_index_.count(token)) throw Error("vocabulary: duplicate token " + token);
  token_to_index_.emplace(token, static_cast<int>(index_to_token_.size()));
  index_to_token_.push_back(std::move(token));
}

std::optional<int> Vocabulary::find(std::string_view token) const {
  auto it = token_to_index_.find(std::string(token));
  if (it == token_to_index_.end()) return std::nullopt;
  return it->second;
}

int Vocabulary::index(std::string_view token) const { return find(token).value_or(kUnk); }

std::vector<std::size_t> SplitPlan::train_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> SplitPlan::test_indices(int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < assignments.size(); ++i) {
    if (assignments[i] == fold) out.push_back(i);
  }
  return out;
}

std::optional<DatasetFormat> DatasetFormat::preset(std::string_view name) {
  DatasetFormat f;
  f.name = std::string(name);
  if (name == "wz-ls") {
    f.scheme = ClassScheme({"racism", "sexism", "neither"});
    f.default_topics = 15;
  } else if (name == "dt") {
    f.scheme = ClassScheme({"hate", "offensive", "neither"});
    f.default_topics = 10;
  } else if (name == "founta") {
    f.scheme = ClassScheme({"normal", "abusive", "hateful", "spam"});
    f.default_topics = 15;
  } else {
    return std::nullopt;
  }
  return f;
}

Corpus load_dataset(const std::filesystem::path& path, const DatasetFormat& format) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset " + path.string());
  std::string line;
  if (!getline_trimmed_cr(in, line)) throw Error("dataset " + path.string() + " is empty");
  const auto header = split_tabs(line);
  auto column = [&](const std::string& name) -> std::size_t {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) {
      throw Error("dataset " + path.string() + " header lacks column '" + name + "'");
    }
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = column(format.id_column);
  const std::size_t label_col = column(format.label_column);
  const std::size_t text_col = column(format.text_column);

  Corpus corpus;
  corpus.name = format.name;
  corpus.scheme = format.scheme;
  std::unordered_set<std::string> ids;
  std::size_t line_no = 1;
  while (getline_trimmed_cr(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto fields = split_tabs(line);
    if (fields.size() != header.size()) {
      throw Error("malformed row at line " + std::to_string(line_no) + ": expected " +
                  std::to_string(header.size()) + " fields, got " +
                  std::to_string(fields.size()));
    }
    RawRecord rec{fields[id_col], fields[text_col], fields[label_col]};
    if (rec.id.empty()) throw Error("empty id at line " + std::to_string(line_no));
    if (!ids.insert(rec.id).second) {
      throw Error("duplicate id '" + rec.id + "' at line " + std::to_string(line_no));
    }
    if (trim(rec.text).empty()) throw Error("empty text at line " + std::to_string(line_no));
    auto label = format.scheme.index_of(rec.label);
    if (!label) {
      throw Error("unknown label '" + rec.label + "' at line " + std::to_string(line_no));
    }
    Post post;
    post.id = rec.id;
    post.tokens = normalize_and_tokenize(rec.text);
    post.label_index = *label;
    if (post.tokens.empty()) throw Error("no tokens in text at line " + std::to_string(line_no));
    corpus.posts.push_back(std::move(post));
  }
  return corpus;
}

std::vector<std::string> normalize_and_tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) ++i;
    std::size_t j = i;
    while (j < text.size() && !std::isspace(static_cast<unsigned char>(text[j]))) ++j;
    if (j > i) tokenize_chunk(text.substr(i, j - i), out);
    i = j;
  }
  return out;
}

Vocabulary build_vocab(const Corpus& corpus, int min_freq) {
  std::unordered_map<std::string, std::size_t> freq;
  for (const auto& post : corpus.posts) {
    for (const auto& t : post.tokens) ++freq[t];
  }
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (auto& [token, count] : freq) {
    if (token == Vocabulary::kPadToken || token == Vocabulary::kUnkToken) continue;
    if (count >= static_cast<std::size_t>(std::max(min_freq, 1))) kept.emplace_back(token, count);
  }
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    if (a.second != b.second) return a.second > b.second;
    return a.first < b.first;
  });
  std::vector<std::string> tokens;
  tokens.reserve(kept.size());
  for (auto& [token, count] : kept) tokens.push_back(token);
  return Vocabulary(tokens);
}

std::vector<int> encode_post(const Post& post, const Vocabulary& vocab, int max_len) {
  if (max_len < 1) throw Error("encode_post: max_len must be >= 1");
  std::vector<int> ids(static_cast<std::size_t>(max_len), Vocabulary::kPad);
  const std::size_t n = std::min(post.tokens.size(), ids.size());
  for (std::size_t i = 0; i < n; ++i) ids[i] = vocab.index(post.tokens[i]);
  return ids;
}

SplitPlan make_folds(const Corpus& corpus, int fold_count, std::uint64_t seed) {
  if (fold_count < 2) throw Error("make_folds: fold_count must be >= 2");
  if (corpus.posts.empty()) throw Error("make_folds: empty corpus");
  SplitPlan plan;
  plan.fold_count = fold_count;
  plan.seed = seed;
  plan.assignments.assign(corpus.posts.size(), 0);

  std::map<int, std::vector<std::size_t>> by_class;
  for (std::size_t i = 0; i < corpus.posts.size(); ++i) {
    by_class[corpus.posts[i].label_index].push_back(i);
  }
  // Continue the deal across classes so fold sizes stay within one of each
  // other overall, not just per class.
  int next_fold = 0;
  for (auto& [label, members] : by_class) {
    if (members.size() < static_cast<std::size_t>(fold_count)) {
      log::warn("make_folds: class " + std::to_string(label) + " has " +
                std::to_string(members.size()) + " posts, fewer than " +
                std::to_string(fold_count) + " folds");
    }
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(label)));
    rng.shuffle(members.begin(), members.end());
    for (std::size_t idx : members) {
      plan.assignments[idx] = next_fold;
      next_fold = (next_fold + 1) % fold_count;
    }
  }
  return plan;
}

Corpus build_combined(const std::vector<Corpus>& corpora,
                      const std::map<std::string, CombinedClass>& mapping) {
  Corpus out;
  out.name = "combined";
  out.scheme = ClassScheme({"normal", "inappropriate"});
  for (const auto& c : corpora) {
    for (const auto& post : c.posts) {
      const std::string& label = c.scheme.name(static_cast<std::size_t>(post.label_index));
      auto it = mapping.find(c.name + ":" + label);
      if (it == mapping.end()) it = mapping.find(label);
      if (it == mapping.end()) {
        throw Error("build_combined: label '" + label + "' of dataset '" + c.name +
                    "' has no mapping");
      }
      if (it->second == CombinedClass::kDrop) continue;
      Post p = post;
      p.id = c.name.empty() ? post.id : c.name + "/" + post.id;
      p.label_index = it->second == CombinedClass::kNormal ? 0 : 1;
      out.posts.push_back(std::move(p));
    }
  }
  const auto dist = class_distribution(out);
  if (dist[0] == 0 || dist[1] == 0) {
    log::warn("build_combined: only one effective class in the combined corpus");
  }
  return out;
}

Corpus dedup_retweets(const Corpus& corpus) {
  Corpus out;
  out.name = corpus.name;
  out.scheme = corpus.scheme;
  out.vocab = corpus.vocab;
  std::unordered_set<std::string> seen;
  for (const auto& post : corpus.posts) {
    const auto& t = post.tokens;
    if (t.size() >= 2 && t[0] == "rt" && t[1] == "<user>") continue;
    if (!seen.insert(join_tokens(t)).second) continue;
    out.posts.push_back(post);
  }
  return out;
}

std::vector<std::size_t> class_distribution(const Corpus& corpus) {
  std::vector<std::size_t> counts(corpus.scheme.size(), 0);
  for (const auto& post : corpus.posts) ++counts.at(static_cast<std::size_t>(post.label_index));
  return counts;
}

void save_tokenized(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "id\tlabel\ttokens\n";
  for (const auto& post : corpus.posts) {
    out << post.id << '\t' << corpus.scheme.name(static_cast<std::size_t>(post.label_index))
        << '\t' << join_tokens(post.tokens) << '\n';
  }
}

Corpus load_tokenized(const std::filesystem::path& path, const ClassScheme& scheme,
                      std::string name) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::string line;
  getline_trimmed_cr(in, line);
  if (line != "id\tlabel\ttokens") throw Error(path.string() + ": not a tokenized corpus file");
  Corpus corpus;
  corpus.name = std::move(name);
  corpus.scheme = scheme;
  std::size_t line_no = 1;
  while (getline_trimmed_cr(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    auto fields = split_tabs(line);
    if (fields.size() != 3) throw Error("malformed row at line " + std::to_string(line_no));
    auto label = scheme.index_of(fields[1]);
    if (!label) throw Error("unknown label '" + fields[1] + "' at line " + std::to_string(line_no));
    Post post;
    post.id = fields[0];
    post.label_index = *label;
    std::istringstream ss(fields[2]);
    std::string tok;
    while (ss >> tok) post.tokens.push_back(tok);
    if (post.tokens.empty()) throw Error("no tokens at line " + std::to_string(line_no));
    corpus.posts.push_back(std::move(post));
  }
  return corpus;
}

void save_vocab(const Vocabulary& vocab, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& t : vocab.tokens()) out << t << '\n';
}

Vocabulary load_vocab(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path.string());
  std::vector<std::string> tokens;
  std::string line;
  while (getline_trimmed_cr(in, line)) tokens.push_back(line);
  if (tokens.size() < 2 || tokens[0] != Vocabulary::kPadToken ||
      tokens[1] != Vocabulary::kUnkToken) {
    throw Error(path.string() + ": vocabulary must start with <pad> and <unk>");
  }
  return Vocabulary(std::vector<std::string>(tokens.begin() + 2, tokens.end()));
}

}  // namespace deephate
