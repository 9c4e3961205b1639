#include "deephate/embeddings.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>
#include <unordered_set>

#include "deephate/hashing.h"
#include "deephate/log.h"
#include "deephate/rng.h"

namespace deephate {
namespace {

std::vector<std::string_view> split_spaces(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

bool parse_float(std::string_view s, float& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_double(std::string_view s, double& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

bool parse_size(std::string_view s, std::size_t& out) {
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

}  // namespace

std::string_view source_name(EmbeddingSource source) {
  switch (source) {
    case EmbeddingSource::kGlove: return "glove";
    case EmbeddingSource::kWord2VecWiki: return "word2vec-wiki";
    case EmbeddingSource::kParagram: return "paragram";
    case EmbeddingSource::kSentiment: return "sentiment";
    case EmbeddingSource::kRandom: return "random";
  }
  return "random";
}

EmbeddingSource parse_source(std::string_view name) {
  for (auto s : {EmbeddingSource::kGlove, EmbeddingSource::kWord2VecWiki,
                 EmbeddingSource::kParagram, EmbeddingSource::kSentiment,
                 EmbeddingSource::kRandom}) {
    if (source_name(s) == name) return s;
  }
  throw Error("unknown embedding source '" + std::string(name) + "'");
}

std::string EmbeddingTable::sha256() const { return sha256_tensor(matrix); }

EmbeddingTable random_table(const Vocabulary& vocab, std::size_t dim, EmbeddingSource source,
                            std::uint64_t seed, bool frozen) {
  EmbeddingTable table;
  table.source = source;
  table.frozen = frozen;
  table.matrix = Tensor<float>(Shape{vocab.size(), dim});
  Rng rng(mix_seed(seed, "embedding-init:" + std::string(source_name(source))));
  for (std::size_t r = 1; r < vocab.size(); ++r) {
    for (std::size_t c = 0; c < dim; ++c) {
      table.matrix(r, c) = static_cast<float>(rng.uniform(-kOovInitRange, kOovInitRange));
    }
  }
  return table;
}

EmbeddingTable load_pretrained(const std::filesystem::path& path, const Vocabulary& vocab,
                               EmbeddingSource source, std::size_t dim, std::uint64_t seed) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file " + path.string());
  EmbeddingTable table = random_table(vocab, dim, source, seed, /*frozen=*/true);

  std::vector<bool> filled(vocab.size(), false);
  std::size_t hits = 0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    auto fields = split_spaces(line);
    if (fields.empty()) continue;
    if (line_no == 1 && fields.size() == 2) {
      std::size_t count = 0, declared = 0;
      if (parse_size(fields[0], count) && parse_size(fields[1], declared)) {
        if (declared != dim) {
          throw Error("embedding dimension mismatch in " + path.string() + ": file declares " +
                      std::to_string(declared) + ", expected " + std::to_string(dim));
        }
        continue;
      }
    }
    if (fields.size() != dim + 1) {
      throw Error("embedding dimension mismatch at line " + std::to_string(line_no) + " of " +
                  path.string() + ": " + std::to_string(fields.size() - 1) +
                  " values, expected " + std::to_string(dim));
    }
    auto idx = vocab.find(fields[0]);
    const bool wanted = idx && *idx != Vocabulary::kPad && !filled[*idx];
    for (std::size_t c = 0; c < dim; ++c) {
      float v = 0.0f;
      if (!parse_float(fields[c + 1], v)) {
        throw Error("unreadable embedding value at line " + std::to_string(line_no) + " of " +
                    path.string());
      }
      if (wanted) table.matrix(static_cast<std::size_t>(*idx), c) = v;
    }
    if (wanted) {
      filled[*idx] = true;
      if (*idx != Vocabulary::kUnk) ++hits;
    }
  }
  const std::size_t regular = vocab.size() > 2 ? vocab.size() - 2 : 0;
  table.coverage = regular ? static_cast<double>(hits) / static_cast<double>(regular) : 0.0;
  log::info("loaded " + std::string(source_name(source)) + " embeddings from " + path.string() +
            ": coverage " + std::to_string(table.coverage));
  return table;
}

void save_embedding_text(const EmbeddingTable& table, const Vocabulary& vocab,
                         const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << table.rows() << ' ' << table.dim() << '\n';
  out.precision(9);
  for (std::size_t r = 0; r < table.rows(); ++r) {
    out << vocab.token(static_cast<int>(r));
    for (std::size_t c = 0; c < table.dim(); ++c) out << ' ' << table.matrix(r, c);
    out << '\n';
  }
}

std::unordered_set<std::string> SentimentLexicon::default_negations() {
  return {"aint",     "arent",    "cannot",   "cant",     "couldnt",  "darent",   "didnt",
          "doesnt",   "ain't",    "aren't",   "can't",    "couldn't", "daren't",  "didn't",
          "doesn't",  "dont",     "hadnt",    "hasnt",    "havent",   "isnt",     "mightnt",
          "mustnt",   "neither",  "don't",    "hadn't",   "hasn't",   "haven't",  "isn't",
          "mightn't", "mustn't",  "neednt",   "needn't",  "never",    "none",     "nope",
          "nor",      "not",      "nothing",  "nowhere",  "oughtnt",  "shant",    "shouldnt",
          "uhuh",     "wasnt",    "werent",   "oughtn't", "shan't",   "shouldn't", "wasn't",
          "weren't",  "without",  "wont",     "wouldnt",  "won't",    "wouldn't", "rarely",
          "seldom",   "despite"};
}

std::unordered_map<std::string, double> SentimentLexicon::default_boosters() {
  constexpr double kIncrement = 0.293;
  std::unordered_map<std::string, double> b;
  for (const char* w :
       {"absolutely", "amazingly", "awfully", "completely", "considerably", "decidedly",
        "deeply", "enormously", "entirely", "especially", "exceptionally", "extremely",
        "fabulously", "flipping", "flippin", "fricking", "frickin", "frigging", "friggin",
        "fully", "fucking", "greatly", "hella", "highly", "hugely", "incredibly", "intensely",
        "majorly", "more", "most", "particularly", "purely", "quite", "really", "remarkably",
        "so", "substantially", "thoroughly", "totally", "tremendously", "uber",
        "unbelievably", "unusually", "utterly", "very"}) {
    b[w] = kIncrement;
  }
  for (const char* w : {"almost", "barely", "hardly", "kinda", "kindof", "kind-of", "less",
                        "little", "marginally", "occasionally", "partly", "scarcely",
                        "slightly", "somewhat", "sorta", "sortof", "sort-of"}) {
    b[w] = -kIncrement;
  }
  return b;
}

SentimentLexicon SentimentLexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open lexicon " + path.string());
  SentimentLexicon lex;
  lex.negations = default_negations();
  lex.boosters = default_boosters();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("lexicon line " + std::to_string(line_no) + " lacks a tab separator");
    }
    const std::string token = line.substr(0, tab);
    std::string_view rest(line);
    rest.remove_prefix(tab + 1);
    rest = rest.substr(0, rest.find('\t'));
    double v = 0.0;
    if (!parse_double(rest, v) || !std::isfinite(v)) {
      throw Error("invalid valence at lexicon line " + std::to_string(line_no));
    }
    lex.valence[token] = v;
  }
  return lex;
}

SentimentScores score_sentiment(std::span<const std::string> tokens,
                                const SentimentLexicon& lexicon) {
  double P = 0.0, N = 0.0, U = 0.0;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    auto it = lexicon.valence.find(tokens[i]);
    double v = it == lexicon.valence.end() ? 0.0 : it->second;
    if (v != 0.0) {
      for (std::size_t back = 1; back <= kBoosterWindow && back <= i; ++back) {
        auto b = lexicon.boosters.find(tokens[i - back]);
        if (b != lexicon.boosters.end()) v += v > 0.0 ? b->second : -b->second;
      }
      for (std::size_t back = 1; back <= kNegationWindow && back <= i; ++back) {
        if (lexicon.negations.count(tokens[i - back])) {
          v = -kNegationScale * v;
          break;
        }
      }
    }
    if (v > 0.0) {
      P += v;
    } else if (v < 0.0) {
      N += -v;
    } else {
      U += 1.0;
    }
  }
  if (N + U + P == 0.0) U = 1.0;
  const double total = N + U + P;
  return {N / total, U / total, P / total};
}

SentimentLabel label_sentiment(const SentimentScores& s) {
  if (s.neu >= s.pos && s.neu >= s.neg) return SentimentLabel::kNeutral;
  if (s.pos >= s.neg) return SentimentLabel::kPositive;
  return SentimentLabel::kNegative;
}

std::unordered_map<std::string, SentimentLabel> load_sentiment_labels(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open sentiment labels " + path.string());
  std::unordered_map<std::string, SentimentLabel> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos) {
      throw Error("sentiment label line " + std::to_string(line_no) + " lacks a tab separator");
    }
    const std::string id = line.substr(0, tab);
    const std::string label = line.substr(tab + 1);
    if (line_no == 1 && id == "id" && label == "label") continue;
    auto parsed = parse_sentiment(label);
    if (!parsed) {
      throw Error("unknown sentiment label '" + label + "' at line " + std::to_string(line_no));
    }
    out[id] = *parsed;
  }
  return out;
}

void save_sentiment_labels(const Corpus& corpus, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << "id\tlabel\n";
  for (const auto& p : corpus.posts) {
    if (!p.sentiment) throw Error("post " + p.id + " has no sentiment label");
    out << p.id << '\t' << sentiment_name(*p.sentiment) << '\n';
  }
}

void assign_sentiment(Corpus& corpus, const SentimentLexicon& lexicon,
                      const std::unordered_map<std::string, SentimentLabel>* external) {
  for (auto& p : corpus.posts) {
    if (external) {
      auto it = external->find(p.id);
      if (it != external->end()) {
        p.sentiment = it->second;
        continue;
      }
    }
    p.sentiment = label_sentiment(score_sentiment(p.tokens, lexicon));
  }
}

SentimentEmbeddingModel::SentimentEmbeddingModel(const Vocabulary& vocab, EncoderConfig encoder,
                                                 int max_len, double dropout_embed,
                                                 double dropout_fc, std::uint64_t seed)
    : vocab_(vocab),
      encoder_(std::move(encoder)),
      max_len_(max_len),
      dropout_embed_(dropout_embed),
      dropout_fc_(dropout_fc) {
  encoder_.validate(static_cast<std::size_t>(max_len));
  EmbeddingTable init = random_table(vocab, encoder_.embed_dim, EmbeddingSource::kSentiment,
                                     seed, /*frozen=*/false);
  params_.add("sentiment.table", std::move(init.matrix));
  add_encoder_params(params_, "sentiment.enc", encoder_, seed);
  const std::size_t D = encoder_.output_dim();
  params_.add("sentiment.head.W", glorot_uniform<float>({3, D}, D, 3, seed, "sentiment.head.W"));
  params_.add("sentiment.head.b", Tensor<float>(Shape{3}));
}

Var<float> SentimentEmbeddingModel::logits(Tape<float>& tape, const Post& post,
                                           const ForwardOptions& options) const {
  const auto ids = encode_post(post, vocab_, max_len_);
  Var<float> table = tape.parameter(params_.get("sentiment.table"));
  Var<float> E = ad::gather_rows(table, std::span<const int>(ids));
  E = ad::dropout(E, dropout_embed_, options.train, mix_seed(options.dropout_seed, "embed"));
  Var<float> x = encode(tape, params_, "sentiment.enc", encoder_, E).x;
  x = ad::dropout(x, dropout_fc_, options.train, mix_seed(options.dropout_seed, "fc"));
  Var<float> W = tape.parameter(params_.get("sentiment.head.W"));
  Var<float> b = tape.parameter(params_.get("sentiment.head.b"));
  return ad::add(ad::matmul(W, x), b);
}

int SentimentEmbeddingModel::target(const Post& post) const {
  if (!post.sentiment) throw Error("post " + post.id + " has no sentiment label");
  return static_cast<int>(*post.sentiment);
}

void SentimentEmbeddingModel::after_update() {
  auto& table = params_.get("sentiment.table").value;
  for (std::size_t c = 0; c < table.dim(1); ++c) table(Vocabulary::kPad, c) = 0.0f;
}

EmbeddingTable SentimentEmbeddingModel::table() const {
  EmbeddingTable t;
  t.matrix = params_.get("sentiment.table").value;
  t.frozen = true;
  t.source = EmbeddingSource::kSentiment;
  t.coverage = 1.0;
  return t;
}

EmbeddingTable train_sentiment_embedding(const std::vector<const Post*>& posts,
                                         const Vocabulary& vocab, const EncoderConfig& encoder,
                                         const TrainConfig& config, TrainHistory* history,
                                         const EpochCallback& on_epoch) {
  std::set<SentimentLabel> seen;
  for (const Post* p : posts) {
    if (!p->sentiment) throw Error("train_sentiment_embedding: post " + p->id + " lacks a sentiment label");
    seen.insert(*p->sentiment);
  }
  if (seen.size() < 2) {
    throw Error("train_sentiment_embedding: sentiment labels cover a single class; the task is degenerate");
  }
  SentimentEmbeddingModel model(vocab, encoder, config.max_len, config.dropout_embed,
                                config.dropout_fc, config.seed);
  TrainHistory h = train_classifier(model, posts, config, on_epoch);
  if (history) *history = std::move(h);
  return model.table();
}

}  // namespace deephate
