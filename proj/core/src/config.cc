#include "deephate/config.h"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <charconv>
#include <fstream>
#include <set>
#include <sstream>

#include "deephate/error.h"

namespace deephate {

namespace pt = boost::property_tree;

namespace {

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s{
      {"run", {"seed", "out", "threads", "dataset"}},
      {"embeddings", {"glove", "word2vec_wiki", "paragram", "dim"}},
      {"sentiment", {"lexicon", "labels", "epochs"}},
      {"topics",
       {"alpha", "beta", "iterations", "burn_in", "sample_lag", "min_word_posts", "min_post_words",
        "sparsify", "sweep_min", "sweep_max"}},
      {"encoder", {"filter_widths", "filters", "hidden", "attention_dim"}},
      {"train",
       {"learning_rate", "batch_size", "epochs", "dropout_embed", "dropout_fc", "max_len",
        "freeze_pretrained", "vocab_min_freq", "variant"}},
      {"eval", {"folds", "holdout_fold"}},
      {"combined", {"normal", "inappropriate", "drop", "topics"}},
  };
  return s;
}

const std::set<std::string> kDatasetKeys{"path",         "format",       "labels",
                                         "id_column",    "label_column", "text_column",
                                         "topics",       "dedup_retweets"};

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

class Section {
 public:
  Section(std::string name, const pt::ptree& tree) : name_(std::move(name)), tree_(tree) {}

  std::optional<std::string> raw(const std::string& key) const {
    for (const auto& [k, v] : tree_) {
      if (k == key) return trim(v.data());
    }
    return std::nullopt;
  }

  std::string where(const std::string& key) const { return "config: [" + name_ + "] " + key; }

  template <typename N>
  void number(const std::string& key, N& out) const {
    auto v = raw(key);
    if (!v) return;
    N parsed{};
    const char* end = v->data() + v->size();
    auto [p, ec] = std::from_chars(v->data(), end, parsed);
    if (ec != std::errc() || p != end) throw Error(where(key) + ": '" + *v + "' is not a valid number");
    out = parsed;
  }

  void boolean(const std::string& key, bool& out) const {
    auto v = raw(key);
    if (!v) return;
    if (*v == "true" || *v == "yes" || *v == "1") {
      out = true;
    } else if (*v == "false" || *v == "no" || *v == "0") {
      out = false;
    } else {
      throw Error(where(key) + ": '" + *v + "' is not a boolean");
    }
  }

  void text(const std::string& key, std::string& out) const {
    if (auto v = raw(key)) out = *v;
  }

  void path(const std::string& key, const std::filesystem::path& base,
            std::optional<std::filesystem::path>& out) const {
    auto v = raw(key);
    if (!v || v->empty()) return;
    std::filesystem::path p(*v);
    out = p.is_absolute() ? p : (base / p).lexically_normal();
  }

 private:
  std::string name_;
  const pt::ptree& tree_;
};

void check_keys(const std::string& section, const pt::ptree& tree,
                const std::set<std::string>& allowed) {
  for (const auto& [k, v] : tree) {
    if (!allowed.count(k)) throw Error("config: unknown key '" + k + "' in [" + section + "]");
  }
}

template <typename T>
std::string join(const std::vector<T>& items) {
  std::ostringstream out;
  for (std::size_t i = 0; i < items.size(); ++i) out << (i ? ", " : "") << items[i];
  return out.str();
}

// Shortest text that parses back to the same double.
std::string number_text(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace

std::string RunConfig::dataset_name() const {
  if (!active_dataset.empty()) return active_dataset;
  if (datasets.empty()) throw Error("config: no dataset configured");
  return datasets.front().name;
}

int RunConfig::topics() const {
  const std::string name = dataset_name();
  if (name == "combined") {
    if (!combined) throw Error("config: dataset 'combined' requested but [combined] is absent");
    return combined->topics;
  }
  return dataset(name).topics;
}

const DatasetConfig& RunConfig::dataset(const std::string& name) const {
  for (const auto& d : datasets) {
    if (d.name == name) return d;
  }
  throw Error("config: no dataset named '" + name + "'");
}

void RunConfig::validate() const {
  if (datasets.empty()) throw Error("config: missing mandatory key: at least one [dataset.NAME] with a path");
  train.validate();
  lda.validate();
  encoder.validate(static_cast<std::size_t>(train.max_len));
  if (threads < 1) throw Error("config: [run] threads must be >= 1");
  if (folds < 2) throw Error("config: [eval] folds must be >= 2");
  if (holdout_fold < 0 || holdout_fold >= folds) {
    throw Error("config: [eval] holdout_fold must lie in [0, folds)");
  }
  if (sweep_min < 1 || sweep_max < sweep_min) throw Error("config: [topics] sweep range is empty");
  if (!(sparsify_threshold >= 0.0 && sparsify_threshold < 1.0)) {
    throw Error("config: [topics] sparsify must lie in [0, 1)");
  }
  if (sentiment_epochs < 1) throw Error("config: [sentiment] epochs must be >= 1");
  for (const auto& d : datasets) {
    if (d.topics < 1) throw Error("config: [dataset." + d.name + "] topics must be >= 1");
  }
  const std::string active = dataset_name();
  if (active == "combined") {
    if (!combined) throw Error("config: dataset 'combined' requested but [combined] is absent");
  } else {
    dataset(active);
  }
}

RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                            bool check_paths) {
  pt::ptree tree;
  try {
    std::istringstream in(text);
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error("config: " + std::string(e.message()) + " at line " + std::to_string(e.line()));
  }

  RunConfig c;
  const pt::ptree empty;
  auto section = [&](const std::string& name) {
    auto child = tree.get_child_optional(pt::ptree::path_type(name, '\x1f'));
    return Section(name, child ? *child : empty);
  };

  for (const auto& [name, sub] : tree) {
    if (name.rfind("dataset.", 0) == 0) {
      check_keys(name, sub, kDatasetKeys);
    } else if (auto it = schema().find(name); it != schema().end()) {
      check_keys(name, sub, it->second);
    } else {
      throw Error("config: unknown section [" + name + "]");
    }
  }

  const Section run = section("run");
  if (!run.raw("seed")) throw Error("config: missing mandatory key: [run] seed");
  run.number("seed", c.seed);
  std::optional<std::filesystem::path> out;
  run.path("out", base_dir, out);
  c.out_dir = out ? *out : (base_dir / "out").lexically_normal();
  run.number("threads", c.threads);
  run.text("dataset", c.active_dataset);

  for (const auto& [name, sub] : tree) {
    if (name.rfind("dataset.", 0) != 0) continue;
    const Section s(name, sub);
    DatasetConfig d;
    d.name = name.substr(8);
    if (d.name.empty() || d.name == "combined") {
      throw Error("config: [" + name + "] is not a usable dataset name");
    }
    std::optional<std::filesystem::path> path;
    s.path("path", base_dir, path);
    if (!path) throw Error("config: missing mandatory key: [" + name + "] path");
    d.path = *path;
    std::string format = d.name;
    s.text("format", format);
    auto preset = DatasetFormat::preset(format);
    if (auto labels = s.raw("labels")) {
      d.format.name = format;
      d.format.scheme = ClassScheme(split_list(*labels));
      d.format.default_topics = preset ? preset->default_topics : 10;
    } else if (preset) {
      d.format = *preset;
    } else {
      throw Error("config: [" + name + "] format '" + format +
                  "' is not a preset (wz-ls, dt, founta); list its labels");
    }
    s.text("id_column", d.format.id_column);
    s.text("label_column", d.format.label_column);
    s.text("text_column", d.format.text_column);
    d.topics = d.format.default_topics;
    s.number("topics", d.topics);
    s.boolean("dedup_retweets", d.dedup_retweets);
    c.datasets.push_back(std::move(d));
  }

  if (tree.get_child_optional("combined")) {
    const Section s = section("combined");
    CombinedConfig cc;
    const std::pair<const char*, CombinedClass> groups[] = {
        {"normal", CombinedClass::kNormal},
        {"inappropriate", CombinedClass::kInappropriate},
        {"drop", CombinedClass::kDrop}};
    for (const auto& [key, cls] : groups) {
      if (auto v = s.raw(key)) {
        for (const auto& label : split_list(*v)) {
          if (!cc.mapping.emplace(label, cls).second) {
            throw Error("config: [combined] label '" + label + "' is mapped twice");
          }
        }
      }
    }
    s.number("topics", cc.topics);
    c.combined = std::move(cc);
  }

  const Section emb = section("embeddings");
  emb.path("glove", base_dir, c.glove);
  emb.path("word2vec_wiki", base_dir, c.word2vec_wiki);
  emb.path("paragram", base_dir, c.paragram);
  emb.number("dim", c.encoder.embed_dim);

  const Section sen = section("sentiment");
  sen.path("lexicon", base_dir, c.lexicon);
  sen.path("labels", base_dir, c.sentiment_labels);
  sen.number("epochs", c.sentiment_epochs);

  const Section top = section("topics");
  top.number("alpha", c.lda.alpha);
  top.number("beta", c.lda.beta);
  top.number("iterations", c.lda.iterations);
  top.number("burn_in", c.lda.burn_in);
  top.number("sample_lag", c.lda.sample_lag);
  top.number("min_word_posts", c.lda_filter.min_word_posts);
  top.number("min_post_words", c.lda_filter.min_post_words);
  top.number("sparsify", c.sparsify_threshold);
  top.number("sweep_min", c.sweep_min);
  top.number("sweep_max", c.sweep_max);

  const Section enc = section("encoder");
  if (auto widths = enc.raw("filter_widths")) {
    c.encoder.filter_widths.clear();
    for (const auto& w : split_list(*widths)) {
      std::size_t k = 0;
      auto [p, ec] = std::from_chars(w.data(), w.data() + w.size(), k);
      if (ec != std::errc() || p != w.data() + w.size()) {
        throw Error("config: [encoder] filter_widths: '" + w + "' is not a valid number");
      }
      c.encoder.filter_widths.push_back(k);
    }
  }
  enc.number("filters", c.encoder.filters);
  enc.number("hidden", c.encoder.hidden);
  enc.number("attention_dim", c.encoder.attention_dim);

  const Section tr = section("train");
  tr.number("learning_rate", c.train.learning_rate);
  tr.number("batch_size", c.train.batch_size);
  tr.number("epochs", c.train.epochs);
  tr.number("dropout_embed", c.train.dropout_embed);
  tr.number("dropout_fc", c.train.dropout_fc);
  tr.number("max_len", c.train.max_len);
  tr.boolean("freeze_pretrained", c.freeze_pretrained);
  tr.number("vocab_min_freq", c.vocab_min_freq);
  if (auto v = tr.raw("variant")) c.variant = parse_variant(*v);

  const Section ev = section("eval");
  ev.number("folds", c.folds);
  ev.number("holdout_fold", c.holdout_fold);

  c.train.seed = c.seed;
  c.train.threads = c.threads;
  c.lda.seed = c.seed;
  c.validate();
  c.lda.topics = c.topics();

  if (check_paths) {
    auto must_exist = [](const std::filesystem::path& p, const std::string& what) {
      if (!std::filesystem::exists(p)) throw Error("config: " + what + " " + p.string() + " does not exist");
    };
    for (const auto& d : c.datasets) must_exist(d.path, "[dataset." + d.name + "] path");
    if (c.glove) must_exist(*c.glove, "[embeddings] glove");
    if (c.word2vec_wiki) must_exist(*c.word2vec_wiki, "[embeddings] word2vec_wiki");
    if (c.paragram) must_exist(*c.paragram, "[embeddings] paragram");
    if (c.lexicon) must_exist(*c.lexicon, "[sentiment] lexicon");
    if (c.sentiment_labels) must_exist(*c.sentiment_labels, "[sentiment] labels");
  }
  return c;
}

RunConfig parse_config(const std::filesystem::path& path, bool check_paths) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read config " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), std::filesystem::absolute(path).parent_path(), check_paths);
}

std::string serialize_config(const RunConfig& c) {
  std::ostringstream o;
  auto opt = [](const std::optional<std::filesystem::path>& p) { return p ? p->string() : ""; };
  o << "[run]\nseed = " << c.seed << "\nout = " << c.out_dir.string() << "\nthreads = " << c.threads
    << "\ndataset = " << c.dataset_name() << "\n\n";
  for (const auto& d : c.datasets) {
    o << "[dataset." << d.name << "]\npath = " << d.path.string() << "\nformat = " << d.format.name
      << "\nlabels = " << join(d.format.scheme.names()) << "\nid_column = " << d.format.id_column
      << "\nlabel_column = " << d.format.label_column << "\ntext_column = " << d.format.text_column
      << "\ntopics = " << d.topics << "\ndedup_retweets = " << (d.dedup_retweets ? "true" : "false")
      << "\n\n";
  }
  if (c.combined) {
    std::vector<std::string> groups[3];
    for (const auto& [label, cls] : c.combined->mapping) groups[static_cast<int>(cls)].push_back(label);
    o << "[combined]\nnormal = " << join(groups[0]) << "\ninappropriate = " << join(groups[1])
      << "\ndrop = " << join(groups[2]) << "\ntopics = " << c.combined->topics << "\n\n";
  }
  o << "[embeddings]\nglove = " << opt(c.glove) << "\nword2vec_wiki = " << opt(c.word2vec_wiki)
    << "\nparagram = " << opt(c.paragram) << "\ndim = " << c.encoder.embed_dim << "\n\n";
  o << "[sentiment]\nlexicon = " << opt(c.lexicon) << "\nlabels = " << opt(c.sentiment_labels)
    << "\nepochs = " << c.sentiment_epochs << "\n\n";
  o << "[topics]\nalpha = " << number_text(c.lda.alpha) << "\nbeta = " << number_text(c.lda.beta)
    << "\niterations = " << c.lda.iterations << "\nburn_in = " << c.lda.burn_in
    << "\nsample_lag = " << c.lda.sample_lag << "\nmin_word_posts = " << c.lda_filter.min_word_posts
    << "\nmin_post_words = " << c.lda_filter.min_post_words
    << "\nsparsify = " << number_text(c.sparsify_threshold) << "\nsweep_min = " << c.sweep_min
    << "\nsweep_max = " << c.sweep_max << "\n\n";
  o << "[encoder]\nfilter_widths = " << join(c.encoder.filter_widths)
    << "\nfilters = " << c.encoder.filters << "\nhidden = " << c.encoder.hidden
    << "\nattention_dim = " << c.encoder.attention_dim << "\n\n";
  o << "[train]\nlearning_rate = " << number_text(c.train.learning_rate)
    << "\nbatch_size = " << c.train.batch_size << "\nepochs = " << c.train.epochs
    << "\ndropout_embed = " << number_text(c.train.dropout_embed)
    << "\ndropout_fc = " << number_text(c.train.dropout_fc) << "\nmax_len = " << c.train.max_len
    << "\nfreeze_pretrained = " << (c.freeze_pretrained ? "true" : "false")
    << "\nvocab_min_freq = " << c.vocab_min_freq << "\nvariant = " << variant_name(c.variant)
    << "\n\n";
  o << "[eval]\nfolds = " << c.folds << "\nholdout_fold = " << c.holdout_fold << "\n";
  return o.str();
}

}  // namespace deephate
