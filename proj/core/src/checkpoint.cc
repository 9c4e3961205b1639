#include "deephate/checkpoint.h"

#include <bit>
#include <cstring>
#include <fstream>

#include "deephate/error.h"
#include "deephate/hashing.h"

namespace deephate {

static_assert(std::endian::native == std::endian::little,
              "archive blobs are written in host order, which must be little-endian");

namespace {

constexpr char kMagic[8] = {'D', 'H', 'A', 'R', 'C', 'H', 'V', '\0'};
constexpr std::size_t kHeaderBytes = sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t);

template <typename T>
std::vector<unsigned char> to_bytes(const Tensor<T>& t) {
  auto d = t.data();
  const auto* p = reinterpret_cast<const unsigned char*>(d.data());
  return {p, p + d.size_bytes()};
}

template <typename T>
Tensor<T> from_bytes(const Shape& shape, const std::vector<unsigned char>& bytes) {
  std::vector<T> values(bytes.size() / sizeof(T));
  std::memcpy(values.data(), bytes.data(), bytes.size());
  return Tensor<T>(shape, std::move(values));
}

std::size_t dtype_size(const std::string& dtype) {
  if (dtype == "float32") return 4;
  if (dtype == "float64") return 8;
  return 0;
}

}  // namespace

void Archive::put(const std::string& name, const Tensor<float>& array) {
  arrays_[name] = Entry{"float32", array.shape(), to_bytes(array)};
}

void Archive::put(const std::string& name, const Tensor<double>& array) {
  arrays_[name] = Entry{"float64", array.shape(), to_bytes(array)};
}

std::vector<std::string> Archive::names() const {
  std::vector<std::string> out;
  for (const auto& [name, e] : arrays_) out.push_back(name);
  return out;
}

const Archive::Entry& Archive::entry(const std::string& name, const char* dtype) const {
  auto it = arrays_.find(name);
  if (it == arrays_.end()) throw Error("checkpoint has no array '" + name + "'");
  if (it->second.dtype != dtype) {
    throw Error("checkpoint array '" + name + "' is " + it->second.dtype + ", expected " + dtype);
  }
  return it->second;
}

Tensor<float> Archive::get_float(const std::string& name) const {
  const Entry& e = entry(name, "float32");
  return from_bytes<float>(e.shape, e.bytes);
}

Tensor<double> Archive::get_double(const std::string& name) const {
  const Entry& e = entry(name, "float64");
  return from_bytes<double>(e.shape, e.bytes);
}

void Archive::save(const std::filesystem::path& path) const {
  nlohmann::json manifest;
  manifest["format_version"] = kArchiveVersion;
  manifest["meta"] = meta_;
  auto& list = manifest["arrays"] = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, e] : arrays_) {
    list.push_back({{"name", name},
                    {"dtype", e.dtype},
                    {"shape", e.shape},
                    {"offset", offset},
                    {"bytes", e.bytes.size()},
                    {"sha256", sha256_hex(e.bytes)}});
    offset += e.bytes.size();
  }
  const std::string text = manifest.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write checkpoint " + path.string());
  const std::uint32_t version = kArchiveVersion;
  const std::uint64_t length = text.size();
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&version), sizeof(version));
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto& [name, e] : arrays_) {
    out.write(reinterpret_cast<const char*>(e.bytes.data()),
              static_cast<std::streamsize>(e.bytes.size()));
  }
  if (!out) throw Error("failed writing checkpoint " + path.string());
}

Archive Archive::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint " + path.string());
  std::vector<unsigned char> data((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  const std::string where = "checkpoint " + path.string();
  if (data.size() < kHeaderBytes) throw Error(where + " is truncated (incomplete header)");
  if (std::memcmp(data.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(where + " is not a deephate archive");
  }
  std::uint32_t version = 0;
  std::uint64_t length = 0;
  std::memcpy(&version, data.data() + sizeof(kMagic), sizeof(version));
  std::memcpy(&length, data.data() + sizeof(kMagic) + sizeof(version), sizeof(length));
  if (version != kArchiveVersion) {
    throw Error(where + " has format version " + std::to_string(version) + ", expected " +
                std::to_string(kArchiveVersion));
  }
  if (length > data.size() - kHeaderBytes) throw Error(where + " is truncated (incomplete manifest)");

  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(data.begin() + kHeaderBytes,
                                     data.begin() + static_cast<std::ptrdiff_t>(kHeaderBytes + length));
  } catch (const nlohmann::json::exception& e) {
    throw Error(where + " has an unreadable manifest: " + e.what());
  }
  if (manifest.value("format_version", 0u) != kArchiveVersion) {
    throw Error(where + " manifest version does not match its header");
  }

  Archive archive;
  archive.meta_ = manifest.value("meta", nlohmann::json::object());
  const std::size_t blob_start = kHeaderBytes + length;
  const std::size_t blob_size = data.size() - blob_start;
  for (const auto& a : manifest.at("arrays")) {
    const std::string name = a.at("name").get<std::string>();
    Entry e;
    e.dtype = a.at("dtype").get<std::string>();
    e.shape = a.at("shape").get<Shape>();
    const auto offset = a.at("offset").get<std::uint64_t>();
    const auto bytes = a.at("bytes").get<std::uint64_t>();
    const std::size_t width = dtype_size(e.dtype);
    if (width == 0) throw Error(where + ": array '" + name + "' has unknown dtype " + e.dtype);
    if (e.shape.empty() || shape_size(e.shape) * width != bytes) {
      throw Error(where + ": array '" + name + "' shape " + shape_string(e.shape) +
                  " disagrees with its byte length");
    }
    if (offset > blob_size || bytes > blob_size - offset) {
      throw Error(where + " is truncated: array '" + name + "' extends past the end of the file");
    }
    e.bytes.assign(data.begin() + static_cast<std::ptrdiff_t>(blob_start + offset),
                   data.begin() + static_cast<std::ptrdiff_t>(blob_start + offset + bytes));
    if (sha256_hex(e.bytes) != a.at("sha256").get<std::string>()) {
      throw Error(where + ": array '" + name + "' is corrupt (sha256 mismatch)");
    }
    archive.arrays_[name] = std::move(e);
  }
  return archive;
}

nlohmann::json to_json(const EncoderConfig& c) {
  return {{"embed_dim", c.embed_dim},
          {"filter_widths", c.filter_widths},
          {"filters", c.filters},
          {"hidden", c.hidden},
          {"attention_dim", c.attention_dim}};
}

EncoderConfig encoder_from_json(const nlohmann::json& j) {
  EncoderConfig c;
  c.embed_dim = j.at("embed_dim").get<std::size_t>();
  c.filter_widths = j.at("filter_widths").get<std::vector<std::size_t>>();
  c.filters = j.at("filters").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.attention_dim = j.at("attention_dim").get<std::size_t>();
  return c;
}

nlohmann::json to_json(const ModelConfig& c) {
  return {{"encoder", to_json(c.encoder)},
          {"topics", c.topics},
          {"classes", c.classes},
          {"variant", std::string(variant_name(c.variant))},
          {"zero_sentiment", c.zero_sentiment},
          {"zero_topic", c.zero_topic},
          {"freeze_pretrained", c.freeze_pretrained},
          {"max_len", c.max_len},
          {"dropout_embed", c.dropout_embed},
          {"dropout_fc", c.dropout_fc},
          {"seed", c.seed}};
}

ModelConfig model_config_from_json(const nlohmann::json& j) {
  ModelConfig c;
  c.encoder = encoder_from_json(j.at("encoder"));
  c.topics = j.at("topics").get<std::size_t>();
  c.classes = j.at("classes").get<std::size_t>();
  c.variant = parse_variant(j.at("variant").get<std::string>());
  c.zero_sentiment = j.at("zero_sentiment").get<bool>();
  c.zero_topic = j.at("zero_topic").get<bool>();
  c.freeze_pretrained = j.at("freeze_pretrained").get<bool>();
  c.max_len = j.at("max_len").get<int>();
  c.dropout_embed = j.at("dropout_embed").get<double>();
  c.dropout_fc = j.at("dropout_fc").get<double>();
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

void save_model(const DeepHate<float>& model, const std::filesystem::path& path,
                const nlohmann::json& extra_meta) {
  Archive a;
  a.meta()["kind"] = "deephate-model";
  a.meta()["config"] = to_json(model.config());
  a.meta()["vocab"] = model.vocab().tokens();
  a.meta()["extra"] = extra_meta;
  const auto& params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    a.put("param/" + params[i].name, params[i].value);
  }
  const std::size_t branches = model.config().has_sentiment() ? 4 : 3;
  for (std::size_t b = 0; b < branches; ++b) {
    if (b == 3 || model.config().freeze_pretrained) {
      a.put("table/" + std::string(kBranchNames[b]), model.table(b));
    }
  }
  a.save(path);
}

namespace {

void expect_kind(const Archive& a, const std::filesystem::path& path, const char* kind) {
  if (a.meta().value("kind", std::string()) != kind) {
    throw Error("checkpoint " + path.string() + " does not hold a " + kind);
  }
}

Vocabulary vocab_from_meta(const nlohmann::json& tokens) {
  auto list = tokens.get<std::vector<std::string>>();
  if (list.size() < 2 || list[0] != Vocabulary::kPadToken || list[1] != Vocabulary::kUnkToken) {
    throw Error("checkpoint vocabulary lacks the reserved <pad>/<unk> entries");
  }
  return Vocabulary(std::vector<std::string>(list.begin() + 2, list.end()));
}

}  // namespace

DeepHate<float> load_model(const std::filesystem::path& path) {
  const Archive a = Archive::load(path);
  expect_kind(a, path, "deephate-model");
  const ModelConfig config = model_config_from_json(a.meta().at("config"));
  Vocabulary vocab = vocab_from_meta(a.meta().at("vocab"));

  ModelTables tables;
  EmbeddingTable* slots[4] = {&tables.glove, &tables.word2vec, &tables.paragram, &tables.sentiment};
  const std::size_t branches = config.has_sentiment() ? 4 : 3;
  for (std::size_t b = 0; b < branches; ++b) {
    const std::string name(kBranchNames[b]);
    slots[b]->matrix = (b == 3 || config.freeze_pretrained) ? a.get_float("table/" + name)
                                                            : a.get_float("param/embed." + name);
  }
  DeepHate<float> model(config, std::move(vocab), tables);
  auto& params = model.params();
  for (std::size_t i = 0; i < params.size(); ++i) {
    Tensor<float> v = a.get_float("param/" + params[i].name);
    if (v.shape() != params[i].value.shape()) {
      throw Error("checkpoint array 'param/" + params[i].name + "' has shape " +
                  shape_string(v.shape()) + ", model expects " +
                  shape_string(params[i].value.shape()));
    }
    params[i].value = std::move(v);
  }
  return model;
}

void save_topic_model(const TopicModel& model, const std::filesystem::path& path,
                      const nlohmann::json& extra_meta) {
  Archive a;
  a.meta() = {{"kind", "topic-model"},
              {"topics", model.topics},
              {"alpha", model.alpha},
              {"beta", model.beta},
              {"vocab", model.vocab},
              {"kept_post_ids", model.kept_post_ids},
              {"dropped_post_ids", model.dropped_post_ids},
              {"sweep_loglik", model.sweep_loglik},
              {"extra", extra_meta}};
  a.put("topics/phi", model.phi);
  a.put("topics/theta", model.theta);
  a.save(path);
}

TopicModel load_topic_model(const std::filesystem::path& path) {
  const Archive a = Archive::load(path);
  expect_kind(a, path, "topic-model");
  const auto& m = a.meta();
  TopicModel t;
  t.topics = m.at("topics").get<int>();
  t.alpha = m.at("alpha").get<double>();
  t.beta = m.at("beta").get<double>();
  t.vocab = m.at("vocab").get<std::vector<std::string>>();
  t.kept_post_ids = m.at("kept_post_ids").get<std::vector<std::string>>();
  t.dropped_post_ids = m.at("dropped_post_ids").get<std::vector<std::string>>();
  t.sweep_loglik = m.at("sweep_loglik").get<std::vector<double>>();
  t.phi = a.get_double("topics/phi");
  t.theta = a.get_double("topics/theta");
  const auto K = static_cast<std::size_t>(t.topics);
  if (t.phi.shape() != Shape{K, t.vocab.size()}) {
    throw Error("checkpoint array 'topics/phi' has shape " + shape_string(t.phi.shape()) +
                " inconsistent with the stored vocabulary");
  }
  if (t.theta.shape() != Shape{t.kept_post_ids.size(), K}) {
    throw Error("checkpoint array 'topics/theta' has shape " + shape_string(t.theta.shape()) +
                " inconsistent with the stored post ids");
  }
  t.index();
  return t;
}

void save_embedding(const EmbeddingTable& table, const Vocabulary& vocab,
                    const std::filesystem::path& path, const nlohmann::json& extra_meta) {
  Archive a;
  a.meta() = {{"kind", "embedding"},
              {"source", std::string(source_name(table.source))},
              {"frozen", table.frozen},
              {"coverage", table.coverage},
              {"vocab", vocab.tokens()},
              {"extra", extra_meta}};
  a.put("table", table.matrix);
  a.save(path);
}

EmbeddingTable load_embedding(const std::filesystem::path& path, const Vocabulary& vocab) {
  const Archive a = Archive::load(path);
  expect_kind(a, path, "embedding");
  if (a.meta().at("vocab").get<std::vector<std::string>>() != vocab.tokens()) {
    throw Error("embedding " + path.string() + " was built for a different vocabulary");
  }
  EmbeddingTable t;
  t.matrix = a.get_float("table");
  t.source = parse_source(a.meta().at("source").get<std::string>());
  t.frozen = a.meta().at("frozen").get<bool>();
  t.coverage = a.meta().at("coverage").get<double>();
  return t;
}

}  // namespace deephate
