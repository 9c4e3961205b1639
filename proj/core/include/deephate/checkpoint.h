#ifndef DEEPHATE_CHECKPOINT_H_
#define DEEPHATE_CHECKPOINT_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "deephate/embeddings.h"
#include "deephate/model.h"
#include "deephate/params.h"
#include "deephate/tensor.h"
#include "deephate/topics.h"

namespace deephate {

inline constexpr std::uint32_t kArchiveVersion = 1;

// Single-file archive of named arrays plus free-form metadata.
//
// Layout: 8-byte magic "DHARCHV\0", u32 format version, u64 manifest length,
// the manifest as JSON, then the array blobs back to back. Every integer and
// array element is little-endian. The manifest lists each array's name,
// dtype (float32 or float64), shape, byte offset into the blob area, byte
// length and sha256.
class Archive {
 public:
  void put(const std::string& name, const Tensor<float>& array);
  void put(const std::string& name, const Tensor<double>& array);

  bool has(const std::string& name) const { return arrays_.count(name) > 0; }
  std::vector<std::string> names() const;
  // Throws naming the array when it is absent or stored with another dtype.
  Tensor<float> get_float(const std::string& name) const;
  Tensor<double> get_double(const std::string& name) const;

  nlohmann::json& meta() { return meta_; }
  const nlohmann::json& meta() const { return meta_; }

  void save(const std::filesystem::path& path) const;
  // Validates magic, version, manifest and every array's bounds and hash.
  static Archive load(const std::filesystem::path& path);

 private:
  struct Entry {
    std::string dtype;
    Shape shape;
    std::vector<unsigned char> bytes;
  };
  const Entry& entry(const std::string& name, const char* dtype) const;

  std::map<std::string, Entry> arrays_;
  nlohmann::json meta_ = nlohmann::json::object();
};

nlohmann::json to_json(const EncoderConfig& config);
EncoderConfig encoder_from_json(const nlohmann::json& j);
nlohmann::json to_json(const ModelConfig& config);
ModelConfig model_config_from_json(const nlohmann::json& j);

// Parameters are stored as "param/<name>", tables the model holds frozen as
// "table/<branch>", the vocabulary and config in the metadata.
void save_model(const DeepHate<float>& model, const std::filesystem::path& path,
                const nlohmann::json& extra_meta = nlohmann::json::object());
DeepHate<float> load_model(const std::filesystem::path& path);

// Topic-word and post-topic arrays are kept in double precision.
void save_topic_model(const TopicModel& model, const std::filesystem::path& path,
                      const nlohmann::json& extra_meta = nlohmann::json::object());
TopicModel load_topic_model(const std::filesystem::path& path);

void save_embedding(const EmbeddingTable& table, const Vocabulary& vocab,
                    const std::filesystem::path& path,
                    const nlohmann::json& extra_meta = nlohmann::json::object());
// The stored vocabulary must equal `vocab`.
EmbeddingTable load_embedding(const std::filesystem::path& path, const Vocabulary& vocab);

}  // namespace deephate

#endif  // DEEPHATE_CHECKPOINT_H_
