#ifndef DEEPHATE_CONFIG_H_
#define DEEPHATE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "deephate/corpus.h"
#include "deephate/encoder.h"
#include "deephate/model.h"
#include "deephate/topics.h"
#include "deephate/training.h"

namespace deephate {

struct DatasetConfig {
  std::string name;
  std::filesystem::path path;
  DatasetFormat format;
  int topics = 10;
  bool dedup_retweets = false;
};

// Binary normal/inappropriate corpus assembled from the other datasets.
struct CombinedConfig {
  // Keys are "label" or "dataset:label".
  std::map<std::string, CombinedClass> mapping;
  int topics = 15;
};

struct RunConfig {
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = "out";
  int threads = 1;
  std::vector<DatasetConfig> datasets;
  std::optional<CombinedConfig> combined;
  // Dataset the commands act on; defaults to the first one listed.
  std::string active_dataset;

  // Absent paths fall back to random tables (with a warning).
  std::optional<std::filesystem::path> glove;
  std::optional<std::filesystem::path> word2vec_wiki;
  std::optional<std::filesystem::path> paragram;

  std::optional<std::filesystem::path> lexicon;
  std::optional<std::filesystem::path> sentiment_labels;
  int sentiment_epochs = 10;

  LdaConfig lda;  // lda.topics is replaced by the active dataset's count
  LdaFilter lda_filter;
  double sparsify_threshold = kDefaultSparsifyThreshold;
  int sweep_min = 5;
  int sweep_max = 20;

  EncoderConfig encoder;
  TrainConfig train;
  bool freeze_pretrained = true;
  int vocab_min_freq = 1;
  Variant variant = Variant::kFull;

  int folds = 5;
  int holdout_fold = 0;

  // Name of the active dataset, or "combined".
  std::string dataset_name() const;
  // Topic count for the active dataset.
  int topics() const;
  const DatasetConfig& dataset(const std::string& name) const;

  void validate() const;
};

// INI-style text: "[section]" headers, "key = value" lines, '#' or ';'
// comments. Lists are comma-separated. Relative paths resolve against
// `base_dir`. Unknown sections or keys and missing mandatory keys are
// errors; so are referenced paths that do not exist when check_paths is set.
RunConfig parse_config_text(const std::string& text, const std::filesystem::path& base_dir,
                            bool check_paths = true);
RunConfig parse_config(const std::filesystem::path& path, bool check_paths = true);

// Every key spelled out, defaults included; parses back to an equal config.
std::string serialize_config(const RunConfig& config);

}  // namespace deephate

#endif  // DEEPHATE_CONFIG_H_
