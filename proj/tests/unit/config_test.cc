#include <gtest/gtest.h>

#include "deephate/config.h"
#include "deephate/error.h"
#include "fixtures.h"

namespace deephate {
namespace {

using testing::scratch_dir;
using testing::write_file;

std::filesystem::path data_dir() {
  const auto dir = scratch_dir("config");
  for (const char* f : {"wz.tsv", "dt.tsv", "founta.tsv"}) write_file(dir / f, "id\tlabel\ttext\n");
  return dir;
}

std::string message_of(const std::string& text, const std::filesystem::path& dir) {
  try {
    parse_config_text(text, dir);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(Config, MinimalConfigFillsDefaults) {
  const auto dir = data_dir();
  const RunConfig c = parse_config_text("[run]\nseed = 7\n[dataset.dt]\npath = dt.tsv\n", dir);
  EXPECT_EQ(c.seed, 7u);
  EXPECT_EQ(c.encoder.embed_dim, 300u);
  EXPECT_EQ(c.encoder.filter_widths, (std::vector<std::size_t>{3, 4, 5}));
  EXPECT_EQ(c.encoder.filters, 50u);
  EXPECT_EQ(c.encoder.hidden, 200u);
  EXPECT_EQ(c.encoder.attention_dim, 100u);
  EXPECT_DOUBLE_EQ(c.train.learning_rate, 0.001);
  EXPECT_EQ(c.folds, 5);
  EXPECT_EQ(c.topics(), 10);
  EXPECT_EQ(c.lda.topics, 10);
  EXPECT_EQ(c.train.seed, 7u);
  EXPECT_EQ(c.lda.seed, 7u);
  EXPECT_EQ(c.datasets[0].path, dir / "dt.tsv");
}

TEST(Config, PerDatasetTopicDefaults) {
  const auto dir = data_dir();
  const RunConfig c = parse_config_text(
      "[run]\nseed = 1\n[dataset.wz-ls]\npath = wz.tsv\n[dataset.dt]\npath = dt.tsv\n"
      "[dataset.founta]\npath = founta.tsv\n",
      dir);
  EXPECT_EQ(c.dataset("wz-ls").topics, 15);
  EXPECT_EQ(c.dataset("dt").topics, 10);
  EXPECT_EQ(c.dataset("founta").topics, 15);
}

TEST(Config, Errors) {
  const auto dir = data_dir();
  const std::string base = "[run]\nseed = 1\n[dataset.dt]\npath = dt.tsv\n";
  EXPECT_NE(message_of(base + "[train]\nlearning_rate = 0\n", dir), "");
  EXPECT_NE(message_of(base + "[train]\nlearnign_rate = 0.1\n", dir).find("learnign_rate"),
            std::string::npos);
  EXPECT_NE(message_of(base + "[bogus]\nx = 1\n", dir).find("bogus"), std::string::npos);
  EXPECT_NE(message_of("[dataset.dt]\npath = dt.tsv\n", dir).find("[run] seed"), std::string::npos);
  EXPECT_NE(message_of("[run]\nseed = 1\n", dir), "");
  EXPECT_NE(message_of("[run]\nseed = 1\n[dataset.dt]\npath = missing.tsv\n", dir).find("missing.tsv"),
            std::string::npos);
  EXPECT_NE(message_of(base + "[encoder]\nfilters = many\n", dir), "");
}

TEST(Config, RoundTripIsStable) {
  const auto dir = data_dir();
  const RunConfig a = parse_config_text(
      "[run]\nseed = 3\nthreads = 2\ndataset = combined\n[dataset.dt]\npath = dt.tsv\n"
      "dedup_retweets = true\n[dataset.founta]\npath = founta.tsv\n"
      "[combined]\nnormal = neither, normal\ninappropriate = hate, offensive, abusive, hateful\n"
      "drop = spam\n[encoder]\nfilter_widths = 2, 3\n[train]\ndropout_embed = 0.15\n"
      "variant = Topic+Semantic\n[topics]\nsparsify = 0.2\n",
      dir);
  const std::string text = serialize_config(a);
  const RunConfig b = parse_config_text(text, dir);
  EXPECT_EQ(serialize_config(b), text);
  EXPECT_EQ(b.dataset_name(), "combined");
  EXPECT_EQ(b.topics(), 15);
  EXPECT_EQ(b.variant, Variant::kTopicSemantic);
  EXPECT_DOUBLE_EQ(b.train.dropout_embed, 0.15);
  EXPECT_TRUE(b.dataset("dt").dedup_retweets);
}

TEST(Config, FixtureParses) {
  const RunConfig c = parse_config(testing::fixture_dir() / "tiny.ini");
  EXPECT_EQ(c.dataset_name(), "dt");
  EXPECT_EQ(c.topics(), 3);
  EXPECT_EQ(c.encoder.embed_dim, 8u);
}

}  // namespace
}  // namespace deephate
