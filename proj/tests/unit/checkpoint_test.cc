#include <gtest/gtest.h>

#include "deephate/checkpoint.h"
#include "deephate/error.h"
#include "deephate/hashing.h"
#include "deephate/miniature.h"
#include "fixtures.h"

namespace deephate {
namespace {

using testing::read_file;
using testing::scratch_dir;
using testing::write_file;

std::string error_of(const std::filesystem::path& p) {
  try {
    Archive::load(p);
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(Archive, RoundTripIsBitwise) {
  const auto dir = scratch_dir("archive");
  Archive a;
  a.put("f", Tensor<float>(Shape{2, 3}, {1.5f, -0.0f, 3e-38f, 7, 8, 9}));
  a.put("d", Tensor<double>::vector({0.1, 1e300}));
  a.meta()["note"] = "x";
  a.save(dir / "a.bin");
  const Archive b = Archive::load(dir / "a.bin");
  EXPECT_EQ(sha256_tensor(b.get_float("f")), sha256_tensor(a.get_float("f")));
  EXPECT_EQ(b.get_double("d"), a.get_double("d"));
  EXPECT_EQ(b.meta()["note"], "x");
  EXPECT_THROW(b.get_double("f"), Error);
  EXPECT_THROW(b.get_float("missing"), Error);
  b.save(dir / "b.bin");
  EXPECT_EQ(read_file(dir / "a.bin"), read_file(dir / "b.bin"));
}

TEST(Archive, TruncationVersionAndCorruptionAreReported) {
  const auto dir = scratch_dir("archive-bad");
  Archive a;
  a.put("w", Tensor<float>(Shape{64}, 0.25f));
  a.save(dir / "ok.bin");
  const std::string bytes = read_file(dir / "ok.bin");

  write_file(dir / "short.bin", bytes.substr(0, bytes.size() - 10));
  EXPECT_NE(error_of(dir / "short.bin").find("truncated"), std::string::npos);
  write_file(dir / "tiny.bin", bytes.substr(0, 6));
  EXPECT_NE(error_of(dir / "tiny.bin").find("truncated"), std::string::npos);

  std::string v2 = bytes;
  v2[8] = 2;
  write_file(dir / "v2.bin", v2);
  EXPECT_NE(error_of(dir / "v2.bin").find("version"), std::string::npos);

  std::string flipped = bytes;
  flipped[flipped.size() - 1] ^= 0x40;
  write_file(dir / "flip.bin", flipped);
  EXPECT_NE(error_of(dir / "flip.bin").find("corrupt"), std::string::npos);

  std::string magic = bytes;
  magic[0] = 'X';
  write_file(dir / "magic.bin", magic);
  EXPECT_NE(error_of(dir / "magic.bin").find("not a deephate archive"), std::string::npos);
}

TEST(ModelCheckpoint, RoundTripGivesIdenticalOutputs) {
  const auto dir = scratch_dir("model-ckpt");
  for (bool frozen : {true, false}) {
    const Miniature m = make_miniature(4, Variant::kFull, frozen);
    DeepHate<float> model(m.config, m.vocab, m.tables);
    save_model(model, dir / "m.bin");
    const DeepHate<float> back = load_model(dir / "m.bin");
    for (const auto& p : m.posts) EXPECT_EQ(predict_proba(back, p), predict_proba(model, p));
    for (std::size_t b = 0; b < 4; ++b) EXPECT_EQ(back.table(b), model.table(b));
    save_model(back, dir / "m2.bin");
    EXPECT_EQ(read_file(dir / "m.bin"), read_file(dir / "m2.bin"));
  }
}

TEST(ModelCheckpoint, KindIsChecked) {
  const auto dir = scratch_dir("model-kind");
  Archive a;
  a.meta()["kind"] = "embedding";
  a.save(dir / "e.bin");
  EXPECT_THROW(load_model(dir / "e.bin"), Error);
}

TEST(TopicCheckpoint, RoundTrip) {
  const auto dir = scratch_dir("topic-ckpt");
  TopicModel t;
  t.topics = 2;
  t.alpha = 0.1;
  t.beta = 0.01;
  t.vocab = {"a", "b", "c"};
  t.phi = Tensor<double>(Shape{2, 3}, {0.2, 0.3, 0.5, 0.6, 0.3, 0.1});
  t.theta = Tensor<double>(Shape{1, 2}, {0.25, 0.75});
  t.kept_post_ids = {"p"};
  t.dropped_post_ids = {"q"};
  t.index();
  save_topic_model(t, dir / "t.bin");
  const TopicModel back = load_topic_model(dir / "t.bin");
  EXPECT_EQ(back.phi, t.phi);
  EXPECT_EQ(back.theta, t.theta);
  EXPECT_EQ(back.vocab, t.vocab);
  EXPECT_TRUE(back.was_dropped("q"));
  EXPECT_EQ(back.kept_row("p"), std::optional<std::size_t>(0));
}

TEST(EmbeddingCheckpoint, VocabularyMustMatch) {
  const auto dir = scratch_dir("embed-ckpt");
  const Vocabulary v({"x", "y"});
  const EmbeddingTable t = random_table(v, 4, EmbeddingSource::kSentiment, 1, true);
  save_embedding(t, v, dir / "e.bin");
  EXPECT_EQ(load_embedding(dir / "e.bin", v).matrix, t.matrix);
  EXPECT_THROW(load_embedding(dir / "e.bin", Vocabulary({"x"})), Error);
}

}  // namespace
}  // namespace deephate
