#include <gtest/gtest.h>

#include "deephate/embeddings.h"
#include "deephate/error.h"
#include "fixtures.h"

namespace deephate {
namespace {

using testing::scratch_dir;
using testing::write_file;

TEST(LoadPretrained, CopiesKnownRowsAndInitializesTheRest) {
  const auto dir = scratch_dir("glove");
  write_file(dir / "g.txt", "cat 0.5 -1 2\ndog 1 1 1\n");
  const Vocabulary v({"cat", "zebra"});
  const EmbeddingTable t = load_pretrained(dir / "g.txt", v, EmbeddingSource::kGlove, 3, 4);
  const int cat = v.index("cat");
  EXPECT_EQ(t.matrix(static_cast<std::size_t>(cat), 0), 0.5f);
  EXPECT_EQ(t.matrix(static_cast<std::size_t>(cat), 1), -1.0f);
  EXPECT_EQ(t.matrix(static_cast<std::size_t>(cat), 2), 2.0f);
  const auto zebra = static_cast<std::size_t>(v.index("zebra"));
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_LE(std::abs(t.matrix(zebra, j)), kOovInitRange);
    EXPECT_EQ(t.matrix(0, j), 0.0f);
  }
  EXPECT_TRUE(t.frozen);
  EXPECT_DOUBLE_EQ(t.coverage, 0.5);
}

TEST(LoadPretrained, HeaderLineIsOptional) {
  const auto dir = scratch_dir("w2v");
  write_file(dir / "w.txt", "2 2\ncat 1 2\ndog 3 4\n");
  const Vocabulary v({"dog"});
  const auto t = load_pretrained(dir / "w.txt", v, EmbeddingSource::kWord2VecWiki, 2);
  EXPECT_EQ(t.matrix(2, 1), 4.0f);
}

TEST(LoadPretrained, DimensionMismatchIsAnError) {
  const auto dir = scratch_dir("glove-dim");
  std::string row = "cat";
  for (int i = 0; i < 299; ++i) row += " 0.1";
  write_file(dir / "g.txt", row + "\n");
  EXPECT_THROW(load_pretrained(dir / "g.txt", Vocabulary({"cat"}), EmbeddingSource::kGlove, 300),
               Error);
}

SentimentLexicon lexicon() {
  SentimentLexicon l;
  l.valence = {{"good", 1.9}, {"great", 3.1}, {"bad", -2.5}};
  l.negations = SentimentLexicon::default_negations();
  l.boosters = SentimentLexicon::default_boosters();
  return l;
}

TEST(Sentiment, NoLexiconHitsIsNeutral) {
  const std::vector<std::string> t{"the", "table"};
  const auto s = score_sentiment(t, lexicon());
  EXPECT_EQ(s.neg, 0.0);
  EXPECT_EQ(s.neu, 1.0);
  EXPECT_EQ(s.pos, 0.0);
  EXPECT_EQ(score_sentiment({}, lexicon()).neu, 1.0);
}

TEST(Sentiment, SinglePositiveToken) {
  SentimentLexicon l;
  l.valence = {{"yay", 2.0}};
  const std::vector<std::string> t{"yay"};
  const auto s = score_sentiment(t, l);
  EXPECT_EQ(s.pos, 1.0);
  EXPECT_EQ(s.neg, 0.0);
  EXPECT_EQ(s.neu, 0.0);
}

TEST(Sentiment, NegationFlipsAndDamps) {
  const std::vector<std::string> t{"not", "good"};
  const auto s = score_sentiment(t, lexicon());
  const double n = 1.9 * 0.74;
  EXPECT_NEAR(s.neg, n / (n + 1.0), 1e-12);
  EXPECT_NEAR(s.neu, 1.0 / (n + 1.0), 1e-12);
  EXPECT_EQ(s.pos, 0.0);
  EXPECT_EQ(label_sentiment(s), SentimentLabel::kNegative);
}

TEST(Sentiment, ScoresStayOnTheSimplex) {
  const std::vector<std::string> words{"good", "great", "bad", "not", "very", "the", "never"};
  Rng rng(8);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<std::string> t(rng.below(12));
    for (auto& w : t) w = words[rng.below(words.size())];
    const auto s = score_sentiment(t, lexicon());
    ASSERT_NEAR(s.neg + s.neu + s.pos, 1.0, 1e-6);
    ASSERT_GE(std::min({s.neg, s.neu, s.pos}), 0.0);
  }
}

TEST(Sentiment, LabelArgmaxAndTies) {
  EXPECT_EQ(label_sentiment({0.1, 0.7, 0.2}), SentimentLabel::kNeutral);
  EXPECT_EQ(label_sentiment({0.5, 0.0, 0.5}), SentimentLabel::kPositive);
  EXPECT_EQ(label_sentiment({1.0 / 3, 1.0 / 3, 1.0 / 3}), SentimentLabel::kNeutral);
  EXPECT_EQ(label_sentiment({0.6, 0.1, 0.3}), SentimentLabel::kNegative);
}

TEST(SentimentLabels, LoadAndValidate) {
  const auto dir = scratch_dir("sentlabels");
  write_file(dir / "two.tsv", "a\tpositive\nb\tnegative\n");
  EXPECT_EQ(load_sentiment_labels(dir / "two.tsv").size(), 2u);
  write_file(dir / "bad.tsv", "a\tNEU\n");
  EXPECT_THROW(load_sentiment_labels(dir / "bad.tsv"), Error);
  write_file(dir / "empty.tsv", "");
  EXPECT_TRUE(load_sentiment_labels(dir / "empty.tsv").empty());
}

TEST(SentimentLabels, ExternalLabelsWinOverTheScorer) {
  Corpus c;
  c.scheme = ClassScheme({"x", "y"});
  Post a, b;
  a.id = "a";
  a.tokens = {"good"};
  b.id = "b";
  b.tokens = {"good"};
  c.posts = {a, b};
  const std::unordered_map<std::string, SentimentLabel> ext{{"b", SentimentLabel::kNegative}};
  assign_sentiment(c, lexicon(), &ext);
  EXPECT_EQ(c.posts[0].sentiment, SentimentLabel::kPositive);
  EXPECT_EQ(c.posts[1].sentiment, SentimentLabel::kNegative);
}

TEST(SentimentEmbedding, FitsSeparableSentimentAndComesBackFrozen) {
  Corpus c = testing::separable_corpus(60, 3);
  c.vocab = build_vocab(c, 1);
  EncoderConfig enc;
  enc.embed_dim = 12;
  enc.filter_widths = {2, 3};
  enc.filters = 6;
  enc.hidden = 8;
  enc.attention_dim = 6;
  TrainConfig tc;
  tc.epochs = 100;
  tc.batch_size = 8;
  tc.max_len = 12;
  tc.seed = 5;
  TrainHistory h;
  double best = 0.0;
  const EmbeddingTable t = train_sentiment_embedding(
      post_pointers(c), *c.vocab, enc, tc, &h, [&](const EpochStats& s) {
        best = std::max(best, s.train_accuracy);
        return best < 0.95;
      });
  EXPECT_GE(best, 0.95);
  EXPECT_LE(h.epochs.size(), 100u);
  EXPECT_TRUE(t.frozen);
  EXPECT_EQ(t.source, EmbeddingSource::kSentiment);
  for (std::size_t j = 0; j < t.dim(); ++j) EXPECT_EQ(t.matrix(0, j), 0.0f);
}

TEST(SentimentEmbedding, SingleClassIsRejected) {
  Corpus c = testing::separable_corpus(9, 1);
  for (auto& p : c.posts) p.sentiment = SentimentLabel::kNeutral;
  c.vocab = build_vocab(c, 1);
  EncoderConfig enc;
  enc.embed_dim = 4;
  enc.filter_widths = {2};
  enc.filters = 2;
  enc.hidden = 2;
  enc.attention_dim = 2;
  TrainConfig tc;
  tc.max_len = 8;
  EXPECT_THROW(train_sentiment_embedding(post_pointers(c), *c.vocab, enc, tc), Error);
}

}  // namespace
}  // namespace deephate
