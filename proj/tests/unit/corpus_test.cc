#include <gtest/gtest.h>

#include "deephate/corpus.h"
#include "deephate/error.h"
#include "deephate/log.h"
#include "fixtures.h"

namespace deephate {
namespace {

using testing::scratch_dir;
using testing::write_file;

TEST(Tokenize, UrlsAndMentionsBecomePlaceholders) {
  EXPECT_EQ(normalize_and_tokenize("Check http://x.co @Bob"),
            (std::vector<std::string>{"check", "<url>", "<user>"}));
}

TEST(Tokenize, HashtagLosesMarkAndPunctuationSplits) {
  EXPECT_EQ(normalize_and_tokenize("#MKR is awful!!"),
            (std::vector<std::string>{"mkr", "is", "awful", "!!"}));
}

TEST(Tokenize, EmptyInput) { EXPECT_TRUE(normalize_and_tokenize("").empty()); }

TEST(LoadDataset, FourRowFixture) {
  const auto dir = scratch_dir("load4");
  write_file(dir / "d.tsv",
             "id\tlabel\ttext\n1\thate\tgo away\n2\toffensive\tyou idiot\n"
             "3\tneither\tnice day\n4\tneither\tok then\n");
  const Corpus c = load_dataset(dir / "d.tsv", *DatasetFormat::preset("dt"));
  EXPECT_EQ(c.size(), 4u);
  EXPECT_EQ(c.scheme.size(), 3u);
  EXPECT_EQ(c.posts[1].label_index, 1);
}

TEST(LoadDataset, EmptyTextNamesTheLine) {
  const auto dir = scratch_dir("load-empty");
  write_file(dir / "d.tsv", "id\tlabel\ttext\n1\thate\tgo away\n2\tneither\t  \n");
  try {
    load_dataset(dir / "d.tsv", *DatasetFormat::preset("dt"));
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "empty text at line 3");
  }
}

TEST(LoadDataset, UnknownLabelIsRejected) {
  const auto dir = scratch_dir("load-label");
  write_file(dir / "d.tsv", "id\tlabel\ttext\n1\tspam\tbuy now\n");
  EXPECT_THROW(load_dataset(dir / "d.tsv", *DatasetFormat::preset("dt")), Error);
}

Corpus corpus_of(std::vector<std::vector<std::string>> docs) {
  Corpus c;
  c.scheme = ClassScheme({"a", "b"});
  for (std::size_t i = 0; i < docs.size(); ++i) {
    Post p;
    p.id = std::to_string(i);
    p.tokens = std::move(docs[i]);
    c.posts.push_back(std::move(p));
  }
  return c;
}

TEST(BuildVocab, MinFreqThreshold) {
  const Corpus c = corpus_of({{"a", "a", "b"}, {"a"}});
  const Vocabulary v = build_vocab(c, 2);
  EXPECT_EQ(v.tokens(), (std::vector<std::string>{"<pad>", "<unk>", "a"}));
}

TEST(BuildVocab, MinFreqOneKeepsEverything) {
  const Corpus c = corpus_of({{"a", "a", "b"}, {"a", "c"}});
  EXPECT_EQ(build_vocab(c, 1).size(), 5u);
}

TEST(BuildVocab, Deterministic) {
  const Corpus c = corpus_of({{"x", "y", "z", "y"}, {"z", "q"}});
  EXPECT_EQ(build_vocab(c, 1), build_vocab(c, 1));
}

TEST(EncodePost, PadsTruncatesAndMapsUnknown) {
  const Vocabulary v({"a", "b", "c"});
  Post p;
  p.tokens = {"a", "b", "c"};
  EXPECT_EQ(encode_post(p, v, 5), (std::vector<int>{2, 3, 4, 0, 0}));
  p.tokens = {"a", "b", "c", "a", "b", "c", "a"};
  EXPECT_EQ(encode_post(p, v, 5), (std::vector<int>{2, 3, 4, 2, 3}));
  p.tokens = {"zzz"};
  EXPECT_EQ(encode_post(p, v, 2)[0], Vocabulary::kUnk);
}

TEST(EncodePost, LengthProperty) {
  const Vocabulary v({"a"});
  Rng rng(3);
  for (int trial = 0; trial < 200; ++trial) {
    Post p;
    p.tokens.assign(rng.below(20), "a");
    const int L = 1 + static_cast<int>(rng.below(15));
    const auto ids = encode_post(p, v, L);
    ASSERT_EQ(ids.size(), static_cast<std::size_t>(L));
    const auto non_pad = std::count_if(ids.begin(), ids.end(), [](int i) { return i != 0; });
    EXPECT_EQ(static_cast<std::size_t>(non_pad), std::min(p.tokens.size(), ids.size()));
  }
}

Corpus labeled(std::vector<int> labels) {
  Corpus c;
  c.scheme = ClassScheme({"a", "b", "c"});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    Post p;
    p.id = "p" + std::to_string(i);
    p.tokens = {"w"};
    p.label_index = labels[i];
    c.posts.push_back(p);
  }
  return c;
}

TEST(MakeFolds, EqualSizesAndStratified) {
  std::vector<int> labels(100);
  for (int i = 0; i < 100; ++i) labels[static_cast<std::size_t>(i)] = i < 50 ? 0 : 1;
  const Corpus c = labeled(labels);
  const SplitPlan plan = make_folds(c, 5, 42);
  for (int f = 0; f < 5; ++f) {
    const auto test = plan.test_indices(f);
    EXPECT_EQ(test.size(), 20u);
    const auto zeros = std::count_if(test.begin(), test.end(),
                                     [&](std::size_t i) { return c.posts[i].label_index == 0; });
    EXPECT_EQ(zeros, 10);
    EXPECT_EQ(plan.train_indices(f).size(), 80u);
  }
  EXPECT_EQ(make_folds(c, 5, 42).assignments, plan.assignments);
}

TEST(ClassDistribution, Counts) {
  EXPECT_EQ(class_distribution(labeled({0, 0, 1, 2})), (std::vector<std::size_t>{2, 1, 1}));
  EXPECT_EQ(class_distribution(labeled({})), (std::vector<std::size_t>{0, 0, 0}));
}

TEST(DedupRetweets, DropsRetweetsAndDuplicates) {
  Corpus c = corpus_of({normalize_and_tokenize("hello"), normalize_and_tokenize("RT @a hello"),
                        normalize_and_tokenize("hello")});
  const Corpus d = dedup_retweets(c);
  ASSERT_EQ(d.size(), 1u);
  EXPECT_EQ(d.posts[0].tokens, (std::vector<std::string>{"hello"}));
  const Corpus unique = corpus_of({{"a"}, {"b"}});
  EXPECT_EQ(dedup_retweets(unique).size(), 2u);
  EXPECT_EQ(dedup_retweets(corpus_of({})).size(), 0u);
}

TEST(BuildCombined, SpamDroppedAndLabelsMapped) {
  Corpus founta;
  founta.name = "founta";
  founta.scheme = DatasetFormat::preset("founta")->scheme;
  const int labels[] = {0, 1, 2, 3};
  for (int l : labels) {
    Post p;
    p.id = std::to_string(l);
    p.tokens = {"w"};
    p.label_index = l;
    founta.posts.push_back(p);
  }
  const std::map<std::string, CombinedClass> mapping{{"normal", CombinedClass::kNormal},
                                                      {"abusive", CombinedClass::kInappropriate},
                                                      {"hateful", CombinedClass::kInappropriate},
                                                      {"spam", CombinedClass::kDrop}};
  const Corpus c = build_combined({founta}, mapping);
  ASSERT_EQ(c.size(), 3u);
  EXPECT_EQ(c.scheme.names(), (std::vector<std::string>{"normal", "inappropriate"}));
  EXPECT_EQ(class_distribution(c), (std::vector<std::size_t>{1, 2}));
}

TEST(BuildCombined, OneEffectiveClassWarns) {
  Corpus dt = labeled({0, 1, 2});
  dt.name = "dt";
  log::ScopedCapture capture;
  const Corpus c = build_combined({dt}, {{"a", CombinedClass::kNormal},
                                         {"b", CombinedClass::kNormal},
                                         {"c", CombinedClass::kNormal}});
  EXPECT_EQ(class_distribution(c), (std::vector<std::size_t>{3, 0}));
  EXPECT_FALSE(capture.warnings().empty());
}

TEST(TokenizedFiles, RoundTrip) {
  const auto dir = scratch_dir("tokenized");
  Corpus c = corpus_of({{"a", "b"}, {"c"}});
  c.posts[1].label_index = 1;
  save_tokenized(c, dir / "c.tsv");
  const Corpus back = load_tokenized(dir / "c.tsv", c.scheme);
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back.posts[0].tokens, c.posts[0].tokens);
  EXPECT_EQ(back.posts[1].label_index, 1);
  const Vocabulary v({"x", "y"});
  save_vocab(v, dir / "v.txt");
  EXPECT_EQ(load_vocab(dir / "v.txt"), v);
}

}  // namespace
}  // namespace deephate
