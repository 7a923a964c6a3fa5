#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>

#include "divkit/textproc.hpp"
#include "helpers.hpp"

using namespace divkit;
using V = std::vector<std::string>;

TEST_CASE("tokenizer rules") {
  CHECK(tokenize("A man is walking.").tokens == V{"a", "man", "is", "walking", "."});
  CHECK(tokenize("He isn't here").tokens == V{"he", "is", "n't", "here"});
  CHECK(tokenize("").tokens.empty());
  CHECK(tokenize("A man.").tokens == V{"a", "man", "."});
  CHECK(tokenize("We're done, they'll see; I'm here!").tokens ==
        V{"we", "'re", "done", ",", "they", "'ll", "see", ";", "i", "'m", "here", "!"});
  CHECK(tokenize("the dog's ball").tokens == V{"the", "dog", "'s", "ball"});
  CHECK(tokenize("I cannot go").tokens == V{"i", "can", "not", "go"});
  CHECK(tokenize("a U.S. flag").tokens == V{"a", "u.s.", "flag"});
  CHECK(tokenize("it costs 3.50 dollars").tokens == V{"it", "costs", "3.50", "dollars"});
  CHECK(tokenize("wait... what").tokens == V{"wait", "...", "what"});
  CHECK(tokenize("a \"quoted\" (word)").tokens == V{"a", "\"", "quoted", "\"", "(", "word", ")"});
  CHECK(tokenize("a well-known man").tokens == V{"a", "well-known", "man"});
  CHECK(tokenize("  spaced\tout\n").tokens == V{"spaced", "out"});
  CHECK(tokenize("ÉCOLE Ünd").tokens == V{"école", "ünd"});
  CHECK(tokenize("it’s").tokens == V{"it", "'s"});
}

TEST_CASE("tokens never contain whitespace and tokenizing is pure") {
  std::mt19937_64 rng(3);
  const V pieces = {"a", "Man", "isn't", "x.y", ",", "\"", "--", "...", "dog's", "3.5", " ", "\t"};
  for (int i = 0; i < 200; ++i) {
    std::string text;
    for (int k = 0; k < 8; ++k) text += pieces[rng() % pieces.size()] + ((rng() & 1) ? " " : "");
    const auto a = tokenize(text);
    CHECK(a == tokenize(text));
    for (const auto& t : a.tokens) {
      CHECK(!t.empty());
      CHECK(t.find_first_of(" \t\n") == std::string::npos);
    }
  }
}

TEST_CASE("semantic masking") {
  MaskCounter counter;
  TokenSequence s = testing::seq("a man runs");
  s.pos = std::vector<Upos>{Upos::DET, Upos::NOUN, Upos::VERB};
  const auto m = semantic_mask(s, counter);
  CHECK(m.tokens == V{"a", "⟨MASK_1⟩", "⟨MASK_2⟩"});
  CHECK(m.pos == s.pos);

  TokenSequence plain = testing::seq("the red one");
  plain.pos = std::vector<Upos>{Upos::DET, Upos::ADJ, Upos::NUM};
  CHECK(semantic_mask(plain, counter).tokens == plain.tokens);

  CHECK_THROWS_AS(semantic_mask(testing::seq("no tags"), counter), InputError);

  // two captions with "man": masked ids differ
  TokenCorpus c = testing::corpus({{"a man", "the man"}});
  builtin_pos(c);
  MaskCounter fresh;
  const auto masked = semantic_mask(c, fresh);
  CHECK(masked.samples[0][0].tokens[1] != masked.samples[0][1].tokens[1]);
}

TEST_CASE("no masked token appears in two captions") {
  std::mt19937_64 rng(11);
  TokenCorpus c = testing::corpus(testing::random_samples(rng, 20, 2, 5, testing::small_vocab()));
  builtin_pos(c);
  MaskCounter counter;
  const auto m = semantic_mask(c, counter);
  std::map<std::string, int> owners;
  for (const auto& s : m.samples)
    for (const auto& r : s) {
      std::set<std::string> here;
      for (const auto& t : r.tokens)
        if (t.rfind("⟨MASK_", 0) == 0) here.insert(t);
      for (const auto& t : here) ++owners[t];
    }
  for (const auto& [t, n] : owners) CHECK(n == 1);
  CHECK(m.token_count() == c.token_count());
}

TEST_CASE("vocab tail masking") {
  TokenCorpus c = testing::corpus({{"a a a a a", "a a a a b"}});
  const auto m = vocab_tail_mask(c, 0.9);
  CHECK(m.samples[0][1].tokens.back() == "⟨UNK_1⟩");
  CHECK(m.samples[0][0].tokens == c.samples[0][0].tokens);
  CHECK(vocab_tail_mask(c, 1.0).samples == c.samples);
  CHECK(m.token_count() == c.token_count());

  // ten types with one occurrence each: head is the first nine lexicographically
  TokenCorpus flat = testing::corpus({{"j i h g f e d c b a"}});
  const auto fm = vocab_tail_mask(flat, 0.9);
  CHECK(fm.samples[0][0].tokens[0] == "⟨UNK_1⟩");  // "j" is last lexicographically
  for (std::size_t i = 1; i < 10; ++i) CHECK(fm.samples[0][0].tokens[i] == flat.samples[0][0].tokens[i]);

  // every tail occurrence gets its own id
  TokenCorpus twice = testing::corpus({{"a a a a a a a a a a a a a a a a a a z z"}});
  const auto tm = vocab_tail_mask(twice, 0.9);
  CHECK(tm.samples[0][0].tokens[18] != tm.samples[0][0].tokens[19]);

  const std::vector<std::pair<std::string, std::size_t>> counts = {{"b", 3}, {"a", 3}, {"c", 4}};
  CHECK(head_types(counts, 0.5) == V{"c", "a"});
  CHECK_THROWS(vocab_tail_mask(c, 0.0));
}

TEST_CASE("built-in embedder") {
  const auto a = builtin_embed(testing::seq("a man runs"));
  double n = 0;
  for (float v : a.values) n += double(v) * v;
  CHECK(std::sqrt(n) == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(!a.degenerate);
  CHECK(builtin_embed(testing::seq("a man runs")).values == a.values);
  const auto empty = builtin_embed(testing::seq(""));
  CHECK(empty.degenerate);
  for (float v : a.values) CHECK(v >= 0);
}

TEST_CASE("built-in tagger") {
  auto tags = [](const std::string& s) { return *builtin_pos(testing::seq(s)).pos; };
  CHECK(tags("a man runs") == std::vector<Upos>{Upos::DET, Upos::NOUN, Upos::VERB});
  CHECK(tags("qwzrtx") == std::vector<Upos>{Upos::NOUN});
  CHECK(tags("walking") == std::vector<Upos>{Upos::VERB});
  CHECK(tags("zorbled") == std::vector<Upos>{Upos::VERB});
  CHECK(tags(". 42") == std::vector<Upos>{Upos::PUNCT, Upos::NUM});
}

TEST_CASE("POS sidecar attachment") {
  const auto d = testing::dataset({{"A man runs.", ""}});
  const auto dir = testing::temp_dir("pos");
  std::ofstream(dir + "/ok.jsonl") << R"({"sample_id":"s0","ref_index":0,"tags":["DET","NOUN","VERB","PUNCT"]})" "\n"
                                   << R"({"sample_id":"s0","ref_index":1,"tags":[]})" "\n";
  auto c = tokenize_dataset(d);
  attach_pos_sidecar(d, c, dir + "/ok.jsonl");
  CHECK((*c.samples[0][0].pos)[1] == Upos::NOUN);

  std::ofstream(dir + "/bad.jsonl") << R"({"sample_id":"s0","ref_index":0,"tags":["DET","NOUN"]})" "\n";
  auto c2 = tokenize_dataset(d);
  CHECK_THROWS_AS(attach_pos_sidecar(d, c2, dir + "/bad.jsonl"), InputError);
  std::ofstream(dir + "/unknown.jsonl") << R"({"sample_id":"zz","ref_index":0,"tags":[]})" "\n";
  auto c3 = tokenize_dataset(d);
  CHECK_THROWS_AS(attach_pos_sidecar(d, c3, dir + "/unknown.jsonl"), InputError);
}
