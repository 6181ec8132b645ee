#include <doctest.h>

#include <cmath>

#include "memfuse/csv.hpp"
#include "memfuse/error.hpp"
#include "memfuse/synth_data.hpp"
#include "memfuse/text_affect.hpp"
#include "support.hpp"

using namespace memfuse;

namespace {

std::vector<std::string> texts(const std::vector<Token>& tokens) {
    std::vector<std::string> out;
    for (const auto& t : tokens) out.push_back(t.text);
    return out;
}

const TextResources& bundled() {
    static const TextResources r = load_text_resources(std::filesystem::path(MEMFUSE_RESOURCE_DIR) /
                                                       "text_resources.json");
    return r;
}

Lexicon toy_lexicon() {
    Lexicon l("toy", {"valence"});
    l.add("good", {1.0});
    l.add("bad", {-1.0});
    return l;
}

}  // namespace

TEST_CASE("preprocess examples") {
    CHECK(preprocess("I can't believe it was 1995") == "I cannot believe it was that year");
    CHECK(preprocess("we won 3 games in the 90s") == "we won 0 games in that decade");
    CHECK(preprocess("a walk in the park") == "a walk in the park");
    CHECK(preprocess("") == "");
    CHECK(preprocess("back in the 1990s and '80s") == "back in that decade and that decade");
    CHECK(preprocess("it's late, we'll go") == "it is late, we will go");
    CHECK(preprocess("mother's day") == "mother's day");
    CHECK(preprocess("in 2150 we had 12 cats") == "in 0 we had 0 cats");

    SUBCASE("idempotent") {
        for (const char* s : {"I can't believe it was 1995", "we won 3 games in the 90s", "they've won't 1987"}) {
            const std::string once = preprocess(s);
            CHECK(preprocess(once) == once);
        }
    }
}

TEST_CASE("tokenize examples") {
    CHECK(texts(tokenize("Good times!")) == std::vector<std::string>{"good", "times", "!"});
    CHECK(tokenize("").empty());
    CHECK(texts(tokenize("mother's day")) == std::vector<std::string>{"mother's", "day"});
    const auto t = tokenize("Good times!");
    CHECK(t[0].original == "Good");
    CHECK_FALSE(t[0].punct);
    CHECK(t[2].punct);
}

TEST_CASE("lemmatize examples") {
    CHECK(lemmatize("memories") == "memory");
    CHECK(lemmatize("run") == "run");
    CHECK(lemmatize("felt") == "feel");
    CHECK(lemmatize("ran") == "run");
    CHECK(lemmatize("went") == "go");
    CHECK(lemmatize("children") == "child");
    CHECK(lemmatize("running") == "run");
    CHECK(lemmatize("hoped") == "hope");
    CHECK(lemmatize("boxes") == "box");
}

TEST_CASE("lexical_features on a toy lexicon") {
    const std::vector<Lexicon> lex = {toy_lexicon()};
    const RuleScorer scorer;
    auto f = lexical_features("good good bad", lex, scorer);
    REQUIRE(f.values.size() == 1 + 4);
    CHECK(f.values[0] == 1.0 / 3.0);
    CHECK(f.coverage == 1.0);

    f = lexical_features("nothing matches here", lex, scorer);
    CHECK(f.values[0] == 0.0);
    CHECK(f.coverage == 0.0);

    f = lexical_features("good", lex, scorer);
    CHECK(f.values[0] == 1.0);

    SUBCASE("lemma fallback and coverage fraction") {
        Lexicon l("toy", {"v"});
        l.add("memory", {2.0});
        const std::vector<Lexicon> one = {l};
        const auto g = lexical_features("memories of home", one, scorer);
        CHECK(g.values[0] == 2.0);
        CHECK(g.coverage == doctest::Approx(1.0 / 3.0));
    }
    SUBCASE("scaling an entry set scales its block") {
        const std::vector<Lexicon> scaled = {toy_lexicon().scaled(2.5)};
        const auto a = lexical_features("good bad good good", lex, scorer);
        const auto b = lexical_features("good bad good good", scaled, scorer);
        CHECK(b.values[0] == doctest::Approx(2.5 * a.values[0]).epsilon(1e-15));
    }
    SUBCASE("token order does not change the mean block") {
        const auto a = lexical_features("good bad good", lex, scorer);
        const auto b = lexical_features("bad good good", lex, scorer);
        CHECK(a.values[0] == b.values[0]);
    }
    SUBCASE("no lexicons") {
        CHECK_THROWS_AS(lexical_features("good", std::vector<Lexicon>{}, scorer), InputError);
    }
}

TEST_CASE("rule_sentiment rules") {
    RuleScorer scorer;
    scorer.set("good", 1.9);
    scorer.set("bad", -2.5);

    const auto empty = rule_sentiment("", scorer);
    CHECK(empty.compound == 0.0);
    CHECK(empty.neutral == 1.0);
    CHECK(empty.positive == 0.0);
    CHECK(empty.negative == 0.0);

    const auto notgood = rule_sentiment("not good", scorer);
    const double v = 1.9 * -0.74;
    CHECK(v == doctest::Approx(-1.406));
    CHECK(notgood.compound == v / std::sqrt(v * v + 15.0));
    CHECK(notgood.compound == doctest::Approx(-0.341).epsilon(1e-3));
    CHECK(notgood.negative == (-v + 1.0) / (-v + 1.0 + 1.0));
    CHECK(notgood.neutral == 1.0 / (-v + 1.0 + 1.0));

    const auto plain = rule_sentiment("good", scorer);
    const auto bang = rule_sentiment("good!!", scorer);
    CHECK(bang.compound > plain.compound);
    const double vb = 1.9 + 2 * 0.292;
    CHECK(bang.compound == vb / std::sqrt(vb * vb + 15.0));
    const double v4 = 1.9 + 3 * 0.292;
    CHECK(rule_sentiment("good!!!!!", scorer).compound == v4 / std::sqrt(v4 * v4 + 15.0));

    const double vv = 1.9 + 0.293;
    CHECK(rule_sentiment("very good", scorer).compound == vv / std::sqrt(vv * vv + 15.0));

    const double vc = 1.9 + 0.733;
    CHECK(rule_sentiment("GOOD day", scorer).compound == vc / std::sqrt(vc * vc + 15.0));
    // all-caps text carries no emphasis
    CHECK(rule_sentiment("GOOD DAY", scorer).compound == plain.compound);

    const double vn = -2.5;
    CHECK(rule_sentiment("bad", scorer).compound == vn / std::sqrt(vn * vn + 15.0));
}

TEST_CASE("embed_features pooling") {
    EmbeddingTable a("a", 2);
    a.add("x", {0.0, 2.0});
    a.add("y", {2.0, 0.0});
    EmbeddingTable b("b", 3);
    b.add("x", {1.0, 2.0, 3.0});
    const std::vector<EmbeddingTable> tables = {a, b};

    auto f = embed_features("x", tables);
    CHECK(f.values == std::vector<double>{0.0, 2.0, 1.0, 2.0, 3.0});
    CHECK(f.coverage == 1.0);

    f = embed_features("x y", std::vector<EmbeddingTable>{a});
    CHECK(f.values == std::vector<double>{1.0, 1.0});

    f = embed_features("nothing here", tables);
    CHECK(f.values == std::vector<double>(5, 0.0));
    CHECK(f.coverage == 0.0);

    CHECK_THROWS_AS(embed_features("x", std::vector<EmbeddingTable>{}), InputError);
}

TEST_CASE("resource file parsing") {
    const auto dir = testing::scratch_dir("text_resources");
    write_text_file(dir / "lex.tsv", "word\tpos\tneg\nGood\t1\t0\nbad\t0\t1\n");
    const Lexicon l = load_lexicon_tsv(dir / "lex.tsv", "lex");
    CHECK(l.dims() == std::vector<std::string>{"pos", "neg"});
    REQUIRE(l.find("good") != nullptr);
    CHECK(*l.find("good") == std::vector<double>{1.0, 0.0});

    write_text_file(dir / "bad.tsv", "word\tpos\ngood\t1\t2\n");
    CHECK_THROWS_AS(load_lexicon_tsv(dir / "bad.tsv", "bad"), InputError);

    write_text_file(dir / "emb.txt", "the 0.1 0.2\ncat 1 2\n");
    const EmbeddingTable t = load_embedding_text(dir / "emb.txt", "emb");
    CHECK(t.dim() == 2);
    CHECK(t.size() == 2);

    write_text_file(dir / "emb_bad.txt", "the 0.1 0.2\ncat 1\n");
    try {
        load_embedding_text(dir / "emb_bad.txt", "emb");
        FAIL("expected InputError");
    } catch (const InputError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(load_text_resources(dir / "missing.json"), InputError);
}

TEST_CASE("bundled resource suite has the 130 + 500 layout") {
    const TextResources& r = bundled();
    CHECK(r.lexical_dim() == 130);
    CHECK(r.embedding_dim() == 500);
    CHECK(r.lexical_dim_names().size() == 130);
    const auto f = r.extract("I remember the happy summer when we danced at the wedding");
    CHECK(f.lexical.size() == 130);
    CHECK(f.embedding.size() == 500);
    CHECK(f.lexical_coverage > 0.0);
    CHECK(f.embedding_coverage > 0.0);
    for (double v : f.lexical) CHECK(std::isfinite(v));

    const auto empty = r.extract("");
    CHECK(empty.lexical.size() == 130);
    CHECK(empty.embedding.size() == 500);
}

TEST_CASE("generator phrase bank is covered by the bundled lexicons") {
    const TextResources& r = bundled();
    for (int o = 0; o < 8; ++o) {
        const bool pleasant = (o & 4) != 0;
        for (const auto& phrase : octant_phrases()[static_cast<std::size_t>(o)]) {
            CAPTURE(phrase);
            const auto f = r.extract(phrase);
            CHECK(f.lexical_coverage > 0.0);
            const double compound = f.lexical.back();
            if (pleasant) {
                CHECK(compound > 0.0);
            } else {
                CHECK(compound < 0.0);
            }
        }
    }
}
