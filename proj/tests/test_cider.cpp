#include "kdcvg/cider.hpp"
#include "kdcvg/errors.hpp"

#include <doctest.h>

#include <cmath>
#include <map>
#include <set>

using namespace kdcvg;

namespace {

// Independent brute-force document-frequency recount.
std::map<NGram, int> recount(const std::vector<Tokens>& docs, int max_n) {
    std::map<NGram, int> df;
    for (const auto& doc : docs) {
        std::set<NGram> seen;
        for (int n = 1; n <= max_n; ++n) {
            for (std::size_t i = 0; i + static_cast<std::size_t>(n) <= doc.size(); ++i) {
                seen.insert(NGram(doc.begin() + static_cast<long>(i), doc.begin() + static_cast<long>(i) + n));
            }
        }
        for (const auto& g : seen) ++df[g];
    }
    return df;
}

}  // namespace

TEST_CASE("tokenize") {
    CHECK(tokenize("Balance Oral pH") == Tokens{"balance", "oral", "ph"});
    CHECK(tokenize("mint-leaves, fresh!") == Tokens{"mint", "leaves", "fresh"});
    CHECK(tokenize("").empty());
}

TEST_CASE("document frequencies by direct counting") {
    const std::vector<Tokens> docs = {{"a", "b"}, {"a", "c"}};
    const NGramStats s = build_idf(docs);
    CHECK(s.corpus_size == 2);
    CHECK(s.df({"a"}) == 2);
    CHECK(s.df({"b"}) == 1);
    CHECK(s.df({"a", "b"}) == 1);
    CHECK(s.df({"z"}) == 0);
}

TEST_CASE("single document corpus has df 1 everywhere") {
    const std::vector<Tokens> docs = {{"a", "b", "a"}};
    for (const auto& [g, df] : build_idf(docs).doc_freq) CHECK(df == 1);
}

TEST_CASE("empty corpus is an error") {
    const std::vector<Tokens> docs;
    CHECK_THROWS_AS(build_idf(docs), Error);
}

TEST_CASE("3-document fixture matches a brute-force recount") {
    const std::vector<Tokens> docs = {tokenize("a b c d a b"), tokenize("a c e"), tokenize("b c d d e f")};
    const NGramStats s = build_idf(docs);
    CHECK(s.doc_freq == recount(docs, 4));
}

TEST_CASE("identity scores 1 and disjoint scores 0") {
    const std::vector<Tokens> docs = {tokenize("mint leaves on marble"), tokenize("runner on a trail"),
                                      tokenize("coffee in a cup")};
    const NGramStats s = build_idf(docs);
    const std::vector<Tokens> ref = {docs[0]};
    CHECK(cider_score(docs[0], ref, s) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(cider_score(tokenize("coffee cup"), ref, s) == 0.0);
    CHECK(cider_score(Tokens{}, ref, s) == 0.0);
}

TEST_CASE("hand-expanded fixture: candidate 'a b' against reference 'a c'") {
    // Corpus {a b, a c, b d}: df a=2, b=2, c=1, d=1, every bigram 1; corpus 3.
    // Unigrams: cand (1/2 log 3/2, 1/2 log 3/2) on (a, b); ref (1/2 log 3/2, 1/2 log 3) on (a, c).
    // cos1 = log(3/2)^2 / (sqrt(2) log(3/2) * sqrt(log(3/2)^2 + log(3)^2)).
    // Bigrams "a b" vs "a c" share nothing; orders 3 and 4 are empty.
    const std::vector<Tokens> docs = {{"a", "b"}, {"a", "c"}, {"b", "d"}};
    const NGramStats s = build_idf(docs);
    const double l15 = std::log(1.5);
    const double l3 = std::log(3.0);
    const double cos1 = (l15 * l15) / (std::sqrt(2.0) * l15 * std::sqrt(l15 * l15 + l3 * l3));
    const double expected = cos1 / 4.0;
    const std::vector<Tokens> ref = {{"a", "c"}};
    CHECK(std::abs(cider_score(Tokens{"a", "b"}, ref, s) - expected) <= 1e-9);
}

TEST_CASE("scores are the mean over references") {
    const std::vector<Tokens> docs = {{"a", "b"}, {"a", "c"}, {"b", "d"}};
    const NGramStats s = build_idf(docs);
    const std::vector<Tokens> both = {{"a", "b"}, {"b", "d"}};
    const std::vector<Tokens> r1 = {{"a", "b"}};
    const std::vector<Tokens> r2 = {{"b", "d"}};
    const Tokens cand = {"a", "b"};
    CHECK(cider_score(cand, both, s) ==
          doctest::Approx((cider_score(cand, r1, s) + cider_score(cand, r2, s)) / 2.0).epsilon(1e-12));
}

TEST_CASE("more shared n-grams never score lower on 4-token scripts") {
    const std::vector<Tokens> docs = {tokenize("w x y z"), tokenize("w q y r"), tokenize("p x s z"),
                                      tokenize("t u v w")};
    const NGramStats s = build_idf(docs);
    const std::vector<Tokens> ref = {tokenize("w x y z")};
    const std::vector<std::string> fill = {"k1", "k2", "k3", "k4"};
    // Every mask of reference positions kept; other positions get unseen fillers.
    for (int mask = 0; mask < 16; ++mask) {
        for (int extra = 0; extra < 4; ++extra) {
            if (mask & (1 << extra)) continue;
            const int sup = mask | (1 << extra);
            Tokens a, b;
            for (int i = 0; i < 4; ++i) {
                a.push_back((mask & (1 << i)) ? ref[0][static_cast<std::size_t>(i)] : fill[static_cast<std::size_t>(i)]);
                b.push_back((sup & (1 << i)) ? ref[0][static_cast<std::size_t>(i)] : fill[static_cast<std::size_t>(i)]);
            }
            CHECK(cider_score(b, ref, s) >= cider_score(a, ref, s) - 1e-15);
        }
    }
}

TEST_CASE("script overload scores content without labels") {
    const Script a = Script::from_components({"mint leaves", "marble counter", "droplet falls"});
    const Script b = Script::from_components({"coffee cup", "wooden table", "steam rises"});
    const std::vector<Tokens> docs = {tokenize(a.content_text()), tokenize(b.content_text())};
    const NGramStats s = build_idf(docs);
    const std::vector<Script> ra = {a};
    CHECK(cider_score(a, ra, s) == doctest::Approx(1.0));
    CHECK(cider_score(b, ra, s) == 0.0);  // labels would otherwise be shared tokens
}

TEST_CASE("range is [0, 1]") {
    const std::vector<Tokens> docs = {tokenize("a b c"), tokenize("a b d"), tokenize("c d e")};
    const NGramStats s = build_idf(docs);
    const std::vector<Tokens> ref = {docs[1]};
    for (const auto& c : {tokenize("a b c"), tokenize("a a a"), tokenize("e d c b a"), tokenize("a b d")}) {
        const double v = cider_score(c, ref, s);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
    }
}
