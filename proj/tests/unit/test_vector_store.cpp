/*
 * Embedders and the flat cosine index: determinism, ranking against an
 * argsort oracle, candidate restriction, persistence, and the
 * metadata-imbued text representation.
 */
#include <doctest.h>

#include <unistd.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "chatmem/vector_store.hpp"

using namespace chatmem;
namespace fs = std::filesystem;

namespace {

fs::path temp_file(const std::string& name) {
    static int counter = 0;
    fs::path dir = fs::temp_directory_path() /
                   ("chatmem-vs-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::create_directories(dir);
    return dir / name;
}

Response make_response(int idx, int session, const std::string& speaker, Date d, int minutes,
                       const std::string& text) {
    Response r;
    r.response_index = idx;
    r.session_index = session;
    r.speaker = speaker;
    r.date = d;
    r.time = TimeOfDay{minutes};
    r.text = text;
    return r;
}

}  // namespace

TEST_CASE("hashed bag-of-words embeddings are deterministic unit vectors") {
    HashedBowEmbedder emb(128);
    CHECK(emb.dimension() == 128);

    Eigen::VectorXf a = emb.embed("I ran the spring marathon yesterday");
    Eigen::VectorXf b = emb.embed("I ran the spring marathon yesterday");
    REQUIRE(a.size() == 128);
    CHECK(a == b);
    CHECK(a.norm() == doctest::Approx(1.0f).epsilon(1e-5));

    HashedBowEmbedder other_seed(128, 0x1234);
    CHECK(other_seed.embed("I ran the spring marathon yesterday") != a);

    HashedBowEmbedder emb64(64);
    CHECK(emb64.embed("hello world").size() == 64);

    CHECK_THROWS_AS(emb.embed(""), EmbedError);
    CHECK_THROWS_AS(emb.embed("   \t\n "), EmbedError);
    CHECK_THROWS_AS(HashedBowEmbedder(0), EmbedError);

    auto batch = emb.embed_batch({"first text here", "second text here"});
    REQUIRE(batch.size() == 2);
    CHECK(batch[0] == emb.embed("first text here"));
    CHECK(batch[1] == emb.embed("second text here"));
}

TEST_CASE("shared vocabulary scores higher than disjoint vocabulary") {
    HashedBowEmbedder emb(256);
    Eigen::VectorXf query = emb.embed("red apple");
    float close = cosine_similarity(query, emb.embed("red apple pie"));
    float far = cosine_similarity(query, emb.embed("quantum flux chamber"));
    CHECK(close > far);
    CHECK(close > 0.5f);

    CHECK(cosine_similarity(query, query) == doctest::Approx(1.0f).epsilon(1e-5));
    Eigen::VectorXf zero = Eigen::VectorXf::Zero(256);
    CHECK(cosine_similarity(query, zero) == 0.0f);
    CHECK(cosine_similarity(zero, zero) == 0.0f);
}

TEST_CASE("index insertion rules") {
    VectorIndex index;
    CHECK(index.empty());
    Eigen::VectorXf v = Eigen::VectorXf::Ones(4);
    index.add(7, v);
    index.add(3, 2 * v);
    CHECK(index.size() == 2);
    CHECK(index.dimension() == 4);
    CHECK(index.contains(7));
    CHECK_FALSE(index.contains(4));
    CHECK(index.ids() == std::vector<int>{3, 7});
    CHECK(index.vector_of(3) == 2 * v);

    CHECK_THROWS_AS(index.add(7, v), IndexError);
    CHECK_THROWS_AS(index.add(9, Eigen::VectorXf::Ones(5)), IndexError);
    CHECK_THROWS_AS(index.vector_of(42), IndexError);
}

TEST_CASE("top-k matches a full argsort on random vectors") {
    std::mt19937 rng(5150);
    std::normal_distribution<float> gauss(0.0f, 1.0f);
    const int dim = 32;

    for (int trial = 0; trial < 50; ++trial) {
        int n = 5 + static_cast<int>(rng() % 60);
        VectorIndex index;
        std::vector<int> all_ids;
        for (int i = 0; i < n; ++i) {
            Eigen::VectorXf v(dim);
            for (int j = 0; j < dim; ++j) v[j] = gauss(rng);
            int id = i * 3 + 1;  // non-contiguous ids
            index.add(id, v);
            all_ids.push_back(id);
        }
        Eigen::VectorXf query(dim);
        for (int j = 0; j < dim; ++j) query[j] = gauss(rng);

        std::vector<Scored> oracle;
        for (int id : all_ids) oracle.push_back({id, cosine_similarity(query, index.vector_of(id))});
        std::sort(oracle.begin(), oracle.end(), [](const Scored& a, const Scored& b) {
            if (a.score != b.score) return a.score > b.score;
            return a.id < b.id;
        });

        for (int k : {1, 3, 10, n, n + 5}) {
            auto got = index.top_k_all(query, k);
            size_t want_len = std::min<size_t>(static_cast<size_t>(k), oracle.size());
            CAPTURE(trial);
            CAPTURE(k);
            REQUIRE(got.size() == want_len);
            for (size_t i = 0; i < want_len; ++i) {
                REQUIRE(got[i].id == oracle[i].id);
                REQUIRE(got[i].score == oracle[i].score);
            }
        }

        // Restricting to candidates ranks the same subset.
        std::vector<int> subset;
        for (int id : all_ids)
            if (rng() % 2 == 0) subset.push_back(id);
        auto ranked = index.top_k(query, subset, static_cast<int>(subset.size()) + 1);
        std::vector<Scored> sub_oracle;
        for (const auto& s : oracle)
            if (std::find(subset.begin(), subset.end(), s.id) != subset.end())
                sub_oracle.push_back(s);
        REQUIRE(ranked.size() == sub_oracle.size());
        for (size_t i = 0; i < ranked.size(); ++i) REQUIRE(ranked[i].id == sub_oracle[i].id);
    }
}

TEST_CASE("top-k edge cases") {
    VectorIndex index;
    Eigen::VectorXf v = Eigen::VectorXf::Ones(3);
    index.add(1, v);
    CHECK(index.top_k(v, {}, 5).empty());
    CHECK_THROWS_AS(index.top_k(v, {1}, 0), IndexError);
    CHECK_THROWS_AS(index.top_k(v, {2}, 1), IndexError);  // candidate not indexed

    // Ties break toward the lower id.
    index.add(9, v);
    index.add(4, v);
    auto tied = index.top_k_all(v, 3);
    REQUIRE(tied.size() == 3);
    CHECK(tied[0].id == 1);
    CHECK(tied[1].id == 4);
    CHECK(tied[2].id == 9);
}

TEST_CASE("index files round-trip") {
    HashedBowEmbedder emb(48);
    VectorIndex index;
    index.add(0, emb.embed("first row of text"));
    index.add(5, emb.embed("second row about gardens"));
    index.add(12, emb.embed("third row about travel"));

    fs::path path = temp_file("index.bin");
    index.save(path.string());
    VectorIndex back = VectorIndex::load(path.string());

    CHECK(back.size() == index.size());
    CHECK(back.dimension() == index.dimension());
    CHECK(back.ids() == index.ids());
    for (int id : index.ids()) {
        CAPTURE(id);
        REQUIRE(back.vector_of(id) == index.vector_of(id));
    }

    CHECK_THROWS_AS(VectorIndex::load((path.parent_path() / "missing.bin").string()), IndexError);
    fs::path junk = temp_file("junk.bin");
    std::ofstream(junk) << "this is not a vector index";
    CHECK_THROWS_AS(VectorIndex::load(junk.string()), IndexError);
}

TEST_CASE("metadata-imbued text carries the row metadata verbatim") {
    Response r = make_response(14, 6, "Caroline", Date{2023, 5, 8}, 13 * 60 + 56,
                               "I visited the sculpture garden.");
    CHECK(imbue_metadata_text(r) ==
          "On Monday, May 8, 2023 at 13:56 (session 6), Caroline said: "
          "I visited the sculpture garden.");
}

TEST_CASE("response indexes key vectors by response index") {
    ConversationSet log;
    log.id = "t";
    log.responses.push_back(make_response(0, 1, "A", Date{2023, 5, 8}, 600, "identical words"));
    log.responses.push_back(make_response(1, 2, "B", Date{2023, 5, 9}, 660, "identical words"));
    log.padding_start_index = 2;

    HashedBowEmbedder emb(128);
    VectorIndex plain = build_response_index(log, emb, false);
    CHECK(plain.ids() == std::vector<int>{0, 1});
    CHECK(plain.vector_of(0) == plain.vector_of(1));  // raw text is identical

    VectorIndex imbued = build_response_index(log, emb, true);
    CHECK(imbued.vector_of(0) != imbued.vector_of(1));  // metadata differs
    CHECK(imbued.vector_of(0) == emb.embed(imbue_metadata_text(log.responses[0])));
}
