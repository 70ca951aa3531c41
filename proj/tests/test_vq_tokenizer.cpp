#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "quadsketch/vq_tokenizer.hpp"

using namespace quadsketch;

namespace {

Tile constant_tile(int side, float v) {
    Tile t;
    t.side = side;
    t.values.assign(static_cast<std::size_t>(side) * side, v);
    return t;
}

Tile random_tile(Rng& rng, int side, float lo = -1.0f, float hi = 1.0f) {
    Tile t;
    t.side = side;
    t.values.resize(static_cast<std::size_t>(side) * side);
    for (auto& v : t.values) v = static_cast<float>(lo + (hi - lo) * rng_canonical(rng));
    return t;
}

} // namespace

TEST_CASE("fit_codebook with Q=1 yields the global mean sub-patch") {
    Rng rng(501);
    std::vector<Tile> tiles;
    for (int i = 0; i < 6; ++i) tiles.push_back(random_tile(rng, 8));

    const Codebook cb = fit_codebook(tiles, 1, 2, 0);
    REQUIRE(cb.q == 1);
    REQUIRE(cb.sub_side == 4);

    // Oracle: average every 4x4 sub-patch by hand.
    std::vector<double> mean(16, 0.0);
    std::size_t count = 0;
    for (const auto& tile : tiles) {
        for (int py = 0; py < 2; ++py)
            for (int px = 0; px < 2; ++px) {
                for (int y = 0; y < 4; ++y)
                    for (int x = 0; x < 4; ++x)
                        mean[static_cast<std::size_t>(y) * 4 + x] +=
                            tile.values[static_cast<std::size_t>(py * 4 + y) * 8 + px * 4 + x];
                ++count;
            }
    }
    for (std::size_t i = 0; i < mean.size(); ++i)
        CHECK(cb.entries[i] == doctest::Approx(mean[i] / count).epsilon(1e-5));
}

TEST_CASE("fit_codebook separates two well-separated clusters") {
    std::vector<Tile> tiles;
    for (int i = 0; i < 40; ++i) tiles.push_back(constant_tile(8, i % 2 ? 0.8f : -0.8f));
    const Codebook cb = fit_codebook(tiles, 2, 2, 42);
    std::vector<float> centers{cb.entries[0], cb.entries[cb.dim()]};
    std::sort(centers.begin(), centers.end());
    CHECK(centers[0] == doctest::Approx(-0.8).epsilon(1e-3));
    CHECK(centers[1] == doctest::Approx(0.8).epsilon(1e-3));
    for (std::uint32_t c = 0; c < 2; ++c) {
        const auto entry = cb.entry(c);
        for (std::uint32_t i = 1; i < cb.dim(); ++i) CHECK(entry[i] == doctest::Approx(entry[0]));
    }
}

TEST_CASE("oversized codebooks reach zero distortion") {
    std::vector<Tile> tiles;
    for (float v : {-0.9f, -0.3f, 0.2f, 0.7f}) tiles.push_back(constant_tile(8, v));
    const Codebook cb = fit_codebook(tiles, 32, 2, 7);
    CHECK(reconstruction_error(cb, tiles) == doctest::Approx(0.0).epsilon(1e-12));
    for (const auto& tile : tiles) {
        const Tile rec = decode_tokens(cb, encode_tile(cb, tile));
        CHECK(rec.values == tile.values);
    }
}

TEST_CASE("fit_codebook rejects an empty corpus") {
    CHECK_THROWS_AS(fit_codebook({}, 4, 2, 0), TrainingError);
}

TEST_CASE("encode recovers exact indices for codebook-assembled tiles") {
    Rng rng(503);
    std::vector<Tile> corpus;
    for (int i = 0; i < 30; ++i) corpus.push_back(random_tile(rng, 8));
    const Codebook cb = fit_codebook(corpus, 8, 2, 9);

    TokenSeq tokens;
    tokens.tokens = {3, 1, 7, 4};
    const Tile assembled = decode_tokens(cb, tokens);
    CHECK(encode_tile(cb, assembled) == tokens);
}

TEST_CASE("encode emits K = g^2 tokens and matches the exhaustive oracle") {
    Rng rng(509);
    std::vector<Tile> corpus;
    for (int i = 0; i < 40; ++i) corpus.push_back(random_tile(rng, 16));
    const Codebook cb = fit_codebook(corpus, 24, 4, 11);

    for (int trial = 0; trial < 50; ++trial) {
        const Tile tile = random_tile(rng, 16);
        const TokenSeq got = encode_tile(cb, tile);
        CHECK(got.tokens.size() == 16);
        CHECK(got == oracle::exhaustive_encode(cb, tile));
    }
}

TEST_CASE("encode rejects mismatched tile sides") {
    std::vector<Tile> corpus{constant_tile(8, 0.0f)};
    const Codebook cb = fit_codebook(corpus, 2, 2, 0);
    CHECK_THROWS_AS(encode_tile(cb, constant_tile(16, 0.0f)), std::invalid_argument);
}

TEST_CASE("decode of a constant entry fills the tile with it") {
    std::vector<Tile> corpus{constant_tile(8, 0.25f), constant_tile(8, -0.75f)};
    const Codebook cb = fit_codebook(corpus, 2, 2, 1);
    TokenSeq z;
    z.tokens.assign(4, encode_tile(cb, constant_tile(8, 0.25f)).tokens[0]);
    const Tile tile = decode_tokens(cb, z);
    for (float v : tile.values) CHECK(v == doctest::Approx(0.25).epsilon(1e-6));
}

TEST_CASE("encode-decode is the identity on token space") {
    Rng rng(521);
    std::vector<Tile> corpus;
    for (int i = 0; i < 30; ++i) corpus.push_back(random_tile(rng, 8));
    const Codebook cb = fit_codebook(corpus, 16, 2, 3);

    for (int trial = 0; trial < 100; ++trial) {
        TokenSeq z;
        for (int i = 0; i < 4; ++i) z.tokens.push_back(static_cast<Token>(rng_index(rng, cb.q)));
        CHECK(encode_tile(cb, decode_tokens(cb, z)) == z);
    }
}

TEST_CASE("decode rejects out-of-range tokens") {
    std::vector<Tile> corpus{constant_tile(8, 0.0f)};
    const Codebook cb = fit_codebook(corpus, 2, 2, 0);
    TokenSeq bad;
    bad.tokens = {0, 1, 2, 0};
    CHECK_THROWS_AS(decode_tokens(cb, bad), DecodeError);
}

TEST_CASE("reconstruction error is bounded by the quantization radius") {
    Rng rng(523);
    std::vector<Tile> corpus;
    for (int i = 0; i < 50; ++i) corpus.push_back(random_tile(rng, 8));
    const Codebook cb = fit_codebook(corpus, 12, 2, 5);
    const double radius = oracle::max_quantization_radius(cb, corpus);

    for (const auto& tile : corpus) {
        const Tile rec = decode_tokens(cb, encode_tile(cb, tile));
        for (std::size_t i = 0; i < tile.values.size(); ++i)
            CHECK(std::abs(tile.values[i] - rec.values[i]) <= radius + 1e-6);
    }
}

TEST_CASE("perplexity matches closed forms") {
    std::vector<std::uint64_t> uniform(512, 7);
    CHECK(perplexity(uniform) == doctest::Approx(512.0).epsilon(1e-9));

    std::vector<std::uint64_t> single(512, 0);
    single[13] = 99;
    CHECK(perplexity(single) == doctest::Approx(1.0).epsilon(1e-12));

    std::vector<std::uint64_t> two{50, 50, 0, 0};
    CHECK(perplexity(two) == doctest::Approx(2.0).epsilon(1e-12));

    std::vector<std::uint64_t> zero(4, 0);
    CHECK_THROWS_AS(perplexity(zero), std::invalid_argument);
}

TEST_CASE("fit_codebook is deterministic in corpus and seed") {
    Rng rng(541);
    std::vector<Tile> corpus;
    for (int i = 0; i < 30; ++i) corpus.push_back(random_tile(rng, 8));
    const Codebook a = fit_codebook(corpus, 8, 2, 77);
    const Codebook b = fit_codebook(corpus, 8, 2, 77);
    CHECK(a.entries == b.entries);
    const Codebook c = fit_codebook(corpus, 8, 2, 78);
    CHECK(a.entries != c.entries);
}

TEST_CASE("average distortion is non-increasing in Q") {
    Rng rng(547);
    std::vector<Tile> corpus;
    for (int i = 0; i < 60; ++i) corpus.push_back(random_tile(rng, 8));
    double prev = std::numeric_limits<double>::max();
    for (std::uint32_t q : {1u, 2u, 4u, 8u, 16u, 32u}) {
        const double err = reconstruction_error(fit_codebook(corpus, q, 2, 99), corpus);
        CHECK(err <= prev + 1e-12);
        prev = err;
    }
}

TEST_CASE("codebook file format round-trips bit-exactly") {
    Rng rng(557);
    std::vector<Tile> corpus;
    for (int i = 0; i < 20; ++i) corpus.push_back(random_tile(rng, 8));
    const Codebook cb = fit_codebook(corpus, 8, 2, 13);

    const auto path = std::filesystem::temp_directory_path() / "quadsketch_test.vqcb";
    write_codebook(cb, path);
    const Codebook loaded = read_codebook(path);
    CHECK(loaded.q == cb.q);
    CHECK(loaded.grid == cb.grid);
    CHECK(loaded.sub_side == cb.sub_side);
    CHECK(loaded.entries == cb.entries);
    std::filesystem::remove(path);
}
