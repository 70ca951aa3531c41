#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "quadsketch/pipeline.hpp"

using namespace quadsketch;

namespace {

// Two-entry codebook: token 0 is pure background, token 1 pure stroke.
Codebook tiny_codebook(int leaf_side, std::uint32_t grid) {
    Codebook cb;
    cb.q = 2;
    cb.grid = grid;
    cb.sub_side = static_cast<std::uint32_t>(leaf_side) / grid;
    cb.entries.assign(2ull * cb.dim(), 1.0f);
    for (std::uint32_t i = 0; i < cb.dim(); ++i) cb.entries[cb.dim() + i] = -1.0f;
    return cb;
}

SdfGrid blank_lowres(int side) { return compute_sdf(make_raster(side, side), static_cast<float>(side) / 8.0f); }

} // namespace

TEST_CASE("prototype sampler is deterministic and exact at zero jitter") {
    PrototypeSampler sampler;
    Rng rng(701);
    std::vector<SdfGrid> pool;
    for (int i = 0; i < 5; ++i) {
        pool.push_back(compute_sdf(oracle::random_raster(rng, 16), 2.0f));
        sampler.add_prototype(3, pool.back());
    }

    const SdfGrid a = generate_lowres(sampler, 3, 99);
    const SdfGrid b = generate_lowres(sampler, 3, 99);
    CHECK(a.values == b.values);

    bool found = false;
    for (const auto& p : pool) found = found || p.values == a.values;
    CHECK(found);

    CHECK_THROWS_AS(generate_lowres(sampler, 8, 0), std::invalid_argument);
}

TEST_CASE("jittered prototypes stay clamped to the field range") {
    PrototypeSampler sampler(0.5);
    Rng rng(703);
    sampler.add_prototype(0, compute_sdf(oracle::random_raster(rng, 16), 2.0f));
    const SdfGrid out = sampler.generate(0, 5);
    for (float v : out.values) {
        CHECK(v >= -1.0f);
        CHECK(v <= 1.0f);
    }
}

TEST_CASE("refinement issues exactly L*K predictor calls on a fully split canvas") {
    const Codebook cb = tiny_codebook(16, 4); // K = 16
    std::vector<double> background{1.0, 0.0};
    const oracle::ConstantPredictor predictor(background, 16);

    RefineParams params;
    params.full_side = 64; // D = 2
    params.significance = [](const SdfGrid&, const Region&) { return true; };

    const GenerationResult result = refine_image(blank_lowres(16), 0, predictor, cb, params, {});
    CHECK(predictor.calls() == 16 * 16);
    CHECK(result.leaf_trace.size() == 16);
    for (const auto& trace : result.leaf_trace) CHECK(trace.tokens.size() == 16);
}

TEST_CASE("a background-token predictor leaves a blank canvas blank") {
    const Codebook cb = tiny_codebook(16, 4);
    const oracle::ConstantPredictor predictor({1.0, 0.0}, 16);
    RefineParams params;
    params.full_side = 64;

    const GenerationResult result = refine_image(blank_lowres(16), 0, predictor, cb, params, {});
    for (float v : result.refined.values) CHECK(v == 1.0f);
    for (auto c : result.raster.cells) CHECK(c == 0);
    CHECK(result.consistency == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("refinement reconstructs a held-out image through the replay oracle") {
    // Fit a codebook on the source image tiles, replay its ground-truth
    // tokens, and check the per-pixel error bound.
    Rng rng(709);
    const Raster raster = oracle::random_raster(rng, 64, 4);
    const SdfGrid source = compute_sdf(raster, 8.0f);

    const auto always = [](const SdfGrid&, const Region&) { return true; };
    const QuadTree source_tree = build_quadtree(source, 16, always);

    std::vector<Tile> tiles;
    for (const auto& region : source_tree.all_node_regions())
        tiles.push_back(sample_canvas_region(source, region, 16, 0));
    const Codebook cb = fit_codebook(tiles, 64, 4, 21);

    std::vector<TokenSeq> script;
    for (const auto& leaf : source_tree.leaves())
        script.push_back(encode_tile(cb, source_tree.leaf_tile(leaf)));
    const oracle::ReplayPredictor predictor(script, cb.q, 16);

    RefineParams params;
    params.full_side = 64;
    params.significance = always;
    const GenerationResult result = refine_image(resize_sdf(source, 16), 0, predictor, cb, params, {});

    CHECK(predictor.calls() == source_tree.leaf_count() * 16);
    const double radius = oracle::max_quantization_radius(cb, tiles);
    for (std::size_t i = 0; i < source.values.size(); ++i)
        CHECK(std::abs(result.refined.values[i] - source.values[i]) <= radius + 1e-6);
}

TEST_CASE("generation results satisfy the clip invariant") {
    Rng rng(731);
    const Raster raster = oracle::random_raster(rng, 64, 3);
    const SdfGrid source = compute_sdf(raster, 8.0f);

    const QuadTree tree = build_quadtree(source, 16);
    std::vector<Tile> tiles;
    for (const auto& region : tree.all_node_regions())
        tiles.push_back(sample_canvas_region(source, region, 16, 0));
    const Codebook cb = fit_codebook(tiles, 16, 4, 17);

    std::vector<TrainingExample> examples;
    Rng train_rng(89);
    for (int i = 0; i < 6; ++i)
        examples.push_back(sample_training_example(source, resize_sdf(source, 16), 0, cb, train_rng));
    const CountModel model = train_count_model(examples, cb, 0.1);

    RefineParams params;
    params.full_side = 64;
    SamplingParams sampling;
    sampling.seed = 7;
    const GenerationResult result = refine_image(resize_sdf(source, 16), 0, model, cb, params, sampling);
    CHECK(result.raster == clip_sdf(result.refined, default_clip_threshold(result.refined)));
    CHECK(result.leaf_trace.size() == build_quadtree(resize_sdf(resize_sdf(source, 16), 64), 16).leaf_count());
}

TEST_CASE("blank pool with a background predictor composes to a blank result") {
    const Codebook cb = tiny_codebook(16, 4);
    const oracle::ConstantPredictor predictor({1.0, 0.0}, 16);
    PrototypeSampler sampler; // jitter 0
    sampler.add_prototype(0, blank_lowres(16));
    sampler.add_prototype(1, blank_lowres(16));

    const GenerationResult result = generate_sketch(sampler, predictor, cb, 0, 3, 64);
    for (float v : result.refined.values) CHECK(v == 1.0f);
    for (auto c : result.raster.cells) CHECK(c == 0);
    CHECK(result.consistency == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("refinement validates configuration") {
    const Codebook cb = tiny_codebook(16, 4);
    const oracle::ConstantPredictor wrong_q({0.5, 0.25, 0.25}, 16);
    RefineParams params;
    params.full_side = 64;
    CHECK_THROWS_AS(refine_image(blank_lowres(16), 0, wrong_q, cb, params, {}), ConfigError);

    const oracle::ConstantPredictor ok({1.0, 0.0}, 16);
    CHECK_THROWS_AS(refine_image(blank_lowres(32), 0, ok, cb, params, {}), std::invalid_argument);
}

TEST_CASE("generation is bit-deterministic in its seeds") {
    Rng rng(713);
    PrototypeSampler sampler;
    std::vector<Tile> tiles;
    for (int i = 0; i < 6; ++i) {
        const SdfGrid sdf = compute_sdf(oracle::random_raster(rng, 64, 3), 8.0f);
        const QuadTree tree = build_quadtree(sdf, 16);
        for (const auto& region : tree.all_node_regions())
            tiles.push_back(sample_canvas_region(sdf, region, 16, 0));
        sampler.add_prototype(0, resize_sdf(sdf, 16));
        sampler.add_prototype(1, resize_sdf(sdf, 16));
    }
    const Codebook cb = fit_codebook(tiles, 16, 4, 31);

    std::vector<TrainingExample> examples;
    Rng train_rng(73);
    for (int i = 0; i < 10; ++i) {
        const SdfGrid full = compute_sdf(oracle::random_raster(train_rng, 64, 3), 8.0f);
        examples.push_back(sample_training_example(full, resize_sdf(full, 16), i % 2, cb, train_rng));
    }
    const CountModel model = train_count_model(examples, cb, 0.1);

    const GenerationResult a = generate_sketch(sampler, model, cb, 1, 12345, 64);
    const GenerationResult b = generate_sketch(sampler, model, cb, 1, 12345, 64);
    CHECK(a.refined.values == b.refined.values);
    CHECK(a.raster == b.raster);
    CHECK(a.leaf_trace.size() == b.leaf_trace.size());
    for (std::size_t i = 0; i < a.leaf_trace.size(); ++i) CHECK(a.leaf_trace[i] == b.leaf_trace[i]);
    CHECK(a.consistency == b.consistency);

    const GenerationResult c = generate_sketch(sampler, model, cb, 1, 54321, 64);
    CHECK(a.refined.values != c.refined.values);
}

TEST_CASE("classification scores are additive over leaves") {
    Rng rng(719);
    std::vector<Tile> tiles;
    std::vector<SdfGrid> fields;
    for (int i = 0; i < 8; ++i) {
        fields.push_back(compute_sdf(oracle::random_raster(rng, 64, 2 + i % 3), 8.0f));
        const QuadTree tree = build_quadtree(fields.back(), 16);
        for (const auto& region : tree.all_node_regions())
            tiles.push_back(sample_canvas_region(fields.back(), region, 16, 0));
    }
    const Codebook cb = fit_codebook(tiles, 16, 4, 37);

    std::vector<TrainingExample> examples;
    Rng train_rng(79);
    for (int i = 0; i < 16; ++i) {
        const auto& full = fields[static_cast<std::size_t>(i) % fields.size()];
        examples.push_back(sample_training_example(full, resize_sdf(full, 16), i % 2, cb, train_rng));
    }
    const CountModel model = train_count_model(examples, cb, 0.1);

    const std::vector<int> candidates{0, 1};
    const auto scores = classify_sketch(fields[0], model, cb, candidates);
    REQUIRE(scores.size() == 2);

    // Oracle: independent per-leaf accumulation over the teacher-forced mixed
    // canvas. Leaf i's context is recomputed from scratch with leaves < i
    // replaced by the input's ground truth.
    const SdfGrid& input = fields[0];
    const QuadTree reference = build_quadtree(resize_sdf(resize_sdf(input, 16), 64), 16);
    for (const auto& score : scores) {
        double expected = 0.0;
        for (const auto& leaf : reference.leaves()) {
            QuadTree mixed = copy_structure(reference, reference.canvas());
            for (int i = 0; i < leaf.index; ++i)
                mixed.write_region_from(input, reference.leaves()[static_cast<std::size_t>(i)].region);
            const ContextSequence ctx = mixed.extract_context(leaf);
            const TokenSeq target = encode_tile(cb, sample_canvas_region(input, leaf.region, 16, leaf.depth));
            for (int pos = 0; pos < 16; ++pos) {
                const auto probs = model.predict(
                    ctx, score.class_id,
                    std::span<const Token>(target.tokens.data(), static_cast<std::size_t>(pos)), pos);
                expected += std::log(probs[target.tokens[static_cast<std::size_t>(pos)]]);
            }
        }
        CHECK(score.log_likelihood == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("identical per-class behavior falls back to ascending class ids") {
    const Codebook cb = tiny_codebook(16, 4);
    const CountModel empty(cb, 0.1); // predicts uniform for every class
    const SdfGrid input = blank_lowres(64);

    const std::vector<int> candidates{2, 0, 1};
    const auto scores = classify_sketch(input, empty, cb, candidates);
    REQUIRE(scores.size() == 3);
    CHECK(scores[0].class_id == 0);
    CHECK(scores[1].class_id == 1);
    CHECK(scores[2].class_id == 2);
    CHECK(scores[0].log_likelihood == doctest::Approx(scores[2].log_likelihood));
}

TEST_CASE("a single-leaf input ranks by that leaf's own likelihood") {
    Rng rng(727);
    std::vector<Tile> tiles;
    const SdfGrid field = compute_sdf(oracle::random_raster(rng, 64, 2), 8.0f);
    const QuadTree tree = build_quadtree(field, 16);
    for (const auto& region : tree.all_node_regions())
        tiles.push_back(sample_canvas_region(field, region, 16, 0));
    const Codebook cb = fit_codebook(tiles, 16, 4, 41);

    std::vector<TrainingExample> examples;
    Rng train_rng(83);
    for (int i = 0; i < 8; ++i)
        examples.push_back(sample_training_example(field, resize_sdf(field, 16), i % 2, cb, train_rng));
    const CountModel model = train_count_model(examples, cb, 0.1);

    const SdfGrid blank = blank_lowres(64); // no significant region: one root leaf
    const QuadTree single = build_quadtree(blank, 16);
    REQUIRE(single.leaf_count() == 1);

    const std::vector<int> candidates{0, 1};
    const auto scores = classify_sketch(blank, model, cb, candidates);

    const TokenSeq target = encode_tile(cb, single.leaf_tile(single.leaves()[0]));
    const ContextSequence ctx = single.extract_context(single.leaves()[0]);
    double s0 = 0.0, s1 = 0.0;
    for (int pos = 0; pos < 16; ++pos) {
        const std::span<const Token> prefix(target.tokens.data(), static_cast<std::size_t>(pos));
        s0 += std::log(model.predict(ctx, 0, prefix, pos)[target.tokens[static_cast<std::size_t>(pos)]]);
        s1 += std::log(model.predict(ctx, 1, prefix, pos)[target.tokens[static_cast<std::size_t>(pos)]]);
    }
    const int expected_top = s0 >= s1 ? 0 : 1;
    CHECK(scores[0].class_id == expected_top);
}

TEST_CASE("classify validates its inputs") {
    const Codebook cb = tiny_codebook(16, 4);
    const CountModel model(cb, 0.1);
    const SdfGrid input = blank_lowres(64);
    const std::vector<int> one{0};
    CHECK_THROWS_AS(classify_sketch(input, model, cb, {}), ConfigError);
    CHECK_THROWS_AS(classify_sketch(input, model, cb, one), std::invalid_argument);
}
