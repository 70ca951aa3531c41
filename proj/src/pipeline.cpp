#include "quadsketch/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "quadsketch/errors.hpp"

namespace quadsketch {

void PrototypeSampler::add_prototype(int class_id, SdfGrid lowres) {
    if (!pools_[class_id].empty() && pools_[class_id].front().width != lowres.width)
        throw std::invalid_argument("prototype sides must agree within a class");
    pools_[class_id].push_back(std::move(lowres));
}

std::size_t PrototypeSampler::pool_size(int class_id) const {
    const auto it = pools_.find(class_id);
    return it == pools_.end() ? 0 : it->second.size();
}

bool PrototypeSampler::supports(int class_id) const { return pool_size(class_id) > 0; }

SdfGrid PrototypeSampler::generate(int class_id, std::uint64_t seed) const {
    const auto it = pools_.find(class_id);
    if (it == pools_.end() || it->second.empty())
        throw std::invalid_argument("no prototypes for class " + std::to_string(class_id));
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(class_id)));
    SdfGrid out = it->second[rng_index(rng, it->second.size())];
    if (jitter_ > 0.0) {
        for (auto& v : out.values)
            v = std::clamp(static_cast<float>(v + jitter_ * rng_normal(rng)), -1.0f, 1.0f);
    }
    return out;
}

SdfGrid generate_lowres(const Stage1Generator& gen, int class_id, std::uint64_t seed) {
    if (!gen.supports(class_id))
        throw std::invalid_argument("unsupported class " + std::to_string(class_id));
    return gen.generate(class_id, seed);
}

namespace {

Token sample_token(std::vector<double> probs, const SamplingParams& sampling, Rng& rng) {
    if (sampling.temperature <= 0.0) throw std::invalid_argument("temperature must be positive");
    if (sampling.temperature != 1.0) {
        for (auto& p : probs) p = std::pow(p, 1.0 / sampling.temperature);
    }
    if (sampling.top_k > 0 && sampling.top_k < probs.size()) {
        // Keep the top_k heaviest entries (ties resolved toward lower index).
        std::vector<std::uint32_t> order(probs.size());
        for (std::uint32_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(),
                         [&](std::uint32_t a, std::uint32_t b) { return probs[a] > probs[b]; });
        std::vector<double> filtered(probs.size(), 0.0);
        for (std::uint32_t i = 0; i < sampling.top_k; ++i) filtered[order[i]] = probs[order[i]];
        probs = std::move(filtered);
    }
    return static_cast<Token>(rng_categorical(rng, probs));
}

double mean_abs_diff(const SdfGrid& a, const SdfGrid& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        acc += std::abs(static_cast<double>(a.values[i]) - b.values[i]);
    return acc / static_cast<double>(a.values.size());
}

} // namespace

GenerationResult refine_image(const SdfGrid& lowres, int class_id, const PredictorModel& model,
                              const Codebook& codebook, const RefineParams& params,
                              const SamplingParams& sampling) {
    if (model.vocab_size() != codebook.q)
        throw ConfigError("predictor and codebook disagree on Q");
    const int leaf_side = codebook.leaf_side();
    if (lowres.side() != leaf_side)
        throw std::invalid_argument("lowres side must equal the codebook leaf side");
    if (params.full_side < leaf_side || params.full_side % leaf_side != 0)
        throw std::invalid_argument("full_side must be a power-of-two multiple of leaf_side");

    GenerationResult result;
    result.class_id = class_id;
    result.lowres = lowres;

    const SdfGrid upsampled = resize_sdf(lowres, params.full_side);
    QuadTree tree = build_quadtree(upsampled, leaf_side, params.significance);

    Rng rng(sampling.seed);
    const int k = static_cast<int>(model.tokens_per_tile());
    result.leaf_trace.reserve(tree.leaf_count());
    for (const auto& leaf : tree.leaves()) {
        const ContextSequence context = tree.extract_context(leaf, params.neutral);
        TokenSeq tokens;
        tokens.tokens.reserve(static_cast<std::size_t>(k));
        for (int pos = 0; pos < k; ++pos) {
            auto probs = model.predict(context, class_id,
                                       std::span<const Token>(tokens.tokens.data(), tokens.tokens.size()),
                                       pos);
            tokens.tokens.push_back(sample_token(std::move(probs), sampling, rng));
        }
        tree.replace_leaf(leaf, decode_tokens(codebook, tokens));
        result.leaf_trace.push_back(std::move(tokens));
    }

    result.refined = tree.canvas();
    result.raster = clip_sdf(result.refined, default_clip_threshold(result.refined));
    result.consistency = mean_abs_diff(resize_sdf(result.refined, leaf_side), lowres);
    return result;
}

std::vector<ClassScore> classify_sketch(const SdfGrid& input, const PredictorModel& model,
                                        const Codebook& codebook,
                                        std::span<const int> candidate_classes) {
    if (candidate_classes.empty()) throw ConfigError("no trained classes to rank");
    if (candidate_classes.size() < 2) throw std::invalid_argument("need at least 2 candidate classes");
    if (model.vocab_size() != codebook.q) throw ConfigError("predictor and codebook disagree on Q");

    const int leaf_side = codebook.leaf_side();
    if (input.width != input.height) throw std::invalid_argument("input field must be square");

    // Teacher-forced evaluation of the refinement factorization: rebuild the
    // low-resolution view of the input, walk leaves in canonical order over
    // the mixed canvas (ground truth substituted for every already-scored
    // leaf), and score each leaf's true tokens against its context. This is
    // the same canvas construction the training sampler uses.
    const SdfGrid upsampled = resize_sdf(resize_sdf(input, leaf_side), input.side());
    QuadTree tree = build_quadtree(upsampled, leaf_side);

    std::vector<ClassScore> scores;
    scores.reserve(candidate_classes.size());
    for (int c : candidate_classes) scores.push_back({c, 0.0});

    const int k = static_cast<int>(model.tokens_per_tile());
    for (const auto& leaf : tree.leaves()) {
        const ContextSequence context = tree.extract_context(leaf);
        const TokenSeq target =
            encode_tile(codebook, sample_canvas_region(input, leaf.region, leaf_side, leaf.depth));
        for (auto& score : scores) {
            for (int pos = 0; pos < k; ++pos) {
                const auto probs =
                    model.predict(context, score.class_id,
                                  std::span<const Token>(target.tokens.data(), static_cast<std::size_t>(pos)),
                                  pos);
                score.log_likelihood += std::log(std::max(probs[target.tokens[static_cast<std::size_t>(pos)]], 1e-300));
            }
        }
        tree.write_region_from(input, leaf.region);
    }

    std::sort(scores.begin(), scores.end(), [](const ClassScore& a, const ClassScore& b) {
        if (a.log_likelihood != b.log_likelihood) return a.log_likelihood > b.log_likelihood;
        return a.class_id < b.class_id;
    });
    return scores;
}

GenerationResult generate_sketch(const Stage1Generator& gen, const PredictorModel& model,
                                 const Codebook& codebook, int class_id, std::uint64_t seed,
                                 int full_side, const SamplingParams& sampling) {
    const SdfGrid lowres = generate_lowres(gen, class_id, seed);
    RefineParams params;
    params.full_side = full_side;
    SamplingParams refinement = sampling;
    refinement.seed = mix_seed(seed, 1);
    return refine_image(lowres, class_id, model, codebook, params, refinement);
}

} // namespace quadsketch
