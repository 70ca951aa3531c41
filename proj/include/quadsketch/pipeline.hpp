#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "quadsketch/predictor.hpp"

namespace quadsketch {

// Stage 1 contract: a low-resolution class-conditional field at leaf_side
// resolution, deterministic in (class_id, seed).
class Stage1Generator {
public:
    virtual ~Stage1Generator() = default;
    virtual SdfGrid generate(int class_id, std::uint64_t seed) const = 0;
    virtual bool supports(int class_id) const = 0;
};

// Empirical stand-in: draws uniformly from a per-class pool of low-res
// fields and optionally perturbs with clamped Gaussian noise.
class PrototypeSampler : public Stage1Generator {
public:
    PrototypeSampler() = default;
    explicit PrototypeSampler(double jitter) : jitter_(jitter) {}

    void add_prototype(int class_id, SdfGrid lowres);
    std::size_t pool_size(int class_id) const;

    SdfGrid generate(int class_id, std::uint64_t seed) const override;
    bool supports(int class_id) const override;

private:
    std::map<int, std::vector<SdfGrid>> pools_;
    double jitter_ = 0.0;
};

struct SamplingParams {
    double temperature = 1.0;
    std::uint32_t top_k = 0; // 0 = no truncation
    std::uint64_t seed = 0;
};

struct RefineParams {
    int full_side = 0;                   // leaf_side * 2^D
    float neutral = 1.0f;                // dummy fill for context slots
    SignificancePredicate significance;  // empty = default_significance
};

struct GenerationResult {
    SdfGrid lowres;
    SdfGrid refined;
    Raster raster;
    int class_id = 0;
    std::vector<TokenSeq> leaf_trace; // per leaf, canonical order
    double consistency = 0.0;         // mean |downsample(refined) - lowres|
};

SdfGrid generate_lowres(const Stage1Generator& gen, int class_id, std::uint64_t seed);

// One full refinement pass: upsample, build the quadtree once, then visit
// leaves in canonical order sampling K tokens autoregressively per leaf
// (context re-extracted from the mixed canvas before each leaf), decode,
// write back, and clip the final canvas. Issues exactly L*K predictor calls.
GenerationResult refine_image(const SdfGrid& lowres, int class_id, const PredictorModel& model,
                              const Codebook& codebook, const RefineParams& params,
                              const SamplingParams& sampling);

struct ClassScore {
    int class_id = 0;
    double log_likelihood = 0.0;
};

// Ensemble vote: the class-conditional refinement likelihood of the input,
// evaluated teacher-forced. Leaves are visited in canonical order over the
// mixed canvas (upsampled low-res view with ground truth substituted for
// already-scored leaves, the training-time construction); each leaf votes
// with the log-likelihood of its own tokens and class scores are the
// per-leaf sums, ranked descending (ties by ascending id).
std::vector<ClassScore> classify_sketch(const SdfGrid& input, const PredictorModel& model,
                                        const Codebook& codebook, std::span<const int> candidate_classes);

// generate_lowres -> refine_image -> clip, with the consistency metric filled.
GenerationResult generate_sketch(const Stage1Generator& gen, const PredictorModel& model,
                                 const Codebook& codebook, int class_id, std::uint64_t seed,
                                 int full_side, const SamplingParams& sampling = {});

} // namespace quadsketch
