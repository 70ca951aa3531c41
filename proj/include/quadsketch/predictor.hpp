#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_map>
#include <vector>

#include "quadsketch/quad_context.hpp"
#include "quadsketch/rng.hpp"
#include "quadsketch/vq_tokenizer.hpp"

namespace quadsketch {

// One supervised refinement example: predict the target tokens of a leaf
// from its multi-scale context and class.
struct TrainingExample {
    ContextSequence context;
    int class_id = 0;
    TokenSeq target_tokens;
    int leaf_depth = 0;
};

// Token predictor contract: a probability vector over the Q codebook indices
// for position `position`, conditioned on the leaf context, the class, and
// the token prefix sampled so far (teacher-forced during training/scoring).
class PredictorModel {
public:
    virtual ~PredictorModel() = default;
    virtual std::uint32_t vocab_size() const = 0;
    virtual std::uint32_t tokens_per_tile() const = 0;
    virtual std::vector<double> predict(const ContextSequence& context, int class_id,
                                        std::span<const Token> prefix, int position) const = 0;
};

// The tile of the context's own-level 3x3 block center (the root view for a
// depth-0 leaf). This is the slot the count model conditions on.
const Tile& context_center_tile(const ContextSequence& context);

// Laplace-smoothed conditional counts keyed by (class, leaf depth, position,
// previous token, signature), where the signature is the center tile's token
// at the same position. A finite stand-in for the predictor contract that
// trains in one pass and stays exactly reproducible.
class CountModel : public PredictorModel {
public:
    CountModel() = default;
    CountModel(Codebook codebook, double alpha);

    std::uint32_t vocab_size() const override { return codebook_.q; }
    std::uint32_t tokens_per_tile() const override {
        return static_cast<std::uint32_t>(codebook_.tokens_per_tile());
    }
    std::vector<double> predict(const ContextSequence& context, int class_id,
                                std::span<const Token> prefix, int position) const override;

    void observe(const TrainingExample& example);
    void merge(const CountModel& other);

    double alpha() const { return alpha_; }
    const Codebook& codebook() const { return codebook_; }
    std::vector<int> observed_classes() const;
    std::size_t key_count() const { return counts_.size(); }

    // CNTM format: "CNTM", u32 Q, u32 K, f32 alpha, u64 record count, then
    // sorted records of key bytes (u16 class, u8 depth, u8 position,
    // u16 prev with 0xFFFF = none, u16 signature), u16 token, u32 count.
    void save(const std::filesystem::path& path) const;
    static CountModel load(const std::filesystem::path& path, Codebook codebook);

    static constexpr std::uint16_t kNoPrev = 0xFFFF;

private:
    std::vector<double> predict_key(std::uint64_t key) const;
    std::uint64_t make_key(int class_id, int depth, int position, std::uint16_t prev,
                           std::uint16_t sig) const;

    Codebook codebook_;
    double alpha_ = 0.1;
    std::unordered_map<std::uint64_t, std::unordered_map<std::uint16_t, std::uint32_t>> counts_;
    std::unordered_map<std::uint64_t, std::uint64_t> totals_;
};

// Refinement training draw: upsample the low-res field, quadtree it,
// substitute the ground truth into every leaf before a uniformly drawn one,
// and emit that leaf's context plus its ground-truth tokens.
TrainingExample sample_training_example(const SdfGrid& full, const SdfGrid& lowres, int class_id,
                                        const Codebook& codebook, Rng& rng);

// Completion-style variant: quadtree the full-resolution field itself, mask
// one uniformly drawn leaf with the neutral value, and target the original
// leaf content. The pretraining task itself is label-free; class_id is
// carried through so the resulting examples stay usable class-conditionally.
TrainingExample sample_masked_pretraining_example(const SdfGrid& full, const Codebook& codebook,
                                                  Rng& rng, int class_id = 0);

CountModel train_count_model(std::span<const TrainingExample> examples, Codebook codebook,
                             double alpha);

// Contract-level wrapper with argument validation.
std::vector<double> predict_distribution(const PredictorModel& model, const ContextSequence& context,
                                         int class_id, std::span<const Token> prefix, int position);

// Mean over examples of the per-position cross-entropy against one-hot
// targets, averaged over the K positions.
double evaluate_cross_entropy(const PredictorModel& model, std::span<const TrainingExample> examples);

} // namespace quadsketch
