#include "quadsketch/predictor.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "quadsketch/binary_io.hpp"
#include "quadsketch/errors.hpp"

namespace quadsketch {

namespace {

// Nearest-entry token of one sub-patch; equals encode_tile(...)[patch_index].
Token encode_single_patch(const Codebook& cb, const Tile& tile, int patch_index) {
    const std::uint32_t g = cb.grid;
    const std::uint32_t s = cb.sub_side;
    const std::uint32_t py = static_cast<std::uint32_t>(patch_index) / g;
    const std::uint32_t px = static_cast<std::uint32_t>(patch_index) % g;
    std::vector<float> patch(cb.dim());
    for (std::uint32_t y = 0; y < s; ++y) {
        const std::size_t row = (static_cast<std::size_t>(py) * s + y) * tile.side + px * s;
        for (std::uint32_t x = 0; x < s; ++x) patch[y * s + x] = tile.values[row + x];
    }
    double best = std::numeric_limits<double>::max();
    Token best_c = 0;
    for (std::uint32_t c = 0; c < cb.q; ++c) {
        const auto entry = cb.entry(c);
        double d = 0.0;
        for (std::uint32_t i = 0; i < cb.dim(); ++i) {
            const double diff = static_cast<double>(patch[i]) - entry[i];
            d += diff * diff;
            if (d >= best) break;
        }
        if (d < best) {
            best = d;
            best_c = c;
        }
    }
    return best_c;
}

} // namespace

const Tile& context_center_tile(const ContextSequence& context) {
    const std::size_t len = context.tiles.size();
    if (len < 1 || (len - 1) % 9 != 0) throw std::invalid_argument("malformed context length");
    const int max_depth = static_cast<int>((len - 1) / 9);
    const int depth = context.leaf.depth;
    if (depth == 0) return context.tiles[len - 1]; // root slot
    return context.tiles[static_cast<std::size_t>(max_depth - depth) * 9 + 4];
}

CountModel::CountModel(Codebook codebook, double alpha)
    // The CNTM format stores alpha as f32; snap it here so predictions are
    // bit-identical before and after a save/load cycle.
    : codebook_(std::move(codebook)), alpha_(static_cast<float>(alpha)) {
    if (alpha <= 0.0) throw std::invalid_argument("alpha must be positive");
}

std::uint64_t CountModel::make_key(int class_id, int depth, int position, std::uint16_t prev,
                                   std::uint16_t sig) const {
    return (static_cast<std::uint64_t>(static_cast<std::uint16_t>(class_id)) << 48) |
           (static_cast<std::uint64_t>(static_cast<std::uint8_t>(depth)) << 40) |
           (static_cast<std::uint64_t>(static_cast<std::uint8_t>(position)) << 32) |
           (static_cast<std::uint64_t>(prev) << 16) | sig;
}

std::vector<double> CountModel::predict_key(std::uint64_t key) const {
    const std::uint32_t q = codebook_.q;
    std::vector<double> probs(q, 0.0);
    const auto total_it = totals_.find(key);
    const double denom = alpha_ * q + (total_it != totals_.end() ? static_cast<double>(total_it->second) : 0.0);
    for (std::uint32_t t = 0; t < q; ++t) probs[t] = alpha_ / denom;
    if (total_it != totals_.end()) {
        const auto& row = counts_.at(key);
        for (const auto& [token, count] : row) probs[token] += static_cast<double>(count) / denom;
    }
    return probs;
}

std::vector<double> CountModel::predict(const ContextSequence& context, int class_id,
                                        std::span<const Token> prefix, int position) const {
    const int k = codebook_.tokens_per_tile();
    if (position < 0 || position >= k) throw std::invalid_argument("position out of range");
    if (prefix.size() != static_cast<std::size_t>(position))
        throw std::invalid_argument("prefix length must equal position");

    const Tile& center = context_center_tile(context);
    const std::uint16_t sig = static_cast<std::uint16_t>(encode_single_patch(codebook_, center, position));
    const std::uint16_t prev =
        position == 0 ? kNoPrev : static_cast<std::uint16_t>(prefix[static_cast<std::size_t>(position) - 1]);
    return predict_key(make_key(class_id, context.leaf.depth, position, prev, sig));
}

void CountModel::observe(const TrainingExample& example) {
    const int k = codebook_.tokens_per_tile();
    if (example.target_tokens.tokens.size() != static_cast<std::size_t>(k))
        throw std::invalid_argument("target token count does not match codebook");

    const Tile& center = context_center_tile(example.context);
    const TokenSeq sig_tokens = encode_tile(codebook_, center);
    for (int pos = 0; pos < k; ++pos) {
        const std::uint16_t prev =
            pos == 0 ? kNoPrev
                     : static_cast<std::uint16_t>(example.target_tokens.tokens[static_cast<std::size_t>(pos) - 1]);
        const std::uint16_t sig = static_cast<std::uint16_t>(sig_tokens.tokens[static_cast<std::size_t>(pos)]);
        const std::uint64_t key = make_key(example.class_id, example.leaf_depth, pos, prev, sig);
        const std::uint16_t target =
            static_cast<std::uint16_t>(example.target_tokens.tokens[static_cast<std::size_t>(pos)]);
        ++counts_[key][target];
        ++totals_[key];
    }
}

void CountModel::merge(const CountModel& other) {
    if (other.codebook_.q != codebook_.q || other.codebook_.grid != codebook_.grid)
        throw ConfigError("cannot merge models with different codebook shapes");
    for (const auto& [key, row] : other.counts_) {
        auto& mine = counts_[key];
        for (const auto& [token, count] : row) mine[token] += count;
        totals_[key] += other.totals_.at(key);
    }
}

std::vector<int> CountModel::observed_classes() const {
    std::vector<int> classes;
    for (const auto& [key, row] : counts_) {
        (void)row;
        const int c = static_cast<int>(key >> 48);
        if (std::find(classes.begin(), classes.end(), c) == classes.end()) classes.push_back(c);
    }
    std::sort(classes.begin(), classes.end());
    return classes;
}

void CountModel::save(const std::filesystem::path& path) const {
    struct Record {
        std::uint64_t key;
        std::uint16_t token;
        std::uint32_t count;
    };
    std::vector<Record> records;
    for (const auto& [key, row] : counts_)
        for (const auto& [token, count] : row) records.push_back({key, token, count});
    std::sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
        return a.key != b.key ? a.key < b.key : a.token < b.token;
    });

    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write("CNTM", 4);
    write_u32(out, codebook_.q);
    write_u32(out, static_cast<std::uint32_t>(codebook_.tokens_per_tile()));
    write_f32(out, static_cast<float>(alpha_));
    write_u64(out, records.size());
    for (const auto& r : records) {
        write_u16(out, static_cast<std::uint16_t>(r.key >> 48));        // class
        write_u8(out, static_cast<std::uint8_t>(r.key >> 40));          // depth
        write_u8(out, static_cast<std::uint8_t>(r.key >> 32));          // position
        write_u16(out, static_cast<std::uint16_t>(r.key >> 16));        // prev
        write_u16(out, static_cast<std::uint16_t>(r.key));              // signature
        write_u16(out, r.token);
        write_u32(out, r.count);
    }
    if (!out) throw IoError("write failed: " + path.string());
}

CountModel CountModel::load(const std::filesystem::path& path, Codebook codebook) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    expect_magic(in, "CNTM", "CNTM");
    const std::uint32_t q = read_u32(in, "Q");
    const std::uint32_t k = read_u32(in, "K");
    const float alpha = read_f32(in, "alpha");
    if (q != codebook.q || k != static_cast<std::uint32_t>(codebook.tokens_per_tile()))
        throw ConfigError("model/codebook shape mismatch in " + path.string());

    CountModel model(std::move(codebook), alpha);
    const std::uint64_t n = read_u64(in, "record count");
    for (std::uint64_t i = 0; i < n; ++i) {
        const std::uint16_t class_id = read_u16(in, "class");
        const std::uint8_t depth = read_u8(in, "depth");
        const std::uint8_t position = read_u8(in, "position");
        const std::uint16_t prev = read_u16(in, "prev");
        const std::uint16_t sig = read_u16(in, "signature");
        const std::uint16_t token = read_u16(in, "token");
        const std::uint32_t count = read_u32(in, "count");
        const std::uint64_t key = model.make_key(class_id, depth, position, prev, sig);
        model.counts_[key][token] += count;
        model.totals_[key] += count;
    }
    return model;
}

TrainingExample sample_training_example(const SdfGrid& full, const SdfGrid& lowres, int class_id,
                                        const Codebook& codebook, Rng& rng) {
    const int leaf_side = codebook.leaf_side();
    if (lowres.side() != leaf_side)
        throw std::invalid_argument("lowres side must equal the codebook leaf side");
    if (full.width != full.height) throw std::invalid_argument("full-resolution field must be square");

    const SdfGrid upsampled = resize_sdf(lowres, full.side());
    QuadTree tree = build_quadtree(upsampled, leaf_side);
    const auto& leaves = tree.leaves();
    const std::size_t pick = rng_index(rng, leaves.size());

    for (std::size_t i = 0; i < pick; ++i) tree.write_region_from(full, leaves[i].region);

    TrainingExample example;
    example.context = tree.extract_context(leaves[pick]);
    example.class_id = class_id;
    example.leaf_depth = leaves[pick].depth;
    const Tile truth = sample_canvas_region(full, leaves[pick].region, leaf_side, leaves[pick].depth);
    example.target_tokens = encode_tile(codebook, truth);
    return example;
}

TrainingExample sample_masked_pretraining_example(const SdfGrid& full, const Codebook& codebook,
                                                  Rng& rng, int class_id) {
    const int leaf_side = codebook.leaf_side();
    QuadTree tree = build_quadtree(full, leaf_side);
    const auto& leaves = tree.leaves();
    const std::size_t pick = rng_index(rng, leaves.size());

    const Tile original = tree.leaf_tile(leaves[pick]);
    tree.fill_region(leaves[pick].region, 1.0f);

    TrainingExample example;
    example.context = tree.extract_context(leaves[pick]);
    example.class_id = class_id;
    example.leaf_depth = leaves[pick].depth;
    example.target_tokens = encode_tile(codebook, original);
    return example;
}

CountModel train_count_model(std::span<const TrainingExample> examples, Codebook codebook, double alpha) {
    CountModel model(std::move(codebook), alpha);
    for (const auto& example : examples) model.observe(example);
    return model;
}

std::vector<double> predict_distribution(const PredictorModel& model, const ContextSequence& context,
                                         int class_id, std::span<const Token> prefix, int position) {
    if (position < 0 || position >= static_cast<int>(model.tokens_per_tile()))
        throw std::invalid_argument("position out of range");
    if (prefix.size() != static_cast<std::size_t>(position))
        throw std::invalid_argument("prefix length must equal position");
    return model.predict(context, class_id, prefix, position);
}

double evaluate_cross_entropy(const PredictorModel& model, std::span<const TrainingExample> examples) {
    if (examples.empty()) throw std::invalid_argument("evaluate_cross_entropy: no examples");
    double total = 0.0;
    for (const auto& example : examples) {
        const auto& target = example.target_tokens.tokens;
        double example_ce = 0.0;
        for (std::size_t pos = 0; pos < target.size(); ++pos) {
            const auto probs = model.predict(example.context, example.class_id,
                                             std::span<const Token>(target.data(), pos),
                                             static_cast<int>(pos));
            example_ce += -std::log(std::max(probs[target[pos]], 1e-300));
        }
        total += example_ce / static_cast<double>(target.size());
    }
    return total / static_cast<double>(examples.size());
}

} // namespace quadsketch
