#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "quadsketch/quad_context.hpp"

namespace quadsketch {

using Token = std::uint32_t;

// K = grid*grid token indices per tile, row-major over the sub-patch grid.
struct TokenSeq {
    std::vector<Token> tokens;
    bool operator==(const TokenSeq&) const = default;
};

// Q centroids over flattened sub_side x sub_side tile patches.
struct Codebook {
    std::uint32_t q = 0;
    std::uint32_t grid = 0;     // g: sub-patches per tile axis
    std::uint32_t sub_side = 0; // leaf_side / g
    std::vector<float> entries; // q * sub_side^2, row-major by entry

    std::uint32_t dim() const { return sub_side * sub_side; }
    int leaf_side() const { return static_cast<int>(grid * sub_side); }
    int tokens_per_tile() const { return static_cast<int>(grid * grid); }
    std::span<const float> entry(std::uint32_t i) const {
        return {entries.data() + static_cast<std::size_t>(i) * dim(), dim()};
    }
};

// Lloyd's algorithm with k-means++ seeding over every sub-patch of every
// tile. Iterates until the largest centroid shift drops below 1e-6 or 100
// rounds; empty clusters are reseeded to the point farthest from its
// centroid. Deterministic for a fixed corpus and seed.
Codebook fit_codebook(const std::vector<Tile>& tiles, std::uint32_t q, std::uint32_t grid,
                      std::uint64_t seed);

// Splits the tile into g*g sub-patches and maps each to its nearest codebook
// entry (squared Euclidean distance, ties to the lowest index).
TokenSeq encode_tile(const Codebook& codebook, const Tile& tile);

// Pastes entries back row-major; values clamped to [-1, +1].
Tile decode_tokens(const Codebook& codebook, const TokenSeq& tokens);

// exp(Shannon entropy) of the empirical token distribution, natural log.
double perplexity(std::span<const std::uint64_t> token_histogram);

// Mean squared reconstruction error of encode-decode over the tiles.
double reconstruction_error(const Codebook& codebook, const std::vector<Tile>& tiles);

// VQCB format: "VQCB", u32 Q, u32 D_c, u32 g, u32 sub_side, then Q*D_c f32
// values row-major by entry, all little-endian.
void write_codebook(const Codebook& codebook, const std::filesystem::path& path);
Codebook read_codebook(const std::filesystem::path& path);

} // namespace quadsketch
