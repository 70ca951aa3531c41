#include "quadsketch/vq_tokenizer.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "quadsketch/binary_io.hpp"
#include "quadsketch/errors.hpp"
#include "quadsketch/rng.hpp"

namespace quadsketch {

namespace {

// Flattens every tile into its g*g sub-patches, row-major within each patch.
std::vector<float> collect_patches(const std::vector<Tile>& tiles, std::uint32_t grid,
                                   std::uint32_t sub_side) {
    const std::uint32_t dim = sub_side * sub_side;
    std::vector<float> points;
    points.reserve(tiles.size() * grid * grid * dim);
    for (const auto& tile : tiles) {
        for (std::uint32_t py = 0; py < grid; ++py) {
            for (std::uint32_t px = 0; px < grid; ++px) {
                for (std::uint32_t y = 0; y < sub_side; ++y) {
                    const std::size_t row =
                        (static_cast<std::size_t>(py) * sub_side + y) * tile.side + px * sub_side;
                    for (std::uint32_t x = 0; x < sub_side; ++x)
                        points.push_back(tile.values[row + x]);
                }
            }
        }
    }
    return points;
}

double sq_dist_bounded(const float* a, const float* b, std::uint32_t dim, double bound) {
    double acc = 0.0;
    for (std::uint32_t i = 0; i < dim; ++i) {
        const double d = static_cast<double>(a[i]) - b[i];
        acc += d * d;
        if (acc > bound) return acc;
    }
    return acc;
}

} // namespace

Codebook fit_codebook(const std::vector<Tile>& tiles, std::uint32_t q, std::uint32_t grid,
                      std::uint64_t seed) {
    if (tiles.empty()) throw TrainingError("fit_codebook: no training tiles");
    if (q < 1) throw std::invalid_argument("codebook size must be at least 1");
    const int leaf_side = tiles.front().side;
    if (grid == 0 || leaf_side % static_cast<int>(grid) != 0)
        throw std::invalid_argument("grid must divide the tile side");
    for (const auto& t : tiles)
        if (t.side != leaf_side) throw std::invalid_argument("tiles must share one side");

    const std::uint32_t sub_side = static_cast<std::uint32_t>(leaf_side) / grid;
    const std::uint32_t dim = sub_side * sub_side;
    const std::vector<float> points = collect_patches(tiles, grid, sub_side);
    const std::size_t n = points.size() / dim;
    auto point = [&](std::size_t i) { return points.data() + i * dim; };

    Rng rng(seed);
    std::vector<double> centroids(static_cast<std::size_t>(q) * dim);
    auto centroid = [&](std::uint32_t c) { return centroids.data() + static_cast<std::size_t>(c) * dim; };

    // k-means++ seeding: nearest-centroid distances drive the next pick.
    std::vector<double> d2(n, std::numeric_limits<double>::max());
    std::vector<float> centroid_f(dim);
    for (std::uint32_t c = 0; c < q; ++c) {
        std::size_t pick;
        if (c == 0) {
            pick = rng_index(rng, n);
        } else {
            double total = 0.0;
            for (double v : d2) total += v;
            if (total > 0.0) {
                const double u = rng_canonical(rng) * total;
                double acc = 0.0;
                pick = n - 1;
                for (std::size_t i = 0; i < n; ++i) {
                    acc += d2[i];
                    if (u < acc) {
                        pick = i;
                        break;
                    }
                }
            } else {
                pick = rng_index(rng, n); // all points already covered exactly
            }
        }
        for (std::uint32_t i = 0; i < dim; ++i) centroid(c)[i] = point(pick)[i];
        for (std::uint32_t i = 0; i < dim; ++i) centroid_f[i] = static_cast<float>(centroid(c)[i]);
        for (std::size_t i = 0; i < n; ++i)
            d2[i] = std::min(d2[i], sq_dist_bounded(point(i), centroid_f.data(), dim, d2[i]));
    }

    std::vector<std::uint32_t> assignment(n, 0);
    std::vector<float> entries_f(static_cast<std::size_t>(q) * dim);
    auto entry_f = [&](std::uint32_t c) { return entries_f.data() + static_cast<std::size_t>(c) * dim; };
    for (std::size_t i = 0; i < centroids.size(); ++i) entries_f[i] = static_cast<float>(centroids[i]);

    std::vector<double> sums(static_cast<std::size_t>(q) * dim);
    std::vector<std::uint64_t> counts(q);

    for (int iter = 0; iter < 100; ++iter) {
        // Assignment step.
        for (std::size_t i = 0; i < n; ++i) {
            double best = std::numeric_limits<double>::max();
            std::uint32_t best_c = 0;
            for (std::uint32_t c = 0; c < q; ++c) {
                const double d = sq_dist_bounded(point(i), entry_f(c), dim, best);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            assignment[i] = best_c;
            d2[i] = best;
        }

        // Update step.
        std::fill(sums.begin(), sums.end(), 0.0);
        std::fill(counts.begin(), counts.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            double* s = sums.data() + static_cast<std::size_t>(assignment[i]) * dim;
            const float* p = point(i);
            for (std::uint32_t k = 0; k < dim; ++k) s[k] += p[k];
            ++counts[assignment[i]];
        }

        double max_shift2 = 0.0;
        for (std::uint32_t c = 0; c < q; ++c) {
            if (counts[c] == 0) {
                // Reseed to the point farthest from its centroid.
                std::size_t far = 0;
                double far_d = -1.0;
                for (std::size_t i = 0; i < n; ++i) {
                    if (d2[i] > far_d) {
                        far_d = d2[i];
                        far = i;
                    }
                }
                double shift2 = 0.0;
                for (std::uint32_t k = 0; k < dim; ++k) {
                    const double nv = point(far)[k];
                    const double dv = nv - centroid(c)[k];
                    shift2 += dv * dv;
                    centroid(c)[k] = nv;
                }
                d2[far] = 0.0;
                max_shift2 = std::max(max_shift2, shift2);
                continue;
            }
            double shift2 = 0.0;
            const double* s = sums.data() + static_cast<std::size_t>(c) * dim;
            for (std::uint32_t k = 0; k < dim; ++k) {
                const double nv = s[k] / static_cast<double>(counts[c]);
                const double dv = nv - centroid(c)[k];
                shift2 += dv * dv;
                centroid(c)[k] = nv;
            }
            max_shift2 = std::max(max_shift2, shift2);
        }
        for (std::size_t i = 0; i < centroids.size(); ++i) entries_f[i] = static_cast<float>(centroids[i]);

        if (std::sqrt(max_shift2) < 1e-6) break;
    }

    Codebook cb;
    cb.q = q;
    cb.grid = grid;
    cb.sub_side = sub_side;
    cb.entries = std::move(entries_f);
    return cb;
}

TokenSeq encode_tile(const Codebook& codebook, const Tile& tile) {
    if (tile.side != codebook.leaf_side())
        throw std::invalid_argument("tile side does not match codebook leaf side");

    const std::uint32_t dim = codebook.dim();
    const std::uint32_t g = codebook.grid;
    const std::uint32_t s = codebook.sub_side;
    std::vector<float> patch(dim);

    TokenSeq seq;
    seq.tokens.reserve(static_cast<std::size_t>(g) * g);
    for (std::uint32_t py = 0; py < g; ++py) {
        for (std::uint32_t px = 0; px < g; ++px) {
            for (std::uint32_t y = 0; y < s; ++y) {
                const std::size_t row = (static_cast<std::size_t>(py) * s + y) * tile.side + px * s;
                for (std::uint32_t x = 0; x < s; ++x) patch[y * s + x] = tile.values[row + x];
            }
            double best = std::numeric_limits<double>::max();
            Token best_c = 0;
            for (std::uint32_t c = 0; c < codebook.q; ++c) {
                const double d = sq_dist_bounded(patch.data(), codebook.entry(c).data(), dim, best);
                if (d < best) {
                    best = d;
                    best_c = c;
                }
            }
            seq.tokens.push_back(best_c);
        }
    }
    return seq;
}

Tile decode_tokens(const Codebook& codebook, const TokenSeq& tokens) {
    const std::uint32_t g = codebook.grid;
    const std::uint32_t s = codebook.sub_side;
    if (tokens.tokens.size() != static_cast<std::size_t>(g) * g)
        throw DecodeError("token count does not match the sub-patch grid");
    for (Token t : tokens.tokens)
        if (t >= codebook.q) throw DecodeError("token index out of codebook range");

    Tile tile;
    tile.side = codebook.leaf_side();
    tile.values.assign(static_cast<std::size_t>(tile.side) * tile.side, 0.0f);
    for (std::uint32_t py = 0; py < g; ++py) {
        for (std::uint32_t px = 0; px < g; ++px) {
            const auto entry = codebook.entry(tokens.tokens[py * g + px]);
            for (std::uint32_t y = 0; y < s; ++y) {
                const std::size_t row = (static_cast<std::size_t>(py) * s + y) * tile.side + px * s;
                for (std::uint32_t x = 0; x < s; ++x)
                    tile.values[row + x] = std::clamp(entry[y * s + x], -1.0f, 1.0f);
            }
        }
    }
    return tile;
}

double perplexity(std::span<const std::uint64_t> token_histogram) {
    std::uint64_t total = 0;
    for (auto c : token_histogram) total += c;
    if (total == 0) throw std::invalid_argument("perplexity: empty histogram");
    double entropy = 0.0;
    for (auto c : token_histogram) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(total);
        entropy -= p * std::log(p);
    }
    return std::exp(entropy);
}

double reconstruction_error(const Codebook& codebook, const std::vector<Tile>& tiles) {
    if (tiles.empty()) throw std::invalid_argument("reconstruction_error: no tiles");
    double acc = 0.0;
    std::size_t cells = 0;
    for (const auto& tile : tiles) {
        const Tile rec = decode_tokens(codebook, encode_tile(codebook, tile));
        for (std::size_t i = 0; i < tile.values.size(); ++i) {
            const double d = static_cast<double>(tile.values[i]) - rec.values[i];
            acc += d * d;
        }
        cells += tile.values.size();
    }
    return acc / static_cast<double>(cells);
}

void write_codebook(const Codebook& codebook, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write("VQCB", 4);
    write_u32(out, codebook.q);
    write_u32(out, codebook.dim());
    write_u32(out, codebook.grid);
    write_u32(out, codebook.sub_side);
    out.write(reinterpret_cast<const char*>(codebook.entries.data()),
              static_cast<std::streamsize>(codebook.entries.size() * sizeof(float)));
    if (!out) throw IoError("write failed: " + path.string());
}

Codebook read_codebook(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    expect_magic(in, "VQCB", "VQCB");
    Codebook cb;
    cb.q = read_u32(in, "Q");
    const std::uint32_t dim = read_u32(in, "D_c");
    cb.grid = read_u32(in, "grid");
    cb.sub_side = read_u32(in, "sub_side");
    if (cb.q == 0 || cb.grid == 0 || cb.sub_side == 0 || dim != cb.sub_side * cb.sub_side)
        throw IoError("bad VQCB header: " + path.string());
    cb.entries.resize(static_cast<std::size_t>(cb.q) * dim);
    in.read(reinterpret_cast<char*>(cb.entries.data()),
            static_cast<std::streamsize>(cb.entries.size() * sizeof(float)));
    if (!in) throw IoError("truncated VQCB: " + path.string());
    return cb;
}

} // namespace quadsketch
