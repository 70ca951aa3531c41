#include "quadsketch/quad_context.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace quadsketch {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

int log2_exact(int v) {
    int d = 0;
    while ((1 << d) < v) ++d;
    return d;
}

} // namespace

bool default_significance(const SdfGrid& canvas, const Region& region) {
    const float threshold = canvas.tau_max > 0.0f ? default_clip_threshold(canvas) : 0.0f;
    for (int y = region.y; y < region.y + region.side; ++y)
        for (int x = region.x; x < region.x + region.side; ++x)
            if (canvas.at(x, y) <= threshold) return true;
    return false;
}

QuadTree build_quadtree(const SdfGrid& canvas, int leaf_side, const SignificancePredicate& significance) {
    if (canvas.width != canvas.height) throw std::invalid_argument("canvas must be square");
    if (!is_power_of_two(canvas.width) || !is_power_of_two(leaf_side))
        throw std::invalid_argument("canvas side and leaf_side must be powers of two");
    if (leaf_side > canvas.width) throw std::invalid_argument("leaf_side exceeds canvas side");

    const SignificancePredicate& pred = significance ? significance : default_significance;

    QuadTree tree;
    tree.canvas_ = canvas;
    tree.leaf_side_ = leaf_side;
    tree.max_depth_ = log2_exact(canvas.width / leaf_side);

    // Preorder recursion, children in TL, TR, BL, BR order.
    std::function<void(const Region&, int)> visit = [&](const Region& region, int depth) {
        const bool split = region.side > leaf_side && pred(tree.canvas_, region);
        tree.split_bits_.push_back(split ? 1 : 0);
        if (!split) {
            tree.leaves_.push_back({static_cast<int>(tree.leaves_.size()), depth, region});
            return;
        }
        const int h = region.side / 2;
        visit({region.x, region.y, h}, depth + 1);
        visit({region.x + h, region.y, h}, depth + 1);
        visit({region.x, region.y + h, h}, depth + 1);
        visit({region.x + h, region.y + h, h}, depth + 1);
    };
    visit({0, 0, canvas.width}, 0);
    return tree;
}

void QuadTree::rebuild_leaves() {
    leaves_.clear();
    std::size_t cursor = 0;
    std::function<void(const Region&, int)> visit = [&](const Region& region, int depth) {
        const bool split = split_bits_.at(cursor++) != 0;
        if (!split) {
            leaves_.push_back({static_cast<int>(leaves_.size()), depth, region});
            return;
        }
        const int h = region.side / 2;
        visit({region.x, region.y, h}, depth + 1);
        visit({region.x + h, region.y, h}, depth + 1);
        visit({region.x, region.y + h, h}, depth + 1);
        visit({region.x + h, region.y + h, h}, depth + 1);
    };
    visit({0, 0, canvas_.width}, 0);
    if (cursor != split_bits_.size()) throw std::invalid_argument("topology bits do not form one tree");
}

QuadTree copy_structure(const QuadTree& src, const SdfGrid& target_canvas) {
    if (target_canvas.width != src.canvas_.width || target_canvas.height != src.canvas_.height)
        throw std::invalid_argument("target canvas size mismatch");
    QuadTree tree;
    tree.canvas_ = target_canvas;
    tree.leaf_side_ = src.leaf_side_;
    tree.max_depth_ = src.max_depth_;
    tree.split_bits_ = src.split_bits_;
    tree.leaves_ = src.leaves_;
    return tree;
}

QuadTree build_from_topology(const SdfGrid& canvas, const std::string& topology) {
    std::istringstream in(topology);
    std::string tag;
    int side = 0, leaf_side = 0;
    std::string bits;
    in >> tag >> side >> leaf_side >> bits;
    if (!in || tag != "QT") throw std::invalid_argument("bad topology string");
    if (side != canvas.width || side != canvas.height)
        throw std::invalid_argument("topology side does not match canvas");
    QuadTree tree;
    tree.canvas_ = canvas;
    tree.leaf_side_ = leaf_side;
    tree.max_depth_ = log2_exact(side / leaf_side);
    tree.split_bits_.reserve(bits.size());
    for (char c : bits) {
        if (c != '0' && c != '1') throw std::invalid_argument("topology bits must be 0/1");
        tree.split_bits_.push_back(c == '1' ? 1 : 0);
    }
    tree.rebuild_leaves();
    return tree;
}

std::vector<Region> QuadTree::all_node_regions() const {
    std::vector<Region> regions;
    regions.reserve(split_bits_.size());
    std::size_t cursor = 0;
    std::function<void(const Region&)> visit = [&](const Region& region) {
        const bool split = split_bits_.at(cursor++) != 0;
        regions.push_back(region);
        if (!split) return;
        const int h = region.side / 2;
        visit({region.x, region.y, h});
        visit({region.x + h, region.y, h});
        visit({region.x, region.y + h, h});
        visit({region.x + h, region.y + h, h});
    };
    visit({0, 0, canvas_.width});
    return regions;
}

std::string QuadTree::topology_string() const {
    std::ostringstream out;
    out << "QT " << canvas_.width << " " << leaf_side_ << " ";
    for (auto b : split_bits_) out << (b ? '1' : '0');
    return out.str();
}

Tile sample_canvas_region(const SdfGrid& canvas, const Region& region, int tile_side, int origin_level) {
    Tile tile;
    tile.side = tile_side;
    tile.origin_level = origin_level;
    if (region.side == tile_side) {
        tile.values.resize(static_cast<std::size_t>(tile_side) * tile_side);
        for (int y = 0; y < tile_side; ++y)
            for (int x = 0; x < tile_side; ++x)
                tile.values[static_cast<std::size_t>(y) * tile_side + x] = canvas.at(region.x + x, region.y + y);
        return tile;
    }
    std::vector<float> patch(static_cast<std::size_t>(region.side) * region.side);
    for (int y = 0; y < region.side; ++y)
        for (int x = 0; x < region.side; ++x)
            patch[static_cast<std::size_t>(y) * region.side + x] = canvas.at(region.x + x, region.y + y);
    tile.values = resample_area(patch, region.side, region.side, tile_side, tile_side);
    return tile;
}

Tile QuadTree::sample_region(const Region& region, int origin_level) const {
    return sample_canvas_region(canvas_, region, leaf_side_, origin_level);
}

Tile QuadTree::leaf_tile(const LeafRef& leaf) const {
    validate_leaf(leaf);
    return sample_region(leaf.region, leaf.depth);
}

void QuadTree::validate_leaf(const LeafRef& leaf) const {
    if (leaf.index < 0 || static_cast<std::size_t>(leaf.index) >= leaves_.size() ||
        !(leaves_[static_cast<std::size_t>(leaf.index)] == leaf))
        throw std::invalid_argument("LeafRef does not belong to this tree");
}

void QuadTree::replace_leaf(const LeafRef& leaf, const Tile& content) {
    validate_leaf(leaf);
    if (content.side != leaf_side_) throw std::invalid_argument("content side must equal leaf_side");

    const Region& region = leaf.region;
    if (region.side == leaf_side_) {
        for (int y = 0; y < leaf_side_; ++y)
            for (int x = 0; x < leaf_side_; ++x)
                canvas_.at(region.x + x, region.y + y) = content.values[static_cast<std::size_t>(y) * leaf_side_ + x];
        return;
    }
    auto grown = resample_bilinear(content.values, leaf_side_, leaf_side_, region.side, region.side);
    for (int y = 0; y < region.side; ++y)
        for (int x = 0; x < region.side; ++x)
            canvas_.at(region.x + x, region.y + y) =
                std::clamp(grown[static_cast<std::size_t>(y) * region.side + x], -1.0f, 1.0f);
}

void QuadTree::write_region_from(const SdfGrid& source, const Region& region) {
    if (source.width != canvas_.width || source.height != canvas_.height)
        throw std::invalid_argument("source canvas size mismatch");
    for (int y = region.y; y < region.y + region.side; ++y)
        for (int x = region.x; x < region.x + region.side; ++x)
            canvas_.at(x, y) = source.at(x, y);
}

void QuadTree::fill_region(const Region& region, float value) {
    for (int y = region.y; y < region.y + region.side; ++y)
        for (int x = region.x; x < region.x + region.side; ++x)
            canvas_.at(x, y) = value;
}

ContextSequence QuadTree::extract_context(const LeafRef& leaf, float neutral) const {
    validate_leaf(leaf);

    ContextSequence ctx;
    ctx.leaf = leaf;
    ctx.tiles.reserve(static_cast<std::size_t>(max_depth_) * 9 + 1);

    auto dummy = [&](int level) {
        Tile tile;
        tile.side = leaf_side_;
        tile.values.assign(static_cast<std::size_t>(leaf_side_) * leaf_side_, neutral);
        tile.origin_level = level;
        tile.is_dummy = true;
        return tile;
    };

    for (int level = max_depth_; level >= 1; --level) {
        if (level > leaf.depth) {
            for (int i = 0; i < 9; ++i) ctx.tiles.push_back(dummy(level));
            continue;
        }
        const int node_side = canvas_.width >> level;
        const int ax = leaf.region.x / node_side * node_side;
        const int ay = leaf.region.y / node_side * node_side;
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const int nx = ax + dx * node_side;
                const int ny = ay + dy * node_side;
                if (nx < 0 || ny < 0 || nx + node_side > canvas_.width || ny + node_side > canvas_.height) {
                    ctx.tiles.push_back(dummy(level));
                    continue;
                }
                ctx.tiles.push_back(sample_region({nx, ny, node_side}, level));
            }
        }
    }
    ctx.tiles.push_back(sample_region({0, 0, canvas_.width}, 0));
    return ctx;
}

} // namespace quadsketch
