#pragma once

#include <functional>
#include <string>
#include <vector>

#include "quadsketch/sdf_grid.hpp"

namespace quadsketch {

struct Region {
    int x = 0;
    int y = 0;
    int side = 0;
    bool operator==(const Region&) const = default;
};

struct LeafRef {
    int index = 0; // position in canonical depth-first order (TL, TR, BL, BR)
    int depth = 0;
    Region region;
    bool operator==(const LeafRef&) const = default;
};

// Fixed-resolution view of a canvas region. Regions larger than leaf_side are
// area-averaged down; dummies are constant fills for slots with no region.
struct Tile {
    int side = 0;
    std::vector<float> values;
    int origin_level = 0;
    bool is_dummy = false;

    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * side + x]; }
};

// The D*9+1 multi-scale context of one leaf, ordered deepest level first:
// [level-D 3x3, level-(D-1) 3x3, ..., level-1 3x3, root]. Each 3x3 block is
// row-major with the subject node in the center slot; levels deeper than the
// leaf and out-of-canvas neighbors are neutral dummies.
struct ContextSequence {
    std::vector<Tile> tiles;
    LeafRef leaf;
};

using SignificancePredicate = std::function<bool(const SdfGrid&, const Region&)>;

// True when the region contains any stroke-support pixel (value at or below
// the canvas clip threshold).
bool default_significance(const SdfGrid& canvas, const Region& region);

// Resamples a canvas region to tile_side (copy at native size, area average
// when shrinking).
Tile sample_canvas_region(const SdfGrid& canvas, const Region& region, int tile_side, int origin_level);

// Spatial partition over an owned, mutable canvas. Topology is frozen at
// build time; leaf content updates write straight into the canvas so tiles
// and contexts always reflect the latest state.
class QuadTree {
public:
    const SdfGrid& canvas() const { return canvas_; }
    int canvas_side() const { return canvas_.width; }
    int leaf_side() const { return leaf_side_; }
    int max_depth() const { return max_depth_; }
    const std::vector<LeafRef>& leaves() const { return leaves_; }
    std::size_t leaf_count() const { return leaves_.size(); }

    Tile sample_region(const Region& region, int origin_level) const;
    Tile leaf_tile(const LeafRef& leaf) const;

    // Every node region (internal and leaf) in preorder; covers all the
    // scales context extraction can sample.
    std::vector<Region> all_node_regions() const;

    // Overwrites the leaf region with `content` resized from leaf_side to the
    // region side (exact copy at native resolution, bilinear above it).
    void replace_leaf(const LeafRef& leaf, const Tile& content);

    // Blits the same region from a same-sized source canvas.
    void write_region_from(const SdfGrid& source, const Region& region);
    void fill_region(const Region& region, float value);

    ContextSequence extract_context(const LeafRef& leaf, float neutral = 1.0f) const;

    // "QT <canvas_side> <leaf_side> <preorder bits>", 1 = split, 0 = leaf.
    std::string topology_string() const;

    friend QuadTree build_quadtree(const SdfGrid&, int, const SignificancePredicate&);
    friend QuadTree copy_structure(const QuadTree&, const SdfGrid&);
    friend QuadTree build_from_topology(const SdfGrid&, const std::string&);

private:
    void validate_leaf(const LeafRef& leaf) const;
    void rebuild_leaves();

    SdfGrid canvas_;
    int leaf_side_ = 0;
    int max_depth_ = 0;
    std::vector<std::uint8_t> split_bits_; // preorder
    std::vector<LeafRef> leaves_;
};

// A node splits iff significance(region) holds and the region is still larger
// than leaf_side. Default predicate: default_significance.
QuadTree build_quadtree(const SdfGrid& canvas, int leaf_side,
                        const SignificancePredicate& significance = {});

// Same topology and leaf order over a new canvas of identical side; the
// significance predicate is not re-evaluated.
QuadTree copy_structure(const QuadTree& src, const SdfGrid& target_canvas);

// Rebuilds a tree from its topology_string(); canvas side must match.
QuadTree build_from_topology(const SdfGrid& canvas, const std::string& topology);

} // namespace quadsketch
