#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "quadsketch/sketch_io.hpp"

namespace quadsketch {

enum class ShapeKind { Circle, Square, Triangle, Cross };

ShapeKind shape_kind_from_name(const std::string& name);

struct SyntheticSpec {
    std::vector<ShapeKind> classes{ShapeKind::Circle, ShapeKind::Square, ShapeKind::Triangle};
    int side = 64;
    int per_class = 100;
    std::uint64_t seed = 0;
    int thickness = 2;
};

struct SyntheticItem {
    Raster raster;
    int class_id = 0;
};

// Procedurally drawn shapes with randomized center, scale, and rotation
// inside a safety margin. Deterministic for a fixed spec.
std::vector<SyntheticItem> build_synthetic_corpus(const SyntheticSpec& spec);

// One shape with explicit placement; the corpus builder randomizes these.
Raster draw_shape(ShapeKind kind, int side, double cx, double cy, double radius, double rotation,
                  int thickness);

} // namespace quadsketch
