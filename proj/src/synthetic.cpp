#include "quadsketch/synthetic.hpp"

#include <cmath>
#include <stdexcept>

#include "quadsketch/rng.hpp"

namespace quadsketch {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

void draw_polygon(Raster& raster, const std::vector<Point>& corners, int thickness) {
    for (std::size_t i = 0; i < corners.size(); ++i)
        draw_line(raster, corners[i], corners[(i + 1) % corners.size()], thickness);
}

Point rotated(double cx, double cy, double r, double angle) {
    return {static_cast<int>(std::lround(cx + r * std::cos(angle))),
            static_cast<int>(std::lround(cy + r * std::sin(angle)))};
}

} // namespace

ShapeKind shape_kind_from_name(const std::string& name) {
    if (name == "circle") return ShapeKind::Circle;
    if (name == "square") return ShapeKind::Square;
    if (name == "triangle") return ShapeKind::Triangle;
    if (name == "cross") return ShapeKind::Cross;
    throw std::invalid_argument("unknown shape class: " + name);
}

Raster draw_shape(ShapeKind kind, int side, double cx, double cy, double radius, double rotation,
                  int thickness) {
    Raster raster = make_raster(side, side);
    switch (kind) {
        case ShapeKind::Circle: {
            const int segments = 48;
            std::vector<Point> pts;
            pts.reserve(segments);
            for (int i = 0; i < segments; ++i)
                pts.push_back(rotated(cx, cy, radius, rotation + 2.0 * M_PI * i / segments));
            draw_polygon(raster, pts, thickness);
            break;
        }
        case ShapeKind::Square: {
            std::vector<Point> pts;
            for (int i = 0; i < 4; ++i)
                pts.push_back(rotated(cx, cy, radius, rotation + M_PI / 4.0 + M_PI_2 * i));
            draw_polygon(raster, pts, thickness);
            break;
        }
        case ShapeKind::Triangle: {
            std::vector<Point> pts;
            for (int i = 0; i < 3; ++i)
                pts.push_back(rotated(cx, cy, radius, rotation - M_PI_2 + 2.0 * M_PI * i / 3.0));
            draw_polygon(raster, pts, thickness);
            break;
        }
        case ShapeKind::Cross: {
            draw_line(raster, rotated(cx, cy, radius, rotation), rotated(cx, cy, radius, rotation + M_PI),
                      thickness);
            draw_line(raster, rotated(cx, cy, radius, rotation + M_PI_2),
                      rotated(cx, cy, radius, rotation - M_PI_2), thickness);
            break;
        }
    }
    return raster;
}

std::vector<SyntheticItem> build_synthetic_corpus(const SyntheticSpec& spec) {
    if (!is_power_of_two(spec.side)) throw std::invalid_argument("side must be a power of two");
    if (spec.classes.size() < 2) throw std::invalid_argument("need at least 2 classes");
    if (spec.per_class < 0) throw std::invalid_argument("per_class must be non-negative");

    std::vector<SyntheticItem> items;
    items.reserve(spec.classes.size() * static_cast<std::size_t>(spec.per_class));

    Rng rng(spec.seed);
    for (std::size_t c = 0; c < spec.classes.size(); ++c) {
        for (int i = 0; i < spec.per_class; ++i) {
            // Full rotation; scale and position ranges are kept moderate so
            // classes stay statistically separable at desk-scale counts.
            const double radius = (0.30 + 0.08 * rng_canonical(rng)) * spec.side;
            const double slack = 0.5 * (spec.side / 2.0 - radius - spec.thickness - 1.0);
            const double cx = spec.side / 2.0 + (2.0 * rng_canonical(rng) - 1.0) * slack;
            const double cy = spec.side / 2.0 + (2.0 * rng_canonical(rng) - 1.0) * slack;
            const double rotation = 2.0 * M_PI * rng_canonical(rng);
            items.push_back(
                {draw_shape(spec.classes[c], spec.side, cx, cy, radius, rotation, spec.thickness),
                 static_cast<int>(c)});
        }
    }
    return items;
}

} // namespace quadsketch
