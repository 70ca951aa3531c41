#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "quadsketch/errors.hpp"

namespace quadsketch {

struct Point {
    int x = 0;
    int y = 0;
    bool operator==(const Point&) const = default;
};

// One QuickDraw record after normalizing the [[xs],[ys]] wire format to
// point-list polylines.
struct RawDrawing {
    std::string label;
    std::vector<std::vector<Point>> strokes;
};

// Stroke-5 pen action. Exactly one of {p1, p2, p3} is set:
//   p1: pen is down and a segment is drawn from this point to the next,
//   p2: pen lifts after this point (end of stroke),
//   p3: the sequence ends at this point.
struct StrokePoint5 {
    int dx = 0;
    int dy = 0;
    std::uint8_t p1 = 0;
    std::uint8_t p2 = 0;
    std::uint8_t p3 = 0;
    bool operator==(const StrokePoint5&) const = default;
};

struct StrokeSketch {
    std::vector<StrokePoint5> points;
    int label_id = 0;
};

// Binary occupancy grid; 1 = stroke pixel.
struct Raster {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> cells; // row-major

    std::uint8_t at(int x, int y) const { return cells[static_cast<std::size_t>(y) * width + x]; }
    void set(int x, int y, std::uint8_t v) { cells[static_cast<std::size_t>(y) * width + x] = v; }
    bool operator==(const Raster&) const = default;
};

Raster make_raster(int width, int height);

// Parses one NDJSON line with fields "word" and "drawing"; unknown fields
// are ignored. Throws ParseError on malformed JSON, SchemaError when the
// required fields are missing or malformed.
RawDrawing parse_raw_drawing(const std::string& line);

// Converts absolute polylines to the stroke-5 offset encoding. Offsets chain
// from (0, 0); the final point's pen bits are rewritten to p3 = 1.
StrokeSketch to_stroke5(const RawDrawing& raw, const std::map<std::string, int>& vocab);

// Reconstructs absolute coordinates by prefix-summing offsets.
std::vector<Point> stroke5_to_points(const StrokeSketch& sketch);

// Per-stroke Ramer-Douglas-Peucker with split threshold `epsilon`. If the
// simplified sequence still exceeds max_len, epsilon is scaled by 1.5 and the
// pass is rerun on the original strokes (up to 10 times), then the tail is
// truncated as a last resort.
StrokeSketch rdp_simplify(const StrokeSketch& sketch, double epsilon, std::size_t max_len);

// Single polyline RDP on absolute points; exposed for reuse and testing.
std::vector<Point> rdp_polyline(const std::vector<Point>& points, double epsilon);

// Scales the sketch uniformly into the (1 - 2*margin)*side box centered on the
// canvas and draws every p1 segment with a disc stamp of diameter `thickness`.
// A sketch with zero spatial extent produces a single centered dot.
Raster rasterize(const StrokeSketch& sketch, int side, double margin = 0.1, int thickness = 2);

// Midpoint line traversal with a disc stamp of diameter `thickness` at every
// visited pixel. Out-of-bounds stamp pixels are clipped.
void draw_line(Raster& raster, Point a, Point b, int thickness);

void write_pgm(const Raster& raster, const std::filesystem::path& path);
Raster read_pgm(const std::filesystem::path& path);

} // namespace quadsketch
