#include "quadsketch/sketch_io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace quadsketch {

namespace {

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

} // namespace

Raster make_raster(int width, int height) {
    if (width <= 0 || height <= 0) throw std::invalid_argument("raster dimensions must be positive");
    Raster r;
    r.width = width;
    r.height = height;
    r.cells.assign(static_cast<std::size_t>(width) * height, 0);
    return r;
}

RawDrawing parse_raw_drawing(const std::string& line) {
    nlohmann::json record;
    try {
        record = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("invalid NDJSON record: ") + e.what());
    }
    if (!record.is_object()) throw SchemaError("record is not a JSON object");
    if (!record.contains("word") || !record["word"].is_string())
        throw SchemaError("record missing string field \"word\"");
    if (!record.contains("drawing") || !record["drawing"].is_array())
        throw SchemaError("record missing array field \"drawing\"");

    RawDrawing raw;
    raw.label = record["word"].get<std::string>();
    for (const auto& stroke : record["drawing"]) {
        if (!stroke.is_array() || stroke.size() != 2 || !stroke[0].is_array() || !stroke[1].is_array())
            throw SchemaError("stroke is not an [xs, ys] pair");
        const auto& xs = stroke[0];
        const auto& ys = stroke[1];
        if (xs.size() != ys.size()) throw SchemaError("stroke xs/ys length mismatch");
        if (xs.empty()) throw SchemaError("stroke has no points");
        std::vector<Point> polyline;
        polyline.reserve(xs.size());
        for (std::size_t i = 0; i < xs.size(); ++i) {
            if (!xs[i].is_number() || !ys[i].is_number())
                throw SchemaError("stroke coordinate is not a number");
            const double x = xs[i].get<double>();
            const double y = ys[i].get<double>();
            if (!std::isfinite(x) || !std::isfinite(y))
                throw SchemaError("stroke coordinate is not finite");
            polyline.push_back({static_cast<int>(std::lround(x)), static_cast<int>(std::lround(y))});
        }
        raw.strokes.push_back(std::move(polyline));
    }
    return raw;
}

StrokeSketch to_stroke5(const RawDrawing& raw, const std::map<std::string, int>& vocab) {
    const auto it = vocab.find(raw.label);
    if (it == vocab.end()) throw VocabError("label not in vocabulary: " + raw.label);
    if (raw.strokes.empty()) throw std::invalid_argument("drawing has no strokes");

    StrokeSketch sketch;
    sketch.label_id = it->second;
    Point prev{0, 0};
    for (const auto& stroke : raw.strokes) {
        for (std::size_t i = 0; i < stroke.size(); ++i) {
            StrokePoint5 p;
            p.dx = stroke[i].x - prev.x;
            p.dy = stroke[i].y - prev.y;
            if (i + 1 == stroke.size())
                p.p2 = 1;
            else
                p.p1 = 1;
            sketch.points.push_back(p);
            prev = stroke[i];
        }
    }
    auto& last = sketch.points.back();
    last.p1 = 0;
    last.p2 = 0;
    last.p3 = 1;
    return sketch;
}

std::vector<Point> stroke5_to_points(const StrokeSketch& sketch) {
    std::vector<Point> out;
    out.reserve(sketch.points.size());
    Point cur{0, 0};
    for (const auto& p : sketch.points) {
        cur.x += p.dx;
        cur.y += p.dy;
        out.push_back(cur);
    }
    return out;
}

namespace {

double point_segment_distance(Point p, Point a, Point b) {
    const double abx = b.x - a.x;
    const double aby = b.y - a.y;
    const double len2 = abx * abx + aby * aby;
    if (len2 == 0.0) return std::hypot(p.x - a.x, p.y - a.y);
    // Perpendicular distance to the infinite line through a-b, the classic
    // RDP deviation measure.
    return std::abs(abx * (a.y - p.y) - (a.x - p.x) * aby) / std::sqrt(len2);
}

void rdp_recurse(const std::vector<Point>& pts, std::size_t first, std::size_t last,
                 double epsilon, std::vector<bool>& keep) {
    if (last <= first + 1) return;
    double best = 0.0;
    std::size_t best_idx = first;
    for (std::size_t i = first + 1; i < last; ++i) {
        const double d = point_segment_distance(pts[i], pts[first], pts[last]);
        if (d > best) {
            best = d;
            best_idx = i;
        }
    }
    if (best > epsilon) {
        keep[best_idx] = true;
        rdp_recurse(pts, first, best_idx, epsilon, keep);
        rdp_recurse(pts, best_idx, last, epsilon, keep);
    }
}

// Rebuilds a StrokeSketch from absolute per-stroke polylines.
StrokeSketch strokes_to_sketch(const std::vector<std::vector<Point>>& strokes, int label_id) {
    RawDrawing raw;
    raw.label = "_";
    raw.strokes = strokes;
    return to_stroke5(raw, {{"_", label_id}});
}

std::vector<std::vector<Point>> split_into_strokes(const StrokeSketch& sketch) {
    std::vector<std::vector<Point>> strokes;
    std::vector<Point> cur;
    const auto abs_points = stroke5_to_points(sketch);
    for (std::size_t i = 0; i < abs_points.size(); ++i) {
        cur.push_back(abs_points[i]);
        if (sketch.points[i].p2 || sketch.points[i].p3) {
            strokes.push_back(std::move(cur));
            cur.clear();
        }
    }
    if (!cur.empty()) strokes.push_back(std::move(cur));
    return strokes;
}

} // namespace

std::vector<Point> rdp_polyline(const std::vector<Point>& points, double epsilon) {
    if (points.size() <= 2) return points;
    std::vector<bool> keep(points.size(), false);
    keep.front() = true;
    keep.back() = true;
    rdp_recurse(points, 0, points.size() - 1, epsilon, keep);
    std::vector<Point> out;
    for (std::size_t i = 0; i < points.size(); ++i)
        if (keep[i]) out.push_back(points[i]);
    return out;
}

StrokeSketch rdp_simplify(const StrokeSketch& sketch, double epsilon, std::size_t max_len) {
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be non-negative");
    if (max_len < 2) throw std::invalid_argument("max_len must be at least 2");

    const auto strokes = split_into_strokes(sketch);
    double eps = epsilon;
    StrokeSketch result;
    for (int attempt = 0; attempt <= 10; ++attempt) {
        std::vector<std::vector<Point>> simplified;
        simplified.reserve(strokes.size());
        std::size_t total = 0;
        for (const auto& s : strokes) {
            auto r = rdp_polyline(s, eps);
            total += r.size();
            simplified.push_back(std::move(r));
        }
        result = strokes_to_sketch(simplified, sketch.label_id);
        if (total <= max_len) return result;
        eps *= 1.5;
    }

    result.points.resize(max_len);
    auto& last = result.points.back();
    last.p1 = 0;
    last.p2 = 0;
    last.p3 = 1;
    return result;
}

namespace {

void stamp_disc(Raster& raster, int cx, int cy, int thickness) {
    const double radius = thickness / 2.0;
    const int r = static_cast<int>(std::floor(radius));
    const double r2 = radius * radius;
    for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
            if (dx * dx + dy * dy > r2) continue;
            const int x = cx + dx;
            const int y = cy + dy;
            if (x < 0 || y < 0 || x >= raster.width || y >= raster.height) continue;
            raster.set(x, y, 1);
        }
    }
}

} // namespace

void draw_line(Raster& raster, Point a, Point b, int thickness) {
    // Integer midpoint (Bresenham) traversal.
    int x = a.x, y = a.y;
    const int dx = std::abs(b.x - a.x);
    const int dy = -std::abs(b.y - a.y);
    const int sx = a.x < b.x ? 1 : -1;
    const int sy = a.y < b.y ? 1 : -1;
    int err = dx + dy;
    while (true) {
        stamp_disc(raster, x, y, thickness);
        if (x == b.x && y == b.y) break;
        const int e2 = 2 * err;
        if (e2 >= dy) {
            err += dy;
            x += sx;
        }
        if (e2 <= dx) {
            err += dx;
            y += sy;
        }
    }
}

Raster rasterize(const StrokeSketch& sketch, int side, double margin, int thickness) {
    if (!is_power_of_two(side)) throw std::invalid_argument("side must be a power of two");
    if (margin < 0.0 || margin >= 0.5) throw std::invalid_argument("margin must be in [0, 0.5)");
    if (thickness < 1) throw std::invalid_argument("thickness must be at least 1");
    if (sketch.points.empty()) throw std::invalid_argument("sketch has no points");

    Raster raster = make_raster(side, side);
    const auto pts = stroke5_to_points(sketch);

    int minx = pts[0].x, maxx = pts[0].x, miny = pts[0].y, maxy = pts[0].y;
    for (const auto& p : pts) {
        minx = std::min(minx, p.x);
        maxx = std::max(maxx, p.x);
        miny = std::min(miny, p.y);
        maxy = std::max(maxy, p.y);
    }
    const int extent = std::max(maxx - minx, maxy - miny);
    if (extent == 0) {
        raster.set(side / 2, side / 2, 1);
        return raster;
    }

    // Inset the target box by the stamp radius so thickness never leaks
    // outside the margin box.
    const double pad = thickness / 2.0 + 1.0;
    const double avail = std::max(0.0, (1.0 - 2.0 * margin) * side - 2.0 * pad - 1.0);
    const double scale = avail / extent;
    const double cx = (minx + maxx) / 2.0;
    const double cy = (miny + maxy) / 2.0;
    const double half = (side - 1) / 2.0;

    auto map_point = [&](Point p) {
        return Point{static_cast<int>(std::lround((p.x - cx) * scale + half)),
                     static_cast<int>(std::lround((p.y - cy) * scale + half))};
    };

    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
        if (!sketch.points[i].p1) continue;
        draw_line(raster, map_point(pts[i]), map_point(pts[i + 1]), thickness);
    }

    // A sketch whose pen never draws still needs a mark.
    bool any = false;
    for (auto c : raster.cells)
        if (c) {
            any = true;
            break;
        }
    if (!any) raster.set(side / 2, side / 2, 1);
    return raster;
}

void write_pgm(const Raster& raster, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out << "P5\n" << raster.width << " " << raster.height << "\n255\n";
    std::vector<std::uint8_t> bytes(raster.cells.size());
    for (std::size_t i = 0; i < raster.cells.size(); ++i) bytes[i] = raster.cells[i] ? 255 : 0;
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path.string());
}

Raster read_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    std::string magic;
    in >> magic;
    if (magic != "P5") throw IoError("not a P5 PGM: " + path.string());
    int width = 0, height = 0, maxval = 0;
    in >> width >> height >> maxval;
    if (!in || width <= 0 || height <= 0 || maxval <= 0 || maxval > 255)
        throw IoError("bad PGM header: " + path.string());
    in.get(); // single whitespace after maxval
    Raster raster = make_raster(width, height);
    std::vector<std::uint8_t> bytes(raster.cells.size());
    in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!in) throw IoError("truncated PGM: " + path.string());
    for (std::size_t i = 0; i < bytes.size(); ++i) raster.cells[i] = bytes[i] >= maxval / 2 ? 1 : 0;
    return raster;
}

} // namespace quadsketch
