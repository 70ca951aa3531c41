#include "quadsketch/sdf_grid.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

#include "quadsketch/binary_io.hpp"

namespace quadsketch {

namespace {

constexpr double kFar = 1e20;

bool is_power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

// 1D squared-distance transform over a sampled parabola set
// (Felzenszwalb & Huttenlocher). Exact for integer seed data.
void edt_1d(const double* f, double* d, int n, int* v, double* z) {
    int k = 0;
    v[0] = 0;
    z[0] = -kFar;
    z[1] = +kFar;
    for (int q = 1; q < n; ++q) {
        double s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                   (2.0 * q - 2.0 * v[k]);
        while (s <= z[k]) {
            --k;
            s = ((f[q] + static_cast<double>(q) * q) - (f[v[k]] + static_cast<double>(v[k]) * v[k])) /
                (2.0 * q - 2.0 * v[k]);
        }
        ++k;
        v[k] = q;
        z[k] = s;
        z[k + 1] = +kFar;
    }
    k = 0;
    for (int q = 0; q < n; ++q) {
        while (z[k + 1] < q) ++k;
        const double dq = q - v[k];
        d[q] = dq * dq + f[v[k]];
    }
}

// Squared Euclidean distance of every pixel to the nearest seed pixel.
std::vector<double> edt_squared(const std::vector<std::uint8_t>& seed, int width, int height) {
    std::vector<double> dist(static_cast<std::size_t>(width) * height);
    for (std::size_t i = 0; i < dist.size(); ++i) dist[i] = seed[i] ? 0.0 : kFar;

    const int n = std::max(width, height);
    std::vector<double> f(n), d(n), z(n + 1);
    std::vector<int> v(n);

    for (int x = 0; x < width; ++x) {
        for (int y = 0; y < height; ++y) f[y] = dist[static_cast<std::size_t>(y) * width + x];
        edt_1d(f.data(), d.data(), height, v.data(), z.data());
        for (int y = 0; y < height; ++y) dist[static_cast<std::size_t>(y) * width + x] = d[y];
    }
    for (int y = 0; y < height; ++y) {
        double* row = dist.data() + static_cast<std::size_t>(y) * width;
        std::copy(row, row + width, f.data());
        edt_1d(f.data(), d.data(), width, v.data(), z.data());
        std::copy(d.data(), d.data() + width, row);
    }
    return dist;
}

} // namespace

SdfGrid make_sdf(int width, int height, float tau_max, float fill) {
    SdfGrid g;
    g.width = width;
    g.height = height;
    g.tau_max = tau_max;
    g.values.assign(static_cast<std::size_t>(width) * height, fill);
    return g;
}

SdfGrid compute_sdf(const Raster& raster, float tau_max) {
    if (tau_max <= 0.0f) throw std::invalid_argument("tau_max must be positive");
    const int w = raster.width;
    const int h = raster.height;
    SdfGrid sdf = make_sdf(w, h, tau_max, 1.0f);

    bool any_stroke = false;
    bool any_background = false;
    for (auto c : raster.cells) (c ? any_stroke : any_background) = true;
    if (!any_stroke) {
        sdf.empty_input = true;
        return sdf;
    }

    const auto out2 = edt_squared(raster.cells, w, h);
    std::vector<std::uint8_t> background(raster.cells.size());
    for (std::size_t i = 0; i < background.size(); ++i) background[i] = raster.cells[i] ? 0 : 1;
    const auto in2 = any_background ? edt_squared(background, w, h) : std::vector<double>();

    const double tau = tau_max;
    for (std::size_t i = 0; i < sdf.values.size(); ++i) {
        if (raster.cells[i]) {
            const double depth = any_background ? std::max(std::sqrt(in2[i]) - 1.0, 0.0) : tau;
            sdf.values[i] = static_cast<float>(-std::min(depth, tau) / tau);
        } else {
            sdf.values[i] = static_cast<float>(std::min(std::sqrt(out2[i]), tau) / tau);
        }
    }
    return sdf;
}

Raster clip_sdf(const SdfGrid& sdf, float threshold) {
    if (!(threshold > 0.0f && threshold < 1.0f)) throw std::invalid_argument("threshold must be in (0, 1)");
    Raster raster = make_raster(sdf.width, sdf.height);
    for (std::size_t i = 0; i < sdf.values.size(); ++i) raster.cells[i] = sdf.values[i] <= threshold ? 1 : 0;
    return raster;
}

std::vector<float> resample_area(const std::vector<float>& src, int src_w, int src_h, int dst_w, int dst_h) {
    if (dst_w <= 0 || dst_h <= 0 || src_w % dst_w != 0 || src_h % dst_h != 0)
        throw std::invalid_argument("area resample needs integer shrink factors");
    const int fx = src_w / dst_w;
    const int fy = src_h / dst_h;
    std::vector<float> dst(static_cast<std::size_t>(dst_w) * dst_h);
    for (int y = 0; y < dst_h; ++y) {
        for (int x = 0; x < dst_w; ++x) {
            double sum = 0.0;
            for (int sy = y * fy; sy < (y + 1) * fy; ++sy)
                for (int sx = x * fx; sx < (x + 1) * fx; ++sx)
                    sum += src[static_cast<std::size_t>(sy) * src_w + sx];
            dst[static_cast<std::size_t>(y) * dst_w + x] = static_cast<float>(sum / (fx * fy));
        }
    }
    return dst;
}

std::vector<float> resample_bilinear(const std::vector<float>& src, int src_w, int src_h, int dst_w, int dst_h) {
    std::vector<float> dst(static_cast<std::size_t>(dst_w) * dst_h);
    const double rx = static_cast<double>(src_w) / dst_w;
    const double ry = static_cast<double>(src_h) / dst_h;
    for (int y = 0; y < dst_h; ++y) {
        // Pixel-center alignment.
        const double sy = std::clamp((y + 0.5) * ry - 0.5, 0.0, src_h - 1.0);
        const int y0 = static_cast<int>(sy);
        const int y1 = std::min(y0 + 1, src_h - 1);
        const double wy = sy - y0;
        for (int x = 0; x < dst_w; ++x) {
            const double sx = std::clamp((x + 0.5) * rx - 0.5, 0.0, src_w - 1.0);
            const int x0 = static_cast<int>(sx);
            const int x1 = std::min(x0 + 1, src_w - 1);
            const double wx = sx - x0;
            const double top = src[static_cast<std::size_t>(y0) * src_w + x0] * (1.0 - wx) +
                               src[static_cast<std::size_t>(y0) * src_w + x1] * wx;
            const double bot = src[static_cast<std::size_t>(y1) * src_w + x0] * (1.0 - wx) +
                               src[static_cast<std::size_t>(y1) * src_w + x1] * wx;
            dst[static_cast<std::size_t>(y) * dst_w + x] = static_cast<float>(top * (1.0 - wy) + bot * wy);
        }
    }
    return dst;
}

SdfGrid resize_sdf(const SdfGrid& sdf, int new_side) {
    if (new_side < 2) throw std::invalid_argument("new_side must be at least 2");
    if (!is_power_of_two(new_side)) throw std::invalid_argument("new_side must be a power of two");
    if (sdf.width != sdf.height) throw std::invalid_argument("resize_sdf requires a square field");

    SdfGrid out = sdf;
    if (new_side == sdf.width) return out;

    out.width = new_side;
    out.height = new_side;
    out.values = new_side < sdf.width
                     ? resample_area(sdf.values, sdf.width, sdf.height, new_side, new_side)
                     : resample_bilinear(sdf.values, sdf.width, sdf.height, new_side, new_side);
    for (auto& v : out.values) v = std::clamp(v, -1.0f, 1.0f);
    return out;
}

void write_sdf(const SdfGrid& sdf, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path.string());
    out.write("SDFG", 4);
    write_u32(out, static_cast<std::uint32_t>(sdf.width));
    write_u32(out, static_cast<std::uint32_t>(sdf.height));
    write_f32(out, sdf.tau_max);
    out.write(reinterpret_cast<const char*>(sdf.values.data()),
              static_cast<std::streamsize>(sdf.values.size() * sizeof(float)));
    if (!out) throw IoError("write failed: " + path.string());
}

SdfGrid read_sdf(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path.string());
    expect_magic(in, "SDFG", "SDFG");
    SdfGrid sdf;
    sdf.width = static_cast<int>(read_u32(in, "width"));
    sdf.height = static_cast<int>(read_u32(in, "height"));
    sdf.tau_max = read_f32(in, "tau_max");
    if (sdf.width <= 0 || sdf.height <= 0) throw IoError("bad SDFG dimensions: " + path.string());
    sdf.values.resize(static_cast<std::size_t>(sdf.width) * sdf.height);
    in.read(reinterpret_cast<char*>(sdf.values.data()),
            static_cast<std::streamsize>(sdf.values.size() * sizeof(float)));
    if (!in) throw IoError("truncated SDFG: " + path.string());
    return sdf;
}

} // namespace quadsketch
