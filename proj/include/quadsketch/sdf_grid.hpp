#pragma once

#include <filesystem>
#include <vector>

#include "quadsketch/sketch_io.hpp"

namespace quadsketch {

// Truncated signed distance field, normalized to [-1, +1]. Stroke pixels
// carry -interior_depth / tau_max where interior_depth is the Euclidean
// distance to the nearest background pixel minus one (the outermost stroke
// pixel sits on the boundary at depth 0), background pixels carry
// +distance / tau_max; both saturate at tau_max.
struct SdfGrid {
    int width = 0;
    int height = 0;
    float tau_max = 0.0f;
    bool empty_input = false; // set when built from an all-background raster
    std::vector<float> values; // row-major

    float at(int x, int y) const { return values[static_cast<std::size_t>(y) * width + x]; }
    float& at(int x, int y) { return values[static_cast<std::size_t>(y) * width + x]; }
    int side() const { return width; }
};

SdfGrid make_sdf(int width, int height, float tau_max, float fill);

// Exact Euclidean distance transform of both the stroke set and its
// complement, combined under the sign convention above.
SdfGrid compute_sdf(const Raster& raster, float tau_max);

// Raster cell = 1 iff the field value is <= threshold (normalized units).
Raster clip_sdf(const SdfGrid& sdf, float threshold);

// Recovers the exact raster support of a field built by compute_sdf.
inline float default_clip_threshold(const SdfGrid& sdf) { return 0.5f / sdf.tau_max; }

// Bilinear when growing, area averaging when shrinking; identity at the same
// side. Output clamped to [-1, +1].
SdfGrid resize_sdf(const SdfGrid& sdf, int new_side);

// Raw-field resamplers shared with tile extraction. Area averaging requires
// integer shrink factors.
std::vector<float> resample_area(const std::vector<float>& src, int src_w, int src_h, int dst_w, int dst_h);
std::vector<float> resample_bilinear(const std::vector<float>& src, int src_w, int src_h, int dst_w, int dst_h);

// SDFG format: "SDFG", u32 width, u32 height, f32 tau_max, then
// width*height f32 values, row-major, all little-endian.
void write_sdf(const SdfGrid& sdf, const std::filesystem::path& path);
SdfGrid read_sdf(const std::filesystem::path& path);

} // namespace quadsketch
