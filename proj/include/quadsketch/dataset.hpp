#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "quadsketch/sdf_grid.hpp"

namespace quadsketch {

// Dataset directory convention: one subdirectory per class holding item
// files, plus labels.json = {"classes": [...]} fixing the class-id order.

struct DatasetEntry {
    std::filesystem::path path;
    int class_id = 0;
};

void write_labels(const std::filesystem::path& dir, const std::vector<std::string>& classes);
std::vector<std::string> read_labels(const std::filesystem::path& dir);

// Entries sorted by class id then filename; deterministic across runs.
std::vector<DatasetEntry> scan_dataset(const std::filesystem::path& dir, const std::string& extension);

struct SdfItem {
    SdfGrid sdf;
    int class_id = 0;
    std::string name; // relative path, used as the item id in reports
};

std::vector<SdfItem> load_sdf_dataset(const std::filesystem::path& dir);

// Worker cap from QUADSKETCH_THREADS (falls back to hardware concurrency).
unsigned worker_count();

} // namespace quadsketch
