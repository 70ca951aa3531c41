#include "quadsketch/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <thread>

#include <json.hpp>

#include "quadsketch/errors.hpp"

namespace quadsketch {

namespace fs = std::filesystem;

void write_labels(const fs::path& dir, const std::vector<std::string>& classes) {
    nlohmann::json doc;
    doc["classes"] = classes;
    std::ofstream out(dir / "labels.json", std::ios::binary);
    if (!out) throw IoError("cannot write labels.json in " + dir.string());
    out << doc.dump(2) << "\n";
}

std::vector<std::string> read_labels(const fs::path& dir) {
    std::ifstream in(dir / "labels.json");
    if (!in) throw IoError("missing labels.json in " + dir.string());
    nlohmann::json doc;
    in >> doc;
    if (!doc.contains("classes") || !doc["classes"].is_array())
        throw IoError("labels.json missing \"classes\" array in " + dir.string());
    return doc["classes"].get<std::vector<std::string>>();
}

std::vector<DatasetEntry> scan_dataset(const fs::path& dir, const std::string& extension) {
    const auto classes = read_labels(dir);
    std::vector<DatasetEntry> entries;
    for (std::size_t c = 0; c < classes.size(); ++c) {
        const fs::path class_dir = dir / classes[c];
        if (!fs::exists(class_dir)) continue;
        std::vector<fs::path> files;
        for (const auto& item : fs::directory_iterator(class_dir))
            if (item.is_regular_file() && item.path().extension() == extension)
                files.push_back(item.path());
        std::sort(files.begin(), files.end());
        for (auto& f : files) entries.push_back({std::move(f), static_cast<int>(c)});
    }
    return entries;
}

std::vector<SdfItem> load_sdf_dataset(const fs::path& dir) {
    std::vector<SdfItem> items;
    for (const auto& entry : scan_dataset(dir, ".sdf")) {
        SdfItem item;
        item.sdf = read_sdf(entry.path);
        item.class_id = entry.class_id;
        item.name = fs::relative(entry.path, dir).string();
        items.push_back(std::move(item));
    }
    return items;
}

unsigned worker_count() {
    unsigned n = std::thread::hardware_concurrency();
    if (n == 0) n = 1;
    if (const char* env = std::getenv("QUADSKETCH_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(v));
    }
    return n;
}

} // namespace quadsketch
