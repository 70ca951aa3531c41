#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "quadsketch/dataset.hpp"
#include "quadsketch/eval.hpp"
#include "quadsketch/pipeline.hpp"
#include "quadsketch/synthetic.hpp"

namespace fs = std::filesystem;
using namespace quadsketch;

namespace {

constexpr int kExamplesPerItem = 32; // training draws per dataset item

std::string item_name(int index) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%06d", index);
    return buf;
}

void cmd_ingest(const std::string& in, const std::string& out, int side, double epsilon,
                std::size_t max_len) {
    std::ifstream input(in);
    if (!input) throw IoError("cannot open: " + in);
    fs::create_directories(out);

    std::vector<RawDrawing> drawings;
    std::set<std::string> label_set;
    std::string line;
    std::size_t skipped = 0;
    while (std::getline(input, line)) {
        if (line.empty()) continue;
        try {
            RawDrawing raw = parse_raw_drawing(line);
            label_set.insert(raw.label);
            drawings.push_back(std::move(raw));
        } catch (const std::exception& e) {
            ++skipped;
            std::cerr << "skipping record: " << e.what() << "\n";
        }
    }
    if (drawings.empty()) throw IoError("no parsable records in " + in);

    std::map<std::string, int> vocab;
    std::vector<std::string> classes(label_set.begin(), label_set.end());
    for (std::size_t i = 0; i < classes.size(); ++i) vocab[classes[i]] = static_cast<int>(i);

    std::ofstream strokes(fs::path(out) / "strokes.ndjson", std::ios::binary);
    if (!strokes) throw IoError("cannot write strokes.ndjson");
    for (const auto& raw : drawings) {
        const StrokeSketch simplified = rdp_simplify(to_stroke5(raw, vocab), epsilon, max_len);
        const auto points = stroke5_to_points(simplified);
        nlohmann::json drawing = nlohmann::json::array();
        std::vector<int> xs, ys;
        for (std::size_t i = 0; i < points.size(); ++i) {
            xs.push_back(points[i].x);
            ys.push_back(points[i].y);
            if (simplified.points[i].p2 || simplified.points[i].p3) {
                drawing.push_back({xs, ys});
                xs.clear();
                ys.clear();
            }
        }
        nlohmann::json record;
        record["word"] = classes[static_cast<std::size_t>(simplified.label_id)];
        record["drawing"] = drawing;
        strokes << record.dump() << "\n";
    }

    nlohmann::json meta;
    meta["side"] = side;
    meta["epsilon"] = epsilon;
    meta["max_len"] = max_len;
    meta["classes"] = classes;
    std::ofstream meta_out(fs::path(out) / "meta.json", std::ios::binary);
    meta_out << meta.dump(2) << "\n";
    write_labels(out, classes);

    std::cout << "ingested " << drawings.size() << " sketches (" << classes.size() << " classes, "
              << skipped << " skipped)\n";
}

void cmd_sdf(const std::string& in, const std::string& out, double tau_max, int thickness) {
    fs::create_directories(out);
    const fs::path strokes_path = fs::path(in) / "strokes.ndjson";

    if (fs::exists(strokes_path)) {
        std::ifstream meta_in(fs::path(in) / "meta.json");
        if (!meta_in) throw IoError("missing meta.json in " + in);
        nlohmann::json meta;
        meta_in >> meta;
        const int side = meta["side"].get<int>();
        const auto classes = meta["classes"].get<std::vector<std::string>>();
        std::map<std::string, int> vocab;
        for (std::size_t i = 0; i < classes.size(); ++i) vocab[classes[i]] = static_cast<int>(i);

        std::ifstream strokes(strokes_path);
        std::string line;
        std::vector<int> per_class(classes.size(), 0);
        std::size_t total = 0;
        while (std::getline(strokes, line)) {
            if (line.empty()) continue;
            const RawDrawing raw = parse_raw_drawing(line);
            const StrokeSketch sketch = to_stroke5(raw, vocab);
            const Raster raster = rasterize(sketch, side, 0.1, thickness);
            const SdfGrid sdf = compute_sdf(raster, static_cast<float>(tau_max));
            const fs::path class_dir = fs::path(out) / classes[static_cast<std::size_t>(sketch.label_id)];
            fs::create_directories(class_dir);
            write_sdf(sdf, class_dir / (item_name(per_class[static_cast<std::size_t>(sketch.label_id)]++) + ".sdf"));
            ++total;
        }
        write_labels(out, classes);
        std::cout << "wrote " << total << " SDFs at side " << side << "\n";
        return;
    }

    // PGM dataset input.
    const auto classes = read_labels(in);
    const auto entries = scan_dataset(in, ".pgm");
    if (entries.empty()) throw IoError("no .pgm items found in " + in);
    for (const auto& entry : entries) {
        const Raster raster = read_pgm(entry.path);
        const SdfGrid sdf = compute_sdf(raster, static_cast<float>(tau_max));
        const fs::path class_dir = fs::path(out) / classes[static_cast<std::size_t>(entry.class_id)];
        fs::create_directories(class_dir);
        write_sdf(sdf, class_dir / (entry.path.stem().string() + ".sdf"));
    }
    write_labels(out, classes);
    std::cout << "wrote " << entries.size() << " SDFs\n";
}

void cmd_fit_codebook(const std::string& in, std::uint32_t q, std::uint32_t grid, int leaf,
                      std::uint64_t seed, const std::string& out) {
    const auto items = load_sdf_dataset(in);
    if (items.empty()) throw IoError("no .sdf items found in " + in);

    std::vector<Tile> tiles;
    for (const auto& item : items) {
        const QuadTree tree = build_quadtree(item.sdf, leaf);
        for (const auto& region : tree.all_node_regions())
            tiles.push_back(sample_canvas_region(item.sdf, region, leaf, 0));
    }
    const Codebook cb = fit_codebook(tiles, q, grid, seed);
    write_codebook(cb, out);

    std::vector<std::uint64_t> usage(cb.q, 0);
    for (const auto& tile : tiles)
        for (Token t : encode_tile(cb, tile).tokens) ++usage[t];
    std::cout << "codebook Q=" << cb.q << " from " << tiles.size() << " tiles, perplexity "
              << perplexity(usage) << "\n";
}

void cmd_train(const std::string& in, const std::string& codebook_path, double alpha,
               std::uint64_t seed, const std::string& out, bool masked) {
    const Codebook cb = read_codebook(codebook_path);
    const auto items = load_sdf_dataset(in);
    if (items.empty()) throw IoError("no .sdf items found in " + in);

    CountModel model(cb, alpha);
    for (std::size_t i = 0; i < items.size(); ++i) {
        Rng rng(mix_seed(seed, i));
        const SdfGrid lowres = masked ? SdfGrid{} : resize_sdf(items[i].sdf, cb.leaf_side());
        for (int e = 0; e < kExamplesPerItem; ++e) {
            const TrainingExample example =
                masked ? sample_masked_pretraining_example(items[i].sdf, cb, rng, items[i].class_id)
                       : sample_training_example(items[i].sdf, lowres, items[i].class_id, cb, rng);
            model.observe(example);
        }
    }
    model.save(out);
    std::cout << "trained on " << items.size() * kExamplesPerItem << " examples, " << model.key_count()
              << " keys\n";
}

void cmd_generate(int class_id, int n, const std::string& codebook_path, const std::string& model_path,
                  const std::string& pool_dir, std::uint64_t seed, const std::string& out) {
    const Codebook cb = read_codebook(codebook_path);
    const CountModel model = CountModel::load(model_path, cb);
    const auto pool_items = load_sdf_dataset(pool_dir);
    if (pool_items.empty()) throw IoError("no .sdf items found in " + pool_dir);

    const int full_side = pool_items.front().sdf.side();
    PrototypeSampler sampler;
    for (const auto& item : pool_items)
        sampler.add_prototype(item.class_id, resize_sdf(item.sdf, cb.leaf_side()));

    fs::create_directories(out);
    for (int i = 0; i < n; ++i) {
        const std::uint64_t sample_seed = mix_seed(seed, static_cast<std::uint64_t>(i));
        const GenerationResult result =
            generate_sketch(sampler, model, cb, class_id, sample_seed, full_side);
        const std::string stem = "sample_" + item_name(i);
        write_sdf(result.refined, fs::path(out) / (stem + ".sdf"));
        write_pgm(result.raster, fs::path(out) / (stem + ".pgm"));

        nlohmann::json sidecar;
        sidecar["class_id"] = result.class_id;
        sidecar["seed"] = sample_seed;
        sidecar["consistency"] = result.consistency;
        sidecar["leaf_count"] = result.leaf_trace.size();
        sidecar["tokens_per_leaf"] = result.leaf_trace.empty() ? 0 : result.leaf_trace.front().tokens.size();
        std::ofstream side_out(fs::path(out) / (stem + ".json"), std::ios::binary);
        side_out << sidecar.dump(2) << "\n";
    }
    std::cout << "generated " << n << " samples of class " << class_id << "\n";
}

void cmd_classify(const std::string& in, const std::string& codebook_path, const std::string& model_path,
                  int topk, const std::string& report_path) {
    const Codebook cb = read_codebook(codebook_path);
    const CountModel model = CountModel::load(model_path, cb);
    const auto candidates = model.observed_classes();
    if (candidates.empty()) throw ConfigError("model has no trained classes");

    const auto items = load_sdf_dataset(in);
    if (items.empty()) throw IoError("no .sdf items found in " + in);
    const auto classes = read_labels(in);

    std::vector<std::vector<ClassScore>> results(items.size());
    const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(items.size()));
    std::atomic<std::size_t> next{0};
    auto work = [&]() {
        for (std::size_t i = next.fetch_add(1); i < items.size(); i = next.fetch_add(1))
            results[i] = classify_sketch(items[i].sdf, model, cb, candidates);
    };
    std::vector<std::thread> threads;
    for (unsigned t = 1; t < workers; ++t) threads.emplace_back(work);
    work();
    for (auto& t : threads) t.join();

    std::vector<std::vector<int>> rankings;
    std::vector<int> labels;
    nlohmann::json report_items = nlohmann::json::array();
    for (std::size_t i = 0; i < items.size(); ++i) {
        std::vector<int> ranking;
        std::vector<double> scores;
        for (const auto& s : results[i]) {
            ranking.push_back(s.class_id);
            scores.push_back(s.log_likelihood);
        }
        rankings.push_back(ranking);
        labels.push_back(items[i].class_id);
        nlohmann::json entry;
        entry["id"] = items[i].name;
        entry["true"] = items[i].class_id;
        entry["ranking"] = ranking;
        entry["scores"] = scores;
        report_items.push_back(entry);
    }

    const std::vector<int> ks{1, std::max(1, topk)};
    const EvalReport report = topk_accuracy(rankings, labels, ks);

    nlohmann::json doc;
    doc["classes"] = classes;
    doc["n"] = report.n;
    doc["top1"] = report.top1;
    doc["topk"] = {{std::to_string(std::max(1, topk)), report.topk.at(std::max(1, topk))}};
    doc["items"] = report_items;
    std::ofstream out(report_path, std::ios::binary);
    if (!out) throw IoError("cannot write report: " + report_path);
    out << doc.dump(2) << "\n";

    std::cout << "top-1 " << report.top1 << ", top-" << std::max(1, topk) << " "
              << report.topk.at(std::max(1, topk)) << " over " << report.n << " items\n";
}

void cmd_synth(const std::string& classes_csv, int side, int per_class, std::uint64_t seed,
               const std::string& out) {
    SyntheticSpec spec;
    spec.classes.clear();
    std::vector<std::string> names;
    std::stringstream ss(classes_csv);
    std::string name;
    while (std::getline(ss, name, ',')) {
        if (name.empty()) continue;
        names.push_back(name);
        spec.classes.push_back(shape_kind_from_name(name));
    }
    spec.side = side;
    spec.per_class = per_class;
    spec.seed = seed;

    const auto items = build_synthetic_corpus(spec);
    fs::create_directories(out);
    write_labels(out, names);
    std::vector<int> per_class_counter(names.size(), 0);
    for (const auto& item : items) {
        const fs::path class_dir = fs::path(out) / names[static_cast<std::size_t>(item.class_id)];
        fs::create_directories(class_dir);
        write_pgm(item.raster,
                  class_dir / (item_name(per_class_counter[static_cast<std::size_t>(item.class_id)]++) + ".pgm"));
    }
    std::cout << "wrote " << items.size() << " synthetic rasters\n";
}

void cmd_eval(const std::string& pred_path, const std::string& labels_path, const std::string& ks_csv) {
    std::ifstream pred_in(pred_path);
    if (!pred_in) throw IoError("cannot open: " + pred_path);
    nlohmann::json pred;
    pred_in >> pred;
    if (!pred.contains("items")) throw IoError("prediction report has no items");

    std::vector<std::vector<int>> rankings;
    for (const auto& item : pred["items"]) rankings.push_back(item["ranking"].get<std::vector<int>>());

    std::vector<int> labels;
    std::ifstream labels_in(labels_path);
    if (!labels_in) throw IoError("cannot open: " + labels_path);
    int value;
    while (labels_in >> value) labels.push_back(value);

    std::vector<int> ks;
    std::stringstream ss(ks_csv);
    std::string tok;
    while (std::getline(ss, tok, ',')) if (!tok.empty()) ks.push_back(std::stoi(tok));
    if (ks.empty()) ks = {1, 3};

    const EvalReport report = topk_accuracy(rankings, labels, ks);
    nlohmann::json doc;
    doc["n"] = report.n;
    doc["top1"] = report.top1;
    for (const auto& [k, v] : report.topk) doc["topk"][std::to_string(k)] = v;
    doc["confusion"] = report.confusion;
    std::cout << doc.dump(2) << "\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"quadsketch: quadtree multi-scale sketch refinement and recognition"};
    app.require_subcommand(1);

    std::string in, out, codebook_path, model_path, pool_dir, report_path, pred_path, labels_path;
    std::string classes_csv = "circle,square,triangle", ks_csv = "1,3";
    int side = 128, thickness = 2, leaf = 32, class_id = 0, n = 1, per_class = 200, topk = 3;
    double epsilon = 2.0, tau_max = 16.0, alpha = 0.1;
    std::size_t max_len = 321;
    std::uint32_t q = 512, grid = 4;
    std::uint64_t seed = 0;

    auto* ingest = app.add_subcommand("ingest", "parse NDJSON sketches, simplify, normalize");
    ingest->add_option("--in", in)->required();
    ingest->add_option("--out", out)->required();
    ingest->add_option("--side", side);
    ingest->add_option("--epsilon", epsilon);
    ingest->add_option("--max-len", max_len);

    auto* sdf_cmd = app.add_subcommand("sdf", "rasterize and convert to signed distance fields");
    sdf_cmd->add_option("--in", in)->required();
    sdf_cmd->add_option("--out", out)->required();
    sdf_cmd->add_option("--tau-max", tau_max);
    sdf_cmd->add_option("--thickness", thickness);

    auto* fit = app.add_subcommand("fit-codebook", "learn the tile-patch codebook");
    fit->add_option("--in", in)->required();
    fit->add_option("--q", q);
    fit->add_option("--grid", grid);
    fit->add_option("--leaf", leaf);
    fit->add_option("--seed", seed);
    fit->add_option("--out", out)->required();

    auto* train = app.add_subcommand("train", "train the count model on refinement examples");
    train->add_option("--in", in)->required();
    train->add_option("--codebook", codebook_path)->required();
    train->add_option("--alpha", alpha);
    train->add_option("--seed", seed);
    train->add_option("--out", out)->required();

    auto* pretrain = app.add_subcommand("pretrain-mask", "train on masked-leaf completion examples");
    pretrain->add_option("--in", in)->required();
    pretrain->add_option("--codebook", codebook_path)->required();
    pretrain->add_option("--out", out)->required();

    auto* generate = app.add_subcommand("generate", "sample sketches for a class");
    generate->add_option("--class", class_id)->required();
    generate->add_option("--n", n)->required();
    generate->add_option("--codebook", codebook_path)->required();
    generate->add_option("--model", model_path)->required();
    generate->add_option("--pool", pool_dir)->required();
    generate->add_option("--seed", seed);
    generate->add_option("--out", out)->required();

    auto* classify = app.add_subcommand("classify", "rank classes per item by leaf-vote likelihood");
    classify->add_option("--in", in)->required();
    classify->add_option("--codebook", codebook_path)->required();
    classify->add_option("--model", model_path)->required();
    classify->add_option("--topk", topk);
    classify->add_option("--report", report_path)->required();

    auto* synth = app.add_subcommand("synth", "generate the synthetic shape corpus");
    synth->add_option("--classes", classes_csv);
    synth->add_option("--side", side);
    synth->add_option("--per-class", per_class);
    synth->add_option("--seed", seed);
    synth->add_option("--out", out)->required();

    auto* eval = app.add_subcommand("eval", "score a prediction report against labels");
    eval->add_option("--pred", pred_path)->required();
    eval->add_option("--labels", labels_path)->required();
    eval->add_option("--k", ks_csv);

    CLI11_PARSE(app, argc, argv);

    try {
        if (app.got_subcommand(ingest)) cmd_ingest(in, out, side, epsilon, max_len);
        else if (app.got_subcommand(sdf_cmd)) cmd_sdf(in, out, tau_max, thickness);
        else if (app.got_subcommand(fit)) cmd_fit_codebook(in, q, grid, leaf, seed, out);
        else if (app.got_subcommand(train)) cmd_train(in, codebook_path, alpha, seed, out, false);
        else if (app.got_subcommand(pretrain)) cmd_train(in, codebook_path, 0.1, 0, out, true);
        else if (app.got_subcommand(generate)) cmd_generate(class_id, n, codebook_path, model_path, pool_dir, seed, out);
        else if (app.got_subcommand(classify)) cmd_classify(in, codebook_path, model_path, topk, report_path);
        else if (app.got_subcommand(synth)) cmd_synth(classes_csv, side, per_class, seed, out);
        else if (app.got_subcommand(eval)) cmd_eval(pred_path, labels_path, ks_csv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
