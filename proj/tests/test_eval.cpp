#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "quadsketch/eval.hpp"
#include "quadsketch/synthetic.hpp"

using namespace quadsketch;

TEST_CASE("all rank-1 hits give top1 = 1") {
    const std::vector<std::vector<int>> rankings{{0, 1, 2}, {1, 0, 2}, {2, 1, 0}};
    const std::vector<int> labels{0, 1, 2};
    const std::vector<int> ks{1, 3};
    const EvalReport report = topk_accuracy(rankings, labels, ks);
    CHECK(report.top1 == 1.0);
    CHECK(report.topk.at(1) == 1.0);
    CHECK(report.topk.at(3) == 1.0);
    CHECK(report.n == 3);
}

TEST_CASE("labels stuck at rank 2 split top1 and top3") {
    const std::vector<std::vector<int>> rankings{{1, 0, 2}, {2, 1, 0}, {0, 2, 1}};
    const std::vector<int> labels{0, 1, 2};
    const std::vector<int> ks{1, 2, 3};
    const EvalReport report = topk_accuracy(rankings, labels, ks);
    CHECK(report.top1 == 0.0);
    CHECK(report.topk.at(2) == 1.0);
    CHECK(report.topk.at(3) == 1.0);
}

TEST_CASE("topk is non-decreasing in k and confusion sums to n") {
    const std::vector<std::vector<int>> rankings{{0, 1, 2}, {2, 0, 1}, {1, 2, 0}, {2, 1, 0}};
    const std::vector<int> labels{0, 1, 0, 2};
    const std::vector<int> ks{1, 2, 3};
    const EvalReport report = topk_accuracy(rankings, labels, ks);
    double prev = 0.0;
    for (int k : ks) {
        CHECK(report.topk.at(k) >= prev);
        prev = report.topk.at(k);
    }
    std::size_t total = 0;
    for (const auto& row : report.confusion)
        for (auto c : row) total += c;
    CHECK(total == report.n);
}

TEST_CASE("topk_accuracy rejects bad input") {
    const std::vector<std::vector<int>> none;
    const std::vector<int> empty_labels;
    const std::vector<int> ks{1};
    CHECK_THROWS_AS(topk_accuracy(none, empty_labels, ks), std::invalid_argument);

    const std::vector<std::vector<int>> one{{0}};
    const std::vector<int> labels{0};
    const std::vector<int> bad_ks{0};
    CHECK_THROWS_AS(topk_accuracy(one, labels, bad_ks), std::invalid_argument);
}

TEST_CASE("synthetic corpus is empty for per_class = 0") {
    SyntheticSpec spec;
    spec.per_class = 0;
    CHECK(build_synthetic_corpus(spec).empty());
}

TEST_CASE("synthetic corpus is deterministic per seed") {
    SyntheticSpec spec;
    spec.per_class = 5;
    spec.seed = 11;
    const auto a = build_synthetic_corpus(spec);
    const auto b = build_synthetic_corpus(spec);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].raster == b[i].raster);
        CHECK(a[i].class_id == b[i].class_id);
    }
    spec.seed = 12;
    const auto c = build_synthetic_corpus(spec);
    bool all_equal = true;
    for (std::size_t i = 0; i < a.size(); ++i) all_equal = all_equal && a[i].raster == c[i].raster;
    CHECK_FALSE(all_equal);
}

TEST_CASE("every synthetic raster is valid and non-empty") {
    SyntheticSpec spec;
    spec.classes = {ShapeKind::Circle, ShapeKind::Square, ShapeKind::Triangle, ShapeKind::Cross};
    spec.per_class = 250; // 1000 rasters total
    spec.seed = 3;
    const auto items = build_synthetic_corpus(spec);
    REQUIRE(items.size() == 1000);
    for (const auto& item : items) {
        CHECK(item.raster.width == spec.side);
        CHECK(item.raster.height == spec.side);
        CHECK((spec.side & (spec.side - 1)) == 0);
        int count = 0;
        for (auto c : item.raster.cells) count += c;
        CHECK(count >= 1);
    }
}

TEST_CASE("synthetic spec validation") {
    SyntheticSpec spec;
    spec.side = 60;
    CHECK_THROWS_AS(build_synthetic_corpus(spec), std::invalid_argument);
    spec.side = 64;
    spec.classes = {ShapeKind::Circle};
    CHECK_THROWS_AS(build_synthetic_corpus(spec), std::invalid_argument);
    CHECK_THROWS_AS(shape_kind_from_name("hexagon"), std::invalid_argument);
}
