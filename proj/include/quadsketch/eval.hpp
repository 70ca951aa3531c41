#pragma once

#include <map>
#include <span>
#include <vector>

namespace quadsketch {

struct EvalReport {
    double top1 = 0.0;
    std::map<int, double> topk; // k -> fraction
    std::size_t n = 0;
    std::vector<std::vector<std::size_t>> confusion; // [true][predicted top-1]
};

// Fraction of items whose true label appears within the first k ranks, for
// every requested k. Rankings are per-item class lists, best first.
EvalReport topk_accuracy(std::span<const std::vector<int>> rankings, std::span<const int> labels,
                         std::span<const int> ks);

} // namespace quadsketch
