#include "quadsketch/eval.hpp"

#include <algorithm>
#include <stdexcept>

namespace quadsketch {

EvalReport topk_accuracy(std::span<const std::vector<int>> rankings, std::span<const int> labels,
                         std::span<const int> ks) {
    if (rankings.empty()) throw std::invalid_argument("topk_accuracy: no rankings");
    if (rankings.size() != labels.size())
        throw std::invalid_argument("topk_accuracy: rankings/labels size mismatch");
    for (int k : ks)
        if (k < 1) throw std::invalid_argument("topk_accuracy: k must be at least 1");

    int max_class = 0;
    for (int label : labels) max_class = std::max(max_class, label);
    for (const auto& ranking : rankings)
        for (int c : ranking) max_class = std::max(max_class, c);

    EvalReport report;
    report.n = rankings.size();
    report.confusion.assign(static_cast<std::size_t>(max_class) + 1,
                            std::vector<std::size_t>(static_cast<std::size_t>(max_class) + 1, 0));

    std::map<int, std::size_t> hits;
    for (int k : ks) hits[k] = 0;
    std::size_t top1_hits = 0;

    for (std::size_t i = 0; i < rankings.size(); ++i) {
        const auto& ranking = rankings[i];
        if (ranking.empty()) throw std::invalid_argument("topk_accuracy: empty ranking");
        const int truth = labels[i];
        report.confusion[static_cast<std::size_t>(truth)][static_cast<std::size_t>(ranking[0])] += 1;
        if (ranking[0] == truth) ++top1_hits;
        for (int k : ks) {
            const auto end = ranking.begin() + std::min<std::size_t>(ranking.size(), static_cast<std::size_t>(k));
            if (std::find(ranking.begin(), end, truth) != end) ++hits[k];
        }
    }

    report.top1 = static_cast<double>(top1_hits) / static_cast<double>(report.n);
    for (const auto& [k, h] : hits)
        report.topk[k] = static_cast<double>(h) / static_cast<double>(report.n);
    return report;
}

} // namespace quadsketch
