#pragma once

#include <algorithm>
#include <cstddef>
#include <string_view>
#include <vector>

namespace lucie {

/// Levenshtein distance with unit-cost insert/delete/substitute,
/// computed over bytes. Two-row dynamic program, O(|a|*|b|) time,
/// O(min(|a|,|b|)) space.
inline std::size_t edit_distance(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) std::swap(a, b);
    if (b.empty()) return a.size();

    std::vector<std::size_t> row(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;

    for (std::size_t i = 1; i <= a.size(); ++i) {
        std::size_t diag = row[0];
        row[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::size_t prev = row[j];
            std::size_t sub = diag + (a[i - 1] == b[j - 1] ? 0 : 1);
            row[j] = std::min({row[j] + 1, row[j - 1] + 1, sub});
            diag = prev;
        }
    }
    return row[b.size()];
}

} // namespace lucie
