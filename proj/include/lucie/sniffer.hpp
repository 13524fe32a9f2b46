#pragma once

#include <array>
#include <charconv>
#include <compare>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lucie/detail/text.hpp"
#include "lucie/error.hpp"
#include "lucie/model.hpp"

namespace lucie {

/// Quick test on a file head (first 8 KiB or less): any NUL byte, or more
/// than 20% of bytes outside the printable-ASCII / UTF-8 continuation
/// ranges, marks the file as binary.
inline bool is_binary(std::string_view head) {
    if (head.empty()) return false;
    std::size_t suspicious = 0;
    for (unsigned char b : head) {
        if (b == 0x00) return true;
        bool allowed = b == '\t' || b == '\n' || b == '\r' || (b >= 0x20 && b <= 0x7E) ||
                       (b >= 0x80 && b <= 0xBF);
        if (!allowed) ++suspicious;
    }
    return static_cast<double>(suspicious) / static_cast<double>(head.size()) > 0.20;
}

/// Lossy UTF-8 decode. Returns nothing when more than 20% of the decoded
/// characters are replacements, i.e. the bytes were not really text.
inline std::optional<std::string> decode_text(std::string_view bytes) {
    detail::DecodeStats decoded = detail::utf8_lossy_decode(bytes);
    if (decoded.chars > 0 &&
        static_cast<double>(decoded.replacements) / static_cast<double>(decoded.chars) > 0.20)
        return std::nullopt;
    return std::move(decoded.text);
}

/// Splits text into rows and cells without any shape requirement. Rows end
/// at \n or \r\n; a cell wrapped in double quotes may contain the delimiter;
/// unquoted cells are whitespace-trimmed; one trailing empty line is
/// dropped.
inline RaggedTable read_ragged_delimited(std::string_view text, Delimiter delimiter) {
    const char delim = delimiter_char(delimiter);
    RaggedTable table;
    table.delimiter = delimiter;

    std::size_t line_start = 0;
    while (line_start <= text.size()) {
        if (line_start == text.size()) {
            if (!text.empty()) break; // trailing newline: no extra empty row
            // empty input: zero rows
            break;
        }
        std::size_t line_end = text.find('\n', line_start);
        bool last_line = line_end == std::string_view::npos;
        std::string_view line = text.substr(
            line_start, (last_line ? text.size() : line_end) - line_start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

        std::vector<std::string> cells;
        std::size_t cell_start = 0;
        bool in_quotes = false;
        for (std::size_t i = 0; i <= line.size(); ++i) {
            if (i < line.size() && line[i] == '"') in_quotes = !in_quotes;
            if (i == line.size() || (line[i] == delim && !in_quotes)) {
                std::string_view raw = detail::trim(line.substr(cell_start, i - cell_start));
                if (raw.size() >= 2 && raw.front() == '"' && raw.back() == '"')
                    cells.emplace_back(raw.substr(1, raw.size() - 2));
                else
                    cells.emplace_back(raw);
                cell_start = i + 1;
            }
        }
        table.rows.push_back(std::move(cells));
        if (last_line) break;
        line_start = line_end + 1;
    }
    return table;
}

/// Counts missing cells against a rectangle as wide as the widest row:
/// cells absent from short rows are missing, so are empty / "?" / "na" /
/// "nan" / "null" cells. n_cols is the modal row width, ties resolved to
/// the larger width.
inline CandidateScore score_table(const RaggedTable& t) {
    if (t.rows.empty()) throw EmptyInput("cannot score a table with no rows");

    std::size_t max_width = 0;
    for (const auto& row : t.rows) max_width = std::max(max_width, row.size());

    std::size_t missing = 0;
    for (const auto& row : t.rows) {
        for (const auto& cell : row)
            if (is_missing_cell(cell)) ++missing;
        missing += max_width - row.size();
    }

    // modal width, preferring the larger width on a count tie
    std::vector<std::size_t> width_counts(max_width + 1, 0);
    for (const auto& row : t.rows) ++width_counts[row.size()];
    std::size_t modal_width = 0, modal_count = 0;
    for (std::size_t w = 0; w <= max_width; ++w) {
        if (width_counts[w] >= modal_count && width_counts[w] > 0) {
            modal_width = w;
            modal_count = width_counts[w];
        }
    }

    CandidateScore s;
    s.n_rows = t.rows.size();
    s.n_cols = modal_width;
    s.regularity = static_cast<double>(modal_count) / static_cast<double>(t.rows.size());
    s.nan_fraction = max_width == 0 ? 0.0
                                    : static_cast<double>(missing) /
                                          static_cast<double>(t.rows.size() * max_width);
    return s;
}

/// Candidate order: lower nan_fraction, then higher regularity, then more
/// columns, then more rows. `less` means `a` is the better candidate;
/// `equal` is a genuine tie.
inline std::strong_ordering compare_scores(const CandidateScore& a, const CandidateScore& b) {
    if (a.nan_fraction != b.nan_fraction)
        return a.nan_fraction < b.nan_fraction ? std::strong_ordering::less
                                               : std::strong_ordering::greater;
    if (a.regularity != b.regularity)
        return a.regularity > b.regularity ? std::strong_ordering::less
                                           : std::strong_ordering::greater;
    if (a.n_cols != b.n_cols)
        return a.n_cols > b.n_cols ? std::strong_ordering::less : std::strong_ordering::greater;
    if (a.n_rows != b.n_rows)
        return a.n_rows > b.n_rows ? std::strong_ordering::less : std::strong_ordering::greater;
    return std::strong_ordering::equal;
}

/// A perfect candidate needs multiple columns, no missing data and a fully
/// regular shape, with at least two rows so a lone header line does not
/// qualify.
inline bool is_perfect(const CandidateScore& s) {
    return s.nan_fraction == 0.0 && s.regularity == 1.0 && s.n_cols >= 2 && s.n_rows >= 2;
}

struct SniffResult {
    RaggedTable table;
    CandidateScore score;
};

/// Tries comma, semicolon and tab, drops parses without multiple columns,
/// and keeps the best-scoring survivor. Ties between delimiters resolve in
/// that fixed order.
inline std::optional<SniffResult> sniff_text(std::string_view text, std::string_view path) {
    static constexpr std::array<Delimiter, 3> kDelimiters = {Delimiter::comma, Delimiter::semicolon,
                                                             Delimiter::tab};
    std::optional<SniffResult> best;
    for (Delimiter d : kDelimiters) {
        RaggedTable table = read_ragged_delimited(text, d);
        if (table.rows.empty()) continue;
        CandidateScore score = score_table(table);
        if (score.n_cols < 2) continue;
        if (!best || compare_scores(score, best->score) == std::strong_ordering::less) {
            table.source_path = std::string(path);
            best = SniffResult{std::move(table), score};
        }
    }
    return best;
}

namespace detail {

inline bool parses_as_number(std::string_view cell) {
    std::string_view t = trim(cell);
    if (t.empty()) return false;
    double value = 0.0;
    auto [end, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    return ec == std::errc() && end == t.data() + t.size();
}

} // namespace detail

/// Header heuristic: the first row is a header iff none of its cells looks
/// numeric while some later cell does.
inline bool detect_header(const RaggedTable& t) {
    if (t.rows.size() < 2) return false;
    for (const auto& cell : t.rows.front())
        if (detail::parses_as_number(cell)) return false;
    for (std::size_t r = 1; r < t.rows.size(); ++r)
        for (const auto& cell : t.rows[r])
            if (detail::parses_as_number(cell)) return true;
    return false;
}

/// Pads rows to a rectangle and attaches a header: the first row when the
/// header heuristic fires, otherwise synthetic names col_0..col_{k-1}.
inline Table finalize_table(const RaggedTable& t) {
    if (t.rows.empty()) throw EmptyInput("cannot finalize a table with no rows");

    std::size_t max_width = 0;
    for (const auto& row : t.rows) max_width = std::max(max_width, row.size());

    Table table;
    table.delimiter = t.delimiter;
    table.origin_path = t.source_path;

    std::size_t body_start = 0;
    if (detect_header(t)) {
        auto header = t.rows.front();
        header.resize(max_width);
        table.header = std::move(header);
        body_start = 1;
    } else {
        std::vector<std::string> header;
        header.reserve(max_width);
        for (std::size_t i = 0; i < max_width; ++i) header.push_back("col_" + std::to_string(i));
        table.header = std::move(header);
    }

    table.rows.reserve(t.rows.size() - body_start);
    for (std::size_t r = body_start; r < t.rows.size(); ++r) {
        auto row = t.rows[r];
        row.resize(max_width);
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace lucie
