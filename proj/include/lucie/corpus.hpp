#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lucie/detail/zip.hpp"
#include "lucie/model.hpp"

namespace lucie {

// Deterministic fixture archives covering the layout patterns the importer
// has to handle: plainly tabular archives, tables disguised as .txt, nested
// archives, folder-per-column trees, extension-free tables, and two
// negative patterns (binary junk, prose) that must reach the fallback.

enum class CorpusKind {
    plain_tabular,
    txt_tables,
    nested_archive,
    folder_columns,
    extensionless,
    binary_only,
    prose_decoy,
};

inline const std::array<CorpusKind, 7>& all_corpus_kinds() {
    static const std::array<CorpusKind, 7> kinds = {
        CorpusKind::plain_tabular, CorpusKind::txt_tables,  CorpusKind::nested_archive,
        CorpusKind::folder_columns, CorpusKind::extensionless, CorpusKind::binary_only,
        CorpusKind::prose_decoy,
    };
    return kinds;
}

inline const char* corpus_kind_name(CorpusKind kind) {
    switch (kind) {
        case CorpusKind::plain_tabular: return "plain_tabular";
        case CorpusKind::txt_tables: return "txt_tables";
        case CorpusKind::nested_archive: return "nested_archive";
        case CorpusKind::folder_columns: return "folder_columns";
        case CorpusKind::extensionless: return "extensionless";
        case CorpusKind::binary_only: return "binary_only";
        case CorpusKind::prose_decoy: return "prose_decoy";
    }
    return "plain_tabular";
}

inline std::optional<CorpusKind> corpus_kind_from_name(std::string_view name) {
    for (CorpusKind k : all_corpus_kinds())
        if (name == corpus_kind_name(k)) return k;
    return std::nullopt;
}

/// What the generated archive should import as. Shapes are body rows by
/// columns after finalization.
struct GroundTruth {
    CorpusKind kind = CorpusKind::plain_tabular;
    std::uint32_t seed = 0;
    std::string zip_name;
    std::map<std::string, std::pair<std::size_t, std::size_t>> expected_tables;
    std::optional<Delimiter> expected_delimiter;
    std::optional<std::vector<std::string>> expected_header;
    bool expect_fallback = false;
    std::vector<std::string> expected_paths; // entries the fallback document must contain
};

namespace detail {

inline std::uint32_t rand_below(std::mt19937& rng, std::uint32_t n) { return rng() % n; }

inline std::size_t rand_range(std::mt19937& rng, std::size_t lo, std::size_t hi) {
    return lo + rand_below(rng, static_cast<std::uint32_t>(hi - lo + 1));
}

inline const std::vector<std::string>& corpus_words() {
    static const std::vector<std::string> words = {
        "amber",  "basin",  "cedar",  "delta",   "ember",  "fjord",  "grove",  "harbor",
        "island", "juniper", "kestrel", "lagoon", "meadow", "north",  "orchid", "prairie",
        "quartz", "ridge",  "summit", "thicket", "upland", "valley", "willow", "zephyr",
    };
    return words;
}

inline std::string pick_word(std::mt19937& rng) {
    const auto& words = corpus_words();
    return words[rand_below(rng, static_cast<std::uint32_t>(words.size()))];
}

/// n distinct words; n must not exceed the word list size.
inline std::vector<std::string> pick_distinct_words(std::mt19937& rng, std::size_t n) {
    std::vector<std::string> pool = corpus_words();
    // Fisher-Yates on the prefix, driven by the fixture rng
    for (std::size_t i = 0; i < n; ++i) {
        std::size_t j = i + rand_below(rng, static_cast<std::uint32_t>(pool.size() - i));
        std::swap(pool[i], pool[j]);
    }
    pool.resize(n);
    return pool;
}

inline std::string numeric_cell(std::mt19937& rng) { return std::to_string(rand_below(rng, 1000)); }

/// Rectangular numeric table text; optional header row of word names;
/// missing_every > 0 replaces each missing_every-th body cell with "?".
inline std::string make_table_text(std::mt19937& rng, std::size_t rows, std::size_t cols,
                                   Delimiter delim, bool header, std::size_t missing_every = 0) {
    const char d = delimiter_char(delim);
    std::string out;
    if (header) {
        auto names = pick_distinct_words(rng, cols);
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) out += d;
            out += names[c];
        }
        out += '\n';
    }
    std::size_t cell_index = 0;
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            if (c) out += d;
            ++cell_index;
            if (missing_every > 0 && cell_index % missing_every == 0)
                out += '?';
            else
                out += numeric_cell(rng);
        }
        out += '\n';
    }
    return out;
}

/// Prose with no delimiter characters at all: every parse stays single
/// column and is discarded by the sniffing rule.
inline std::string make_prose_text(std::mt19937& rng) {
    std::size_t lines = rand_range(rng, 8, 20);
    std::string out;
    for (std::size_t l = 0; l < lines; ++l) {
        std::size_t words = rand_range(rng, 5, 10);
        for (std::size_t w = 0; w < words; ++w) {
            if (w) out += ' ';
            out += pick_word(rng);
        }
        out += ".\n";
    }
    return out;
}

/// Prose whose lines carry varying comma counts, so a comma parse exists
/// but is irregular and full of short rows: a candidate that always loses.
inline std::string make_imperfect_decoy_text(std::mt19937& rng) {
    std::size_t lines = rand_range(rng, 9, 15);
    std::string out;
    for (std::size_t l = 0; l < lines; ++l) {
        std::size_t commas = l % 3; // forced width variety: 1, 2 and 3 cell rows
        for (std::size_t c = 0; c <= commas; ++c) {
            if (c) out += ", ";
            out += pick_word(rng) + " " + pick_word(rng);
        }
        out += '\n';
    }
    return out;
}

inline std::string make_binary_blob(std::mt19937& rng) {
    std::size_t size = rand_range(rng, 600, 2000);
    std::string out(size, '\0');
    for (std::size_t i = 1; i < size; ++i) out[i] = static_cast<char>(rng() % 256);
    out[0] = '\0'; // a guaranteed NUL keeps the binary classification certain
    return out;
}

inline Delimiter pick_delimiter(std::mt19937& rng) {
    switch (rand_below(rng, 3)) {
        case 0: return Delimiter::comma;
        case 1: return Delimiter::semicolon;
        default: return Delimiter::tab;
    }
}

} // namespace detail

/// Builds the fixture archive for (kind, seed) in memory. Same inputs, same
/// bytes: the rng is the only source of variation and the zip writer stamps
/// a fixed timestamp.
inline std::pair<GroundTruth, std::string> generate_corpus_bytes(CorpusKind kind,
                                                                 std::uint32_t seed) {
    using namespace detail;
    std::seed_seq seq{static_cast<std::uint32_t>(kind), seed};
    std::mt19937 rng(seq);

    GroundTruth gt;
    gt.kind = kind;
    gt.seed = seed;
    gt.zip_name = std::string(corpus_kind_name(kind)) + "_" + std::to_string(seed) + ".zip";
    ZipWriter zip;

    switch (kind) {
    case CorpusKind::plain_tabular: {
        auto stems = pick_distinct_words(rng, 2);
        bool in_subdir = rand_below(rng, 2) == 0;
        std::string dir = in_subdir ? "data/" : "";
        for (std::size_t f = 0; f < 2; ++f) {
            std::size_t rows = rand_range(rng, 12, 40);
            std::size_t cols = rand_range(rng, 3, 6);
            bool header = f == 0;
            zip.add_file(dir + stems[f] + ".csv",
                         make_table_text(rng, rows, cols, Delimiter::comma, header));
            gt.expected_tables[stems[f] + ".csv"] = {rows, cols};
        }
        zip.add_file("readme.txt", make_prose_text(rng));
        gt.expected_delimiter = Delimiter::comma;
        break;
    }

    case CorpusKind::txt_tables: {
        auto stems = pick_distinct_words(rng, 3);
        Delimiter delim = pick_delimiter(rng);
        std::size_t rows = rand_range(rng, 12, 30);
        std::size_t cols = rand_range(rng, 3, 5);
        zip.add_file(stems[0] + ".txt", make_table_text(rng, rows, cols, delim, false));
        zip.add_file(stems[1] + ".txt", make_prose_text(rng));
        zip.add_file(stems[2] + ".txt", make_imperfect_decoy_text(rng));
        gt.expected_tables[stems[0] + ".txt"] = {rows, cols};
        gt.expected_delimiter = delim;
        break;
    }

    case CorpusKind::nested_archive: {
        static const std::array<const char*, 3> inner_stems = {"data", "dataset", "data_v2"};
        std::string inner_name =
            std::string(inner_stems[rand_below(rng, inner_stems.size())]) + ".zip";
        bool in_subdir = rand_below(rng, 2) == 0;
        std::string dir = in_subdir ? "archives/" : "";

        ZipWriter inner;
        auto stems = pick_distinct_words(rng, 2);
        std::size_t n_tables = rand_range(rng, 1, 2);
        for (std::size_t f = 0; f < n_tables; ++f) {
            std::size_t rows = rand_range(rng, 12, 30);
            std::size_t cols = rand_range(rng, 3, 5);
            inner.add_file(stems[f] + ".csv",
                           make_table_text(rng, rows, cols, Delimiter::comma, false));
            gt.expected_tables[dir + inner_name + "!/" + stems[f] + ".csv"] = {rows, cols};
        }

        ZipWriter decoy;
        decoy.add_file("notes.txt", make_prose_text(rng));

        zip.add_file("readme.txt", make_prose_text(rng));
        zip.add_file(dir + inner_name, inner.finish());
        zip.add_file("misc.zip", decoy.finish());
        gt.expected_delimiter = Delimiter::comma;
        break;
    }

    case CorpusKind::folder_columns: {
        auto dirs = pick_distinct_words(rng, 3);
        std::sort(dirs.begin(), dirs.end()); // tree children come back sorted anyway
        std::size_t base = rand_range(rng, 12, 20);
        std::size_t short_col = rand_below(rng, 3);
        for (std::size_t d = 0; d < dirs.size(); ++d) {
            std::size_t n = d == short_col ? base - 1 : base;
            for (std::size_t i = 0; i < n; ++i) {
                char name[32];
                std::snprintf(name, sizeof(name), "entry_%03zu.txt", i);
                zip.add_file(dirs[d] + "/" + name, pick_word(rng) + "\n");
            }
        }
        zip.add_file("readme.txt", make_prose_text(rng));
        std::vector<std::string> header{"entry"};
        for (const auto& d : dirs) header.push_back(d);
        gt.expected_header = std::move(header);
        gt.expected_tables["directory"] = {base, dirs.size() + 1};
        break;
    }

    case CorpusKind::extensionless: {
        auto stems = pick_distinct_words(rng, 2);
        Delimiter delim = pick_delimiter(rng);
        std::size_t rows = rand_range(rng, 12, 30);
        std::size_t cols = rand_range(rng, 3, 5);
        zip.add_file(stems[0], make_table_text(rng, rows, cols, delim, false));
        // decoy with injected missing markers: strictly worse nan fraction
        zip.add_file(stems[1],
                     make_table_text(rng, rand_range(rng, 12, 30), rand_range(rng, 3, 5),
                                     Delimiter::comma, false, 5));
        zip.add_file("notes.txt", make_imperfect_decoy_text(rng));
        zip.add_file("blob", make_binary_blob(rng));
        gt.expected_tables[stems[0]] = {rows, cols};
        gt.expected_delimiter = delim;
        break;
    }

    case CorpusKind::binary_only: {
        std::size_t n = rand_range(rng, 3, 5);
        for (std::size_t i = 0; i < n; ++i) {
            std::string name = "blob_" + std::to_string(i) + ".bin";
            zip.add_file(name, make_binary_blob(rng));
            gt.expected_paths.push_back(name);
        }
        gt.expect_fallback = true;
        break;
    }

    case CorpusKind::prose_decoy: {
        std::size_t n = rand_range(rng, 3, 5);
        auto stems = pick_distinct_words(rng, n);
        for (std::size_t i = 0; i < n; ++i) {
            std::string name = stems[i] + ".txt";
            zip.add_file(name, make_prose_text(rng));
            gt.expected_paths.push_back(name);
        }
        gt.expect_fallback = true;
        break;
    }
    }

    return {std::move(gt), zip.finish()};
}

/// Writes the fixture zip under out_dir and returns its ground truth.
inline GroundTruth generate_corpus(CorpusKind kind, std::uint32_t seed,
                                   const std::filesystem::path& out_dir) {
    auto [gt, bytes] = generate_corpus_bytes(kind, seed);
    std::filesystem::create_directories(out_dir);
    std::filesystem::path target = out_dir / gt.zip_name;
    std::ofstream out(target, std::ios::binary | std::ios::trunc);
    if (!out) throw PipelineFailure("cannot write " + target.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    out.close();
    if (!out) throw PipelineFailure("short write on " + target.string());
    return gt;
}

/// Compares an import outcome against ground truth. Returns human-readable
/// mismatches; empty means exact agreement.
inline std::vector<std::string> verify_against_ground_truth(const GroundTruth& gt,
                                                            const ImportResult& result) {
    std::vector<std::string> mismatches;

    if (result.fallback.has_value() != gt.expect_fallback)
        mismatches.push_back(std::string("fallback expected ") +
                             (gt.expect_fallback ? "true" : "false") + ", got " +
                             (result.fallback ? "true" : "false"));

    if (result.tables.size() != gt.expected_tables.size())
        mismatches.push_back("expected " + std::to_string(gt.expected_tables.size()) +
                             " tables, got " + std::to_string(result.tables.size()));

    for (const auto& [name, shape] : gt.expected_tables) {
        auto it = result.tables.find(name);
        if (it == result.tables.end()) {
            mismatches.push_back("missing table '" + name + "'");
            continue;
        }
        const Table& t = it->second;
        if (t.n_rows() != shape.first || t.n_cols() != shape.second)
            mismatches.push_back("table '" + name + "' is " + std::to_string(t.n_rows()) + "x" +
                                 std::to_string(t.n_cols()) + ", expected " +
                                 std::to_string(shape.first) + "x" +
                                 std::to_string(shape.second));
        if (gt.expected_delimiter && t.delimiter && *t.delimiter != *gt.expected_delimiter)
            mismatches.push_back("table '" + name + "' delimiter " +
                                 delimiter_name(*t.delimiter) + ", expected " +
                                 delimiter_name(*gt.expected_delimiter));
        if (gt.expected_header && t.header && *t.header != *gt.expected_header)
            mismatches.push_back("table '" + name + "' header differs from expectation");
    }

    if (gt.expect_fallback && result.fallback) {
        for (const auto& path : gt.expected_paths) {
            const StructureDoc* doc = &*result.fallback;
            bool found = true;
            std::size_t start = 0;
            std::string p = path;
            while (start < p.size()) {
                std::size_t end = p.find('/', start);
                if (end == std::string::npos) end = p.size();
                std::string seg = p.substr(start, end - start);
                if (!doc->is_object() || !doc->contains(seg)) {
                    found = false;
                    break;
                }
                doc = &(*doc)[seg];
                start = end + 1;
            }
            if (!found) mismatches.push_back("fallback document is missing '" + path + "'");
        }
    }
    return mismatches;
}

} // namespace lucie
