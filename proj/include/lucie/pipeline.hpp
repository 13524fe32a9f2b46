#pragma once

#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lucie/archive.hpp"
#include "lucie/error.hpp"
#include "lucie/model.hpp"
#include "lucie/sniffer.hpp"

namespace lucie {

/// Optional hook for spreadsheet decoding. Without one, spreadsheet files
/// are skipped with a warning.
using XlsxDecoder = std::function<std::optional<Table>(const std::string& bytes,
                                                       const std::string& path)>;

struct PipelineConfig {
    ArchiveBudget budget;
    int min_rows = 10;
    int min_cols = 2;
    std::set<std::string> tabular_extensions = {".data", ".csv", ".tsv", ".xlsx"};
    XlsxDecoder xlsx_decoder;
};

namespace detail {

constexpr std::uint64_t kMaxSniffBytes = 64ull << 20;

inline void warn(std::vector<std::string>* warnings, std::string message) {
    if (warnings) warnings->push_back(std::move(message));
}

/// Reads a file for text analysis, enforcing the per-file size guard and
/// the binary/undecodable filters. Returns nothing (with a warning) when
/// the file is not usable text.
inline std::optional<std::string> read_text_guarded(const FileNode& node, const std::string& path,
                                                    std::vector<std::string>* warnings) {
    if (node.size > kMaxSniffBytes) {
        warn(warnings, "skipped " + path + ": larger than the 64 MiB sniff limit");
        return std::nullopt;
    }
    std::string bytes;
    try {
        bytes = node.content.read();
    } catch (const std::exception& e) {
        warn(warnings, "cannot read " + path + ": " + e.what());
        return std::nullopt;
    }
    if (is_binary(std::string_view(bytes).substr(0, 8192))) {
        warn(warnings, "skipped " + path + ": binary content");
        return std::nullopt;
    }
    auto text = decode_text(bytes);
    if (!text) warn(warnings, "skipped " + path + ": not decodable as text");
    return text;
}

/// Inserts a table under its file name, falling back to the full path when
/// another file of the same name was already collected.
inline void insert_table(std::map<std::string, Table>& tables, const std::string& path,
                         Table table) {
    std::string key = std::string(basename_of(path));
    if (tables.count(key)) key = path;
    table.name = key;
    tables.emplace(std::move(key), std::move(table));
}

} // namespace detail

/// Step 3: read every file whose extension marks it as tabular. Extensions
/// with a canonical delimiter are parsed with it; others are sniffed, with
/// a plain comma parse as the last resort ("read them all").
inline std::map<std::string, Table> collect_tabular_files(const FileTree& tree,
                                                          const PipelineConfig& cfg,
                                                          std::vector<std::string>* warnings = nullptr) {
    std::map<std::string, Table> tables;
    for_each_file(tree, [&](const std::string& path, const FileNode& node) {
        std::string ext = detail::extension_of(node.name);
        if (!cfg.tabular_extensions.count(ext)) return;

        if (ext == ".xlsx") {
            if (!cfg.xlsx_decoder) {
                detail::warn(warnings, "skipped " + path + ": no spreadsheet decoder configured");
                return;
            }
            std::string bytes;
            try {
                bytes = node.content.read();
            } catch (const std::exception& e) {
                detail::warn(warnings, "cannot read " + path + ": " + e.what());
                return;
            }
            auto table = cfg.xlsx_decoder(bytes, path);
            if (!table) {
                detail::warn(warnings, "skipped " + path + ": spreadsheet decode failed");
                return;
            }
            table->origin_path = path;
            detail::insert_table(tables, path, std::move(*table));
            return;
        }

        auto text = detail::read_text_guarded(node, path, warnings);
        if (!text) return;

        RaggedTable parsed;
        if (ext == ".csv") {
            parsed = read_ragged_delimited(*text, Delimiter::comma);
        } else if (ext == ".tsv") {
            parsed = read_ragged_delimited(*text, Delimiter::tab);
        } else if (auto sniffed = sniff_text(*text, path)) {
            parsed = std::move(sniffed->table);
        } else {
            parsed = read_ragged_delimited(*text, Delimiter::comma);
        }
        if (parsed.rows.empty()) {
            detail::warn(warnings, "skipped " + path + ": no rows");
            return;
        }
        parsed.source_path = path;
        Table table = finalize_table(parsed);
        table.score = score_table(parsed);
        detail::insert_table(tables, path, std::move(table));
    });
    return tables;
}

/// Step 5: sniff every .txt file. All perfect candidates win outright;
/// otherwise every candidate tied for the best score is kept.
inline std::map<std::string, Table> import_txt_candidates(const FileTree& tree,
                                                          std::vector<std::string>* warnings = nullptr,
                                                          std::optional<CandidateScore>* best_score_out = nullptr) {
    struct Candidate {
        std::string path;
        SniffResult sniffed;
    };
    std::vector<Candidate> candidates;
    for_each_file(tree, [&](const std::string& path, const FileNode& node) {
        if (detail::extension_of(node.name) != ".txt") return;
        auto text = detail::read_text_guarded(node, path, warnings);
        if (!text) return;
        if (auto sniffed = sniff_text(*text, path))
            candidates.push_back({path, std::move(*sniffed)});
    });

    std::map<std::string, Table> tables;
    if (candidates.empty()) {
        if (best_score_out) best_score_out->reset();
        return tables;
    }

    const CandidateScore* best = &candidates.front().sniffed.score;
    for (const auto& c : candidates)
        if (compare_scores(c.sniffed.score, *best) == std::strong_ordering::less)
            best = &c.sniffed.score;
    if (best_score_out) *best_score_out = *best;

    bool any_perfect = false;
    for (const auto& c : candidates) any_perfect |= is_perfect(c.sniffed.score);

    for (auto& c : candidates) {
        bool keep = any_perfect ? is_perfect(c.sniffed.score)
                                : compare_scores(c.sniffed.score, *best) == std::strong_ordering::equal;
        if (!keep) continue;
        Table table = finalize_table(c.sniffed.table);
        table.score = c.sniffed.score;
        detail::insert_table(tables, c.path, std::move(table));
    }
    return tables;
}

/// Step 6: sniff extension-free files. A single candidate is accepted only
/// when its NaN fraction strictly beats every other extension-free
/// candidate and the best .txt candidate seen so far.
inline std::optional<std::pair<std::string, Table>> import_extensionless(
    const FileTree& tree, std::optional<CandidateScore> best_txt,
    std::vector<std::string>* warnings = nullptr) {
    struct Candidate {
        std::string path;
        SniffResult sniffed;
    };
    std::vector<Candidate> candidates;
    for_each_file(tree, [&](const std::string& path, const FileNode& node) {
        if (!detail::extension_of(node.name).empty()) return;
        auto text = detail::read_text_guarded(node, path, warnings);
        if (!text) return;
        if (auto sniffed = sniff_text(*text, path))
            candidates.push_back({path, std::move(*sniffed)});
    });
    if (candidates.empty()) return std::nullopt;

    std::size_t best_idx = 0;
    for (std::size_t i = 1; i < candidates.size(); ++i)
        if (candidates[i].sniffed.score.nan_fraction <
            candidates[best_idx].sniffed.score.nan_fraction)
            best_idx = i;

    double best_nan = candidates[best_idx].sniffed.score.nan_fraction;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        if (i != best_idx && candidates[i].sniffed.score.nan_fraction <= best_nan)
            return std::nullopt; // no unique strict winner
    if (best_txt && best_nan >= best_txt->nan_fraction) return std::nullopt;

    auto& winner = candidates[best_idx];
    Table table = finalize_table(winner.sniffed.table);
    table.score = winner.sniffed.score;
    table.name = std::string(detail::basename_of(winner.path));
    return std::make_pair(winner.path, std::move(table));
}

/// Step 7 kernel: a directory with at least two subdirectories of plain
/// files becomes a table, one column per subdirectory plus a leading
/// column of entry file names. Cell values are the files' text contents.
inline std::optional<Table> coerce_directory_to_table(const FileNode& dir) {
    if (!dir.is_dir()) return std::nullopt;

    std::vector<const FileNode*> columns;
    for (const auto& child : dir.children) {
        if (!child.is_dir()) continue; // loose files next to the column dirs are tolerated
        for (const auto& grandchild : child.children)
            if (grandchild.is_dir()) return std::nullopt;
        columns.push_back(&child);
    }
    if (columns.size() < 2) return std::nullopt;

    std::size_t n_entries = 0;
    std::vector<std::vector<const FileNode*>> column_files(columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        for (const auto& f : columns[c]->children) column_files[c].push_back(&f);
        std::sort(column_files[c].begin(), column_files[c].end(),
                  [](const FileNode* a, const FileNode* b) { return a->name < b->name; });
        n_entries = std::max(n_entries, column_files[c].size());
    }
    if (n_entries == 0) return std::nullopt;

    Table table;
    std::vector<std::string> header{"entry"};
    for (const auto* col : columns) header.push_back(col->name);
    table.header = std::move(header);

    for (std::size_t i = 0; i < n_entries; ++i) {
        std::vector<std::string> row(columns.size() + 1);
        for (std::size_t c = 0; c < columns.size(); ++c) {
            if (i >= column_files[c].size()) continue;
            const FileNode* f = column_files[c][i];
            if (row[0].empty()) row[0] = f->name;
            std::string content;
            try {
                content = f->content.read();
            } catch (const std::exception&) {
                continue; // unreadable entry stays an empty cell
            }
            row[c + 1] = std::string(detail::trim(detail::utf8_lossy_decode(content).text));
        }
        table.rows.push_back(std::move(row));
    }
    return table;
}

/// Step 7 fallback: the tree as a nested document. Directories become
/// objects, text files their decoded content, binary files a base64 marker
/// object.
inline StructureDoc tree_to_structure(const FileTree& tree) {
    struct Builder {
        static StructureDoc node_doc(const FileNode& node) {
            if (node.is_dir()) {
                StructureDoc doc = StructureDoc::object();
                for (const auto& child : node.children) doc[child.name] = node_doc(child);
                return doc;
            }
            std::string bytes;
            try {
                bytes = node.content.read();
            } catch (const std::exception&) {
                return nullptr;
            }
            if (!is_binary(std::string_view(bytes).substr(0, 8192))) {
                if (auto text = decode_text(bytes)) return *text;
            }
            return StructureDoc{{"encoding", "base64"}, {"bytes", detail::base64_encode(bytes)}};
        }
    };
    return Builder::node_doc(tree.root);
}

namespace detail {

inline std::map<std::string, Table> prefix_tables(std::map<std::string, Table> tables,
                                                  const std::string& prefix) {
    if (prefix.empty()) return tables;
    std::map<std::string, Table> out;
    for (auto& [key, table] : tables) {
        std::string new_key = prefix + key;
        table.name = new_key;
        table.origin_path = prefix + table.origin_path;
        out.emplace(std::move(new_key), std::move(table));
    }
    return out;
}

/// Steps 3 and 4 combined, recursively: collect extension-identified tables,
/// then open nested archives in ranked order and re-enter. First success
/// wins; archive failures degrade to warnings.
inline std::map<std::string, Table> collect_with_nested(const FileTree& tree,
                                                        const PipelineConfig& cfg, int depth,
                                                        const std::string& prefix,
                                                        std::vector<std::string>* warnings) {
    auto tables = collect_tabular_files(tree, cfg, warnings);
    if (!tables.empty()) return prefix_tables(std::move(tables), prefix);

    for (const auto& path : list_nested_archives(tree)) {
        if (depth + 1 > cfg.budget.max_depth) {
            warn(warnings, "skipped nested archive " + prefix + path + ": depth limit reached");
            continue;
        }
        const FileNode* node = find_node(tree, path);
        if (!node || node->is_dir()) continue;
        FileTree inner;
        try {
            inner = extract_archive(node->content.read(), cfg.budget, node->name);
        } catch (const Error& e) {
            warn(warnings, "cannot extract nested archive " + prefix + path + ": " + e.what());
            continue;
        } catch (const std::exception& e) {
            warn(warnings, "cannot read nested archive " + prefix + path + ": " + e.what());
            continue;
        }
        auto inner_tables =
            collect_with_nested(inner, cfg, depth + 1, prefix + path + "!/", warnings);
        if (!inner_tables.empty()) return inner_tables;
    }
    return {};
}

} // namespace detail

/// Runs the import heuristics over an extracted tree, in order:
/// extension-identified tables, nested archives, .txt sniffing,
/// extension-free sniffing, directory coercion, structure fallback.
/// Always yields tables or a fallback document.
inline ImportResult import_tree(const FileTree& tree, const PipelineConfig& cfg) {
    ImportResult result;
    result.source = Source::custom;

    // Steps 3 + 4
    result.tables = detail::collect_with_nested(tree, cfg, 0, "", &result.warnings);
    if (!result.tables.empty()) return result;

    // Step 5: perfect candidates end the search
    std::optional<CandidateScore> best_txt;
    auto txt_tables = import_txt_candidates(tree, &result.warnings, &best_txt);
    if (best_txt && is_perfect(*best_txt)) {
        result.tables = std::move(txt_tables);
        return result;
    }

    // Step 6
    if (auto accepted = import_extensionless(tree, best_txt, &result.warnings)) {
        auto& [path, table] = *accepted;
        table.origin_path = path;
        std::string key = table.name;
        result.tables.emplace(std::move(key), std::move(table));
        return result;
    }
    if (!txt_tables.empty()) {
        result.tables = std::move(txt_tables);
        return result;
    }

    // Step 7: try the root, then every directory in pre-order
    struct Walker {
        static const FileNode* find_coercible(const FileNode& dir) {
            if (coerce_directory_to_table(dir)) return &dir;
            for (const auto& child : dir.children) {
                if (!child.is_dir()) continue;
                if (const FileNode* hit = find_coercible(child)) return hit;
            }
            return nullptr;
        }
    };
    if (const FileNode* dir = Walker::find_coercible(tree.root)) {
        // locate the path of the matched directory for provenance
        std::string dir_path;
        struct PathFinder {
            static bool locate(const FileNode& node, const FileNode* target, std::string& path) {
                if (&node == target) return true;
                for (const auto& child : node.children) {
                    if (!child.is_dir()) continue;
                    std::size_t mark = path.size();
                    if (!path.empty()) path += '/';
                    path += child.name;
                    if (locate(child, target, path)) return true;
                    path.resize(mark);
                }
                return false;
            }
        };
        PathFinder::locate(tree.root, dir, dir_path);
        Table table = *coerce_directory_to_table(*dir);
        std::string key = dir_path.empty() ? "directory" : dir_path;
        table.name = key;
        table.origin_path = dir_path;
        result.tables.emplace(std::move(key), std::move(table));
        return result;
    }

    result.fallback = tree_to_structure(tree);
    result.warnings.push_back("no tables found; returning the archive structure");
    return result;
}

} // namespace lucie
