#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

#include "lucie/detail/text.hpp"
#include "lucie/error.hpp"

namespace lucie {

// ---------------------------------------------------------------------------
// Cells and delimiters
// ---------------------------------------------------------------------------

enum class Delimiter { comma, semicolon, tab };

inline char delimiter_char(Delimiter d) {
    switch (d) {
        case Delimiter::comma: return ',';
        case Delimiter::semicolon: return ';';
        case Delimiter::tab: return '\t';
    }
    return ',';
}

inline const char* delimiter_name(Delimiter d) {
    switch (d) {
        case Delimiter::comma: return "comma";
        case Delimiter::semicolon: return "semicolon";
        case Delimiter::tab: return "tab";
    }
    return "comma";
}

inline std::optional<Delimiter> delimiter_from_name(std::string_view name) {
    if (name == "comma") return Delimiter::comma;
    if (name == "semicolon") return Delimiter::semicolon;
    if (name == "tab") return Delimiter::tab;
    return std::nullopt;
}

/// A cell counts as missing when its trimmed text is empty or one of the
/// conventional not-available markers. Cells absent because a row is shorter
/// than the widest row are missing by definition (handled by the scorer).
inline bool is_missing_cell(std::string_view cell) {
    std::string_view t = detail::trim(cell);
    if (t.empty()) return true;
    return detail::iequals(t, "?") || detail::iequals(t, "na") ||
           detail::iequals(t, "nan") || detail::iequals(t, "null");
}

// ---------------------------------------------------------------------------
// Dataset reference
// ---------------------------------------------------------------------------

struct DatasetRef {
    int id = 0;
    std::string page_url;
    std::optional<std::string> download_url;
    std::optional<std::filesystem::path> cache_path;
};

/// Builds a DatasetRef, enforcing that ids are 1-based and that any download
/// URL points at a .zip archive.
inline DatasetRef make_dataset_ref(int id, std::string page_url,
                                   std::optional<std::string> download_url = std::nullopt,
                                   std::optional<std::filesystem::path> cache_path = std::nullopt) {
    if (id < 1) throw std::invalid_argument("dataset id must be >= 1");
    if (download_url && !detail::iends_with(*download_url, ".zip"))
        throw std::invalid_argument("download_url must end in .zip: " + *download_url);
    return DatasetRef{id, std::move(page_url), std::move(download_url), std::move(cache_path)};
}

// ---------------------------------------------------------------------------
// File trees
// ---------------------------------------------------------------------------

/// Lazily readable file content: either bytes held in memory or a path read
/// on demand.
class ContentHandle {
public:
    ContentHandle() = default;

    static ContentHandle from_bytes(std::string bytes) {
        ContentHandle h;
        h.store_ = std::make_shared<const std::string>(std::move(bytes));
        return h;
    }

    static ContentHandle from_file(std::filesystem::path p) {
        ContentHandle h;
        h.store_ = std::move(p);
        return h;
    }

    bool empty() const { return std::holds_alternative<std::monostate>(store_); }

    std::string read() const {
        if (auto* mem = std::get_if<std::shared_ptr<const std::string>>(&store_)) return **mem;
        if (auto* path = std::get_if<std::filesystem::path>(&store_)) {
            std::string out;
            std::error_code ec;
            auto size = std::filesystem::file_size(*path, ec);
            if (ec) throw std::runtime_error("cannot stat " + path->string() + ": " + ec.message());
            out.resize(static_cast<size_t>(size));
            std::unique_ptr<std::FILE, int (*)(std::FILE*)> f(std::fopen(path->c_str(), "rb"), &std::fclose);
            if (!f) throw std::runtime_error("cannot open " + path->string());
            if (size > 0 && std::fread(out.data(), 1, out.size(), f.get()) != out.size())
                throw std::runtime_error("short read on " + path->string());
            return out;
        }
        return {};
    }

private:
    std::variant<std::monostate, std::shared_ptr<const std::string>, std::filesystem::path> store_;
};

enum class NodeKind { directory, file };

struct FileNode {
    std::string name; // single path segment, no separators
    NodeKind kind = NodeKind::file;
    std::vector<FileNode> children; // directories only
    std::uint64_t size = 0;         // files only
    ContentHandle content;          // files only

    bool is_dir() const { return kind == NodeKind::directory; }

    const FileNode* find_child(std::string_view child_name) const {
        for (const auto& c : children)
            if (c.name == child_name) return &c;
        return nullptr;
    }
};

inline FileNode make_file_node(std::string name, std::string bytes) {
    if (name.find('/') != std::string::npos || name.find('\\') != std::string::npos)
        throw std::invalid_argument("file node name contains a path separator: " + name);
    FileNode n;
    n.name = std::move(name);
    n.kind = NodeKind::file;
    n.size = bytes.size();
    n.content = ContentHandle::from_bytes(std::move(bytes));
    return n;
}

inline FileNode make_directory_node(std::string name, std::vector<FileNode> children = {}) {
    if (name.find('/') != std::string::npos || name.find('\\') != std::string::npos)
        throw std::invalid_argument("directory node name contains a path separator: " + name);
    FileNode n;
    n.name = std::move(name);
    n.kind = NodeKind::directory;
    n.children = std::move(children);
    return n;
}

/// In-memory mirror of an extracted archive or scanned directory.
/// Immutable after construction; paths inside the tree are '/'-joined and
/// relative to the (unnamed) root.
struct FileTree {
    FileNode root = make_directory_node("");
    std::uint64_t total_bytes = 0;
};

namespace detail {

template <typename Fn>
void for_each_file_impl(const FileNode& node, std::string& prefix, Fn&& fn) {
    for (const auto& child : node.children) {
        size_t mark = prefix.size();
        if (!prefix.empty()) prefix += '/';
        prefix += child.name;
        if (child.kind == NodeKind::file) {
            fn(static_cast<const std::string&>(prefix), child);
        } else {
            for_each_file_impl(child, prefix, fn);
        }
        prefix.resize(mark);
    }
}

} // namespace detail

/// Visits every file in the tree as (path, node), in sorted path order.
template <typename Fn>
void for_each_file(const FileTree& tree, Fn&& fn) {
    std::string prefix;
    detail::for_each_file_impl(tree.root, prefix, fn);
}

inline const FileNode* find_node(const FileTree& tree, std::string_view path) {
    const FileNode* node = &tree.root;
    size_t start = 0;
    while (start < path.size()) {
        size_t end = path.find('/', start);
        if (end == std::string_view::npos) end = path.size();
        std::string_view seg = path.substr(start, end - start);
        if (!seg.empty()) {
            if (!node->is_dir()) return nullptr;
            node = node->find_child(seg);
            if (!node) return nullptr;
        }
        start = end + 1;
    }
    return node;
}

/// Assembles a FileTree from (path, content) insertions. Rejects traversal
/// attempts and entries that conflict with an existing node of the other
/// kind. Children end up sorted by name; total_bytes is the sum of file
/// sizes.
class FileTreeBuilder {
public:
    FileTreeBuilder& add_file(std::string_view path, std::string bytes) {
        std::uint64_t size = bytes.size(); // before the move below
        return add_file(path, size, ContentHandle::from_bytes(std::move(bytes)));
    }

    FileTreeBuilder& add_file(std::string_view path, std::uint64_t size, ContentHandle content) {
        auto segs = split_entry_path(path);
        if (segs.empty()) throw CorruptArchive("empty entry name: '" + std::string(path) + "'");
        FileNode* dir = &root_;
        for (size_t i = 0; i + 1 < segs.size(); ++i) dir = &child_dir(*dir, segs[i], path);
        std::string leaf = segs.back();
        for (auto& c : dir->children) {
            if (c.name == leaf) {
                if (c.is_dir()) throw CorruptArchive("entry is both file and directory: " + std::string(path));
                c.size = size;
                c.content = std::move(content);
                return *this; // duplicate entry: last one wins
            }
        }
        FileNode n;
        n.name = std::move(leaf);
        n.kind = NodeKind::file;
        n.size = size;
        n.content = std::move(content);
        dir->children.push_back(std::move(n));
        ++file_count_;
        return *this;
    }

    FileTreeBuilder& add_directory(std::string_view path) {
        auto segs = split_entry_path(path);
        FileNode* dir = &root_;
        for (const auto& seg : segs) dir = &child_dir(*dir, seg, path);
        return *this;
    }

    std::uint64_t file_count() const { return file_count_; }

    FileTree build() {
        FileTree tree;
        tree.root = std::move(root_);
        sort_rec(tree.root);
        tree.total_bytes = sum_rec(tree.root);
        root_ = make_directory_node("");
        file_count_ = 0;
        return tree;
    }

    /// Splits an archive entry path into safe segments. "." and empty
    /// segments are dropped; ".." and absolute paths are rejected.
    static std::vector<std::string> split_entry_path(std::string_view path) {
        if (!path.empty() && (path.front() == '/' || path.front() == '\\'))
            throw CorruptArchive("absolute entry path: " + std::string(path));
        std::vector<std::string> segs;
        size_t start = 0;
        while (start <= path.size()) {
            size_t end = path.find_first_of("/\\", start);
            if (end == std::string_view::npos) end = path.size();
            std::string_view seg = path.substr(start, end - start);
            if (seg == "..") throw CorruptArchive("path traversal in entry: " + std::string(path));
            if (!seg.empty() && seg != ".") segs.emplace_back(seg);
            if (end == path.size()) break;
            start = end + 1;
        }
        return segs;
    }

private:
    static FileNode& child_dir(FileNode& parent, const std::string& name, std::string_view full) {
        for (auto& c : parent.children) {
            if (c.name == name) {
                if (!c.is_dir()) throw CorruptArchive("entry is both file and directory: " + std::string(full));
                return c;
            }
        }
        parent.children.push_back(make_directory_node(name));
        return parent.children.back();
    }

    static void sort_rec(FileNode& node) {
        std::sort(node.children.begin(), node.children.end(),
                  [](const FileNode& a, const FileNode& b) { return a.name < b.name; });
        for (auto& c : node.children)
            if (c.is_dir()) sort_rec(c);
    }

    static std::uint64_t sum_rec(const FileNode& node) {
        if (!node.is_dir()) return node.size;
        std::uint64_t total = 0;
        for (const auto& c : node.children) total += sum_rec(c);
        return total;
    }

    FileNode root_ = make_directory_node("");
    std::uint64_t file_count_ = 0;
};

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

/// Parse output before any rectangularity is imposed: rows may differ in
/// width, every cell is text.
struct RaggedTable {
    std::vector<std::vector<std::string>> rows;
    std::string source_path;
    std::optional<Delimiter> delimiter;
};

/// Ranking of one parse attempt. Lower nan_fraction and higher regularity
/// are better; see sniffer compare_scores for the full order.
struct CandidateScore {
    double nan_fraction = 0.0; // missing cells / (n_rows * widest row)
    double regularity = 0.0;   // rows at modal width / n_rows
    std::size_t n_cols = 0;    // modal row width (ties resolve to the larger)
    std::size_t n_rows = 0;

    bool operator==(const CandidateScore&) const = default;
};

/// Rectangular table. Missing values are preserved as empty cells.
struct Table {
    std::string name;
    std::optional<std::vector<std::string>> header;
    std::vector<std::vector<std::string>> rows;

    // provenance, carried into manifests
    std::optional<Delimiter> delimiter;
    std::string origin_path;
    std::optional<CandidateScore> score;

    std::size_t n_rows() const { return rows.size(); }
    std::size_t n_cols() const {
        if (header) return header->size();
        return rows.empty() ? 0 : rows.front().size();
    }
};

// ---------------------------------------------------------------------------
// Import results
// ---------------------------------------------------------------------------

enum class Source { uci, custom };

inline const char* source_name(Source s) { return s == Source::uci ? "uci" : "custom"; }

using StructureDoc = nlohmann::json;

/// What an import produces: tables keyed by file name, or a structure
/// document mirroring the archive when no table could be coerced. A result
/// with neither is a failure the validator flags; the pipeline never returns
/// one silently.
struct ImportResult {
    Source source = Source::custom;
    std::map<std::string, Table> tables;
    std::optional<StructureDoc> fallback;
    std::vector<std::string> warnings;
};

struct ValidationReport {
    bool pass = false;
    bool has_outcome = false;             // tables or fallback present
    bool all_tables_nonempty = false;     // vacuously true when no tables
    bool any_table_meets_thresholds = false;
    bool fallback_present = false;
    std::vector<std::string> warnings;
};

/// Checks an import outcome against the success criteria: a non-null result,
/// no empty tables, and at least one table of useful size (or an explicit
/// fallback). Never throws; all findings land in the report.
inline ValidationReport validate_result(const ImportResult& result, int min_rows = 10,
                                        int min_cols = 2) {
    ValidationReport report;
    report.fallback_present = result.fallback.has_value();
    report.has_outcome = !result.tables.empty() || report.fallback_present;

    report.all_tables_nonempty = true;
    for (const auto& [name, table] : result.tables) {
        if (table.n_rows() == 0 || table.n_cols() == 0) {
            report.all_tables_nonempty = false;
            report.warnings.push_back("table '" + name + "' is empty");
        } else if (table.n_rows() >= static_cast<std::size_t>(min_rows) &&
                   table.n_cols() >= static_cast<std::size_t>(min_cols)) {
            report.any_table_meets_thresholds = true;
        } else {
            report.warnings.push_back("table '" + name + "' below size threshold (" +
                                      std::to_string(table.n_rows()) + "x" +
                                      std::to_string(table.n_cols()) + " < " +
                                      std::to_string(min_rows) + "x" + std::to_string(min_cols) +
                                      ")");
        }
    }

    if (!report.has_outcome)
        report.warnings.push_back("no tables and no fallback returned");
    if (report.fallback_present && result.tables.empty())
        report.warnings.push_back("fallback structure, no tables");

    report.pass = (report.has_outcome && report.all_tables_nonempty &&
                   report.any_table_meets_thresholds) ||
                  report.fallback_present;
    return report;
}

} // namespace lucie
