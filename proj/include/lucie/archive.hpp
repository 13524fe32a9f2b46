#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "lucie/detail/compress.hpp"
#include "lucie/detail/tar.hpp"
#include "lucie/detail/text.hpp"
#include "lucie/detail/zip.hpp"
#include "lucie/edit_distance.hpp"
#include "lucie/error.hpp"
#include "lucie/model.hpp"

namespace lucie {

/// Extraction limits. Archives are fully materialized, so every limit is a
/// hard cap rather than a hint.
struct ArchiveBudget {
    std::uint64_t max_extracted_bytes = 1ull << 30;
    int max_depth = 5;
    std::size_t max_files = 50000;
};

namespace detail {

inline const std::vector<std::string>& archive_extensions() {
    static const std::vector<std::string> exts = {
        ".zip", ".tar", ".tar.gz", ".tgz", ".tar.bz2", ".tbz2", ".gz", ".bz2", ".z",
    };
    return exts;
}

inline bool looks_like_tar(std::string_view bytes) {
    return bytes.size() >= 262 && bytes.substr(257, 5) == "ustar";
}

} // namespace detail

inline bool is_archive_name(std::string_view name) {
    std::string lower = detail::to_lower(detail::basename_of(name));
    for (const auto& ext : detail::archive_extensions())
        if (lower.size() > ext.size() && lower.ends_with(ext)) return true;
    return false;
}

/// Lowercased base name with every trailing archive extension removed, so
/// "Web.Data.TAR.GZ" and "web.data.zip" both normalize to "web.data".
inline std::string normalized_archive_stem(std::string_view name) {
    std::string stem = detail::to_lower(detail::basename_of(name));
    bool stripped = true;
    while (stripped) {
        stripped = false;
        for (const auto& ext : detail::archive_extensions()) {
            if (stem.size() > ext.size() && stem.ends_with(ext)) {
                stem.resize(stem.size() - ext.size());
                stripped = true;
                break;
            }
        }
    }
    return stem;
}

/// Orders archive names by how close their stem is to the word "data";
/// ties fall back to lexicographic order of the full name.
inline std::vector<std::string> rank_archives(std::vector<std::string> names) {
    std::sort(names.begin(), names.end(), [](const std::string& a, const std::string& b) {
        std::size_t da = edit_distance(normalized_archive_stem(a), "data");
        std::size_t db = edit_distance(normalized_archive_stem(b), "data");
        if (da != db) return da < db;
        return a < b;
    });
    return names;
}

inline std::vector<std::string> list_nested_archives(const FileTree& tree) {
    std::vector<std::string> paths;
    for_each_file(tree, [&](const std::string& path, const FileNode& node) {
        if (is_archive_name(node.name)) paths.push_back(path);
    });
    return rank_archives(std::move(paths));
}

namespace detail {

enum class ArchiveFormat { zip, tar, gzip, bzip2, compress_z, unknown };

inline ArchiveFormat detect_archive_format(std::string_view bytes) {
    if (bytes.size() >= 4 && bytes.substr(0, 2) == "PK") {
        char c3 = bytes[2], c4 = bytes[3];
        if ((c3 == 3 && c4 == 4) || (c3 == 5 && c4 == 6)) return ArchiveFormat::zip;
    }
    if (bytes.size() >= 2 && static_cast<unsigned char>(bytes[0]) == 0x1F) {
        unsigned char b1 = static_cast<unsigned char>(bytes[1]);
        if (b1 == 0x8B) return ArchiveFormat::gzip;
        if (b1 == 0x9D) return ArchiveFormat::compress_z;
    }
    if (bytes.size() >= 3 && bytes.substr(0, 3) == "BZh") return ArchiveFormat::bzip2;
    if (looks_like_tar(bytes)) return ArchiveFormat::tar;
    return ArchiveFormat::unknown;
}

inline void extract_zip_into(FileTreeBuilder& builder, std::string_view bytes,
                             const ArchiveBudget& budget, std::uint64_t& bytes_left,
                             std::size_t& files_left) {
    ZipReader reader(bytes);
    for (const auto& entry : reader.entries()) {
        if (entry.is_dir) {
            builder.add_directory(entry.name);
            continue;
        }
        if (files_left == 0) throw BudgetExceeded("archive holds more than " +
                                                  std::to_string(budget.max_files) + " files");
        std::string content = reader.read(entry, bytes_left);
        bytes_left -= content.size();
        --files_left;
        builder.add_file(entry.name, std::move(content));
    }
}

inline void extract_tar_into(FileTreeBuilder& builder, std::string_view bytes,
                             const ArchiveBudget& budget, std::uint64_t& bytes_left,
                             std::size_t& files_left) {
    TarReader reader(bytes);
    for (const auto& entry : reader.entries()) {
        if (entry.is_dir) {
            builder.add_directory(entry.name);
            continue;
        }
        if (files_left == 0) throw BudgetExceeded("archive holds more than " +
                                                  std::to_string(budget.max_files) + " files");
        if (entry.size > bytes_left) throw BudgetExceeded("extraction exceeds byte budget");
        bytes_left -= entry.size;
        --files_left;
        builder.add_file(entry.name, std::string(reader.read(entry)));
    }
}

/// Name for the payload of a bare gzip/bzip2 file: the compressed file's
/// name with its final extension removed, else a generic placeholder.
inline std::string decompressed_member_name(std::string_view name_hint) {
    std::string base = std::string(basename_of(name_hint));
    auto dot = base.rfind('.');
    if (dot != std::string::npos && dot > 0) base.resize(dot);
    if (base.empty()) base = "data";
    return base;
}

} // namespace detail

/// Unpacks zip, tar, tar.gz, tar.bz2 or single-file gzip/bzip2 content into
/// an in-memory tree. Paths are sanitized; budget violations throw.
inline FileTree extract_archive(std::string_view bytes, const ArchiveBudget& budget,
                                std::string_view name_hint = {}) {
    if (bytes.empty()) throw EmptyInput("archive is empty (0 bytes)");
    std::uint64_t bytes_left = budget.max_extracted_bytes;
    std::size_t files_left = budget.max_files;
    FileTreeBuilder builder;

    const auto format = detail::detect_archive_format(bytes);
    switch (format) {
    case detail::ArchiveFormat::zip:
        detail::extract_zip_into(builder, bytes, budget, bytes_left, files_left);
        break;
    case detail::ArchiveFormat::tar:
        detail::extract_tar_into(builder, bytes, budget, bytes_left, files_left);
        break;
    case detail::ArchiveFormat::gzip:
    case detail::ArchiveFormat::bzip2: {
        std::string inner = format == detail::ArchiveFormat::gzip
                                ? detail::gunzip(bytes, bytes_left)
                                : detail::bunzip2(bytes, bytes_left);
        if (detail::looks_like_tar(inner)) {
            detail::extract_tar_into(builder, inner, budget, bytes_left, files_left);
        } else {
            if (files_left == 0) throw BudgetExceeded("archive holds too many files");
            builder.add_file(detail::decompressed_member_name(name_hint), std::move(inner));
        }
        break;
    }
    case detail::ArchiveFormat::compress_z:
        throw UnsupportedArchiveFormat("compress(1) \".Z\" archives are not supported");
    case detail::ArchiveFormat::unknown:
    default:
        throw UnsupportedArchiveFormat("unrecognized archive format" +
                                       (name_hint.empty() ? std::string()
                                                          : ": " + std::string(name_hint)));
    }
    return builder.build();
}

// Exact-match forwarders so std::string and literal arguments read as bytes
// instead of tripping over the path overload below.
inline FileTree extract_archive(const std::string& bytes, const ArchiveBudget& budget,
                                std::string_view name_hint = {}) {
    return extract_archive(std::string_view(bytes), budget, name_hint);
}

inline FileTree extract_archive(const char* bytes, const ArchiveBudget& budget,
                                std::string_view name_hint = {}) {
    return extract_archive(std::string_view(bytes), budget, name_hint);
}

inline FileTree extract_archive(const std::filesystem::path& file, const ArchiveBudget& budget) {
    std::error_code ec;
    if (!std::filesystem::is_regular_file(file, ec))
        throw CorruptArchive("not a readable file: " + file.string());
    std::string bytes = ContentHandle::from_file(file).read();
    return extract_archive(bytes, budget, file.filename().string());
}

/// Mirrors an on-disk directory as a FileTree; file contents stay on disk
/// and are read lazily through path handles.
inline FileTree scan_directory(const std::filesystem::path& dir, const ArchiveBudget& budget) {
    namespace fs = std::filesystem;
    std::error_code ec;
    if (!fs::is_directory(dir, ec)) throw PipelineFailure("not a directory: " + dir.string());

    std::uint64_t bytes_left = budget.max_extracted_bytes;
    std::size_t files_left = budget.max_files;
    FileTreeBuilder builder;
    for (fs::recursive_directory_iterator it(dir, fs::directory_options::skip_permission_denied, ec), end;
         it != end; it.increment(ec)) {
        if (ec) throw PipelineFailure("cannot walk directory: " + dir.string());
        fs::path rel = fs::relative(it->path(), dir, ec);
        if (ec) continue;
        if (it->is_directory(ec)) {
            builder.add_directory(rel.generic_string());
        } else if (it->is_regular_file(ec)) {
            if (files_left == 0) throw BudgetExceeded("directory holds more than " +
                                                      std::to_string(budget.max_files) + " files");
            std::uint64_t size = it->file_size(ec);
            if (ec) size = 0;
            if (size > bytes_left) throw BudgetExceeded("directory exceeds byte budget");
            bytes_left -= size;
            --files_left;
            builder.add_file(rel.generic_string(), size, ContentHandle::from_file(it->path()));
        }
    }
    return builder.build();
}

} // namespace lucie
