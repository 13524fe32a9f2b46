#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lucie/error.hpp"

namespace lucie::detail {

// Minimal ustar reader. Handles plain and GNU-longname entries, skips pax
// extended headers, links and device nodes. Read-only: archives are only
// consumed, never produced, in this format.

struct TarEntry {
    std::string name;
    bool is_dir = false;
    std::uint64_t size = 0;
    std::uint64_t data_offset = 0;
};

class TarReader {
public:
    explicit TarReader(std::string_view bytes) : bytes_(bytes) { parse(); }

    const std::vector<TarEntry>& entries() const { return entries_; }

    std::string_view read(const TarEntry& entry) const {
        return bytes_.substr(entry.data_offset, entry.size);
    }

private:
    static constexpr size_t kBlock = 512;

    static bool is_zero_block(std::string_view block) {
        for (char c : block)
            if (c != '\0') return false;
        return true;
    }

    static std::uint64_t parse_octal(std::string_view field, const char* what) {
        if (!field.empty() && (static_cast<unsigned char>(field[0]) & 0x80))
            throw UnsupportedArchiveFormat("tar base-256 numeric fields are not supported");
        std::uint64_t value = 0;
        bool seen = false;
        for (char c : field) {
            if (c == ' ' && !seen) continue;
            if (c == '\0' || c == ' ') break;
            if (c < '0' || c > '7') throw CorruptArchive(std::string("bad octal in tar ") + what);
            value = value * 8 + static_cast<std::uint64_t>(c - '0');
            seen = true;
        }
        return value;
    }

    static bool checksum_ok(std::string_view header) {
        std::uint64_t stored = parse_octal(header.substr(148, 8), "checksum");
        std::uint64_t sum = 0;
        for (size_t i = 0; i < kBlock; ++i) {
            // the checksum field itself counts as spaces
            sum += (i >= 148 && i < 156) ? 0x20u : static_cast<unsigned char>(header[i]);
        }
        return sum == stored;
    }

    void parse() {
        std::string long_name;
        size_t pos = 0;
        while (pos + kBlock <= bytes_.size()) {
            std::string_view header = bytes_.substr(pos, kBlock);
            if (is_zero_block(header)) break;
            if (!checksum_ok(header)) throw CorruptArchive("tar header checksum mismatch");

            std::uint64_t size = parse_octal(header.substr(124, 12), "size");
            char type = header[156];
            std::uint64_t data_blocks = (size + kBlock - 1) / kBlock;
            std::uint64_t data_off = pos + kBlock;
            if (data_off + size > bytes_.size()) throw CorruptArchive("truncated tar entry");

            if (type == 'L') {
                // GNU longname: data carries the name of the next entry
                std::string_view data = bytes_.substr(data_off, size);
                size_t nul = data.find('\0');
                long_name.assign(data.substr(0, nul == std::string_view::npos ? data.size() : nul));
            } else if (type == '0' || type == '\0' || type == '5') {
                TarEntry e;
                if (!long_name.empty()) {
                    e.name = std::move(long_name);
                    long_name.clear();
                } else {
                    std::string_view name_field = header.substr(0, 100);
                    size_t nul = name_field.find('\0');
                    e.name.assign(name_field.substr(0, nul == std::string_view::npos ? 100 : nul));
                    std::string_view prefix_field = header.substr(345, 155);
                    nul = prefix_field.find('\0');
                    std::string prefix(prefix_field.substr(0, nul == std::string_view::npos ? 155 : nul));
                    if (!prefix.empty()) e.name = prefix + "/" + e.name;
                }
                e.is_dir = (type == '5') || (!e.name.empty() && e.name.back() == '/');
                e.size = e.is_dir ? 0 : size;
                e.data_offset = data_off;
                entries_.push_back(std::move(e));
            } else {
                // pax headers, links, devices: skip entry and its data
                long_name.clear();
            }
            pos += kBlock + data_blocks * kBlock;
        }
        if (entries_.empty() && bytes_.size() < kBlock)
            throw CorruptArchive("too small to be a tar archive");
    }

    std::string_view bytes_;
    std::vector<TarEntry> entries_;
};

} // namespace lucie::detail
