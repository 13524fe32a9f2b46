#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "lucie/detail/compress.hpp"
#include "lucie/error.hpp"

namespace lucie::detail {

// Minimal zip support: central-directory driven reads of stored and
// deflated entries, and a writer that emits stored entries with a fixed
// timestamp so identical inputs produce identical archives. No zip64, no
// encryption, no data descriptors on write.

struct ZipEntry {
    std::string name;
    bool is_dir = false;
    std::uint16_t method = 0; // 0 stored, 8 deflate
    std::uint16_t flags = 0;
    std::uint32_t crc = 0;
    std::uint64_t compressed_size = 0;
    std::uint64_t uncompressed_size = 0;
    std::uint64_t local_header_offset = 0;
};

namespace zipio {

inline std::uint16_t rd16(std::string_view s, size_t off) {
    return static_cast<std::uint16_t>(static_cast<std::uint8_t>(s[off]) |
                                      (static_cast<std::uint8_t>(s[off + 1]) << 8));
}

inline std::uint32_t rd32(std::string_view s, size_t off) {
    return static_cast<std::uint32_t>(static_cast<std::uint8_t>(s[off])) |
           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(s[off + 1])) << 8) |
           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(s[off + 2])) << 16) |
           (static_cast<std::uint32_t>(static_cast<std::uint8_t>(s[off + 3])) << 24);
}

inline void wr16(std::string& s, std::uint16_t v) {
    s += static_cast<char>(v & 0xFF);
    s += static_cast<char>((v >> 8) & 0xFF);
}

inline void wr32(std::string& s, std::uint32_t v) {
    s += static_cast<char>(v & 0xFF);
    s += static_cast<char>((v >> 8) & 0xFF);
    s += static_cast<char>((v >> 16) & 0xFF);
    s += static_cast<char>((v >> 24) & 0xFF);
}

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEocdSig = 0x06054b50;
// 2024-01-01 00:00:00 in DOS format
constexpr std::uint16_t kDosDate = 0x5821;
constexpr std::uint16_t kDosTime = 0;

} // namespace zipio

class ZipReader {
public:
    explicit ZipReader(std::string_view bytes) : bytes_(bytes) { parse_central_directory(); }

    const std::vector<ZipEntry>& entries() const { return entries_; }

    std::string read(const ZipEntry& entry, std::uint64_t max_bytes) const {
        namespace z = zipio;
        if (entry.flags & 0x1) throw UnsupportedArchiveFormat("encrypted zip entry: " + entry.name);
        if (entry.method != 0 && entry.method != 8)
            throw UnsupportedArchiveFormat("zip compression method " + std::to_string(entry.method) +
                                           " in entry: " + entry.name);
        if (entry.local_header_offset + 30 > bytes_.size())
            throw CorruptArchive("local header offset out of range: " + entry.name);
        std::string_view local = bytes_.substr(entry.local_header_offset);
        if (z::rd32(local, 0) != z::kLocalSig)
            throw CorruptArchive("bad local header signature: " + entry.name);
        size_t name_len = z::rd16(local, 26);
        size_t extra_len = z::rd16(local, 28);
        size_t data_off = 30 + name_len + extra_len;
        if (data_off + entry.compressed_size > local.size())
            throw CorruptArchive("truncated entry data: " + entry.name);
        std::string_view data = local.substr(data_off, entry.compressed_size);

        std::string out;
        if (entry.method == 0) {
            if (entry.compressed_size > max_bytes)
                throw BudgetExceeded("entry larger than remaining budget: " + entry.name);
            out.assign(data);
        } else {
            out = inflate_raw(data, max_bytes);
        }
        if (out.size() != entry.uncompressed_size)
            throw CorruptArchive("entry size mismatch: " + entry.name);
        if (crc32_of(out) != entry.crc)
            throw CorruptArchive("crc mismatch: " + entry.name);
        return out;
    }

private:
    void parse_central_directory() {
        namespace z = zipio;
        if (bytes_.size() < 22) throw CorruptArchive("too small to be a zip file");
        // EOCD is within the last 64KiB + 22 bytes (trailing comment allowed)
        size_t scan_start = bytes_.size() >= (65536 + 22) ? bytes_.size() - 65536 - 22 : 0;
        size_t eocd = std::string_view::npos;
        for (size_t i = bytes_.size() - 22 + 1; i-- > scan_start;) {
            if (z::rd32(bytes_, i) == z::kEocdSig) { eocd = i; break; }
        }
        if (eocd == std::string_view::npos) throw CorruptArchive("end-of-central-directory not found");

        std::uint16_t total_entries = z::rd16(bytes_, eocd + 10);
        std::uint32_t cd_size = z::rd32(bytes_, eocd + 12);
        std::uint32_t cd_offset = z::rd32(bytes_, eocd + 16);
        if (cd_offset == 0xFFFFFFFF || total_entries == 0xFFFF)
            throw UnsupportedArchiveFormat("zip64 archives are not supported");
        if (static_cast<std::uint64_t>(cd_offset) + cd_size > bytes_.size())
            throw CorruptArchive("central directory out of range");

        size_t pos = cd_offset;
        for (std::uint16_t i = 0; i < total_entries; ++i) {
            if (pos + 46 > bytes_.size() || z::rd32(bytes_, pos) != z::kCentralSig)
                throw CorruptArchive("bad central directory entry");
            ZipEntry e;
            e.flags = z::rd16(bytes_, pos + 8);
            e.method = z::rd16(bytes_, pos + 10);
            e.crc = z::rd32(bytes_, pos + 16);
            e.compressed_size = z::rd32(bytes_, pos + 20);
            e.uncompressed_size = z::rd32(bytes_, pos + 24);
            size_t name_len = z::rd16(bytes_, pos + 28);
            size_t extra_len = z::rd16(bytes_, pos + 30);
            size_t comment_len = z::rd16(bytes_, pos + 32);
            e.local_header_offset = z::rd32(bytes_, pos + 42);
            if (e.compressed_size == 0xFFFFFFFF || e.uncompressed_size == 0xFFFFFFFF ||
                e.local_header_offset == 0xFFFFFFFF)
                throw UnsupportedArchiveFormat("zip64 archives are not supported");
            if (pos + 46 + name_len > bytes_.size()) throw CorruptArchive("truncated entry name");
            e.name = std::string(bytes_.substr(pos + 46, name_len));
            e.is_dir = !e.name.empty() && e.name.back() == '/';
            entries_.push_back(std::move(e));
            pos += 46 + name_len + extra_len + comment_len;
        }
    }

    std::string_view bytes_;
    std::vector<ZipEntry> entries_;
};

class ZipWriter {
public:
    /// Adds a stored (uncompressed) entry.
    void add_file(std::string_view name, std::string_view content) {
        add_entry(name, content, /*deflate=*/false);
    }

    /// Adds a raw-deflate entry.
    void add_file_deflated(std::string_view name, std::string_view content) {
        add_entry(name, content, /*deflate=*/true);
    }

    void add_directory(std::string_view name) {
        std::string dir_name(name);
        if (dir_name.empty() || dir_name.back() != '/') dir_name += '/';
        add_entry(dir_name, {}, /*deflate=*/false);
    }

    std::string finish() {
        namespace z = zipio;
        std::string out = std::move(data_);
        std::uint32_t cd_offset = static_cast<std::uint32_t>(out.size());
        out += central_;
        std::uint32_t cd_size = static_cast<std::uint32_t>(out.size()) - cd_offset;
        z::wr32(out, z::kEocdSig);
        z::wr16(out, 0); // this disk
        z::wr16(out, 0); // cd disk
        z::wr16(out, static_cast<std::uint16_t>(count_));
        z::wr16(out, static_cast<std::uint16_t>(count_));
        z::wr32(out, cd_size);
        z::wr32(out, cd_offset);
        z::wr16(out, 0); // no comment
        data_.clear();
        central_.clear();
        count_ = 0;
        return out;
    }

private:
    void add_entry(std::string_view name, std::string_view content, bool deflate) {
        namespace z = zipio;
        std::uint32_t crc = crc32_of(content);
        std::string deflated;
        std::string_view payload = content;
        std::uint16_t method = 0;
        if (deflate) {
            deflated = raw_deflate(content);
            payload = deflated;
            method = 8;
        }
        std::uint32_t offset = static_cast<std::uint32_t>(data_.size());

        z::wr32(data_, z::kLocalSig);
        z::wr16(data_, 20);     // version needed
        z::wr16(data_, 0);      // flags
        z::wr16(data_, method);
        z::wr16(data_, z::kDosTime);
        z::wr16(data_, z::kDosDate);
        z::wr32(data_, crc);
        z::wr32(data_, static_cast<std::uint32_t>(payload.size()));
        z::wr32(data_, static_cast<std::uint32_t>(content.size()));
        z::wr16(data_, static_cast<std::uint16_t>(name.size()));
        z::wr16(data_, 0); // extra len
        data_ += name;
        data_ += payload;

        z::wr32(central_, z::kCentralSig);
        z::wr16(central_, 20); // version made by
        z::wr16(central_, 20); // version needed
        z::wr16(central_, 0);  // flags
        z::wr16(central_, method);
        z::wr16(central_, z::kDosTime);
        z::wr16(central_, z::kDosDate);
        z::wr32(central_, crc);
        z::wr32(central_, static_cast<std::uint32_t>(payload.size()));
        z::wr32(central_, static_cast<std::uint32_t>(content.size()));
        z::wr16(central_, static_cast<std::uint16_t>(name.size()));
        z::wr16(central_, 0); // extra len
        z::wr16(central_, 0); // comment len
        z::wr16(central_, 0); // disk
        z::wr16(central_, 0); // internal attrs
        std::uint32_t external = (!name.empty() && name.back() == '/') ? 0x10 : 0;
        z::wr32(central_, external);
        z::wr32(central_, offset);
        central_ += name;
        ++count_;
    }

    static std::string raw_deflate(std::string_view input) {
        z_stream zs{};
        if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8,
                         Z_DEFAULT_STRATEGY) != Z_OK)
            throw std::runtime_error("deflateInit failed");
        std::string out;
        char buf[64 * 1024];
        zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(input.data()));
        zs.avail_in = static_cast<uInt>(input.size());
        int rc = Z_OK;
        do {
            zs.next_out = reinterpret_cast<Bytef*>(buf);
            zs.avail_out = sizeof(buf);
            rc = deflate(&zs, Z_FINISH);
            out.append(buf, sizeof(buf) - zs.avail_out);
        } while (rc == Z_OK);
        deflateEnd(&zs);
        if (rc != Z_STREAM_END) throw std::runtime_error("deflate failed");
        return out;
    }

    std::string data_;
    std::string central_;
    size_t count_ = 0;
};

} // namespace lucie::detail
