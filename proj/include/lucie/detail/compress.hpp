#pragma once

#include <cstdint>
#include <string>
#include <string_view>

#include <zlib.h>

#include <boost/iostreams/copy.hpp>
#include <boost/iostreams/device/array.hpp>
#include <boost/iostreams/device/back_inserter.hpp>
#include <boost/iostreams/filter/bzip2.hpp>
#include <boost/iostreams/filtering_stream.hpp>

#include "lucie/error.hpp"

namespace lucie::detail {

inline std::uint32_t crc32_of(std::string_view data) {
    uLong crc = ::crc32(0L, Z_NULL, 0);
    crc = ::crc32(crc, reinterpret_cast<const Bytef*>(data.data()),
                  static_cast<uInt>(data.size()));
    return static_cast<std::uint32_t>(crc);
}

// window_bits: -15 raw deflate (zip entries), 15+32 auto-detect zlib/gzip.
inline std::string zlib_inflate(std::string_view input, int window_bits,
                                std::uint64_t max_output_bytes) {
    z_stream zs{};
    if (inflateInit2(&zs, window_bits) != Z_OK)
        throw CorruptArchive("inflateInit failed");

    std::string out;
    char buf[64 * 1024];
    zs.next_in = reinterpret_cast<Bytef*>(const_cast<char*>(input.data()));
    zs.avail_in = static_cast<uInt>(input.size());

    int rc = Z_OK;
    do {
        zs.next_out = reinterpret_cast<Bytef*>(buf);
        zs.avail_out = sizeof(buf);
        rc = inflate(&zs, Z_NO_FLUSH);
        if (rc != Z_OK && rc != Z_STREAM_END) {
            inflateEnd(&zs);
            throw CorruptArchive("inflate failed (zlib rc " + std::to_string(rc) + ")");
        }
        out.append(buf, sizeof(buf) - zs.avail_out);
        if (out.size() > max_output_bytes) {
            inflateEnd(&zs);
            throw BudgetExceeded("decompressed size exceeds budget (" +
                                 std::to_string(max_output_bytes) + " bytes)");
        }
    } while (rc != Z_STREAM_END && (zs.avail_in > 0 || zs.avail_out == 0));

    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw CorruptArchive("truncated compressed stream");
    return out;
}

inline std::string inflate_raw(std::string_view input, std::uint64_t max_output_bytes) {
    return zlib_inflate(input, -15, max_output_bytes);
}

inline std::string gunzip(std::string_view input, std::uint64_t max_output_bytes) {
    return zlib_inflate(input, 15 + 32, max_output_bytes);
}

/// gzip-wrapped deflate of `input` (fixture construction and tests).
inline std::string gzip_compress(std::string_view input) {
    z_stream zs{};
    if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, 15 + 16, 8,
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

inline std::string bunzip2(std::string_view input, std::uint64_t max_output_bytes) {
    namespace io = boost::iostreams;
    std::string out;
    try {
        io::filtering_istream in;
        in.push(io::bzip2_decompressor());
        in.push(io::array_source(input.data(), input.size()));
        char buf[64 * 1024];
        while (in) {
            in.read(buf, sizeof(buf));
            out.append(buf, static_cast<size_t>(in.gcount()));
            if (out.size() > max_output_bytes)
                throw BudgetExceeded("decompressed size exceeds budget (" +
                                     std::to_string(max_output_bytes) + " bytes)");
        }
    } catch (const BudgetExceeded&) {
        throw;
    } catch (const std::exception& e) {
        throw CorruptArchive(std::string("bzip2 decode failed: ") + e.what());
    }
    return out;
}

inline std::string bzip2_compress(std::string_view input) {
    namespace io = boost::iostreams;
    std::string out;
    io::filtering_ostream os;
    os.push(io::bzip2_compressor());
    os.push(io::back_inserter(out));
    os.write(input.data(), static_cast<std::streamsize>(input.size()));
    os.reset();
    return out;
}

} // namespace lucie::detail
