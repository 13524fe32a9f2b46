#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace lucie::detail {

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\r' || c == '\n' || c == '\f' || c == '\v';
}

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
    while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
    return s;
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

inline std::string to_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = ascii_lower(c);
    return out;
}

inline bool iequals(std::string_view a, std::string_view b) {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
        if (ascii_lower(a[i]) != ascii_lower(b[i])) return false;
    return true;
}

inline bool iends_with(std::string_view s, std::string_view suffix) {
    return s.size() >= suffix.size() && iequals(s.substr(s.size() - suffix.size()), suffix);
}

// Final path segment; accepts both '/' and '\\' separators.
inline std::string_view basename_of(std::string_view path) {
    size_t pos = path.find_last_of("/\\");
    return pos == std::string_view::npos ? path : path.substr(pos + 1);
}

// Lowercased extension including the dot ("IRIS.DATA" -> ".data").
// A leading dot alone ("  .gitignore") does not count as an extension.
inline std::string extension_of(std::string_view path) {
    std::string_view base = basename_of(path);
    size_t pos = base.find_last_of('.');
    if (pos == std::string_view::npos || pos == 0) return {};
    return to_lower(base.substr(pos));
}

struct DecodeStats {
    std::string text;
    size_t chars = 0;        // decoded code points
    size_t replacements = 0; // invalid sequences replaced with U+FFFD
};

// Decode bytes as UTF-8, replacing each invalid sequence with U+FFFD.
// Strips a leading BOM.
inline DecodeStats utf8_lossy_decode(std::string_view bytes) {
    DecodeStats out;
    out.text.reserve(bytes.size());
    size_t i = 0;
    if (bytes.size() >= 3 && static_cast<uint8_t>(bytes[0]) == 0xEF &&
        static_cast<uint8_t>(bytes[1]) == 0xBB && static_cast<uint8_t>(bytes[2]) == 0xBF) {
        i = 3;
    }
    auto replace = [&out] {
        out.text += "\xEF\xBF\xBD";
        ++out.replacements;
        ++out.chars;
    };
    while (i < bytes.size()) {
        uint8_t b = static_cast<uint8_t>(bytes[i]);
        size_t len;
        uint32_t min_cp;
        if (b < 0x80) {
            out.text += static_cast<char>(b);
            ++out.chars;
            ++i;
            continue;
        } else if ((b & 0xE0) == 0xC0) {
            len = 2; min_cp = 0x80;
        } else if ((b & 0xF0) == 0xE0) {
            len = 3; min_cp = 0x800;
        } else if ((b & 0xF8) == 0xF0) {
            len = 4; min_cp = 0x10000;
        } else {
            replace();
            ++i;
            continue;
        }
        if (i + len > bytes.size()) {
            replace();
            ++i;
            continue;
        }
        uint32_t cp = b & (0xFFu >> (len + 1));
        bool ok = true;
        for (size_t k = 1; k < len; ++k) {
            uint8_t c = static_cast<uint8_t>(bytes[i + k]);
            if ((c & 0xC0) != 0x80) { ok = false; break; }
            cp = (cp << 6) | (c & 0x3F);
        }
        if (!ok || cp < min_cp || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
            replace();
            ++i;
            continue;
        }
        out.text.append(bytes.substr(i, len));
        ++out.chars;
        i += len;
    }
    return out;
}

inline std::string base64_encode(std::string_view data) {
    static const char alphabet[] = "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
    std::string out;
    out.reserve((data.size() + 2) / 3 * 4);
    size_t i = 0;
    for (; i + 3 <= data.size(); i += 3) {
        uint32_t v = (static_cast<uint8_t>(data[i]) << 16) |
                     (static_cast<uint8_t>(data[i + 1]) << 8) |
                     static_cast<uint8_t>(data[i + 2]);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += alphabet[v & 63];
    }
    size_t rest = data.size() - i;
    if (rest == 1) {
        uint32_t v = static_cast<uint8_t>(data[i]) << 16;
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += "==";
    } else if (rest == 2) {
        uint32_t v = (static_cast<uint8_t>(data[i]) << 16) | (static_cast<uint8_t>(data[i + 1]) << 8);
        out += alphabet[(v >> 18) & 63];
        out += alphabet[(v >> 12) & 63];
        out += alphabet[(v >> 6) & 63];
        out += '=';
    }
    return out;
}

} // namespace lucie::detail
