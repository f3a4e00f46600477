#pragma once

#include "qab/error.hpp"
#include "qab/potential.hpp"
#include "qab/text.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace qab {

// ---------------------------------------------------------------- PGM ----

struct PgmImage {
    std::size_t rows = 0;
    std::size_t cols = 0;
    unsigned maxval = 255;
    std::vector<std::uint16_t> pixels;   // row-major

    bool operator==(const PgmImage&) const = default;
};

enum class PgmFault { MalformedHeader, MalformedPixel, TruncatedPayload, UnsupportedMaxval, PixelOutOfRange };

class PgmError : public DataError {
public:
    PgmError(PgmFault fault, const std::string& what) : DataError(what), fault_(fault) {}
    [[nodiscard]] PgmFault fault() const noexcept { return fault_; }

private:
    PgmFault fault_;
};

namespace detail {

// Next whitespace-delimited header token, skipping '#' comments.
inline std::string pgm_token(std::istream& is) {
    std::string tok;
    int ch = 0;
    while ((ch = is.get()) != EOF) {
        if (ch == '#') {
            while ((ch = is.get()) != EOF && ch != '\n') {
            }
            if (!tok.empty()) break;
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    return tok;
}

inline std::size_t pgm_number(std::istream& is, const char* field) {
    const std::string tok = pgm_token(is);
    if (tok.empty()) throw PgmError(PgmFault::MalformedHeader, std::string("PGM: missing ") + field);
    if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
        throw PgmError(PgmFault::MalformedHeader, std::string("PGM: bad ") + field + " '" + tok + "'");
    }
    if (tok.size() > 9) throw PgmError(PgmFault::MalformedHeader, std::string("PGM: ") + field + " too large");
    return static_cast<std::size_t>(std::stoul(tok));
}

} // namespace detail

inline PgmImage read_pgm(std::istream& is) {
    const std::string magic = detail::pgm_token(is);
    if (magic != "P2" && magic != "P5") {
        throw PgmError(PgmFault::MalformedHeader, "PGM: bad magic '" + magic + "' (expected P2 or P5)");
    }
    PgmImage img;
    img.cols = detail::pgm_number(is, "width");
    img.rows = detail::pgm_number(is, "height");
    const std::size_t maxval = detail::pgm_number(is, "maxval");
    if (img.cols == 0 || img.rows == 0) throw PgmError(PgmFault::MalformedHeader, "PGM: zero width or height");
    if (maxval != 255 && maxval != 65535) {
        throw PgmError(PgmFault::UnsupportedMaxval,
                       "PGM: unsupported maxval " + std::to_string(maxval) + " (expected 255 or 65535)");
    }
    img.maxval = static_cast<unsigned>(maxval);
    const std::size_t count = img.rows * img.cols;
    img.pixels.resize(count);

    if (magic == "P5") {
        const std::size_t bytes_per = maxval > 255 ? 2 : 1;
        std::vector<unsigned char> raw(count * bytes_per);
        is.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
        if (static_cast<std::size_t>(is.gcount()) != raw.size()) {
            throw PgmError(PgmFault::TruncatedPayload, "PGM: truncated payload, expected " +
                                                           std::to_string(raw.size()) + " bytes, got " +
                                                           std::to_string(is.gcount()));
        }
        for (std::size_t i = 0; i < count; ++i) {
            img.pixels[i] = bytes_per == 2 ? static_cast<std::uint16_t>((raw[2 * i] << 8) | raw[2 * i + 1]) : raw[i];
        }
    } else {
        for (std::size_t i = 0; i < count; ++i) {
            const std::string tok = detail::pgm_token(is);
            if (tok.empty()) {
                throw PgmError(PgmFault::TruncatedPayload, "PGM: truncated payload, expected " +
                                                               std::to_string(count) + " pixels, got " +
                                                               std::to_string(i));
            }
            if (!std::all_of(tok.begin(), tok.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
                tok.size() > 9) {
                throw PgmError(PgmFault::MalformedPixel, "PGM: bad pixel '" + tok + "' at index " + std::to_string(i));
            }
            const unsigned long v = std::stoul(tok);
            if (v > maxval) {
                throw PgmError(PgmFault::PixelOutOfRange, "PGM: pixel " + std::to_string(i) + " value " +
                                                              std::to_string(v) + " exceeds maxval " +
                                                              std::to_string(maxval));
            }
            img.pixels[i] = static_cast<std::uint16_t>(v);
        }
    }
    return img;
}

inline void write_pgm(std::ostream& os, const PgmImage& img, bool binary = true) {
    if (img.maxval != 255 && img.maxval != 65535) {
        throw PgmError(PgmFault::UnsupportedMaxval, "PGM: unsupported maxval " + std::to_string(img.maxval));
    }
    if (img.pixels.size() != img.rows * img.cols) throw std::invalid_argument("write_pgm: pixel count mismatch");
    os << (binary ? "P5" : "P2") << '\n' << img.cols << ' ' << img.rows << '\n' << img.maxval << '\n';
    if (binary) {
        for (auto p : img.pixels) {
            if (p > img.maxval) throw std::invalid_argument("write_pgm: pixel exceeds maxval");
            if (img.maxval > 255) os.put(static_cast<char>(p >> 8));
            os.put(static_cast<char>(p & 0xFF));
        }
    } else {
        for (std::size_t r = 0; r < img.rows; ++r) {
            for (std::size_t c = 0; c < img.cols; ++c) os << (c ? " " : "") << img.pixels[r * img.cols + c];
            os << '\n';
        }
    }
}

inline Potential to_potential(const PgmImage& img) {
    std::vector<double> v(img.pixels.begin(), img.pixels.end());
    return Potential::two_d(img.rows, img.cols, std::move(v));
}

/// Rounds to the nearest level and clamps to [0, maxval].
inline PgmImage to_pgm(const Potential& x, unsigned maxval = 255) {
    if (!x.is_2d()) throw std::invalid_argument("to_pgm: image must be 2D");
    PgmImage img{x.rows(), x.cols(), maxval, {}};
    img.pixels.reserve(x.size());
    for (double v : x.values()) {
        img.pixels.push_back(static_cast<std::uint16_t>(std::clamp(std::round(v), 0.0, static_cast<double>(maxval))));
    }
    return img;
}

// ---------------------------------------------------------------- CSV ----

/// One sample per line. A first line that is not a number is taken as a
/// header; any later unparsable or non-finite row is an error.
inline std::vector<double> read_signal_csv(std::istream& is) {
    std::vector<double> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto field = trim(line);
        if (field.empty()) continue;
        double v = 0.0;
        try {
            v = parse_exact(field);
        } catch (const DataError&) {
            if (line_no == 1) continue;
            throw DataError("CSV line " + std::to_string(line_no) + ": cannot parse '" + std::string(field) + "'");
        }
        if (!std::isfinite(v)) {
            throw DataError("CSV line " + std::to_string(line_no) + ": non-finite value '" + std::string(field) + "'");
        }
        out.push_back(v);
    }
    if (out.empty()) throw DataError("CSV: no samples");
    return out;
}

inline void write_signal_csv(std::ostream& os, std::span<const double> values, bool header = true) {
    if (header) os << "value\n";
    for (double v : values) os << format_exact(v) << '\n';
}

// ------------------------------------------------------------- config ----

/// key=value lines; '#' starts a comment. Later duplicates are rejected.
class KeyValueConfig {
public:
    static KeyValueConfig parse(std::istream& is) {
        KeyValueConfig cfg;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(is, line)) {
            ++line_no;
            std::string_view text(line);
            if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
            text = trim(text);
            if (text.empty()) continue;
            const auto eq = text.find('=');
            if (eq == std::string_view::npos) {
                throw DataError("config line " + std::to_string(line_no) + ": expected key=value");
            }
            const std::string key(trim(text.substr(0, eq)));
            const std::string value(trim(text.substr(eq + 1)));
            if (key.empty()) throw DataError("config line " + std::to_string(line_no) + ": empty key");
            if (!cfg.values_.emplace(key, value).second) {
                throw DataError("config line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
            }
        }
        return cfg;
    }

    static KeyValueConfig load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in) throw DataError("cannot open config '" + path.string() + "'");
        return parse(in);
    }

    /// Throws DataError naming the first key outside `allowed`.
    void require_known(const std::set<std::string>& allowed) const {
        for (const auto& [k, v] : values_) {
            if (!allowed.count(k)) throw DataError("config: unknown key '" + k + "'");
        }
    }

    [[nodiscard]] const std::map<std::string, std::string>& values() const noexcept { return values_; }
    [[nodiscard]] bool has(const std::string& key) const { return values_.count(key) != 0; }
    [[nodiscard]] const std::string& get(const std::string& key) const { return values_.at(key); }

private:
    std::map<std::string, std::string> values_;
};

/// Comma-separated list of numbers, e.g. "0.5, 1, 2".
inline std::vector<double> parse_number_list(std::string_view text) {
    std::vector<double> out;
    while (true) {
        const auto comma = text.find(',');
        const auto item = trim(text.substr(0, comma));
        if (item.empty()) throw DataError("empty item in list");
        out.push_back(parse_exact(item));
        if (comma == std::string_view::npos) break;
        text.remove_prefix(comma + 1);
    }
    return out;
}

// -------------------------------------------------------------- files ----

inline bool has_pgm_extension(const std::filesystem::path& p) {
    auto ext = p.extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
    return ext == ".pgm";
}

inline PgmImage load_pgm(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_pgm(in);
}

inline void save_pgm(const std::filesystem::path& path, const PgmImage& img, bool binary = true) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    write_pgm(out, img, binary);
}

inline std::vector<double> load_signal_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open '" + path.string() + "'");
    return read_signal_csv(in);
}

inline void save_signal_csv(const std::filesystem::path& path, std::span<const double> values) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write '" + path.string() + "'");
    write_signal_csv(out, values);
}

} // namespace qab
