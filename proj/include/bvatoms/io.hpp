#pragma once
// Text formats:
//   BVGRID   "BVGRID <d> <h> <n1> ... <nd>" then n1*...*nd values, row-major
//            (last axis fastest), any whitespace.
//   PGM P2   plain graymap, d = 2, rows become axis 1, columns axis 2,
//            values scaled to [0, 1], h = 1 / max(rows, cols).
//   FROSTMAN "FROSTMAN <d> <exponent> <c_nu>" then lines "x1 .. xd weight".

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include "bvatoms/grid.hpp"

namespace bvatoms {

namespace detail {

/// Whitespace tokenizer that remembers line numbers and skips '#' comments.
class TokenReader {
public:
    TokenReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

    bool next(std::string& tok) {
        while (true) {
            if (pos_ < line_.size()) {
                while (pos_ < line_.size() && std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
                if (pos_ < line_.size() && line_[pos_] == '#') pos_ = line_.size();
                if (pos_ < line_.size()) {
                    const std::size_t start = pos_;
                    while (pos_ < line_.size() && !std::isspace(static_cast<unsigned char>(line_[pos_]))) ++pos_;
                    tok = line_.substr(start, pos_ - start);
                    return true;
                }
            }
            if (!std::getline(in_, line_)) return false;
            ++lineno_;
            pos_ = 0;
        }
    }

    std::string expect(const char* what) {
        std::string tok;
        if (!next(tok)) fail(std::string("unexpected end of input, expected ") + what);
        return tok;
    }

    double number(const char* what) {
        const std::string tok = expect(what);
        double v = 0.0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size() || !std::isfinite(v))
            fail(std::string("malformed ") + what + " '" + tok + "'");
        return v;
    }

    long long integer(const char* what) {
        const std::string tok = expect(what);
        long long v = 0;
        const auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (ec != std::errc() || p != tok.data() + tok.size()) fail(std::string("malformed ") + what + " '" + tok + "'");
        return v;
    }

    [[noreturn]] void fail(const std::string& msg) const {
        throw ValidationError(source_ + ":" + std::to_string(lineno_) + ": " + msg);
    }

    bool at_end() {
        std::string tok;
        return !next(tok);
    }

private:
    std::istream& in_;
    std::string source_;
    std::string line_;
    std::size_t pos_ = 0;
    int lineno_ = 0;
};

inline std::ifstream open_input(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ValidationError(path + ": cannot open file");
    return f;
}

}  // namespace detail

inline GridFunction read_bvgrid(std::istream& in, const std::string& source = "<bvgrid>") {
    detail::TokenReader r(in, source);
    if (r.expect("BVGRID header") != "BVGRID") r.fail("missing BVGRID magic");
    const long long d = r.integer("dimension");
    if (d != 2 && d != 3) r.fail("dimension must be 2 or 3");
    const double h = r.number("spacing h");
    if (!(h > 0.0)) r.fail("spacing h must be positive");
    std::array<int, kMaxDim> n{1, 1, 1};
    for (int a = 0; a < d; ++a) {
        const long long v = r.integer("extent");
        if (v < 1 || v > (1 << 20)) r.fail("extent out of range");
        n[a] = static_cast<int>(v);
    }
    const GridSpec s = GridSpec::make(static_cast<int>(d), n, h);
    std::vector<double> values(s.num_cells());
    for (auto& v : values) v = r.number("grid value");
    if (!r.at_end()) r.fail("trailing data after " + std::to_string(values.size()) + " values");
    return GridFunction(s, std::move(values));
}

inline void write_bvgrid(std::ostream& out, const GridFunction& u) {
    const GridSpec& s = u.spec();
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", s.h);
    out << "BVGRID " << s.dim << ' ' << buf;
    for (int a = 0; a < s.dim; ++a) out << ' ' << s.extent[a];
    out << '\n';
    const int row = s.extent[s.dim - 1];
    for (std::size_t i = 0; i < u.values().size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", u[i]);
        out << buf << ((i + 1) % static_cast<std::size_t>(row) == 0 ? '\n' : ' ');
    }
}

inline GridFunction read_pgm(std::istream& in, const std::string& source = "<pgm>") {
    detail::TokenReader r(in, source);
    if (r.expect("PGM magic") != "P2") r.fail("only plain PGM (P2) is supported");
    const long long w = r.integer("width");
    const long long hgt = r.integer("height");
    const long long maxval = r.integer("maxval");
    if (w < 1 || hgt < 1 || w > (1 << 20) || hgt > (1 << 20)) r.fail("image size out of range");
    if (maxval < 1 || maxval > 65535) r.fail("maxval out of range");
    const GridSpec s = GridSpec::make(2, {static_cast<int>(hgt), static_cast<int>(w), 1},
                                      1.0 / static_cast<double>(std::max(w, hgt)));
    std::vector<double> values(s.num_cells());
    for (auto& v : values) {
        const long long px = r.integer("pixel");
        if (px < 0 || px > maxval) r.fail("pixel value outside [0, maxval]");
        v = static_cast<double>(px) / static_cast<double>(maxval);
    }
    if (!r.at_end()) r.fail("trailing data after pixels");
    return GridFunction(s, std::move(values));
}

inline void write_pgm(std::ostream& out, const GridFunction& u, int maxval = 255) {
    const GridSpec& s = u.spec();
    require(s.dim == 2, "PGM output needs a 2-d grid");
    out << "P2\n" << s.extent[1] << ' ' << s.extent[0] << '\n' << maxval << '\n';
    for (std::size_t i = 0; i < u.values().size(); ++i) {
        const double v = std::clamp(u[i], 0.0, 1.0);
        out << static_cast<int>(std::lround(v * maxval)) << ((i + 1) % static_cast<std::size_t>(s.extent[1]) == 0 ? '\n' : ' ');
    }
}

/// Reads BVGRID or PGM, chosen by the first token.
inline GridFunction read_grid(std::istream& in, const std::string& source) {
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    std::istringstream peek(text);
    detail::TokenReader tr(peek, source);
    std::string first;
    if (!tr.next(first)) throw ValidationError(source + ":1: empty input");
    std::istringstream body(text);
    if (first == "BVGRID") return read_bvgrid(body, source);
    if (first == "P2") return read_pgm(body, source);
    tr.fail("unknown grid format '" + first + "' (expected BVGRID or P2)");
}

inline GridFunction read_grid_file(const std::string& path) {
    auto f = detail::open_input(path);
    return read_grid(f, path);
}

inline void write_bvgrid_file(const std::string& path, const GridFunction& u) {
    std::ofstream f(path);
    if (!f) throw ValidationError(path + ": cannot open for writing");
    write_bvgrid(f, u);
}

struct WeightedPoint {
    Point x{};
    double weight = 0.0;
};

struct FrostmanMeasure {
    int dim = 2;
    double exponent = 1.0;  // declared growth exponent d - alpha
    double c_nu = 1.0;
    std::vector<WeightedPoint> atoms;
};

inline FrostmanMeasure read_frostman(std::istream& in, const std::string& source = "<frostman>") {
    detail::TokenReader r(in, source);
    if (r.expect("FROSTMAN header") != "FROSTMAN") r.fail("missing FROSTMAN magic");
    FrostmanMeasure nu;
    const long long d = r.integer("dimension");
    if (d != 2 && d != 3) r.fail("dimension must be 2 or 3");
    nu.dim = static_cast<int>(d);
    nu.exponent = r.number("exponent");
    nu.c_nu = r.number("c_nu");
    if (!(nu.c_nu > 0.0)) r.fail("c_nu must be positive");
    std::string tok;
    while (r.next(tok)) {
        WeightedPoint p;
        double x0 = 0.0;
        {
            const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), x0);
            if (ec != std::errc() || ptr != tok.data() + tok.size()) r.fail("malformed coordinate '" + tok + "'");
        }
        p.x[0] = x0;
        for (int a = 1; a < nu.dim; ++a) p.x[a] = r.number("coordinate");
        p.weight = r.number("weight");
        if (p.weight < 0.0) r.fail("Frostman weights must be nonnegative");
        nu.atoms.push_back(p);
    }
    return nu;
}

inline FrostmanMeasure read_frostman_file(const std::string& path) {
    auto f = detail::open_input(path);
    return read_frostman(f, path);
}

}  // namespace bvatoms
