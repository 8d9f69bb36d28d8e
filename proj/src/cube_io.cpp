#include "clut/cube_io.hpp"

#include <cctype>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "clut/errors.hpp"

namespace clut {

namespace {

bool starts_with_keyword(const std::string& line, const std::string& kw) {
    if (line.rfind(kw, 0) != 0) return false;
    return line.size() == kw.size() || std::isspace(static_cast<unsigned char>(line[kw.size()]));
}

double parse_number(const std::string& tok, const std::string& src, long line_no) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc{} || ptr != tok.data() + tok.size())
        throw ParseError(src, line_no, "expected a number, got '" + tok + "'");
    return v;
}

std::vector<double> parse_triple(const std::string& rest, const std::string& src, long line_no) {
    std::istringstream iss(rest);
    std::vector<double> vals;
    std::string tok;
    while (iss >> tok) vals.push_back(parse_number(tok, src, line_no));
    if (vals.size() != 3)
        throw ParseError(src, line_no,
                         "expected 3 values, got " + std::to_string(vals.size()));
    return vals;
}

} // namespace

Lut3D read_cube(const std::filesystem::path& path) {
    std::ifstream in(path);
    const std::string src = path.string();
    if (!in) throw IoError("cannot open " + src);

    int dim = 0;
    double domain_min = 0.0, domain_max = 1.0;
    bool have_size = false;
    std::vector<double> entries;
    long line_no = 0;
    long data_lines = 0;
    std::string line;

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::size_t first = line.find_first_not_of(" \t");
        if (first == std::string::npos) continue;
        if (line[first] == '#') continue;
        std::string body = line.substr(first);

        if (starts_with_keyword(body, "TITLE")) continue;
        if (starts_with_keyword(body, "LUT_3D_SIZE")) {
            std::istringstream iss(body.substr(11));
            std::string tok;
            if (!(iss >> tok))
                throw ParseError(src, line_no, "LUT_3D_SIZE is missing its value");
            dim = static_cast<int>(parse_number(tok, src, line_no));
            if (dim < 2)
                throw ParseError(src, line_no,
                                 "LUT_3D_SIZE must be >= 2, got " + std::to_string(dim));
            have_size = true;
            entries.reserve(static_cast<std::size_t>(dim) * dim * dim * 3);
            continue;
        }
        if (starts_with_keyword(body, "DOMAIN_MIN")) {
            auto v = parse_triple(body.substr(10), src, line_no);
            domain_min = v[0];
            if (v[0] != v[1] || v[1] != v[2] || v[0] != 0.0)
                throw ParseError(src, line_no, "only DOMAIN_MIN 0 0 0 is supported");
            continue;
        }
        if (starts_with_keyword(body, "DOMAIN_MAX")) {
            auto v = parse_triple(body.substr(10), src, line_no);
            if (v[0] != v[1] || v[1] != v[2])
                throw ParseError(src, line_no, "DOMAIN_MAX components must be equal");
            domain_max = v[0];
            continue;
        }
        if (starts_with_keyword(body, "LUT_1D_SIZE"))
            throw ParseError(src, line_no, "1D LUTs are not supported");

        if (!have_size)
            throw ParseError(src, line_no, "data before LUT_3D_SIZE");
        auto v = parse_triple(body, src, line_no);
        ++data_lines;
        if (data_lines > static_cast<long>(dim) * dim * dim)
            throw ParseError(src, line_no,
                             "more than " + std::to_string(dim * dim * dim) + " data lines");
        entries.insert(entries.end(), v.begin(), v.end());
    }

    if (!have_size) throw ParseError(src, line_no, "missing LUT_3D_SIZE");
    const long expected = static_cast<long>(dim) * dim * dim;
    if (data_lines != expected)
        throw ParseError(src, line_no,
                         "expected " + std::to_string(expected) + " data lines, got " +
                             std::to_string(data_lines));
    (void)domain_min;

    Lut3D lut(dim, domain_max);
    lut.data = std::move(entries);
    lut.validate();
    return lut;
}

void write_cube(const Lut3D& lut, const std::filesystem::path& path) {
    lut.validate();
    std::ofstream out(path);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << "# 3D LUT, red index varies fastest\n";
    out << "LUT_3D_SIZE " << lut.dim << "\n";
    out << "DOMAIN_MIN 0 0 0\n";
    char dmax[64];
    std::snprintf(dmax, sizeof dmax, "%.9g", lut.domain_max);
    out << "DOMAIN_MAX " << dmax << " " << dmax << " " << dmax << "\n";
    char buf[128];
    const std::size_t rows = lut.data.size() / 3;
    for (std::size_t i = 0; i < rows; ++i) {
        std::snprintf(buf, sizeof buf, "%.9g %.9g %.9g\n", lut.data[i * 3],
                      lut.data[i * 3 + 1], lut.data[i * 3 + 2]);
        out << buf;
    }
    if (!out) throw IoError("write failed: " + path.string());
}

} // namespace clut
