#include "chdbc/field_io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

#include <fmt/format.h>

#include "chdbc/errors.hpp"

namespace chdbc {

namespace {

struct Header {
    int n = 0;
    std::string kind;
};

Header parse_header(std::istream& is) {
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("field csv: missing header line");
    Header hdr;
    std::istringstream ss(line);
    std::string hash, n_tok, kind_tok;
    ss >> hash >> n_tok >> kind_tok;
    if (hash != "#" || n_tok.rfind("N=", 0) != 0 || kind_tok.rfind("kind=", 0) != 0) {
        throw ConfigError("field csv: malformed header '" + line + "'");
    }
    const std::string n_str = n_tok.substr(2);
    const auto [ptr, ec] = std::from_chars(n_str.data(), n_str.data() + n_str.size(), hdr.n);
    if (ec != std::errc() || ptr != n_str.data() + n_str.size()) {
        throw ConfigError("field csv: bad N in header '" + line + "'");
    }
    hdr.kind = kind_tok.substr(5);
    return hdr;
}

std::vector<double> parse_row(const std::string& line, int expected, int row) {
    std::vector<double> out;
    out.reserve(static_cast<std::size_t>(expected));
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
        const char* comma = std::find(p, end, ',');
        double x = 0.0;
        const auto [ptr, ec] = std::from_chars(p, comma, x);
        if (ec != std::errc() || ptr != comma) {
            throw ConfigError("field csv: unparsable value in row " + std::to_string(row));
        }
        out.push_back(x);
        p = (comma == end) ? end : comma + 1;
    }
    if (static_cast<int>(out.size()) != expected) {
        throw ConfigError("field csv: row " + std::to_string(row) + " has " +
                          std::to_string(out.size()) + " values, expected " +
                          std::to_string(expected));
    }
    return out;
}

void write_row(std::ostream& os, std::span<const double> values) {
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (k) os << ',';
        os << format_double(values[k]);
    }
    os << '\n';
}

} // namespace

std::string format_double(double x) { return fmt::format("{:.17g}", x); }

void write_csv(std::ostream& os, const BulkField& f) {
    const int n = f.mesh().n();
    os << "# N=" << n << " kind=bulk\n";
    const auto v = f.values();
    for (int j = 0; j <= n; ++j) {
        write_row(os, v.subspan(static_cast<std::size_t>(j) * static_cast<std::size_t>(n),
                                static_cast<std::size_t>(n)));
    }
}

void write_csv(std::ostream& os, const BoundaryField& f) {
    os << "# N=" << f.mesh().n() << " kind=boundary\n";
    write_row(os, f.values());
}

BulkField read_bulk_csv(std::istream& is) {
    const Header hdr = parse_header(is);
    if (hdr.kind != "bulk") throw ConfigError("field csv: expected kind=bulk, got " + hdr.kind);
    const Mesh mesh(hdr.n);
    std::vector<double> values;
    values.reserve(mesh.bulk_size());
    std::string line;
    for (int j = 0; j <= hdr.n; ++j) {
        if (!std::getline(is, line)) throw ConfigError("field csv: truncated at row " + std::to_string(j));
        const auto row = parse_row(line, hdr.n, j);
        values.insert(values.end(), row.begin(), row.end());
    }
    return BulkField(mesh, std::move(values));
}

BoundaryField read_boundary_csv(std::istream& is) {
    const Header hdr = parse_header(is);
    if (hdr.kind != "boundary") {
        throw ConfigError("field csv: expected kind=boundary, got " + hdr.kind);
    }
    const Mesh mesh(hdr.n);
    std::string line;
    if (!std::getline(is, line)) throw ConfigError("field csv: missing boundary row");
    return BoundaryField(mesh, parse_row(line, hdr.n, 0));
}

void save_state(const std::filesystem::path& path, const State& s) {
    std::ofstream os(path);
    if (!os) throw ConfigError("cannot open '" + path.string() + "' for writing");
    write_csv(os, s.phi());
    if (!os) throw ConfigError("write to '" + path.string() + "' failed");
}

State load_state(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError("cannot open snapshot '" + path.string() + "'");
    return State(read_bulk_csv(is));
}

} // namespace chdbc
