#include "holodisc/io.hpp"

#include "holodisc/errors.hpp"

#include <nlohmann/json.hpp>

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace holodisc {

namespace {

std::uint64_t to_little(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::big) {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) r |= ((v >> (8 * i)) & 0xffu) << (8 * (7 - i));
        return r;
    }
    return v;
}

void put(std::ostream& os, double x) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(x));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    os.write(buf, 8);
}

double get(std::istream& is) {
    char buf[8];
    if (!is.read(buf, 8)) throw Error("read_field: truncated payload");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    return std::bit_cast<double>(to_little(bits));
}

}  // namespace

std::string format_double(double x) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void write_field(const std::filesystem::path& path, const GridField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("write_field: cannot open " + path.string());
    const nlohmann::ordered_json header{{"nr", f.grid().nr()},
                                        {"nt", f.grid().nt()},
                                        {"dim", f.dim()},
                                        {"precision", "f64"}};
    os << header.dump() << '\n';
    for (Eigen::Index n = 0; n < f.size(); ++n)
        for (Eigen::Index c = 0; c < f.dim(); ++c) {
            put(os, f(n, c).real());
            put(os, f(n, c).imag());
        }
    if (!os) throw Error("write_field: write failed for " + path.string());
}

GridField read_field(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("read_field: cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw Error("read_field: missing header");
    nlohmann::json header;
    try {
        header = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("read_field: bad header: ") + e.what());
    }
    if (header.value("precision", "") != "f64") throw Error("read_field: unsupported precision");
    const int nr = header.at("nr").get<int>(), nt = header.at("nt").get<int>();
    const Eigen::Index dim = header.at("dim").get<Eigen::Index>();
    if (nr <= 0 || nt <= 0 || dim <= 0) throw Error("read_field: nonpositive sizes in header");
    GridField f(make_grid(nr, nt), dim);
    for (Eigen::Index n = 0; n < f.size(); ++n)
        for (Eigen::Index c = 0; c < dim; ++c) {
            const double re = get(is);
            f(n, c) = cplx(re, get(is));
        }
    if (is.peek() != std::char_traits<char>::eof()) throw Error("read_field: trailing bytes");
    return f;
}

void write_norm_csv(const std::filesystem::path& path, const std::vector<NormStudyRow>& rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("write_norm_csv: cannot open " + path.string());
    os << "p,nr,estimate\n";
    for (const auto& r : rows) os << format_double(r.p) << ',' << r.nr << ',' << format_double(r.estimate) << '\n';
}

std::vector<NormStudyRow> read_norm_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw Error("read_norm_csv: cannot open " + path.string());
    std::string line;
    if (!std::getline(is, line) || line != "p,nr,estimate") throw Error("read_norm_csv: bad header");
    std::vector<NormStudyRow> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string a, b, c;
        if (!std::getline(ls, a, ',') || !std::getline(ls, b, ',') || !std::getline(ls, c))
            throw Error("read_norm_csv: malformed row");
        NormStudyRow r;
        try {
            r.p = std::stod(a);
            r.nr = std::stoi(b);
            r.estimate = std::stod(c);
        } catch (const std::exception&) {
            throw Error("read_norm_csv: malformed number in '" + line + "'");
        }
        rows.push_back(r);
    }
    return rows;
}

}  // namespace holodisc
