#include "support.hpp"

#include "holodisc/errors.hpp"
#include "holodisc/io.hpp"

#include <doctest.h>

#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <limits>

using namespace holodisc;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir() {
    const fs::path dir = fs::temp_directory_path() / "holodisc-io-test";
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

}  // namespace

TEST_CASE("field files round trip bit for bit") {
    const GridPtr g = make_grid(8);
    GridField f = GridField::sample(g, 2, [](cplx z) { return CVector{{z, std::exp(std::conj(z))}}; });
    f(3, 1) = cplx(std::numeric_limits<double>::denorm_min(), -0.0);
    const fs::path path = scratch_dir() / "f.field";
    write_field(path, f);
    const GridField back = read_field(path);
    CHECK(back.grid().nr() == 8);
    CHECK(back.grid().nt() == 16);
    CHECK(back.dim() == 2);
    CHECK(std::memcmp(back.values().data(), f.values().data(), sizeof(cplx) * f.values().size()) == 0);

    const std::string bytes = slurp(path);
    const std::string header = R"({"nr":8,"nt":16,"dim":2,"precision":"f64"})";
    CHECK(bytes.substr(0, header.size() + 1) == header + "\n");
    CHECK(bytes.size() == header.size() + 1 + std::size_t(f.size()) * 2 * 16);
    // first payload value is Re f(node 0, component 0), little endian
    double first;
    std::memcpy(&first, bytes.data() + header.size() + 1, 8);
    CHECK(first == f(0, 0).real());
}

TEST_CASE("malformed field files are rejected") {
    const fs::path dir = scratch_dir();
    const GridField f = GridField::sample(make_grid(4), [](cplx z) { return z; });
    write_field(dir / "good.field", f);
    const std::string good = slurp(dir / "good.field");

    auto write = [&](const std::string& name, const std::string& text) {
        std::ofstream(dir / name, std::ios::binary) << text;
        return dir / name;
    };
    CHECK_THROWS_AS(read_field(write("short.field", good.substr(0, good.size() - 3))), Error);
    CHECK_THROWS_AS(read_field(write("long.field", good + "x")), Error);
    CHECK_THROWS_AS(read_field(write("nohdr.field", "garbage\n")), Error);
    CHECK_THROWS_AS(read_field(write("f32.field", R"({"nr":4,"nt":8,"dim":1,"precision":"f32"})"
                                                  "\n")),
                    Error);
    CHECK_THROWS_AS(read_field(dir / "missing.field"), Error);
}

TEST_CASE("norm-study CSV") {
    const fs::path path = scratch_dir() / "norms.csv";
    const std::vector<NormStudyRow> rows = {{2.0, 64, 0.1 + 0.2}, {2.05, 128, 1.0000001}};
    write_norm_csv(path, rows);
    CHECK(slurp(path) == "p,nr,estimate\n2,64,0.30000000000000004\n2.05,128,1.0000001\n");
    const auto back = read_norm_csv(path);
    REQUIRE(back.size() == 2);
    CHECK(back[0].estimate == rows[0].estimate);
    CHECK(back[1].nr == 128);

    std::ofstream(path) << "a,b,c\n";
    CHECK_THROWS_AS(read_norm_csv(path), Error);
    std::ofstream(path) << "p,nr,estimate\n2,x,1\n";
    CHECK_THROWS_AS(read_norm_csv(path), Error);
}

TEST_CASE("shortest round-trip formatting") {
    CHECK(format_double(0.5) == "0.5");
    CHECK(format_double(1e-20) == "1e-20");
    for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300})
        CHECK(std::stod(format_double(x)) == x);
}
