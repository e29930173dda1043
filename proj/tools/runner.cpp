#include "runner.hpp"

#include "svg.hpp"

#include "holodisc/beltrami.hpp"
#include "holodisc/errors.hpp"
#include "holodisc/gluing.hpp"
#include "holodisc/io.hpp"
#include "holodisc/nonsqueeze.hpp"
#include "holodisc/singular.hpp"
#include "holodisc/symplin.hpp"

#include <CLI11.hpp>
#include <toml.hpp>

#include <boost/version.hpp>
#include <fmt/format.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>
#include <thread>

#ifndef HOLODISC_VERSION
#define HOLODISC_VERSION "0.0.0"
#endif

namespace holodisc::cli {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kPi = std::numbers::pi;

// ---------------------------------------------------------------------------
// Parameters

const std::map<std::string, Params>& defaults() {
    static const std::map<std::string, Params> table = {
        {"symplin-check",
         {{"N", 8}, {"count", 100}, {"scale", 0.5}, {"tol", 1e-8}, {"example_sizes", {2, 4, 8, 16}}}},
        {"opnorm-study", {{"op", "S"}, {"p", {2.0}}, {"nr", {128}}, {"trials", 50}}},
        {"beltrami-solve",
         {{"structure", "constant"},
          {"a", 0.3},
          {"nr", 96},
          {"tol", 1e-10},
          {"max_iter", 200},
          {"anderson", 0},
          {"through_point", false},
          {"point", {0.3, 0.2}}}},
        {"glue-cylinder",
         {{"a", 0.1}, {"nr", 96}, {"z0", {0.1, 0.3}}, {"w0", {0.2, 0.1}}, {"p", 2.05}, {"tol", 1e-8}}},
        {"glue-torus", {{"n", 2}, {"r", 1.0}, {"coupling", 0.2}, {"nr", 64}, {"tol", 1e-9}}},
        {"nonsqueeze",
         {{"phi", "identity"},
          {"t", 0.04},
          {"c", 0.01},
          {"N", 4},
          {"r", 1.0},
          {"R", 1.0},
          {"epsilon", 0.05},
          {"eps0", 0.05},
          {"tolerance", 0.02},
          {"nr", 64},
          {"samples", 200}}},
    };
    return table;
}

json convert_scalar(const json& def, const std::string& text, const std::string& key) {
    try {
        std::size_t used = 0;
        if (def.is_boolean()) {
            if (text == "true" || text == "1") return true;
            if (text == "false" || text == "0") return false;
            throw ConfigError("");
        }
        if (def.is_number_integer()) {
            const long long v = std::stoll(text, &used);
            if (used != text.size()) throw ConfigError("");
            return v;
        }
        if (def.is_number_float()) {
            const double v = std::stod(text, &used);
            if (used != text.size()) throw ConfigError("");
            return v;
        }
        if (def.is_string()) return text;
    } catch (const std::exception&) {
    }
    throw ConfigError(fmt::format("parameter '{}': cannot interpret '{}'", key, text));
}

json convert_toml(const json& def, const toml::node& node, const std::string& key) {
    auto fail = [&] { return ConfigError(fmt::format("parameter '{}' has the wrong type", key)); };
    if (def.is_array()) {
        const toml::array* arr = node.as_array();
        json out = json::array();
        const json elem = def.empty() ? json(0.0) : def.front();
        if (!arr) {
            out.push_back(convert_toml(elem, node, key));
            return out;
        }
        for (const auto& n : *arr) out.push_back(convert_toml(elem, n, key));
        return out;
    }
    if (def.is_boolean()) {
        if (auto v = node.value<bool>(); v && node.is_boolean()) return *v;
        throw fail();
    }
    if (def.is_number_integer()) {
        if (node.is_integer()) return node.value<long long>().value();
        throw fail();
    }
    if (def.is_number_float()) {
        if (node.is_integer() || node.is_floating_point()) return node.value<double>().value();
        throw fail();
    }
    if (def.is_string()) {
        if (node.is_string()) return node.value<std::string>().value();
        throw fail();
    }
    throw fail();
}

double num(const Params& p, const char* key) { return p.at(key).get<double>(); }
int inum(const Params& p, const char* key) { return p.at(key).get<int>(); }
std::string str(const Params& p, const char* key) { return p.at(key).get<std::string>(); }

void require(bool ok, const std::string& what) {
    if (!ok) throw ConfigError(what);
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

json versions() {
    return {{"holodisc", HOLODISC_VERSION},
            {"eigen", fmt::format("{}.{}.{}", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION, EIGEN_MINOR_VERSION)},
            {"boost", fmt::format("{}.{}.{}", BOOST_VERSION / 100000, BOOST_VERSION / 100 % 1000, BOOST_VERSION % 100)},
            {"tomlplusplus", fmt::format("{}.{}.{}", TOML_LIB_MAJOR, TOML_LIB_MINOR, TOML_LIB_PATCH)},
            {"nlohmann_json", fmt::format("{}.{}.{}", NLOHMANN_JSON_VERSION_MAJOR, NLOHMANN_JSON_VERSION_MINOR,
                                          NLOHMANN_JSON_VERSION_PATCH)},
            {"cli11", CLI11_VERSION},
            {"spdlog", fmt::format("{}.{}.{}", SPDLOG_VER_MAJOR, SPDLOG_VER_MINOR, SPDLOG_VER_PATCH)},
            {"fmt", fmt::format("{}.{}.{}", FMT_VERSION / 10000, FMT_VERSION / 100 % 100, FMT_VERSION % 100)},
            {"compiler", __VERSION__}};
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot write " + path.string());
    os << text;
}

void write_json(const fs::path& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

json history_json(const std::vector<double>& h) {
    json a = json::array();
    for (double v : h) a.push_back(v);
    return a;
}

/// Runs fn(i) for i < count on up to `threads` workers; results are written
/// by index so the order of completion does not matter.
void parallel_for(int count, int threads, const std::function<void(int)>& fn) {
    if (threads <= 1 || count <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min(threads, count); ++t)
        pool.emplace_back([&] {
            for (int i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard lock(error_mutex);
                    if (!error) error = std::current_exception();
                }
            }
        });
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

// ---------------------------------------------------------------------------
// Subcommands

struct Context {
    const Settings& s;
    Outcome& outcome;
    void save_json(const std::string& name, const json& j) const {
        write_json(s.out / name, j);
        outcome.artifacts.push_back(name);
    }
    void save_text(const std::string& name, const std::string& text) const {
        write_text(s.out / name, text);
        outcome.artifacts.push_back(name);
    }
    void save_field(const std::string& name, const GridField& f) const {
        write_field(s.out / name, f);
        outcome.artifacts.push_back(name);
    }
    std::string config_hash() const { return fmt::format("{:016x}", fnv1a(resolved_config(s).dump())); }
};

Chart history_chart(const std::string& title, const std::vector<double>& history) {
    Series s{"successive difference", {}, {}};
    for (std::size_t i = 0; i < history.size(); ++i) {
        s.x.push_back(double(i + 1));
        s.y.push_back(history[i]);
    }
    return {title, "iteration", "increment norm", true, {s}};
}

Chart norm_chart(const std::vector<NormStudyRow>& rows) {
    std::map<int, Series> by_nr;
    for (const auto& r : rows) {
        auto& s = by_nr[r.nr];
        s.label = fmt::format("nr = {}", r.nr);
        s.x.push_back(r.p);
        s.y.push_back(r.estimate);
    }
    Chart c{"operator norm estimate", "p", "estimate", false, {}};
    for (auto& [nr, s] : by_nr) {
        std::vector<std::size_t> order(s.x.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return s.x[a] < s.x[b]; });
        Series sorted{s.label, {}, {}};
        for (auto i : order) {
            sorted.x.push_back(s.x[i]);
            sorted.y.push_back(s.y[i]);
        }
        c.series.push_back(std::move(sorted));
    }
    return c;
}

Chart chain_chart(const json& report) {
    Series projected{"projected area", {}, {}}, bound{"pi (r - 2 eps)^2", {}, {}};
    const double r = report.at("r").get<double>();
    const auto& eps = report.at("chain").at("epsilon");
    const auto& area = report.at("chain").at("area");
    for (std::size_t i = 0; i < eps.size(); ++i) {
        const double e = eps[i].get<double>();
        projected.x.push_back(e);
        projected.y.push_back(area[i].get<double>());
        bound.x.push_back(e);
        bound.y.push_back(kPi * (r - 2 * e) * (r - 2 * e));
    }
    return {"area against epsilon", "epsilon", "area", false, {projected, bound}};
}

int run_symplin(const Context& ctx) {
    const Params& p = ctx.s.params;
    std::mt19937_64 rng(ctx.s.seed);
    const int N = inum(p, "N"), count = inum(p, "count");
    const double tol = num(p, "tol");
    double worst1 = 0.0, worst2 = 0.0, worst_ratio = 0.0;
    for (int i = 0; i < count; ++i) {
        const Eigen::Index n = 1 + i % N;
        const RLinearOp f = random_symplectomorphism(n, num(p, "scale"), rng);
        worst1 = std::max(worst1, preserves_omega(f, tol).max());
        worst2 = std::max(worst2, dual_identities(f, tol).max());
        worst_ratio = std::max(worst_ratio, std::abs(norm_antiholomorphic_ratio(f) - antiholomorphic_ratio_closed_form(f)));
    }
    json example = json::array();
    bool example_ok = true;
    for (const auto& size : p.at("example_sizes")) {
        const int n = size.get<int>();
        std::vector<double> c;
        for (int k = 1; k <= n; ++k) c.push_back(1.0 - std::ldexp(1.0, -k));
        const LinearACS J = build_unit_norm_example(c);
        const double normA = spectral_norm(complex_representation(J));
        const double maxc = *std::max_element(c.begin(), c.end());
        const bool tamed = is_tamed(J, 1000, ctx.s.seed);
        const bool compatible = is_compatible(J);
        example_ok = example_ok && tamed && !compatible && std::abs(normA - maxc) <= 1e-10;
        example.push_back({{"n", n}, {"norm_A", normA}, {"max_c", maxc}, {"tamed", tamed}, {"compatible", compatible}});
    }
    const bool passed = worst1 <= tol && worst2 <= tol && worst_ratio <= tol && example_ok;
    ctx.save_json("symplin.json", {{"maps", count},
                                   {"max_identity1_residual", worst1},
                                   {"max_identity2_residual", worst2},
                                   {"max_ratio_error", worst_ratio},
                                   {"unit_norm_example", example},
                                   {"passed", passed},
                                   {"config_hash", ctx.config_hash()}});
    return passed ? kSuccess : kFailure;
}

FieldOperator named_operator(const std::string& op) {
    if (op == "S") return [](const GridField& f) { return beurling_S(f); };
    if (op == "S1") return op_S1;
    if (op == "S2") return op_S2;
    if (op == "T") return cauchy_T;
    if (op == "T1") return op_T1;
    if (op == "T2") return [](const GridField& f) { return op_T2(f); };
    throw ConfigError("unknown operator '" + op + "'");
}

int run_opnorm(const Context& ctx) {
    const Params& p = ctx.s.params;
    const FieldOperator op = named_operator(str(p, "op"));
    std::vector<NormStudyRow> rows;
    for (const auto& nr : p.at("nr"))
        for (const auto& pp : p.at("p")) rows.push_back({pp.get<double>(), nr.get<int>(), 0.0});
    std::map<int, GridPtr> grids;
    for (const auto& r : rows) grids.try_emplace(r.nr, make_grid(r.nr));
    parallel_for(int(rows.size()), ctx.s.threads, [&](int i) {
        auto& r = rows[std::size_t(i)];
        spdlog::debug("opnorm-study: op={} p={} nr={}", str(p, "op"), r.p, r.nr);
        r.estimate = estimate_opnorm(op, grids.at(r.nr), r.p, inum(p, "trials"), ctx.s.seed).estimate;
    });
    write_norm_csv(ctx.s.out / "opnorm.csv", rows);
    ctx.outcome.artifacts.push_back("opnorm.csv");
    if (ctx.s.plots) ctx.save_text("opnorm.svg", render_svg(norm_chart(rows)));
    return kSuccess;
}

StructureField beltrami_structure(const std::string& kind, double a) {
    if (kind == "constant") return StructureField::constant(CMatrix::Constant(1, 1, a));
    if (kind == "tanh")
        return StructureField(
            1,
            [a](const CVector& z) {
                return CMatrix::Constant(1, 1, a * std::tanh(std::abs(z(0))) * std::exp(cplx(0, z(0).real())));
            },
            std::abs(a));
    throw ConfigError("unknown structure '" + kind + "'");
}

int run_beltrami(const Context& ctx) {
    const Params& p = ctx.s.params;
    const double a = num(p, "a");
    const StructureField A = beltrami_structure(str(p, "structure"), a);
    const GridPtr grid = make_grid(inum(p, "nr"));
    SolveOptions opt;
    opt.tol = num(p, "tol");
    opt.max_iter = inum(p, "max_iter");
    opt.anderson_depth = inum(p, "anderson");

    json sidecar{{"config_hash", ctx.config_hash()}};
    DiscSolution sol = [&] {
        if (p.at("through_point").get<bool>()) {
            ThroughPointOptions tp;
            tp.solve = opt;
            CVector pt(1), v(1);
            pt(0) = cplx(p.at("point")[0].get<double>(), p.at("point")[1].get<double>());
            v(0) = 1.0;
            ThroughPointResult r = disc_through_point(A, grid, pt, v, 1.0, tp);
            sidecar["centre_error"] = r.centre_error;
            sidecar["direction_angle"] = r.direction_angle;
            sidecar["scale"] = r.t0;
            sidecar["newton_iterations"] = r.newton_iterations;
            return std::move(r.disc);
        }
        return solve_local(A, GridField::sample(grid, [](cplx z) { return z; }), opt);
    }();
    sidecar["converged"] = sol.converged;
    sidecar["iterations"] = sol.iterations;
    sidecar["residual_pde"] = sol.residual_pde;
    if (sol.history.size() >= 3) sidecar["iterate_ratio"] = sol.history[sol.history.size() - 2] / sol.history[sol.history.size() - 3];
    if (str(p, "structure") == "constant" && !p.at("through_point").get<bool>()) {
        const GridField exact = GridField::sample(grid, [a](cplx z) { return z + a * std::conj(z); });
        sidecar["error_vs_exact"] = max_norm(sol.Z - exact);
    }
    sidecar["history"] = history_json(sol.history);
    ctx.save_json("beltrami.json", sidecar);
    ctx.save_field("beltrami.field", sol.Z);
    if (ctx.s.plots) ctx.save_text("residual.svg", render_svg(history_chart("Picard iteration", sol.history)));
    return kSuccess;
}

int run_cylinder(const Context& ctx) {
    const Params& p = ctx.s.params;
    const double a = num(p, "a");
    const GridPtr grid = make_grid(inum(p, "nr"));
    CMatrix M = CMatrix::Zero(2, 2);
    M(0, 0) = M(1, 1) = a;
    CylinderProblem problem{a == 0.0 ? StructureField::zero(2) : StructureField::constant(M),
                            cplx(p.at("z0")[0].get<double>(), p.at("z0")[1].get<double>()),
                            CVector::Constant(1, cplx(p.at("w0")[0].get<double>(), p.at("w0")[1].get<double>()))};
    CylinderOptions opt;
    opt.p = num(p, "p");
    opt.tol = num(p, "tol");
    const CylinderSolution sol = solve_cylinder(problem, grid, opt);
    ctx.save_json("cylinder.json", {{"converged", sol.disc.converged},
                                    {"iterations", sol.disc.iterations},
                                    {"residual_boundary", sol.disc.residual_boundary},
                                    {"residual_pde", sol.disc.residual_pde},
                                    {"area", sol.disc.area},
                                    {"area_interior", sol.area_interior},
                                    {"w_trace_drift", sol.w_trace_drift},
                                    {"tau", {sol.tau.real(), sol.tau.imag()}},
                                    {"history", history_json(sol.disc.history)},
                                    {"config_hash", ctx.config_hash()}});
    ctx.save_field("cylinder.field", sol.disc.Z);
    if (ctx.s.plots) ctx.save_text("residual.svg", render_svg(history_chart("cylinder outer iteration", sol.disc.history)));
    return kSuccess;
}

int run_torus(const Context& ctx) {
    const Params& p = ctx.s.params;
    const double k = num(p, "coupling");
    TorusProblem problem;
    problem.a = [k](cplx, cplx w) { return k * w; };
    problem.b = [k](cplx z, cplx w) { return k * w * std::conj(z); };
    problem.a0 = problem.b0 = std::abs(k);
    problem.r = num(p, "r");
    problem.n = inum(p, "n");
    problem.V = problem.r;
    TorusOptions opt;
    opt.tol = num(p, "tol");
    const TorusSolution sol = solve_torus(problem, make_grid(inum(p, "nr")), opt);
    ctx.save_json("torus.json", {{"converged", sol.disc.converged},
                                 {"iterations", sol.disc.iterations},
                                 {"modulus_z_residual", sol.modulus_z},
                                 {"modulus_w_residual", sol.modulus_w},
                                 {"normalisation_residual", sol.normalisation},
                                 {"winding", sol.winding},
                                 {"decay_constant", sol.decay_constant},
                                 {"residual_pde", sol.disc.residual_pde},
                                 {"area", sol.disc.area},
                                 {"history", history_json(sol.disc.history)},
                                 {"config_hash", ctx.config_hash()}});
    ctx.save_field("torus.field", sol.disc.Z);
    if (ctx.s.plots) ctx.save_text("residual.svg", render_svg(history_chart("torus iteration", sol.disc.history)));
    return kSuccess;
}

SymplecticMap named_map(const Params& p, std::uint64_t seed) {
    const std::string phi = str(p, "phi");
    const Eigen::Index N = inum(p, "N");
    if (phi == "identity") return identity_map(N);
    if (phi == "rotation") {
        std::mt19937_64 rng(seed);
        std::uniform_real_distribution<double> angle(0.0, 2 * kPi);
        RVector phases(N);
        for (Eigen::Index j = 0; j < N; ++j) phases(j) = angle(rng);
        return rotation_map(phases);
    }
    if (phi == "quadratic") return quadratic_flow(random_quadratic_hamiltonian(N, seed), num(p, "t"));
    if (phi == "cubic-shear") return cubic_shear(N, num(p, "c"));
    throw ConfigError("unknown map '" + phi + "'");
}

int run_nonsqueeze(const Context& ctx) {
    const Params& p = ctx.s.params;
    const SymplecticMap phi = named_map(p, ctx.s.seed);
    SqueezeOptions opt;
    opt.epsilon = num(p, "epsilon");
    opt.eps0 = num(p, "eps0");
    opt.tolerance = num(p, "tolerance");
    opt.samples = inum(p, "samples");
    opt.seed = ctx.s.seed;
    const SqueezeReport rep = nonsqueezing_experiment(phi, num(p, "r"), num(p, "R"), make_grid(inum(p, "nr")), opt);
    const json report{{"map", rep.map},
                      {"r", rep.r},
                      {"R", rep.R},
                      {"epsilon", rep.epsilon},
                      {"structure_sup", rep.bound.sup},
                      {"structure_lipschitz", rep.bound.lipschitz},
                      {"structure_c1", rep.bound.c1()},
                      {"bound_certified", rep.bound_certified},
                      {"disc_area", rep.disc_area},
                      {"disc_area_boundary", rep.disc_area_boundary},
                      {"lower_bound", rep.lower_bound},
                      {"projected_area", rep.projected_area},
                      {"cut_area", rep.cut_area},
                      {"chain", {{"epsilon", rep.chain_epsilon}, {"area", rep.chain_area}}},
                      {"point_residual", rep.point_residual},
                      {"iterations", rep.iterations},
                      {"verdict", rep.verdict},
                      {"failure", rep.failure},
                      {"config_hash", ctx.config_hash()}};
    ctx.save_json("nonsqueeze.json", report);
    if (ctx.s.plots && !rep.chain_epsilon.empty()) ctx.save_text("area.svg", render_svg(chain_chart(report)));
    if (rep.failure == "perturbation did not converge") return kNoConvergence;
    return rep.verdict ? kSuccess : kFailure;
}

spdlog::level::level_enum log_level_from_env() {
    const char* env = std::getenv("HOLODISC_LOG");
    if (!env || !*env) return spdlog::level::warn;
    const auto level = spdlog::level::from_str(env);
    if (level == spdlog::level::off && std::string(env) != "off") return spdlog::level::warn;
    return level;
}

}  // namespace

// ---------------------------------------------------------------------------

const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names = {"symplin-check", "opnorm-study", "beltrami-solve",
                                                   "glue-cylinder", "glue-torus",   "nonsqueeze"};
    return names;
}

Params default_params(const std::string& subcommand) {
    const auto it = defaults().find(subcommand);
    if (it == defaults().end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
    return it->second;
}

void apply_config(Settings& s, const std::string& toml_text, const std::string& source) {
    toml::table doc;
    try {
        doc = toml::parse(toml_text, source);
    } catch (const toml::parse_error& e) {
        std::ostringstream msg;
        msg << "invalid TOML in " << source << ": " << e.description() << " (line " << e.source().begin.line
            << ", column " << e.source().begin.column << ")";
        throw ConfigError(msg.str());
    }
    if (s.params.is_null()) s.params = default_params(s.subcommand);
    for (const auto& [key, node] : doc) {
        const std::string k(key.str());
        if (k == "seed") {
            require(node.is_integer() && node.value<long long>().value() >= 0, "seed must be a nonnegative integer");
            s.seed = std::uint64_t(node.value<long long>().value());
        } else if (k == "threads") {
            require(node.is_integer(), "threads must be an integer");
            s.threads = int(node.value<long long>().value());
        } else if (k == "out") {
            require(node.is_string(), "out must be a string");
            s.out = node.value<std::string>().value();
        } else if (k == "plots") {
            require(node.is_boolean(), "plots must be a boolean");
            s.plots = node.value<bool>().value();
        } else if (k == "subcommand") {
            require(node.is_string() && node.value<std::string>().value() == s.subcommand,
                    "config is for subcommand '" + node.value_or(std::string("?")) + "'");
        } else if (defaults().count(k)) {
            require(node.is_table(), "[" + k + "] must be a table");
            if (k != s.subcommand) continue;
            for (const auto& [pk, pn] : *node.as_table()) {
                const std::string name(pk.str());
                require(s.params.contains(name), "unknown parameter '" + name + "' in [" + k + "]");
                s.params[name] = convert_toml(s.params[name], pn, name);
            }
        } else {
            throw ConfigError("unknown key '" + k + "' in " + source);
        }
    }
}

void apply_override(Settings& s, const std::string& key, const std::vector<std::string>& values) {
    if (s.params.is_null()) s.params = default_params(s.subcommand);
    require(s.params.contains(key), "unknown parameter '" + key + "'");
    json& slot = s.params[key];
    if (slot.is_array()) {
        const json elem = slot.empty() ? json(0.0) : slot.front();
        json out = json::array();
        for (const auto& v : values) {
            std::stringstream ss(v);
            std::string item;
            while (std::getline(ss, item, ','))
                if (!item.empty()) out.push_back(convert_scalar(elem, item, key));
        }
        require(!out.empty(), "parameter '" + key + "' needs at least one value");
        slot = out;
    } else {
        require(values.size() == 1, "parameter '" + key + "' takes one value");
        slot = convert_scalar(slot, values.front(), key);
    }
}

void validate(const Settings& s) {
    const Params& p = s.params;
    require(s.threads >= 1, "threads must be >= 1");
    require(!s.out.empty(), "output directory must not be empty");
    auto positive = [&](const char* key) { require(num(p, key) > 0.0, fmt::format("{} must be positive", key)); };
    auto positive_int = [&](const char* key) { require(inum(p, key) > 0, fmt::format("{} must be positive", key)); };
    auto grid_size = [&](int nr) { require(nr >= 4 && nr <= 1024, "nr must lie in [4, 1024]"); };
    auto pair = [&](const char* key) { require(p.at(key).size() == 2, fmt::format("{} needs two entries (re, im)", key)); };
    const std::string& sub = s.subcommand;
    if (sub == "symplin-check") {
        positive_int("N");
        positive_int("count");
        positive("scale");
        positive("tol");
        for (const auto& n : p.at("example_sizes")) require(n.get<int>() > 0, "example_sizes must be positive");
    } else if (sub == "opnorm-study") {
        named_operator(str(p, "op"));
        for (const auto& v : p.at("p")) require(v.get<double>() > 1.0, "p must exceed 1");
        for (const auto& v : p.at("nr")) grid_size(v.get<int>());
        positive_int("trials");
    } else if (sub == "beltrami-solve") {
        require(std::abs(num(p, "a")) < 1.0, "|a| must be < 1");
        beltrami_structure(str(p, "structure"), num(p, "a"));
        grid_size(inum(p, "nr"));
        positive("tol");
        positive_int("max_iter");
        require(inum(p, "anderson") >= 0, "anderson must be >= 0");
        pair("point");
    } else if (sub == "glue-cylinder") {
        require(num(p, "a") >= 0.0 && num(p, "a") < 1.0, "a must lie in [0, 1)");
        grid_size(inum(p, "nr"));
        pair("z0");
        pair("w0");
        require(num(p, "p") > 2.0, "p must exceed 2");
        positive("tol");
        require(inside_triangle(cplx(p.at("z0")[0].get<double>(), p.at("z0")[1].get<double>()), 0.0),
                "z0 must lie inside the triangle");
    } else if (sub == "glue-torus") {
        require(inum(p, "n") >= 0, "n must be >= 0");
        require(num(p, "r") > 0.0 && num(p, "r") <= 1.0, "r must lie in (0, 1]");
        require(std::abs(num(p, "coupling")) < 0.5, "|coupling| must be < 0.5");
        grid_size(inum(p, "nr"));
        positive("tol");
    } else if (sub == "nonsqueeze") {
        named_map(p, s.seed);
        positive_int("N");
        positive("r");
        positive("R");
        require(num(p, "epsilon") >= 0.0 && 2 * num(p, "epsilon") < num(p, "r"), "need 0 <= epsilon < r/2");
        positive("eps0");
        positive("tolerance");
        positive("t");
        positive("c");
        grid_size(inum(p, "nr"));
        positive_int("samples");
    }
}

Params resolved_config(const Settings& s) {
    return {{"subcommand", s.subcommand}, {"seed", s.seed}, {"plots", s.plots}, {"params", s.params}};
}

Outcome execute(const Settings& s) {
    Outcome outcome;
    fs::create_directories(s.out);
    const Context ctx{s, outcome};
    const auto start = std::chrono::steady_clock::now();
    try {
        if (s.subcommand == "symplin-check") outcome.code = run_symplin(ctx);
        else if (s.subcommand == "opnorm-study") outcome.code = run_opnorm(ctx);
        else if (s.subcommand == "beltrami-solve") outcome.code = run_beltrami(ctx);
        else if (s.subcommand == "glue-cylinder") outcome.code = run_cylinder(ctx);
        else if (s.subcommand == "glue-torus") outcome.code = run_torus(ctx);
        else if (s.subcommand == "nonsqueeze") outcome.code = run_nonsqueeze(ctx);
        else throw ConfigError("unknown subcommand '" + s.subcommand + "'");
    } catch (const ConvergenceError& e) {
        outcome.code = kNoConvergence;
        outcome.message = e.what();
        ctx.save_json("failure.json", {{"error", e.what()}, {"history", history_json(e.history())}});
    } catch (const DomainError& e) {
        outcome.code = kConfigError;
        outcome.message = e.what();
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_text(s.out / "walltime.txt", fmt::format("wall_seconds {:.3f}\n", wall));
    json manifest{{"tool", "holodisc"},
                  {"config", resolved_config(s)},
                  {"versions", versions()},
                  {"artifacts", outcome.artifacts},
                  {"exit_code", outcome.code}};
    if (!outcome.message.empty()) manifest["message"] = outcome.message;
    write_json(s.out / "manifest.json", manifest);
    return outcome;
}

std::vector<fs::path> emit_plots(const std::vector<fs::path>& reports, const fs::path& out_dir) {
    for (const auto& r : reports)
        if (!fs::is_regular_file(r)) throw ConfigError("missing report " + r.string());
    std::vector<fs::path> written;
    if (reports.empty()) return written;
    fs::create_directories(out_dir);
    for (const auto& r : reports) {
        Chart chart;
        if (r.extension() == ".csv") {
            try {
                chart = norm_chart(read_norm_csv(r));
            } catch (const Error& e) {
                throw ConfigError(e.what());
            }
        } else {
            std::ifstream is(r);
            json j;
            try {
                j = json::parse(is);
            } catch (const json::exception& e) {
                throw ConfigError("unreadable report " + r.string() + ": " + e.what());
            }
            if (j.contains("chain"))
                chart = chain_chart(j);
            else if (j.contains("history"))
                chart = history_chart(r.stem().string(), j.at("history").get<std::vector<double>>());
            else
                throw ConfigError("report " + r.string() + " has nothing to plot");
        }
        const fs::path target = out_dir / (r.stem().string() + ".svg");
        write_text(target, render_svg(chart));
        written.push_back(target);
    }
    return written;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
    auto logger = spdlog::get("holodisc");
    if (!logger) logger = spdlog::stderr_color_mt("holodisc");
    spdlog::set_default_logger(logger);
    spdlog::set_level(log_level_from_env());

    CLI::App app{"Pseudoholomorphic discs on a polar grid: batch experiments"};
    app.set_version_flag("--version", HOLODISC_VERSION);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path, out_dir;
    std::uint64_t seed = 0;
    int threads = 0;
    bool dry_run = false, plots = false;
    auto* o_config = app.add_option("--config", config_path, "TOML configuration file");
    auto* o_out = app.add_option("--out", out_dir, "output directory");
    auto* o_seed = app.add_option("--seed", seed, "random seed");
    auto* o_threads = app.add_option("--threads", threads, "worker threads");
    app.add_flag("--dry-run", dry_run, "validate and print the resolved plan");
    auto* o_plots = app.add_flag("--plots", plots, "also write SVG plots");

    std::map<std::string, std::map<std::string, std::vector<std::string>>> raw;
    std::map<std::string, CLI::App*> subs;
    const std::map<std::string, std::string> blurbs = {
        {"symplin-check", "random linear symplectic maps and structure norms"},
        {"opnorm-study", "L^p norms of the discrete singular operators"},
        {"beltrami-solve", "local disc for an almost complex structure"},
        {"glue-cylinder", "disc in the triangle-times-plane cylinder"},
        {"glue-torus", "disc with torus boundary condition"},
        {"nonsqueeze", "disc-filling experiment for a symplectic map"},
    };
    for (const auto& name : subcommands()) {
        CLI::App* sub = app.add_subcommand(name, blurbs.at(name));
        subs[name] = sub;
        const Params defaults_for = default_params(name);
        for (const auto& [key, def] : defaults_for.items()) {
            auto* opt = sub->add_option("--" + key, raw[name][key], fmt::format("default {}", def.dump()));
            if (def.is_array()) opt->delimiter(',');
        }
    }
    std::vector<std::string> report_paths;
    CLI::App* plot = app.add_subcommand("plot", "render SVG plots from existing reports");
    plot->add_option("reports", report_paths, "norm-study CSV or JSON reports");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kConfigError;
    }

    try {
        if (plot->parsed()) {
            const fs::path dir = o_out->count() ? fs::path(out_dir) : fs::path(".");
            if (dry_run) {
                for (const auto& r : report_paths) std::cout << "plot " << r << " -> " << dir.string() << "\n";
                return kSuccess;
            }
            emit_plots({report_paths.begin(), report_paths.end()}, dir);
            return kSuccess;
        }
        Settings s;
        for (const auto& [name, sub] : subs)
            if (sub->parsed()) s.subcommand = name;
        s.params = default_params(s.subcommand);
        if (o_config->count()) {
            std::ifstream is(config_path);
            if (!is) throw ConfigError("cannot read config " + config_path);
            std::stringstream buf;
            buf << is.rdbuf();
            apply_config(s, buf.str(), config_path);
        }
        for (const auto& [key, values] : raw[s.subcommand])
            if (subs[s.subcommand]->get_option("--" + key)->count()) apply_override(s, key, values);
        if (o_out->count()) s.out = out_dir;
        if (o_seed->count()) s.seed = seed;
        if (o_threads->count()) s.threads = threads;
        if (o_plots->count()) s.plots = plots;
        s.dry_run = dry_run;
        validate(s);

        if (s.dry_run) {
            json plan = resolved_config(s);
            plan["out"] = s.out.string();
            plan["threads"] = s.threads;
            std::cout << plan.dump(2) << "\n";
            return kSuccess;
        }
        spdlog::info("{}: writing to {}", s.subcommand, s.out.string());
        const Outcome outcome = execute(s);
        if (!outcome.message.empty()) std::cerr << "holodisc: " << outcome.message << "\n";
        return outcome.code;
    } catch (const ConfigError& e) {
        std::cerr << "holodisc: configuration error: " << e.what() << "\n";
        return kConfigError;
    } catch (const std::exception& e) {
        std::cerr << "holodisc: " << e.what() << "\n";
        return kFailure;
    }
}

}  // namespace holodisc::cli
