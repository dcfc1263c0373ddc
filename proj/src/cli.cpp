#include "entrogas/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <sstream>
#include <variant>

#include <CLI11.hpp>
#include <json.hpp>

#include "entrogas/analytic.hpp"
#include "entrogas/finiten.hpp"
#include "entrogas/sampler.hpp"

namespace entrogas::cli {

namespace {

using Cell = std::variant<std::monostate, double, long long, bool, std::string>;

struct Table {
    std::vector<std::string> cols;
    std::vector<std::vector<Cell>> rows;
};

std::string fmt(double x)
{
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return {buf, r.ptr};
}

std::string csv_field(const Cell& c)
{
    struct V {
        std::string operator()(std::monostate) const { return ""; }
        std::string operator()(double x) const { return fmt(x); }
        std::string operator()(long long x) const { return std::to_string(x); }
        std::string operator()(bool b) const { return b ? "true" : "false"; }
        std::string operator()(const std::string& s) const
        {
            if (s.find_first_of(",\"\n") == std::string::npos) return s;
            std::string q = "\"";
            for (char ch : s)
                q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
            return q + "\"";
        }
    };
    return std::visit(V{}, c);
}

nlohmann::ordered_json json_field(const Cell& c)
{
    struct V {
        nlohmann::ordered_json operator()(std::monostate) const { return nullptr; }
        nlohmann::ordered_json operator()(double x) const
        {
            return std::isfinite(x) ? nlohmann::ordered_json(x) : nlohmann::ordered_json(nullptr);
        }
        nlohmann::ordered_json operator()(long long x) const { return x; }
        nlohmann::ordered_json operator()(bool b) const { return b; }
        nlohmann::ordered_json operator()(const std::string& s) const { return s; }
    };
    return std::visit(V{}, c);
}

nlohmann::ordered_json row_object(const Table& t, const std::vector<Cell>& row)
{
    nlohmann::ordered_json o = nlohmann::ordered_json::object();
    for (std::size_t i = 0; i < t.cols.size(); ++i)
        o[t.cols[i]] = json_field(row[i]);
    return o;
}

// single: a one-row table prints as a bare object in JSON
void write(std::ostream& os, const Table& t, const std::string& format, bool single = false)
{
    if (format == "json") {
        if (single && t.rows.size() == 1) {
            os << row_object(t, t.rows.front()).dump(2) << '\n';
            return;
        }
        nlohmann::ordered_json a = nlohmann::ordered_json::array();
        for (const auto& r : t.rows)
            a.push_back(row_object(t, r));
        os << a.dump(2) << '\n';
        return;
    }
    for (std::size_t i = 0; i < t.cols.size(); ++i)
        os << (i ? "," : "") << t.cols[i];
    os << '\n';
    for (const auto& r : t.rows) {
        for (std::size_t i = 0; i < r.size(); ++i)
            os << (i ? "," : "") << csv_field(r[i]);
        os << '\n';
    }
}

Cell opt(const std::optional<double>& v) { return v ? Cell(*v) : Cell(); }

class ArgError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

int exit_code(ErrorCode c)
{
    switch (c) {
    case ErrorCode::NoSignChange:
    case ErrorCode::NoConvergence:
    case ErrorCode::NoCrossing:
    case ErrorCode::NoBirth:
    case ErrorCode::CollidingEigenvalues:
    case ErrorCode::BasinEscape: return NumericalError;
    default: return ArgumentError;
    }
}

std::vector<std::pair<std::string, std::string>> read_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in) throw ArgError("cannot read config file " + path);
    std::vector<std::pair<std::string, std::string>> kv;
    std::string line;
    int no = 0;
    auto trim = [](std::string s) {
        const auto a = s.find_first_not_of(" \t\r");
        if (a == std::string::npos) return std::string();
        const auto b = s.find_last_not_of(" \t\r");
        return s.substr(a, b - a + 1);
    };
    while (std::getline(in, line)) {
        ++no;
        line = trim(line);
        if (line.empty() || line[0] == '#') continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ArgError(path + ":" + std::to_string(no) + ": expected key=value");
        kv.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return kv;
}

// Config entries become flags for the selected subcommand unless given on the command line.
std::vector<std::string> merge_config(const std::vector<std::string>& args, CLI::App& app, std::ostream& err)
{
    std::string path;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw ArgError("--config needs a path");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            out.push_back(args[i]);
        }
    }
    if (path.empty() || out.empty()) return out;
    CLI::App* sub = nullptr;
    for (auto* s : app.get_subcommands({}))
        if (s->get_name() == out.front()) sub = s;
    if (!sub) return out;
    auto given = [&](const std::string& key) {
        for (const auto& a : out)
            if (a == "--" + key || a.rfind("--" + key + "=", 0) == 0) return true;
        return false;
    };
    for (const auto& [k, v] : read_config(path)) {
        const CLI::Option* o = sub->get_option_no_throw("--" + k);
        if (!o) {
            err << "warning: config key '" << k << "' does not apply to " << sub->get_name() << '\n';
            continue;
        }
        if (given(k)) continue;
        out.push_back("--" + k + "=" + v);
    }
    return out;
}

struct Common {
    std::string format;
    std::string output;
};

void add_common(CLI::App* s, Common& c)
{
    s->add_option("--format", c.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    s->add_option("--output", c.output, "write data to this file instead of stdout");
}

std::vector<BranchKind> meta_kinds()
{
    return {BranchKind::MetaWishartProlong, BranchKind::MetaTwoSidedLow, BranchKind::MetaTwoSidedHigh,
            BranchKind::MetaSymmetric};
}

ThermoPoint resolve_point(double beta, const std::string& branch)
{
    if (branch == "stable") return thermo(beta, stable_branch(beta, Scaling::Alpha3));
    if (branch == "separable") return thermo_separable(beta);
    if (branch == "metastable") {
        for (auto k : meta_kinds())
            if (in_window(beta, k)) return thermo(beta, k);
        throw Error(ErrorCode::OutOfBranch, "no metastable branch at beta = " + fmt(beta));
    }
    const auto k = branch_from_string(branch);
    if (!k) throw ArgError("unknown branch '" + branch + "'");
    if (*k == BranchKind::SeparableSea) return thermo_separable(beta);
    return thermo(beta, *k);
}

Table cmd_critical()
{
    const auto c = critical_points();
    return {{"beta_plus", "beta_g", "beta_minus", "mu_minus"}, {{c.beta_plus, c.beta_g, c.beta_minus, c.mu_minus}}};
}

Table cmd_scan(double lo, double hi, int steps, const std::string& branch, bool& any_ok)
{
    if (!std::isfinite(lo) || !std::isfinite(hi) || steps < 1 || lo > hi || (steps > 1 && lo == hi))
        throw ArgError("scan needs finite beta-min < beta-max and steps >= 1 (beta-min == beta-max only with steps = 1)");
    if (branch != "stable" && branch != "metastable" && branch != "separable")
        throw ArgError("--branch must be stable, metastable or separable");
    const long long alpha = branch == "separable" ? 2 : 3;
    Table t{{"beta", "kind", "m", "delta", "u", "s", "betaf", "mu", "lambda_min", "lambda_max", "alpha", "error"}, {}};
    std::vector<std::vector<std::vector<Cell>>> per(static_cast<std::size_t>(steps));
    parallel_for(per.size(), 0, [&](std::size_t i) {
        const double b = steps == 1 ? lo : lo + (hi - lo) * double(i) / double(steps - 1);
        std::vector<ThermoPoint> pts;
        std::string error;
        try {
            if (branch == "stable") pts.push_back(thermo(b, stable_branch(b, Scaling::Alpha3)));
            if (branch == "separable") pts.push_back(thermo_separable(b));
            if (branch == "metastable")
                for (auto k : meta_kinds())
                    if (in_window(b, k)) pts.push_back(thermo(b, k));
            if (pts.empty()) error = "OutOfBranch: no metastable branch at this beta";
        } catch (const Error& e) {
            pts.clear();
            error = e.what();
        }
        for (const auto& p : pts)
            per[i].push_back({b, std::string(to_string(p.kind)), p.m, p.delta, p.u, p.s, p.betaf, opt(p.mu),
                              p.m - p.delta, p.m + p.delta, alpha, Cell()});
        if (pts.empty())
            per[i].push_back({b, Cell(), Cell(), Cell(), Cell(), Cell(), Cell(), Cell(), Cell(), Cell(), alpha, error});
    });
    any_ok = false;
    for (auto& rows : per)
        for (auto& r : rows) {
            any_ok = any_ok || std::holds_alternative<std::monostate>(r.back());
            t.rows.push_back(std::move(r));
        }
    return t;
}

Table cmd_density(double beta, const std::string& branch, int points)
{
    if (points < 2) throw ArgError("density needs --points >= 2");
    const auto p = resolve_point(beta, branch);
    Table t{{"x", "lambda", "rho"}, {}};
    for (int k = 0; k < points; ++k) {
        // cosine spacing clusters points at the edges, where the density changes fastest
        const double x = -std::cos(std::numbers::pi * (k + 0.5) / points);
        t.rows.push_back({x, p.m + p.delta * x, density(p, x) / p.delta});
    }
    return t;
}

Table cmd_purity(int n, const std::string& grid, bool volume, std::ostream& err)
{
    if (n < 2) throw ArgError("--n must be >= 2");
    Table t{{"pi", volume ? "log_volume" : "s"}, {}};
    for (double pi : parse_grid(grid)) {
        if (!(pi > 1.0 / n && pi < 1.0)) {
            err << "warning: purity " << fmt(pi) << " outside (1/n, 1) skipped\n";
            continue;
        }
        t.rows.push_back({pi, volume ? volume_of_purity(pi, n) : entropy_of_purity(pi, n)});
    }
    return t;
}

struct FiniteArgs {
    int n = 30;
    std::uint64_t seed = 0;
    std::string beta_grid, profile_grid;
    std::optional<double> beta;
    bool crossing = false, birth = false, minima = false;
};

Table cmd_finite_n(const FiniteArgs& a)
{
    const int modes = !a.beta_grid.empty() + !a.profile_grid.empty() + a.crossing + a.birth;
    if (modes != 1) throw ArgError("finite-n needs exactly one of --beta-grid, --profile-mu, --crossing, --birth");
    if (a.n < 2) throw ArgError("--n must be >= 2");
    if (a.crossing) return {{"n", "beta_minus_n"}, {{(long long)a.n, find_crossing(a.n, a.seed)}}};
    if (a.birth) return {{"n", "beta_mu_n"}, {{(long long)a.n, find_birth(a.n)}}};
    FiniteNConfig c;
    c.n = a.n;
    c.seed = a.seed;
    if (!a.profile_grid.empty()) {
        if (!a.beta) throw ArgError("--profile-mu needs --beta");
        c.beta = *a.beta;
        const auto g = parse_grid(a.profile_grid);
        if (a.minima) {
            Table t{{"mu", "betaf_n"}, {}};
            for (const auto& m : profile_minima(c, g))
                t.rows.push_back({m.mu, m.betaf_n});
            return t;
        }
        Table t{{"mu", "betaf_n", "slope", "converged", "error"}, {}};
        for (const auto& p : profile_mu(c, g))
            t.rows.push_back({p.mu, p.converged ? Cell(p.betaf_n) : Cell(), p.converged ? Cell(p.slope) : Cell(),
                              p.converged, p.error.empty() ? Cell() : Cell(p.error)});
        return t;
    }
    const auto g = parse_grid(a.beta_grid);
    std::vector<FiniteNResult> res(g.size(), FiniteNResult{});
    parallel_for(g.size(), 0, [&](std::size_t i) {
        FiniteNConfig ci = c;
        ci.beta = g[i];
        res[i] = analyze_finite_n(ci);
    });
    Table t{{"beta", "basin", "mu", "betaf_n", "global", "kkt_residual", "on_wall", "mu_theory"}, {}};
    for (const auto& r : res)
        for (std::size_t k = 0; k < r.minima.size(); ++k) {
            const auto& m = r.minima[k];
            t.rows.push_back({r.beta, std::string(to_string(m.basin)), m.mu, m.betaf_n, k == r.global, m.kkt_residual,
                              m.on_wall, r.beta < 0 ? Cell(mu_theory_curve(a.n, r.beta)) : Cell()});
        }
    return t;
}

struct SampleArgs {
    int n = 64;
    double beta = 0.0;
    int alpha = 3;
    long long sweeps = 10000;
    std::uint64_t seed = 0;
    int chains = 1;
    bool induced = false;
    int count = 1000;
    int bins = 100;
    double hist_lo = 0.0, hist_hi = 5.0;
    std::string stats_out;
};

void cmd_sample(const SampleArgs& a, const std::string& format, std::ostream& out)
{
    SampleStats s;
    if (a.induced) {
        s = spectra_stats(sample_induced(a.n, a.count, a.seed), a.hist_lo, a.hist_hi, a.bins);
    } else {
        MetropolisConfig c;
        c.n = a.n;
        c.beta = a.beta;
        c.alpha = a.alpha;
        c.sweeps = a.sweeps;
        c.seed = a.seed;
        c.chains = a.chains;
        c.hist_lo = a.hist_lo;
        c.hist_hi = a.hist_hi;
        c.bins = a.bins;
        s = metropolis_run(c);
    }
    Table stats{{"mode", "n", "beta", "alpha", "seed", "samples", "purity_mean", "purity_var", "max_mean",
                 "acceptance", "step_scale", "weight_drift", "trace_error", "ks_wishart", "ks_semicircle"},
                {}};
    const bool wishart_ref = a.induced || a.beta == 0.0;
    const bool semi_ref = !a.induced && a.alpha == 3 && a.beta >= kBetaPlus;
    stats.rows.push_back({std::string(a.induced ? "induced" : "metropolis"), (long long)a.n,
                          a.induced ? 0.0 : a.beta, (long long)a.alpha, (long long)a.seed, s.samples, s.purity_mean,
                          s.purity_var, s.max_mean, s.acceptance, a.induced ? Cell() : Cell(s.step_scale),
                          a.induced ? Cell() : Cell(s.weight_drift), a.induced ? Cell() : Cell(s.trace_error),
                          wishart_ref ? Cell(ks_distance(s.histogram, wishart_cdf)) : Cell(),
                          semi_ref ? Cell(ks_distance(s.histogram, [&](double x) { return semicircle_cdf(x, a.beta); }))
                                   : Cell()});
    if (!a.stats_out.empty()) {
        std::ofstream f(a.stats_out);
        if (!f) throw ArgError("cannot write " + a.stats_out);
        write(f, stats, "json", true);
    }
    if (format == "json") {
        write(out, stats, "json", true);
        return;
    }
    Table h{{"bin_lo", "bin_hi", "count", "density"}, {}};
    const double tot = double(s.histogram.total());
    for (std::size_t k = 0; k < s.histogram.bins(); ++k)
        h.rows.push_back({s.histogram.edge(k), s.histogram.edge(k + 1), s.histogram.counts[k],
                          tot > 0 ? double(s.histogram.counts[k]) / (tot * s.histogram.width()) : 0.0});
    write(out, h, "csv");
}

Table cmd_series(int order)
{
    if (order < 0) throw ArgError("--order must be >= 0");
    Table t{{"k", "value"}, {}};
    const auto s = planar_map_series(order);
    for (std::size_t k = 0; k < s.size(); ++k)
        t.rows.push_back({(long long)k, (long long)s[k]});
    return t;
}

} // namespace

std::vector<double> parse_grid(const std::string& spec)
{
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');)
        parts.push_back(p);
    if (parts.size() != 3) throw ArgError("grid must be min:max:count, got '" + spec + "'");
    auto num = [&](const std::string& s) {
        double v = 0;
        const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
        if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v))
            throw ArgError("bad number '" + s + "' in grid");
        return v;
    };
    const double a = num(parts[0]), b = num(parts[1]);
    int k = 0;
    const auto r = std::from_chars(parts[2].data(), parts[2].data() + parts[2].size(), k);
    if (r.ec != std::errc() || r.ptr != parts[2].data() + parts[2].size() || k < 1)
        throw ArgError("grid count must be a positive integer");
    if (k == 1) return {a};
    if (!(a < b)) throw ArgError("grid must be strictly increasing");
    std::vector<double> g(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i)
        g[i] = a + (b - a) * i / (k - 1);
    return g;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Entanglement statistics of random pure states via the Coulomb gas", "entrogas"};
    app.require_subcommand(1);
    Common common;

    auto* critical = app.add_subcommand("critical", "critical constants as JSON or CSV");
    add_common(critical, common);

    double bmin = 0, bmax = 0;
    int steps = 11;
    std::string branch = "stable";
    auto* scan = app.add_subcommand("scan", "thermodynamics along a beta grid");
    add_common(scan, common);
    scan->add_option("--beta-min", bmin)->required();
    scan->add_option("--beta-max", bmax)->required();
    scan->add_option("--steps", steps);
    scan->add_option("--branch", branch, "stable, metastable or separable");

    double dbeta = 0;
    int points = 200;
    std::string dbranch = "stable";
    auto* dens = app.add_subcommand("density", "eigenvalue density on a cosine-spaced grid");
    add_common(dens, common);
    dens->add_option("--beta", dbeta)->required();
    dens->add_option("--branch", dbranch, "stable, metastable, separable or a branch name");
    dens->add_option("--points", points);

    int pn = 50;
    std::string pgrid;
    auto* ent = app.add_subcommand("entropy", "entropy density versus purity");
    add_common(ent, common);
    ent->add_option("--n", pn)->required();
    ent->add_option("--grid", pgrid, "purity grid min:max:count")->required();
    auto* vol = app.add_subcommand("volume", "log-volume N^2 s of the isopurity manifold");
    add_common(vol, common);
    vol->add_option("--n", pn)->required();
    vol->add_option("--grid", pgrid, "purity grid min:max:count")->required();

    FiniteArgs fa;
    double fbeta = 0;
    auto* fin = app.add_subcommand("finite-n", "finite-N Coulomb gas minimization");
    add_common(fin, common);
    fin->add_option("--n", fa.n);
    fin->add_option("--seed", fa.seed);
    fin->add_option("--beta-grid", fa.beta_grid, "min:max:count");
    fin->add_option("--profile-mu", fa.profile_grid, "min:max:count");
    auto* fbeta_opt = fin->add_option("--beta", fbeta);
    fin->add_flag("--crossing", fa.crossing);
    fin->add_flag("--birth", fa.birth);
    fin->add_flag("--minima", fa.minima, "with --profile-mu: print only the refined profile minima");

    SampleArgs sa;
    auto* smp = app.add_subcommand("sample", "Metropolis or induced-measure sampling");
    add_common(smp, common);
    smp->add_option("--n", sa.n);
    smp->add_option("--beta", sa.beta);
    smp->add_option("--alpha", sa.alpha)->check(CLI::IsMember({2, 3}));
    smp->add_option("--sweeps", sa.sweeps);
    smp->add_option("--seed", sa.seed);
    smp->add_option("--chains", sa.chains);
    smp->add_flag("--induced", sa.induced);
    smp->add_option("--count", sa.count);
    smp->add_option("--bins", sa.bins);
    smp->add_option("--hist-lo", sa.hist_lo);
    smp->add_option("--hist-hi", sa.hist_hi);
    smp->add_option("--stats-out", sa.stats_out, "also write the stats JSON here");

    int order = 0;
    auto* ser = app.add_subcommand("series", "planar map counts from the series reversion");
    add_common(ser, common);
    ser->add_option("--order", order)->required();

    try {
        auto merged = merge_config(args, app, err);
        std::reverse(merged.begin(), merged.end());
        app.parse(merged);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, d;
        const int code = app.exit(e, o, d);
        out << o.str();
        err << d.str();
        return code == 0 ? Ok : ArgumentError;
    } catch (const ArgError& e) {
        err << "error: " << e.what() << '\n';
        return ArgumentError;
    }

    try {
        std::unique_ptr<std::ofstream> file;
        std::ostream* os = &out;
        if (!common.output.empty()) {
            file = std::make_unique<std::ofstream>(common.output);
            if (!*file) throw ArgError("cannot write " + common.output);
            os = file.get();
        }
        auto format = [&](const char* dflt) { return common.format.empty() ? std::string(dflt) : common.format; };
        if (critical->parsed()) {
            write(*os, cmd_critical(), format("json"), true);
        } else if (scan->parsed()) {
            bool ok = false;
            const auto t = cmd_scan(bmin, bmax, steps, branch, ok);
            write(*os, t, format("csv"));
            if (!ok) {
                err << "error: no row succeeded\n";
                return ArgumentError;
            }
        } else if (dens->parsed()) {
            write(*os, cmd_density(dbeta, dbranch, points), format("csv"));
        } else if (ent->parsed() || vol->parsed()) {
            write(*os, cmd_purity(pn, pgrid, vol->parsed(), err), format("csv"));
        } else if (fin->parsed()) {
            if (fbeta_opt->count()) fa.beta = fbeta;
            write(*os, cmd_finite_n(fa), format("csv"), fa.crossing || fa.birth);
        } else if (smp->parsed()) {
            cmd_sample(sa, format("csv"), *os);
        } else if (ser->parsed()) {
            write(*os, cmd_series(order), format("csv"));
        }
    } catch (const ArgError& e) {
        err << "error: " << e.what() << '\n';
        return ArgumentError;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.code());
    }
    return Ok;
}

} // namespace entrogas::cli
