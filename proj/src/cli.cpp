#include "pairwalk/cli.hpp"

#include "pairwalk/duality.hpp"
#include "pairwalk/errors.hpp"
#include "pairwalk/model.hpp"
#include "pairwalk/numerics.hpp"
#include "pairwalk/oracle.hpp"
#include "pairwalk/simulator.hpp"
#include "pairwalk/transforms.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <thread>

namespace pairwalk::cli {

namespace {

constexpr const char* kVersion = "pairwalk 1.0.0";

std::uint64_t g_seed = 0; // resolved once per run; recorded in all outputs

struct Table {
    std::vector<std::string> columns;
    std::vector<std::pair<std::string, std::string>> metadata;
    std::vector<std::vector<double>> rows;

    void meta(const std::string& k, double v) {
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.12g", v);
        metadata.emplace_back(k, buf);
    }
    void meta(const std::string& k, const std::string& v) { metadata.emplace_back(k, v); }
};

std::string format_double(double v) {
    if (!std::isfinite(v)) throw Error("non-finite value in output row");
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

void write_table(const Table& t, std::ostream& os, bool json) {
    // format everything before touching the stream so a bad value cannot
    // leave a truncated table behind
    std::ostringstream buf;
    if (json) {
        nlohmann::json j;
        j["tool"] = kVersion;
        j["metadata"]["seed"] = std::to_string(g_seed);
        for (const auto& [k, v] : t.metadata) j["metadata"][k] = v;
        j["columns"] = t.columns;
        auto& rows = j["rows"] = nlohmann::json::array();
        for (const auto& row : t.rows) {
            nlohmann::json r = nlohmann::json::array();
            for (double v : row) r.push_back(format_double(v)); // fixed text form
            rows.push_back(std::move(r));
        }
        buf << j.dump(2) << "\n";
    } else {
        for (std::size_t i = 0; i < t.columns.size(); ++i)
            buf << (i ? "," : "") << t.columns[i];
        buf << "\n";
        buf << "# tool=" << kVersion << "\n";
        buf << "# seed=" << g_seed << "\n";
        for (const auto& [k, v] : t.metadata) buf << "# " << k << "=" << v << "\n";
        for (const auto& row : t.rows) {
            for (std::size_t i = 0; i < row.size(); ++i)
                buf << (i ? "," : "") << format_double(row[i]);
            buf << "\n";
        }
    }
    os << buf.str();
}

void emit(const Table& t, const std::string& path, bool json) {
    if (path.empty() || path == "-") {
        write_table(t, std::cout, json);
        return;
    }
    std::ofstream f(path);
    if (!f) throw Error("cannot open output file " + path);
    write_table(t, f, json);
}

template <typename Fn>
void parallel_for_ordered(std::size_t n, int jobs, Fn&& fn) {
    if (jobs <= 1 || n < 2) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            fn(i);
        }
    };
    std::vector<std::thread> pool;
    const int k = std::min<std::size_t>(static_cast<std::size_t>(jobs), n);
    for (int i = 0; i < k; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
}

std::uint64_t default_seed() {
    if (const char* env = std::getenv("PAIRWALK_SEED"))
        return std::strtoull(env, nullptr, 10);
    return 20240817ULL;
}

struct ModelFlags {
    std::string model;
    double theta = 0.0;
    double p = 0.5;
    double alpha = 1.0;

    void attach(CLI::App* cmd) {
        cmd->add_option("--model", model, "preset sip:<k>, sep:<j>, irw, or six rates");
        cmd->add_option("--theta", theta, "interaction strength (>= -1)");
        cmd->add_option("--p", p, "right-jump probability");
        cmd->add_option("--alpha", alpha, "total single-particle jump rate");
    }

    ModelParams resolve() const {
        if (!model.empty()) {
            return parse_model_spec(model, p, alpha == 1.0 ? std::optional<double>{} : alpha)
                .params;
        }
        return ModelParams::validated(alpha, p, theta);
    }
};

void meta_model(Table& t, const ModelParams& m) {
    t.meta("alpha", m.alpha);
    t.meta("p", m.p);
    t.meta("theta", m.theta);
}

int cmd_transform(const ModelFlags& mf, const std::vector<long long>& ws,
                  const std::vector<long long>& wps, const std::vector<double>& kappas,
                  const std::vector<double>& lambdas, int jobs, const std::string& out,
                  bool json) {
    const ModelParams m = mf.resolve();
    Table t;
    t.columns = {"w", "wp", "kappa", "lambda", "re", "im"};
    meta_model(t, m);

    struct Item {
        long long w, wp;
        double kappa, lambda;
    };
    std::vector<Item> items;
    for (long long w : ws)
        for (long long wp : wps)
            for (double k : kappas)
                for (double l : lambdas) items.push_back({w, wp, k, l});

    std::vector<std::vector<double>> rows(items.size());
    parallel_for_ordered(items.size(), jobs, [&](std::size_t i) {
        const Item& it = items[i];
        const Complex g = g_kernel({it.w, it.wp, it.kappa, it.lambda, m.theta, m.p, m.alpha});
        rows[i] = {static_cast<double>(it.w), static_cast<double>(it.wp),
                   it.kappa, it.lambda, g.real(), g.imag()};
    });
    t.rows = std::move(rows);
    emit(t, out, json);
    return 0;
}

int cmd_sticky(const std::vector<double>& zs, const std::vector<double>& kappas,
               const std::vector<double>& ms, const std::vector<double>& lambdas,
               const std::vector<double>& gammas, bool p0, const std::string& out, bool json) {
    for (double g : gammas)
        if (!std::isfinite(g))
            throw InvalidParameter(
                "CSV columns must be finite; the absorbed limit (gamma -> infinity) is "
                "available in-process via the library sentinel, or approximate with a large "
                "finite gamma");
    Table t;
    t.columns = {"z", "kappa", "m", "lambda", "gamma", "re", "im"};
    t.meta("mode", p0 ? "p0" : "psi_sticky");
    for (double z : zs)
        for (double g : gammas)
            for (double l : lambdas) {
                if (p0) {
                    t.rows.push_back({z, 0.0, 0.0, l, g, sticky_p0(z, l, g), 0.0});
                    continue;
                }
                for (double k : kappas)
                    for (double m : ms) {
                        const Complex v = psi_sticky({z, k, m, l, g});
                        t.rows.push_back({z, k, m, l, g, v.real(), v.imag()});
                    }
            }
    emit(t, out, json);
    return 0;
}

int cmd_invert(const ModelFlags& mf, long long w, long long wp, long long v,
               const std::vector<double>& ts, int quad_points, int gs_terms,
               const std::string& out, bool json) {
    const ModelParams m = mf.resolve();
    Table t;
    t.columns = {"t", "v", "w", "wp", "prob"};
    meta_model(t, m);
    t.meta("quad_points", static_cast<double>(quad_points));
    t.meta("gs_terms", static_cast<double>(gs_terms));

    LaplaceInversionSpec inv;
    inv.terms = gs_terms;
    const int grid = quad_points;
    for (double time : ts) {
        auto transform = [&](double lambda) {
            // node convention of fourier_ring_invert: odd count, endpoints
            // identified, spacing 2*pi/(grid-1)
            std::vector<Complex> slice(static_cast<std::size_t>(grid));
            for (int i = 0; i < grid; ++i) {
                const double kappa = -3.14159265358979323846 +
                                     2.0 * 3.14159265358979323846 * i / (grid - 1);
                slice[static_cast<std::size_t>(i)] =
                    g_kernel({w, wp, kappa, lambda, m.theta, m.p, m.alpha});
            }
            return fourier_ring_invert(slice, v).value;
        };
        const double prob = laplace_invert(std::function<double(double)>(transform), time, inv).value;
        t.rows.push_back({time, static_cast<double>(v), static_cast<double>(w),
                          static_cast<double>(wp), prob});
    }
    emit(t, out, json);
    return 0;
}

int cmd_validate(const std::vector<double>& thetas, const std::vector<double>& ps,
                 long long w_hi, const std::vector<double>& kappas,
                 const std::vector<double>& lambdas, double tol, int jobs,
                 const std::string& out, bool json) {
    Table t;
    t.columns = {"theta", "p", "w", "wp", "kappa", "lambda", "abs_err", "pass"};
    t.meta("tolerance", tol);

    std::vector<long long> wps;
    for (long long wp = 0; wp <= w_hi; ++wp) wps.push_back(wp);

    struct Job {
        double theta, p;
        long long w;
    };
    std::vector<Job> work;
    for (double th : thetas)
        for (double p : ps)
            for (long long w = 0; w <= w_hi; ++w) work.push_back({th, p, w});

    std::vector<std::vector<std::vector<double>>> results(work.size());
    parallel_for_ordered(work.size(), jobs, [&](std::size_t i) {
        const Job& jb = work[i];
        TruncatedGeneratorSpec spec;
        spec.params = ModelParams::validated(1.0, jb.p, jb.theta);
        const TruncatedGenerator oracle(spec);
        const auto numeric = oracle.numeric_G_batch(jb.w, wps, kappas, lambdas);
        auto& rows = results[i];
        for (std::size_t k = 0; k < kappas.size(); ++k)
            for (std::size_t l = 0; l < lambdas.size(); ++l)
                for (std::size_t j = 0; j < wps.size(); ++j) {
                    const Complex closed = g_kernel({jb.w, wps[j], kappas[k], lambdas[l],
                                                     jb.theta, jb.p, 1.0});
                    const Complex brute = numeric[(k * lambdas.size() + l) * wps.size() + j];
                    const double err = std::abs(closed - brute);
                    rows.push_back({jb.theta, jb.p, static_cast<double>(jb.w),
                                    static_cast<double>(wps[j]), kappas[k], lambdas[l], err,
                                    err <= tol ? 1.0 : 0.0});
                }
    });

    double max_err = 0.0;
    bool all_pass = true;
    for (auto& rs : results)
        for (auto& r : rs) {
            max_err = std::max(max_err, r[6]);
            all_pass = all_pass && r[7] == 1.0;
            t.rows.push_back(std::move(r));
        }
    t.meta("max_abs_err", max_err);
    t.meta("result", all_pass ? "pass" : "fail");
    emit(t, out, json);
    return all_pass ? 0 : 2;
}

int cmd_simulate_pair(const ModelFlags& mf, long long u0, long long w0, double t_end,
                      int paths, std::uint64_t seed, const std::string& out, bool json) {
    const ModelParams m = mf.resolve();
    Table t;
    t.columns = {"path", "t", "u", "w"};
    meta_model(t, m);
    t.meta("t_end", t_end);
    for (int pth = 0; pth < paths; ++pth) {
        const Trajectory tr = simulate_pair(m, {u0, w0}, t_end, seed + static_cast<std::uint64_t>(pth));
        t.rows.push_back({static_cast<double>(pth), 0.0, static_cast<double>(u0),
                          static_cast<double>(w0)});
        for (std::size_t i = 0; i < tr.event_times.size(); ++i)
            t.rows.push_back({static_cast<double>(pth), tr.event_times[i],
                              static_cast<double>(tr.states[i].u),
                              static_cast<double>(tr.states[i].w)});
    }
    emit(t, out, json);
    return 0;
}

int cmd_simulate_field(const std::string& preset_text, int sites, int per_site, double t_end,
                       int snapshots, std::uint64_t seed, const std::string& out, bool json) {
    const ModelSpec spec = parse_model_spec(preset_text);
    if (!spec.preset) throw InvalidParameter("field simulation needs a named preset");
    LatticeField field;
    field.sites = sites;
    field.occupations.assign(static_cast<std::size_t>(sites), per_site);
    field.preset = *spec.preset;

    std::vector<double> times;
    for (int i = 1; i <= snapshots; ++i)
        times.push_back(t_end * static_cast<double>(i) / snapshots);
    const FieldRunResult run = simulate_field(field, t_end, seed, times);

    Table t;
    t.columns = {"t", "site", "occupation"};
    t.meta("preset", field.preset.name());
    for (std::size_t s = 0; s < run.snapshots.size(); ++s)
        for (int i = 0; i < sites; ++i)
            t.rows.push_back({times[s], static_cast<double>(i),
                              static_cast<double>(run.snapshots[s][static_cast<std::size_t>(i)])});
    emit(t, out, json);
    return 0;
}

int cmd_simulate_sticky(double z, double gamma, double eps, double t_end, int paths,
                        int samples, std::uint64_t seed, const std::string& out, bool json) {
    std::vector<double> times;
    for (int i = 1; i <= samples; ++i)
        times.push_back(t_end * static_cast<double>(i) / samples);
    Table t;
    t.columns = {"path", "t", "w"};
    t.meta("z", z);
    t.meta("gamma", gamma);
    t.meta("eps", eps);
    for (int pth = 0; pth < paths; ++pth) {
        const auto path = simulate_sticky_bm(z, gamma, eps, t_end,
                                             seed + static_cast<std::uint64_t>(pth), times);
        for (std::size_t i = 0; i < times.size(); ++i)
            t.rows.push_back({static_cast<double>(pth), times[i], path[i]});
    }
    emit(t, out, json);
    return 0;
}

int cmd_covariance(const std::vector<double>& as, const std::vector<double>& epses,
                   double lambda, double gamma, double rho, double chi, double x, double y,
                   const std::string& out, bool json) {
    Table t;
    t.columns = {"a", "eps", "lambda", "gamma", "asymptotic", "finite_eps", "ratio"};
    t.meta("rho", rho);
    t.meta("chi", chi);
    t.meta("x", x);
    t.meta("y", y);
    for (double a : as)
        for (double eps : epses) {
            const auto r = covariance_scaling(a, x, y, lambda, gamma, rho, chi, eps);
            t.rows.push_back({a, eps, lambda, gamma, r.asymptotic, r.finite_eps,
                              r.finite_eps / r.asymptotic});
        }
    emit(t, out, json);
    return 0;
}

int cmd_densityfield(const std::vector<double>& epses, const std::vector<double>& lambdas,
                     double gamma, double rho, double chi, double sigma, double half_width,
                     int points, const std::string& out, bool json) {
    const TestFunction phi = gaussian_test_function(0.0, sigma, half_width, points);
    Table t;
    t.columns = {"eps", "lambda", "gamma", "discrete", "limit", "ratio"};
    t.meta("rho", rho);
    t.meta("chi", chi);
    t.meta("phi", "gaussian");
    t.meta("sigma", sigma);
    for (double eps : epses)
        for (double l : lambdas) {
            const auto r = density_field_variance_laplace(phi, l, gamma, rho, eps, chi);
            t.rows.push_back({eps, l, gamma, r.discrete_value, r.limit_value,
                              r.discrete_value / r.limit_value});
        }
    emit(t, out, json);
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"exact two-walker transforms, sticky scaling limits, and duality covariances"};
    app.require_subcommand(1);

    std::string out = "-";
    std::string format = "csv";
    std::uint64_t seed = default_seed();
    int jobs = 1;
    int quad_points = 1025;
    int gs_terms = 12;
    app.add_option("--output,-o", out, "output path, '-' for stdout")->capture_default_str();
    app.add_option("--format", format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}))
        ->capture_default_str();
    app.add_option("--seed", seed, "base seed (env PAIRWALK_SEED overrides the default)");
    app.add_option("--jobs", jobs, "worker pool size for sweeps")->capture_default_str();
    app.add_option("--quad-points", quad_points, "kappa-grid points for inversion")
        ->capture_default_str();
    app.add_option("--gs-terms", gs_terms, "Gaver-Stehfest terms (even)")->capture_default_str();

    // transform
    auto* c_tr = app.add_subcommand("transform", "evaluate the closed-form kernel G");
    c_tr->fallthrough();
    ModelFlags mf_tr;
    mf_tr.attach(c_tr);
    std::vector<long long> ws{0}, wps{0};
    std::vector<double> kappas{0.0}, lambdas{1.0};
    c_tr->add_option("--w", ws, "initial distances");
    c_tr->add_option("--wp", wps, "final distances");
    c_tr->add_option("--kappa", kappas, "Fourier duals of the sum coordinate");
    c_tr->add_option("--lambda", lambdas, "Laplace duals of time");

    // sticky
    auto* c_st = app.add_subcommand("sticky", "continuum reflected/absorbed/sticky transforms");
    c_st->fallthrough();
    std::vector<double> zs{0.0}, st_k{0.0}, st_m{0.0}, st_l{1.0}, st_g{1.0};
    bool p0 = false;
    c_st->add_option("--z", zs, "initial distances");
    c_st->add_option("--kappa", st_k, "sum-coordinate Fourier duals");
    c_st->add_option("--m", st_m, "distance-coordinate Fourier duals");
    c_st->add_option("--lambda", st_l, "Laplace duals");
    c_st->add_option("--gamma", st_g, "stickiness parameters (inf for absorbed)");
    c_st->add_flag("--p0", p0, "emit the at-zero occupation transform instead");

    // invert
    auto* c_inv = app.add_subcommand("invert", "time-domain transition probability");
    c_inv->fallthrough();
    ModelFlags mf_inv;
    mf_inv.attach(c_inv);
    long long inv_w = 0, inv_wp = 0, inv_v = 0;
    std::vector<double> inv_t{1.0};
    c_inv->add_option("--w", inv_w, "initial distance");
    c_inv->add_option("--wp", inv_wp, "final distance");
    c_inv->add_option("--v", inv_v, "sum displacement");
    c_inv->add_option("--t", inv_t, "times");

    // simulate
    auto* c_sim = app.add_subcommand("simulate", "seeded stochastic simulation");
    c_sim->fallthrough();
    std::string what = "pair";
    ModelFlags mf_sim;
    mf_sim.attach(c_sim);
    long long u0 = 0, w0 = 0;
    double t_end = 1.0, eps = 0.05, gamma = 1.0, z0 = 0.0;
    int paths = 1, sites = 64, per_site = 1, snapshots = 4, samples = 32;
    c_sim->add_option("--what", what, "pair, field, or stickybm")
        ->check(CLI::IsMember({"pair", "field", "stickybm"}));
    c_sim->add_option("--u0", u0, "initial sum coordinate");
    c_sim->add_option("--w0", w0, "initial distance");
    c_sim->add_option("--t-end", t_end, "time horizon");
    c_sim->add_option("--paths", paths, "number of trajectories");
    c_sim->add_option("--sites", sites, "ring size (field)");
    c_sim->add_option("--per-site", per_site, "initial particles per site (field)");
    c_sim->add_option("--snapshots", snapshots, "snapshot count (field)");
    c_sim->add_option("--samples", samples, "sample times per path (stickybm)");
    c_sim->add_option("--eps", eps, "lattice scale (stickybm)");
    c_sim->add_option("--gamma", gamma, "stickiness (stickybm)");
    c_sim->add_option("--z", z0, "initial distance (stickybm)");

    // validate
    auto* c_val = app.add_subcommand("validate", "closed form vs brute-force oracle grid");
    c_val->fallthrough();
    std::vector<double> val_theta{-0.5, 0.0, 1.0, 2.0};
    std::vector<double> val_p{0.5, 0.7};
    std::vector<double> val_kappa{0.0, 0.3, 1.1};
    std::vector<double> val_lambda{0.5, 1.0, 2.0};
    long long val_whi = 4;
    double val_tol = 1e-6;
    c_val->add_option("--theta", val_theta, "interaction strengths");
    c_val->add_option("--p", val_p, "right-jump probabilities");
    c_val->add_option("--w-max", val_whi, "largest initial/final distance");
    c_val->add_option("--kappa", val_kappa, "Fourier points");
    c_val->add_option("--lambda", val_lambda, "Laplace points");
    c_val->add_option("--tol", val_tol, "pass tolerance");

    // covariance
    auto* c_cov = app.add_subcommand("covariance", "sticky-regime covariance scaling sweep");
    c_cov->fallthrough();
    std::vector<double> cov_a{2.0};
    std::vector<double> cov_eps{0.1, 0.05, 0.02, 0.01};
    double cov_lambda = 1.0, cov_gamma = 1.0, cov_rho = 1.0, cov_chi = 0.0;
    double cov_x = 0.0, cov_y = 1.0;
    c_cov->add_option("--a", cov_a, "time-scale exponents (> 1)");
    c_cov->add_option("--eps", cov_eps, "lattice scales");
    c_cov->add_option("--lambda", cov_lambda, "Laplace point");
    c_cov->add_option("--gamma", cov_gamma, "stickiness");
    c_cov->add_option("--rho", cov_rho, "initial density");
    c_cov->add_option("--chi", cov_chi, "initial second factorial moment");
    c_cov->add_option("--x", cov_x, "first macroscopic site");
    c_cov->add_option("--y", cov_y, "second macroscopic site");

    // densityfield
    auto* c_df = app.add_subcommand("densityfield", "density fluctuation field variance");
    c_df->fallthrough();
    std::vector<double> df_eps{0.1, 0.05, 0.02, 0.01};
    std::vector<double> df_lambda{1.0};
    double df_gamma = 1.0, df_rho = 1.0, df_chi = 0.0, df_sigma = 1.0, df_hw = 8.0;
    int df_points = 1025;
    c_df->add_option("--eps", df_eps, "lattice scales");
    c_df->add_option("--lambda", df_lambda, "Laplace points");
    c_df->add_option("--gamma", df_gamma, "stickiness");
    c_df->add_option("--rho", df_rho, "initial density");
    c_df->add_option("--chi", df_chi, "initial second factorial moment");
    c_df->add_option("--sigma", df_sigma, "gaussian test function width");
    c_df->add_option("--half-width", df_hw, "test function support half width");
    c_df->add_option("--points", df_points, "test function samples (odd)");

    std::vector<const char*> argv;
    argv.push_back("pairwalk");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help
            std::cout << app.help();
            return 0;
        }
        std::cerr << "usage error: " << e.what() << "\n";
        return 1;
    }

    g_seed = seed;
    const bool json = format == "json";
    try {
        if (c_tr->parsed()) return cmd_transform(mf_tr, ws, wps, kappas, lambdas, jobs, out, json);
        if (c_st->parsed()) return cmd_sticky(zs, st_k, st_m, st_l, st_g, p0, out, json);
        if (c_inv->parsed())
            return cmd_invert(mf_inv, inv_w, inv_wp, inv_v, inv_t, quad_points, gs_terms, out, json);
        if (c_val->parsed())
            return cmd_validate(val_theta, val_p, val_whi, val_kappa, val_lambda, val_tol, jobs,
                                out, json);
        if (c_sim->parsed()) {
            if (what == "pair")
                return cmd_simulate_pair(mf_sim, u0, w0, t_end, paths, seed, out, json);
            if (what == "field")
                return cmd_simulate_field(mf_sim.model.empty() ? "sip:1" : mf_sim.model, sites,
                                          per_site, t_end, snapshots, seed, out, json);
            return cmd_simulate_sticky(z0, gamma, eps, t_end, paths, samples, seed, out, json);
        }
        if (c_cov->parsed())
            return cmd_covariance(cov_a, cov_eps, cov_lambda, cov_gamma, cov_rho, cov_chi, cov_x,
                                  cov_y, out, json);
        if (c_df->parsed())
            return cmd_densityfield(df_eps, df_lambda, df_gamma, df_rho, df_chi, df_sigma, df_hw,
                                    df_points, out, json);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "usage error: no subcommand\n";
    return 1;
}

} // namespace pairwalk::cli
