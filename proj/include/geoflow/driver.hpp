#pragma once

#include <atomic>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <thread>

#include "geoflow/bryant.hpp"
#include "geoflow/catalog.hpp"
#include "geoflow/report.hpp"

namespace geoflow {

inline constexpr int kExitPass = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitEvaluation = 3;

/// Thread cap for point-parallel evaluation, from GEOFLOW_THREADS.
inline int thread_cap() {
    if (const char* env = std::getenv("GEOFLOW_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? static_cast<int>(hc) : 1;
}

/// Index-parallel map with deterministic per-slot results.
template <typename F>
void parallel_for(int count, F&& body) {
    const int workers = std::min(thread_cap(), count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) body(i);
        return;
    }
    std::vector<std::thread> pool;
    pool.reserve(workers);
    std::atomic<int> next{0};
    for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) body(i);
        });
    for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

struct VerifyOptions {
    std::string example;
    std::optional<double> rho;
    std::optional<double> lambda;
    int points = 50;
    std::uint64_t seed = 42;
    double tol_scale = 1.0;
    std::string json_path;
    double perturb = 0.0;  // negative-control potential perturbation
};

namespace detail {

/// Adds eps * x_0 * x_1 to the chart potential (negative control).
inline SolitonInstance perturb_potential(const SolitonInstance& inst, double eps) {
    ChartMetric m = inst.metric;
    ScalarField base = m.potential_field();
    const int n = m.dim();
    m.with_potential([base, eps, n](std::span<const double> p) {
        auto c = coordinate_jets(p);
        return base(p) + eps * c[0] * c[1];
    });
    SolitonInstance out = inst;
    out.metric = std::move(m);
    return out;
}

struct PointOutcome {
    SolitonAnalysis a;
    std::optional<MuResult> mu_result;
    std::string mu_error;
    bool evaluated = false;
    std::string evaluation_error_msg;
};

}  // namespace detail

/// Runs the full identity suite on one instance over seeded quasi-random
/// regular points and assembles the machine-readable report.
inline int run_verify(const VerifyOptions& opt, std::ostream& log,
                      VerificationReport* report_out = nullptr) {
    CatalogEntry entry;
    try {
        entry = catalog_lookup(opt.example, opt.rho, opt.lambda);
    } catch (const config_error& e) {
        log << "error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (!entry.soliton) {
        log << "error: example '" << opt.example
            << "' has no potential; use the tensors command for pure metrics\n";
        return kExitConfig;
    }
    if (opt.points < 1) {
        log << "error: --points must be at least 1\n";
        return kExitConfig;
    }
    SolitonInstance inst = *entry.soliton;
    if (opt.perturb != 0.0) inst = detail::perturb_potential(inst, opt.perturb);

    VerificationReport rep;
    rep.instance = opt.example;
    rep.dim = inst.dim();
    rep.rho = inst.rho;
    rep.lambda = inst.lambda;
    rep.seed = opt.seed;
    rep.points = opt.points;
    rep.tol_scale = opt.tol_scale;
    rep.perturb = opt.perturb;
    rep.ladder = ToleranceLadder{}.scaled(opt.tol_scale);

    const double s = opt.tol_scale;
    auto make_check = [&](const std::string& id, double tol) {
        CheckRecord c;
        c.id = id;
        c.tolerance = tol * s;
        return c;
    };
    CheckRecord ck_residual = make_check("soliton_residual", 1e-8);
    CheckRecord ck_trace = make_check("trace_identity", 1e-7);
    CheckRecord ck_ricgrad = make_check("ricci_gradient_identity", 1e-7);
    CheckRecord ck_scalar = make_check("scalar_identity", 1e-7);
    CheckRecord ck_cotton = make_check("cotton_formula", 1e-7);
    CheckRecord ck_rect = make_check("rectifiability", 1e-6);
    CheckRecord ck_xi1 = make_check("xi1_route_agreement", 1e-7);
    CheckRecord ck_mu_sign = make_check("mu_sign", 1e-8);
    CheckRecord ck_mu_routes = make_check("mu_route_agreement", 1e-8);
    CheckRecord ck_bach_radial = make_check("bach_radial_eigenvector", 1e-6);
    CheckRecord ck_chain = make_check("bach_oracle_chain", 1e-6);
    CheckRecord ck_hessr = make_check("hessR_identity", 1e-6);
    CheckRecord ck_lcf = make_check("lcf_radial_identities", 1e-6);
    CheckRecord ck_fiber = make_check("fiber_ricci_equation", 1e-8);
    CheckRecord ck_spread = make_check("two_eigenvalue_spread", 1e-6);
    CheckRecord ck_hamilton = make_check("hamilton_constancy", 1e-6);
    CheckRecord ck_level = make_check("level_set_constancy", 1e-7);

    auto mark_unmet = [](CheckRecord& c, const std::string& why) {
        if (c.status == CheckStatus::applied && c.note.empty()) c.note = why;
        c.status = CheckStatus::unmet;
    };

    try {
        const auto points = sample_regular_points(inst, opt.points, opt.seed);
        std::vector<detail::PointOutcome> outcomes(points.size());
        parallel_for(static_cast<int>(points.size()), [&](int i) {
            auto& out = outcomes[i];
            try {
                out.a = analyze(inst, points[i]);
                out.evaluated = true;
                try {
                    out.mu_result = mu(out.a);
                } catch (const precondition_error& e) {
                    out.mu_error = e.what();
                }
            } catch (const precondition_error& e) {
                out.mu_error = e.what();
            } catch (const std::exception& e) {
                out.evaluation_error_msg = e.what();
            }
        });
        for (const auto& out : outcomes)
            if (!out.evaluation_error_msg.empty())
                throw evaluation_error(out.evaluation_error_msg);

        double ham_min = 0.0, ham_max = 0.0;
        bool ham_any = false;
        bool spread_any = false;

        for (const auto& out : outcomes) {
            const auto& a = out.a;
            ck_residual.accumulate(max_abs(soliton_residual(a)));

            try {
                const auto idr = identity_residuals(a);
                ck_trace.accumulate(std::abs(idr.trace));
                ck_ricgrad.accumulate(max_abs(idr.radial_ricci));
                ck_scalar.accumulate(std::abs(idr.scalar_identity));
            } catch (const precondition_error& e) {
                mark_unmet(ck_trace, e.what());
                mark_unmet(ck_ricgrad, e.what());
                mark_unmet(ck_scalar, e.what());
            }

            try {
                ck_cotton.accumulate(max_abs(cotton_soliton_residual(a)));
            } catch (const precondition_error& e) {
                mark_unmet(ck_cotton, e.what());
            }

            try {
                ck_rect.accumulate(rectifiability_defect(a));
            } catch (const precondition_error& e) {
                mark_unmet(ck_rect, e.what());
            }

            if (out.mu_result) {
                const auto& m = *out.mu_result;
                ck_xi1.accumulate(std::abs(m.spectrum.xi1_formula - m.spectrum.xi1_rayleigh));
                ck_mu_sign.accumulate(std::max(m.curvature_form, 0.0));
                ck_mu_routes.accumulate(std::abs(m.curvature_form - m.eigen_form));
                ck_bach_radial.accumulate(a.b.conorm(bach_radial_residual(a)));
                if (m.curvature_form > -1e-6) {
                    spread_any = true;
                    ck_spread.accumulate(m.spectrum.fiber_spread());
                }
            } else {
                mark_unmet(ck_xi1, out.mu_error);
                mark_unmet(ck_mu_sign, out.mu_error);
                mark_unmet(ck_mu_routes, out.mu_error);
                mark_unmet(ck_bach_radial, out.mu_error);
            }

            try {
                const auto bf = bach_soliton_formula(a);
                double worst = 0.0;
                for (int i = 0; i < a.dim(); ++i)
                    for (int j = 0; j < a.dim(); ++j) {
                        worst = std::max(worst, std::abs(bf.direct(i, j) - a.b.bach(i, j)));
                        worst = std::max(worst, std::abs(bf.eliminated(i, j) - a.b.bach(i, j)));
                        worst = std::max(worst, std::abs(bf.direct(i, j) - bf.eliminated(i, j)));
                    }
                ck_chain.accumulate(worst);
            } catch (const precondition_error& e) {
                mark_unmet(ck_chain, e.what());
            }

            try {
                const auto hr = hessR_identity_residual(a);
                ck_hessr.accumulate(std::max(max_abs(hr.hess), std::abs(hr.trace)));
            } catch (const precondition_error& e) {
                mark_unmet(ck_hessr, e.what());
            }

            try {
                const auto lcf = lcf_radial_residuals(a);
                ck_lcf.accumulate(std::max(max_abs(lcf.divrm), max_abs(lcf.riem)));
            } catch (const precondition_error& e) {
                mark_unmet(ck_lcf, e.what());
            }

            if (inst.metric.warped()) {
                ck_fiber.accumulate(std::abs(fiber_ricci_residual(inst, a.b.point)));
            }

            if (inst.rho == 0.0) {
                const double h = hamilton_value(a);
                if (!ham_any) {
                    ham_min = ham_max = h;
                    ham_any = true;
                } else {
                    ham_min = std::min(ham_min, h);
                    ham_max = std::max(ham_max, h);
                }
            }
        }

        if (!inst.metric.warped()) {
            ck_fiber.status = CheckStatus::skipped;
            ck_fiber.note = "chart is not a tagged warped product";
        }

        if (inst.rho == 0.0) {
            ck_hamilton.accumulate(ham_any ? ham_max - ham_min : 0.0);
        } else {
            ck_hamilton.status = CheckStatus::skipped;
            std::ostringstream note;
            note << "rho != 0: no constancy asserted; sampled values ";
            note << hamilton_value(outcomes.front().a) << " and "
                 << hamilton_value(outcomes.back().a);
            ck_hamilton.note = note.str();
        }

        if (!spread_any && ck_spread.status == CheckStatus::applied) {
            ck_spread.status = CheckStatus::skipped;
            ck_spread.note = "mu < -1e-6 at all sampled points";
        }

        // level-set constancy: fix the first point's t, vary fiber coordinates
        if (inst.metric.warped()) {
            PointSampler fiber_sampler(opt.seed ^ 0x9e3779b97f4a7c15ull);
            const double t_fix = points.front()[0];
            double xi1_lo = 0, xi1_hi = 0, xi2_lo = 0, xi2_hi = 0;
            bool first = true;
            for (int k = 0; k < 10; ++k) {
                std::vector<double> p = fiber_sampler.draw(inst.metric.domain());
                p[0] = t_fix;
                try {
                    const auto sp = radial_spectrum(inst, p);
                    const double x1 = sp.xi[0], x2 = sp.xi[1];
                    if (first) {
                        xi1_lo = xi1_hi = x1;
                        xi2_lo = xi2_hi = x2;
                        first = false;
                    } else {
                        xi1_lo = std::min(xi1_lo, x1);
                        xi1_hi = std::max(xi1_hi, x1);
                        xi2_lo = std::min(xi2_lo, x2);
                        xi2_hi = std::max(xi2_hi, x2);
                    }
                } catch (const precondition_error& e) {
                    mark_unmet(ck_level, e.what());
                    break;
                }
            }
            if (!first && ck_level.status == CheckStatus::applied)
                ck_level.accumulate(std::max(xi1_hi - xi1_lo, xi2_hi - xi2_lo));
        } else {
            ck_level.status = CheckStatus::skipped;
            ck_level.note = "level-set probe is defined for warped charts";
        }
    } catch (const evaluation_error& e) {
        log << "evaluation failure: " << e.what() << "\n";
        return kExitEvaluation;
    } catch (const config_error& e) {
        log << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    for (CheckRecord* c :
         {&ck_residual, &ck_trace, &ck_ricgrad, &ck_scalar, &ck_cotton, &ck_rect, &ck_xi1,
          &ck_mu_sign, &ck_mu_routes, &ck_bach_radial, &ck_chain, &ck_hessr, &ck_lcf, &ck_fiber,
          &ck_spread, &ck_hamilton, &ck_level}) {
        c->finalize();
        rep.checks.push_back(*c);
    }

    for (const auto& c : rep.checks) {
        log << (c.status == CheckStatus::skipped ? "  [skip] "
                                                 : (c.pass ? "  [pass] " : "  [FAIL] "))
            << c.id << "  max " << c.max_residual << "  tol " << c.tolerance;
        if (!c.note.empty()) log << "  (" << c.note << ")";
        log << "\n";
    }
    log << (rep.overall_pass() ? "verdict: pass" : "verdict: FAIL") << " (" << opt.example
        << ", " << opt.points << " points, seed " << opt.seed << ")\n";

    if (!opt.json_path.empty()) write_json_atomic(opt.json_path, rep.to_json());
    if (report_out) *report_out = rep;
    return rep.overall_pass() ? kExitPass : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// tensors
// ---------------------------------------------------------------------------

struct TensorsOptions {
    std::string example;
    std::optional<double> rho;
    std::optional<double> lambda;
    std::vector<double> at;
    std::string json_path;
};

namespace detail {

template <int Rank>
ordered_json tensor_json(const Tensor<double, Rank>& t) {
    const int n = t.dim();
    ordered_json vals = ordered_json::object();
    std::array<int, Rank> idx{};
    const std::size_t total = t.size();
    auto label = [&] {
        std::string s;
        for (int r = 0; r < Rank; ++r) {
            if (r) s += ',';
            s += std::to_string(idx[r]);
        }
        return s;
    };
    auto at = [&](const std::array<int, Rank>& ix) {
        if constexpr (Rank == 1) return t(ix[0]);
        else if constexpr (Rank == 2) return t(ix[0], ix[1]);
        else if constexpr (Rank == 3) return t(ix[0], ix[1], ix[2]);
        else return t(ix[0], ix[1], ix[2], ix[3]);
    };
    for (std::size_t flat = 0; flat < total; ++flat) {
        std::size_t rem = flat;
        for (int r = Rank - 1; r >= 0; --r) {
            idx[r] = static_cast<int>(rem % n);
            rem /= n;
        }
        vals[label()] = at(idx);
    }
    ordered_json j;
    j["rank"] = Rank;
    j["dim"] = n;
    j["values"] = vals;
    return j;
}

}  // namespace detail

inline int run_tensors(const TensorsOptions& opt, std::ostream& log) {
    CatalogEntry entry;
    try {
        entry = catalog_lookup(opt.example, opt.rho, opt.lambda);
    } catch (const config_error& e) {
        log << "error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        const CurvatureBundle b = evaluate_bundle(entry.metric, opt.at);

        ordered_json j;
        j["schema"] = 1;
        j["instance"] = opt.example;
        j["point"] = opt.at;
        j["g"] = detail::tensor_json(b.g);
        j["g_inv"] = detail::tensor_json(b.g_inv);
        j["christoffel"] = detail::tensor_json(b.gamma);
        j["riemann"] = detail::tensor_json(b.riem);
        j["ricci"] = detail::tensor_json(b.ricci);
        j["scalar"] = b.scalar;
        j["grad_scalar"] = detail::tensor_json(b.grad_scalar);
        j["hess_scalar"] = detail::tensor_json(b.hess_scalar);
        j["lap_scalar"] = b.lap_scalar;
        j["cov_ricci"] = detail::tensor_json(b.cov_ricci);
        j["div_riem"] = detail::tensor_json(b.div_riem);
        j["weyl"] = detail::tensor_json(b.weyl);
        j["cotton"] = detail::tensor_json(b.cotton);
        j["bach"] = detail::tensor_json(b.bach);

        // Ricci eigenvalues w.r.t. g
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(to_eigen(b.ricci),
                                                                      to_eigen(b.g));
        std::vector<double> ricci_eigs(b.dim);
        for (int i = 0; i < b.dim; ++i) ricci_eigs[i] = ges.eigenvalues()(i);
        j["ricci_eigenvalues"] = ricci_eigs;

        log << opt.example << " at (";
        for (std::size_t i = 0; i < opt.at.size(); ++i) log << (i ? "," : "") << opt.at[i];
        log << "): R = " << b.scalar << ", |Weyl| = " << max_abs(b.weyl)
            << ", |Cotton| = " << max_abs(b.cotton) << ", |Bach| = " << max_abs(b.bach) << "\n";
        log << "ricci eigenvalues:";
        for (double e : ricci_eigs) log << " " << e;
        log << "\n";

        if (entry.soliton) {
            SolitonInstance inst = *entry.soliton;
            j["potential"] = ordered_json{{"value", b.potential_value},
                                          {"grad", detail::tensor_json(b.grad_potential)},
                                          {"hessian", detail::tensor_json(b.hess_potential)},
                                          {"laplacian", b.lap_potential},
                                          {"gradient_norm", b.gradf_norm()}};
            try {
                const MuResult m = mu(inst, opt.at);
                j["radial_spectrum"] = ordered_json{{"xi", m.spectrum.xi},
                                                    {"xi1_formula", m.spectrum.xi1_formula},
                                                    {"xi1_rayleigh", m.spectrum.xi1_rayleigh}};
                j["mu"] = ordered_json{{"curvature_form", m.curvature_form},
                                       {"eigen_form", m.eigen_form}};
                log << "xi:";
                for (double x : m.spectrum.xi) log << " " << x;
                log << "   mu = " << m.curvature_form << "\n";
            } catch (const precondition_error& e) {
                j["radial_spectrum"] = ordered_json{{"unavailable", e.what()}};
            }
        }

        if (!opt.json_path.empty()) write_json_atomic(opt.json_path, j);
        return kExitPass;
    } catch (const evaluation_error& e) {
        log << "evaluation failure: " << e.what() << "\n";
        return kExitEvaluation;
    } catch (const precondition_error& e) {
        log << "evaluation failure: " << e.what() << "\n";
        return kExitEvaluation;
    }
}

// ---------------------------------------------------------------------------
// bryant
// ---------------------------------------------------------------------------

struct BryantOptions {
    int n = 3;
    double rho = 0.0;
    double lambda = 0.0;
    std::optional<double> c0;  // absent: branch-normalized sign, magnitude 1
    double dt = 1e-3;
    double t_max = 50.0;
    std::optional<double> t_min_survive;  // default: t_max
    std::string csv_path;
    bool embed_check = false;
    bool require_positive = false;
};

inline int run_bryant(const BryantOptions& opt, std::ostream& log,
                      WarpedProfile* profile_out = nullptr) {
    OdeConfig cfg;
    cfg.n = opt.n;
    cfg.rho = opt.rho;
    cfg.lambda = opt.lambda;
    cfg.dt = opt.dt;
    cfg.t_max = opt.t_max;
    cfg.c0 = opt.c0 ? *opt.c0 : OdeConfig::branch_normalized_c0(opt.n, opt.rho, opt.lambda);

    WarpedProfile profile;
    try {
        cfg.validate();
        profile = integrate(cfg);
    } catch (const config_error& e) {
        log << "config error: " << e.what() << "\n";
        return kExitConfig;
    }
    if (profile_out) *profile_out = profile;

    if (!opt.csv_path.empty()) write_profile_csv(profile, opt.csv_path);

    const double t_end = profile.samples.back().t;
    log << "profile: n=" << cfg.n << " rho=" << cfg.rho << " lambda=" << cfg.lambda
        << " c0=" << cfg.c0 << " stop=" << to_string(profile.stop) << " t_end=" << t_end
        << "\n";
    log << "  min K_rad=" << profile.min_k_rad << " min K_tan=" << profile.min_k_tan
        << " hamilton spread=" << profile.hamilton_spread
        << " max residuals=(" << profile.max_res_radial << ", " << profile.max_res_fiber
        << ")\n";

    const double survive_to = opt.t_min_survive.value_or(opt.t_max);
    bool ok = true;
    if (!profile.reached_t_max() && t_end < survive_to - 1e-9) {
        log << "  FAIL: stop event '" << to_string(profile.stop) << "' before t = " << survive_to
            << "\n";
        ok = false;
    }
    if (std::max(profile.max_res_radial, profile.max_res_fiber) >= 1e-6) {
        log << "  FAIL: ODE residual discipline violated\n";
        ok = false;
    }
    if (opt.require_positive && !profile.positive_curvature()) {
        log << "  FAIL: sectional curvature positivity lost\n";
        ok = false;
    }

    if (opt.embed_check && ok) {
        try {
            const FiberSpec fiber = cfg.kappa > 0 ? FiberSpec::sphere(cfg.n - 1, cfg.kappa)
                                   : cfg.kappa < 0
                                       ? FiberSpec::hyperbolic(cfg.n - 1, cfg.kappa)
                                       : FiberSpec::flat(cfg.n - 1);
            const SolitonInstance inst = embed_profile(profile, fiber);
            const double lo = std::max(1.0, profile.samples.front().t + 10 * cfg.dt);
            const double hi = std::min(10.0, t_end - 10 * cfg.dt);
            double worst = 0.0;
            for (double t = lo; t <= hi + 1e-9; t += (hi - lo) / 6.0) {
                std::vector<double> p(cfg.n, 0.1);
                p[0] = t;
                worst = std::max(worst, max_abs(soliton_residual(inst, p)));
            }
            log << "  embed-check residual on [" << lo << ", " << hi << "]: " << worst << "\n";
            if (worst >= 1e-5) {
                log << "  FAIL: embedded-profile residual above 1e-5\n";
                ok = false;
            }
        } catch (const std::exception& e) {
            log << "  FAIL: embed-check: " << e.what() << "\n";
            ok = false;
        }
    }
    return ok ? kExitPass : kExitCheckFailed;
}

}  // namespace geoflow
