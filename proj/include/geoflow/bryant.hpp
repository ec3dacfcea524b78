#pragma once

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "geoflow/catalog.hpp"

namespace geoflow {

// Rotationally symmetric solitons dt^2 + h(t)^2 g_can are governed by the
// coupled system obtained from the fiber equation
//   (n-2) kappa = h h'' + (n-2) h'^2 - h h' f' + (rho R + lambda) h^2
// and the radial equation f'' = rho R + lambda + (n-1) h''/h, where
//   R = -2(n-1) h''/h + (n-1)(n-2)(kappa - h'^2)/h^2.
// Eliminating R makes the fiber equation linear in h'':
//   h'' = [((n-1)rho - 1)(n-2)(kappa - h'^2) + lambda h^2 - h h' f']
//         / [(2(n-1)rho - 1) h].
// The denominator vanishes exactly at the Schouten value rho = 1/2(n-1).

struct OdeState {
    double t = 0.0, h = 0.0, hp = 0.0, f = 0.0, fp = 0.0;
};

struct OdeConfig {
    int n = 3;
    double rho = 0.0;
    double lambda = 0.0;
    double kappa = 1.0;   // canonical fiber curvature
    double t0 = 1e-3;     // tip offset
    double dt = 1e-3;
    double t_max = 50.0;
    double c0 = -1.0;     // f''(0) normalization; tip data f'(t0) = c0 t0
    std::optional<OdeState> initial;  // overrides the tip data when set

    void validate() const {
        if (n < 3 || n > kMaxDim) throw config_error("ode: dimension must be in [3, 6]");
        if (!(dt > 0.0)) throw config_error("ode: step must be positive");
        if (!(t0 > 0.0)) throw config_error("ode: tip offset must be positive");
        if (std::abs(2.0 * (n - 1) * rho - 1.0) <= 1e-9)
            throw config_error("ode: rho = 1/(2(n-1)) is the Schouten-singular value (system "
                               "degenerates); rejected");
        if (!initial && std::abs(kappa - 1.0) > 1e-12)
            throw config_error("ode: tip data requires the unit sphere fiber (kappa = 1); "
                               "provide an explicit initial state otherwise");
    }

    /// Leading cubic coefficient of the smooth-axis expansion h = t + a3 t^3,
    /// tied to the normalization by f''(0) = c0 = 6(n-1)(1-n rho) a3 + lambda.
    double tip_a3() const {
        const double s = 1.0 - n * rho;
        if (std::abs(s) < 1e-9) return 0.0;  // traceless value: a3 decouples from c0
        return (c0 - lambda) / (6.0 * (n - 1) * s);
    }

    /// Shooting sign that selects the positive-radial-Ricci branch at the
    /// tip (a3 < 0), for the given rho and lambda.
    static double branch_normalized_c0(int n, double rho, double lambda) {
        const double s = 1.0 - n * rho;
        return lambda - (s >= 0.0 ? 1.0 : -1.0);
    }

    OdeState start() const {
        if (initial) return *initial;
        const double a3 = tip_a3();
        OdeState s;
        s.t = t0;
        s.h = t0 + a3 * t0 * t0 * t0;
        s.hp = 1.0 + 3.0 * a3 * t0 * t0;
        s.f = 0.5 * c0 * t0 * t0;
        s.fp = c0 * t0;
        return s;
    }
};

struct RhsValues {
    double hpp = 0.0, fpp = 0.0, scalar = 0.0;
};

/// Solves the linear-in-h'' system at one state.
inline RhsValues warped_soliton_rhs(double h, double hp, double fp, const OdeConfig& cfg) {
    const int n = cfg.n;
    if (!(h > 0.0)) throw evaluation_error("ode rhs: warping function collapsed (h <= 0)");
    const double denom = (2.0 * (n - 1) * cfg.rho - 1.0) * h;
    if (std::abs(denom) < 1e-300) throw config_error("ode rhs: Schouten-singular denominator");
    const double ktan = cfg.kappa - hp * hp;
    RhsValues r;
    r.hpp = (((n - 1) * cfg.rho - 1.0) * (n - 2) * ktan + cfg.lambda * h * h - h * hp * fp) /
            denom;
    r.scalar = -2.0 * (n - 1) * r.hpp / h + (n - 1) * (n - 2) * ktan / (h * h);
    r.fpp = cfg.rho * r.scalar + cfg.lambda + (n - 1) * r.hpp / h;
    return r;
}

struct ProfileSample {
    double t = 0.0;
    double h = 0.0, hp = 0.0, hpp = 0.0;
    double f = 0.0, fp = 0.0, fpp = 0.0;
    double scalar = 0.0;    // R
    double k_rad = 0.0;     // -h''/h
    double k_tan = 0.0;     // (kappa - h'^2)/h^2
    double res_radial = 0.0;
    double res_fiber = 0.0;
    double hamilton = 0.0;  // |f'|^2 + R - 2 lambda f
    double mu = 0.0;
};

enum class StopReason { reached_t_max, collapse, blow_up, not_finite };

inline const char* to_string(StopReason r) {
    switch (r) {
        case StopReason::reached_t_max: return "reached_t_max";
        case StopReason::collapse: return "collapse";
        case StopReason::blow_up: return "blow_up";
        case StopReason::not_finite: return "not_finite";
    }
    return "?";
}

/// Piecewise-quintic interpolant built from (y, y', y'') node data; exact
/// derivatives up to order 4 of the local polynomial.
class QuinticHermite {
public:
    QuinticHermite() = default;
    QuinticHermite(std::vector<double> t, std::vector<double> y, std::vector<double> d1,
                   std::vector<double> d2)
        : t_(std::move(t)), y_(std::move(y)), d1_(std::move(d1)), d2_(std::move(d2)) {
        if (t_.size() < 2 || t_.size() != y_.size() || t_.size() != d1_.size() ||
            t_.size() != d2_.size())
            throw evaluation_error("spline: inconsistent node data");
    }

    double t_front() const { return t_.front(); }
    double t_back() const { return t_.back(); }

    /// Value and derivatives 1..4 at t (inside the node range).
    UnivariateTable eval(double t) const {
        if (t < t_.front() - 1e-12 || t > t_.back() + 1e-12)
            throw evaluation_error("spline: query outside the profile range");
        t = std::clamp(t, t_.front(), t_.back());
        const auto it = std::upper_bound(t_.begin(), t_.end(), t);
        std::size_t i = (it == t_.begin()) ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
        i = std::min(i, t_.size() - 2);

        const double dt = t_[i + 1] - t_[i];
        const double s = (t - t_[i]) / dt;
        const double a0 = y_[i];
        const double a1 = d1_[i] * dt;
        const double a2 = 0.5 * d2_[i] * dt * dt;
        const double r0 = y_[i + 1] - (a0 + a1 + a2);
        const double r1 = d1_[i + 1] * dt - (a1 + 2.0 * a2);
        const double r2 = d2_[i + 1] * dt * dt - 2.0 * a2;
        const double a3 = 10.0 * r0 - 4.0 * r1 + 0.5 * r2;
        const double a4 = -15.0 * r0 + 7.0 * r1 - r2;
        const double a5 = 6.0 * r0 - 3.0 * r1 + 0.5 * r2;

        const double a[6] = {a0, a1, a2, a3, a4, a5};
        UnivariateTable out;
        // p(s), p'(s), ..., p''''(s), then rescale by powers of dt
        double dt_pow = 1.0;
        for (int k = 0; k <= 4; ++k) {
            double acc = 0.0;
            for (int m = 5; m >= k; --m) {
                double c = a[m];
                for (int q = 0; q < k; ++q) c *= (m - q);
                int e = m - k;
                double spow = 1.0;
                while (e-- > 0) spow *= s;
                acc += c * spow;
            }
            out.d[k] = acc / dt_pow;
            dt_pow *= dt;
        }
        return out;
    }

private:
    std::vector<double> t_, y_, d1_, d2_;
};

struct WarpedProfile {
    OdeConfig cfg;
    std::vector<ProfileSample> samples;
    StopReason stop = StopReason::reached_t_max;
    double min_k_rad = 0.0, min_k_tan = 0.0;
    double hamilton_spread = 0.0;
    double max_res_radial = 0.0, max_res_fiber = 0.0;

    bool reached_t_max() const { return stop == StopReason::reached_t_max; }
    bool positive_curvature() const { return min_k_rad > 0.0 && min_k_tan > 0.0; }

    QuinticHermite spline_h() const { return spline(&ProfileSample::h, &ProfileSample::hp, &ProfileSample::hpp); }
    QuinticHermite spline_f() const { return spline(&ProfileSample::f, &ProfileSample::fp, &ProfileSample::fpp); }

private:
    QuinticHermite spline(double ProfileSample::*y, double ProfileSample::*d1,
                          double ProfileSample::*d2) const {
        std::vector<double> t, v, w, z;
        t.reserve(samples.size());
        for (const auto& s : samples) {
            t.push_back(s.t);
            v.push_back(s.*y);
            w.push_back(s.*d1);
            z.push_back(s.*d2);
        }
        return QuinticHermite(std::move(t), std::move(v), std::move(w), std::move(z));
    }
};

namespace detail {

inline ProfileSample make_sample(double t, const OdeState& s, const RhsValues& r,
                                 const OdeConfig& cfg) {
    ProfileSample out;
    out.t = t;
    out.h = s.h;
    out.hp = s.hp;
    out.hpp = r.hpp;
    out.f = s.f;
    out.fp = s.fp;
    out.fpp = r.fpp;
    out.scalar = r.scalar;
    out.k_rad = -r.hpp / s.h;
    out.k_tan = (cfg.kappa - s.hp * s.hp) / (s.h * s.h);
    out.hamilton = s.fp * s.fp + r.scalar - 2.0 * cfg.lambda * s.f;

    // Ricci eigenvalues of the warped metric: xi_1 = -(n-1) h''/h radially,
    // xi_2 = (R - xi_1)/(n-1) on the fiber; mu per the eigenvalue expression.
    const int n = cfg.n;
    const double xi1 = -(n - 1) * r.hpp / s.h;
    const double xi2 = (r.scalar - xi1) / (n - 1);
    const double ric2 = xi1 * xi1 + (n - 1) * xi2 * xi2;
    out.mu = n * xi1 * xi1 - 2.0 * r.scalar * xi1 - ((n - 1) * ric2 - r.scalar * r.scalar);
    return out;
}

}  // namespace detail

/// Classical fixed-step 4th-order integration from the tip data (or an
/// explicit initial state) until t_max or a stop event. Residual columns are
/// evaluated afterwards from the quintic interpolants at interval midpoints,
/// where the interpolation is nontrivial.
inline WarpedProfile integrate(const OdeConfig& cfg) {
    cfg.validate();
    WarpedProfile out;
    out.cfg = cfg;

    OdeState y = cfg.start();
    double t = y.t;

    auto rhs_of = [&cfg](const OdeState& s) { return warped_soliton_rhs(s.h, s.hp, s.fp, cfg); };

    const std::size_t max_steps =
        static_cast<std::size_t>(std::ceil((cfg.t_max - t) / cfg.dt)) + 2;
    out.samples.reserve(std::min<std::size_t>(max_steps, 1 << 22));

    out.stop = StopReason::reached_t_max;
    while (true) {
        RhsValues r;
        try {
            r = rhs_of(y);
        } catch (const evaluation_error&) {
            out.stop = StopReason::collapse;
            break;
        }
        if (!std::isfinite(r.hpp) || !std::isfinite(r.fpp)) {
            out.stop = StopReason::not_finite;
            break;
        }
        out.samples.push_back(detail::make_sample(t, y, r, cfg));

        if (t >= cfg.t_max - 1e-12) break;
        // absorb a degenerate final remainder into one slightly longer step
        double dt = cfg.dt;
        const double remaining = cfg.t_max - t;
        if (remaining < 1.5 * cfg.dt) dt = remaining;

        // RK4 on (h, h', f, f')
        auto deriv = [&](const OdeState& s) {
            const RhsValues rr = warped_soliton_rhs(s.h, s.hp, s.fp, cfg);
            return std::array<double, 4>{s.hp, rr.hpp, s.fp, rr.fpp};
        };
        auto advance = [&](const OdeState& s, const std::array<double, 4>& k, double scale) {
            OdeState u = s;
            u.h += scale * k[0];
            u.hp += scale * k[1];
            u.f += scale * k[2];
            u.fp += scale * k[3];
            return u;
        };
        // The output grid is fixed, but the right-hand side stiffens like 1/t
        // toward the axis; split the startup steps so substeps stay below t/32.
        int substeps = 1;
        if (t < 64.0 * dt)
            substeps = std::min(256, static_cast<int>(std::ceil(32.0 * dt / t)));
        const double ds = dt / substeps;
        try {
            for (int sub = 0; sub < substeps; ++sub) {
                const auto k1 = deriv(y);
                const auto k2 = deriv(advance(y, k1, 0.5 * ds));
                const auto k3 = deriv(advance(y, k2, 0.5 * ds));
                const auto k4 = deriv(advance(y, k3, ds));
                y.h += ds / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0]);
                y.hp += ds / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1]);
                y.f += ds / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2]);
                y.fp += ds / 6.0 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3]);
            }
        } catch (const evaluation_error&) {
            out.stop = StopReason::collapse;
            break;
        }
        t += dt;
        y.t = t;

        if (!(y.h > 0.0)) {
            out.stop = StopReason::collapse;
            break;
        }
        if (std::abs(y.hp) > 1e6 || std::abs(y.fp) > 1e6) {
            out.stop = StopReason::blow_up;
            break;
        }
        if (!std::isfinite(y.h) || !std::isfinite(y.hp) || !std::isfinite(y.f) ||
            !std::isfinite(y.fp)) {
            out.stop = StopReason::not_finite;
            break;
        }
    }

    if (out.samples.empty()) throw config_error("ode: no samples retained (immediate stop)");

    // diagnostics over retained samples
    out.min_k_rad = out.samples.front().k_rad;
    out.min_k_tan = out.samples.front().k_tan;
    double ham_lo = out.samples.front().hamilton, ham_hi = ham_lo;
    for (const auto& s : out.samples) {
        out.min_k_rad = std::min(out.min_k_rad, s.k_rad);
        out.min_k_tan = std::min(out.min_k_tan, s.k_tan);
        ham_lo = std::min(ham_lo, s.hamilton);
        ham_hi = std::max(ham_hi, s.hamilton);
    }
    out.hamilton_spread = ham_hi - ham_lo;

    // ODE residuals re-evaluated from the splines between nodes
    if (out.samples.size() >= 2) {
        const QuinticHermite sh = out.spline_h();
        const QuinticHermite sf = out.spline_f();
        const int n = cfg.n;
        for (std::size_t i = 0; i < out.samples.size(); ++i) {
            const std::size_t j = std::min(i, out.samples.size() - 2);
            const double tm = 0.5 * (out.samples[j].t + out.samples[j + 1].t);
            const UnivariateTable H = sh.eval(tm);
            const UnivariateTable F = sf.eval(tm);
            const double h = H.d[0], hp = H.d[1], hpp = H.d[2];
            const double f = F.d[0], fp = F.d[1], fpp = F.d[2];
            (void)f;
            const double R =
                -2.0 * (n - 1) * hpp / h + (n - 1) * (n - 2) * (cfg.kappa - hp * hp) / (h * h);
            out.samples[i].res_radial = fpp - (cfg.rho * R + cfg.lambda) - (n - 1) * hpp / h;
            out.samples[i].res_fiber =
                (n - 2) * cfg.kappa - (h * hpp + (n - 2) * hp * hp - h * hp * fp +
                                       (cfg.rho * R + cfg.lambda) * h * h);
            out.max_res_radial = std::max(out.max_res_radial, std::abs(out.samples[i].res_radial));
            out.max_res_fiber = std::max(out.max_res_fiber, std::abs(out.samples[i].res_fiber));
        }
    }
    return out;
}

/// CSV profile dump: full double precision, one row per retained sample.
inline void write_profile_csv(const WarpedProfile& p, std::ostream& os) {
    os << "t,h,hp,fp,R,K_rad,K_tan,res_radial,res_fiber,hamilton,mu\n";
    char buf[512];
    for (const auto& s : p.samples) {
        std::snprintf(buf, sizeof buf,
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", s.t,
                      s.h, s.hp, s.fp, s.scalar, s.k_rad, s.k_tan, s.res_radial, s.res_fiber,
                      s.hamilton, s.mu);
        os << buf;
    }
}

inline void write_profile_csv(const WarpedProfile& p, const std::string& path) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp, std::ios::trunc);
        if (!os) throw evaluation_error("cannot open '" + tmp + "' for writing");
        write_profile_csv(p, os);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw evaluation_error("cannot move profile CSV into place at '" + path + "'");
}

/// Derivative tables of h and f along a solution of the warped system, from
/// state values by the Taylor recurrence of the ODE in univariate jet
/// arithmetic. Differencing the profile would lose four orders of precision
/// on the fourth derivative; the recurrence keeps full ODE accuracy.
inline std::pair<UnivariateTable, UnivariateTable> ode_derivative_tables(
    const OdeConfig& cfg, double h, double hp, double f, double fp) {
    using J1 = Jet<4>;
    const int n = cfg.n;
    J1 H = J1::constant(1, h);
    J1 HP = J1::constant(1, hp);
    J1 F = J1::constant(1, f);
    J1 FP = J1::constant(1, fp);
    for (int m = 0; m <= 3; ++m) {
        const J1 ktan = cfg.kappa - HP * HP;
        const J1 HPP = ((((n - 1) * cfg.rho - 1.0) * (n - 2)) * ktan + cfg.lambda * (H * H) -
                        H * HP * FP) /
                       ((2.0 * (n - 1) * cfg.rho - 1.0) * H);
        const J1 R = -2.0 * (n - 1) * (HPP / H) + ((n - 1) * (n - 2)) * (ktan / (H * H));
        const J1 FPP = cfg.rho * R + cfg.lambda + (n - 1) * (HPP / H);
        // univariate graded-lex: slot index == derivative order
        H.coeff(m + 1) = HP.coeff(m) / (m + 1);
        HP.coeff(m + 1) = HPP.coeff(m) / (m + 1);
        F.coeff(m + 1) = FP.coeff(m) / (m + 1);
        FP.coeff(m + 1) = FPP.coeff(m) / (m + 1);
    }
    UnivariateTable th, tf;
    double fact = 1.0;
    for (int k = 0; k <= kMaxOrder; ++k) {
        if (k > 0) fact *= k;
        th.d[k] = H.coeff(k) * fact;
        tf.d[k] = F.coeff(k) * fact;
    }
    return {th, tf};
}

/// Chart metric over the profile: quintic interpolants supply (value, slope)
/// and the ODE recurrence supplies the higher derivatives, so the chart is
/// smooth to fourth order at full precision (Bach-level checks included).
inline SolitonInstance embed_profile(const WarpedProfile& p, const FiberSpec& fiber) {
    if (p.cfg.dt > 1e-3 + 1e-15 || p.samples.size() < 8)
        throw evaluation_error("embed_profile: profile too sparse (need dt <= 1e-3)");
    if (fiber.dim != p.cfg.n - 1)
        throw config_error("embed_profile: fiber dimension must be n - 1");
    if (std::abs(fiber.kappa - p.cfg.kappa) > 1e-12)
        throw config_error("embed_profile: fiber curvature must match the ODE configuration");

    auto sh = std::make_shared<QuinticHermite>(p.spline_h());
    auto sf = std::make_shared<QuinticHermite>(p.spline_f());
    const OdeConfig cfg = p.cfg;

    auto tables_at = [sh, sf, cfg](double t) {
        const UnivariateTable th = sh->eval(t);
        const UnivariateTable tf = sf->eval(t);
        return ode_derivative_tables(cfg, th.d[0], th.d[1], tf.d[0], tf.d[1]);
    };

    WarpedSpec spec;
    spec.fiber = fiber;
    spec.h = [tables_at](const Jet4& t) { return compose(tables_at(t.value()).first, t); };
    spec.f = [tables_at](const Jet4& t) { return compose(tables_at(t.value()).second, t); };
    spec.t_min = sh->t_front();
    spec.t_max = sh->t_back();

    ChartMetric chart = warped_chart(spec, "profile-embed");
    chart.with_param("lambda", p.cfg.lambda);
    return SolitonInstance(std::move(chart), p.cfg.rho, p.cfg.lambda);
}

}  // namespace geoflow
