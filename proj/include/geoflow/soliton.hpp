#pragma once

#include <cmath>
#include <optional>
#include <vector>

#include "geoflow/curvature.hpp"

namespace geoflow {

/// A chart metric with potential f together with the parameters rho and
/// lambda of the equation Ric + hess f = (rho R + lambda) g.
struct SolitonInstance {
    ChartMetric metric;
    double rho = 0.0;
    double lambda = 0.0;
    double regular_threshold = 1e-6;  // |grad f| below this is a critical point

    SolitonInstance() = default;
    SolitonInstance(ChartMetric m, double rho_, double lambda_)
        : metric(std::move(m)), rho(rho_), lambda(lambda_) {
        if (!metric.has_potential())
            throw config_error("soliton instance requires a chart potential");
        if (!std::isfinite(rho) || !std::isfinite(lambda))
            throw config_error("soliton parameters must be finite");
    }

    int dim() const { return metric.dim(); }
};

/// Ricci spectrum split along the potential gradient: xi[0] is the eigenvalue
/// in the direction e_1 = grad f / |grad f|, the rest are the eigenvalues of
/// the Ricci form restricted to the orthogonal complement, ascending.
struct RadialSpectrum {
    std::vector<double> xi;
    double gradf_norm = 0.0;
    Mat<double> frame;          // rows: g-orthonormal frame, first row e_1
    double xi1_formula = 0.0;   // from the gradient identity
    double xi1_rayleigh = 0.0;  // Ric(e_1, e_1)
    double e1_residual = 0.0;   // |Ric e_1 - xi_1 e_1|_g

    /// Spread of the fiber eigenvalues xi_2..xi_n.
    double fiber_spread() const {
        double lo = xi[1], hi = xi[1];
        for (std::size_t i = 2; i < xi.size(); ++i) {
            lo = std::min(lo, xi[i]);
            hi = std::max(hi, xi[i]);
        }
        return hi - lo;
    }
};

/// Everything the identity suite needs at one chart point, computed once.
struct SolitonAnalysis {
    double rho = 0.0;
    double lambda = 0.0;
    double regular_threshold = 1e-6;
    CurvatureJets J;
    CurvatureBundle b;

    double gradf_norm = 0.0;
    bool regular = false;

    double ricci_norm2 = 0.0;        // |Ric|^2
    double gradR_dot_gradf = 0.0;    // <grad R, grad f>

    // xi_1 as a jet-valued field (the pipeline run one derivative deep)
    bool radial_valid = false;       // regular point, xi_1 field evaluable
    double xi1 = 0.0;                // gradient-identity value
    Vec<double> grad_xi1;            // d_i xi_1
    double grad_xi1_dot_gradf = 0.0;

    int dim() const { return b.dim; }
};

inline SolitonAnalysis analyze(const SolitonInstance& inst, std::span<const double> point) {
    SolitonAnalysis a;
    a.rho = inst.rho;
    a.lambda = inst.lambda;
    a.regular_threshold = inst.regular_threshold;
    a.J = evaluate_curvature_jets(inst.metric, point);
    a.b = bundle_from_jets(a.J);
    if (!a.b.has_potential)
        throw precondition_error("soliton analysis requires a chart potential");

    const int n = a.b.dim;
    a.gradf_norm = a.b.gradf_norm();
    a.regular = a.gradf_norm > inst.regular_threshold;
    a.ricci_norm2 = a.b.ricci_norm2();
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            a.gradR_dot_gradf += a.b.g_inv(i, j) * a.b.grad_scalar(i) * a.b.grad_potential(j);

    if (a.regular) {
        // xi_1 = (1/2)(1 - 2(n-1) rho) <grad R, grad f> / |grad f|^2, kept as an
        // order-1 jet so its gradient is available without a second pipeline.
        const auto z1 = Jet<1>::constant(n, 0.0);
        Jet<1> num = z1, den = z1;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const Jet<1> ginv1 = a.J.g_inv(i, j).truncated<1>();
                const Jet<1> dfj = a.J.df(j).truncated<1>();
                num += ginv1 * a.J.grad_scalar(i) * dfj;
                den += ginv1 * a.J.df(i).truncated<1>() * dfj;
            }
        const double pref = 0.5 * (1.0 - 2.0 * (n - 1) * inst.rho);
        const Jet<1> xi1_jet = pref * (num / den);
        a.xi1 = xi1_jet.value();
        a.grad_xi1 = Vec<double>(n);
        for (int i = 0; i < n; ++i) a.grad_xi1(i) = xi1_jet.derivative(i).value();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                a.grad_xi1_dot_gradf += a.b.g_inv(i, j) * a.grad_xi1(i) * a.b.grad_potential(j);
        a.radial_valid = true;
    }
    return a;
}

namespace detail {

inline void require_regular(const SolitonAnalysis& a, const char* op) {
    if (!a.regular)
        throw precondition_error(std::string(op) + ": critical point of the potential (|grad f| = " +
                                 std::to_string(a.gradf_norm) + " <= " +
                                 std::to_string(a.regular_threshold) + ")");
}

}  // namespace detail

/// Ric + hess f - (rho R + lambda) g; zero at points where the instance
/// satisfies the defining equation.
inline Mat<double> soliton_residual(const SolitonAnalysis& a) {
    const int n = a.dim();
    const double factor = a.rho * a.b.scalar + a.lambda;
    Mat<double> r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            r(i, j) = a.b.ricci(i, j) + a.b.hess_potential(i, j) - factor * a.b.g(i, j);
    return r;
}

inline Mat<double> soliton_residual(const SolitonInstance& inst, std::span<const double> point) {
    return soliton_residual(analyze(inst, point));
}

namespace detail {

inline void require_soliton(const SolitonAnalysis& a, const char* op, double tol = 1e-6) {
    const double r = max_abs(soliton_residual(a));
    if (r >= tol)
        throw precondition_error(std::string(op) +
                                 ": instance does not satisfy the soliton equation here "
                                 "(residual " +
                                 std::to_string(r) + ")");
}

}  // namespace detail

/// Residuals of the three consequence identities: the trace identity, the
/// Ricci-gradient identity and the scalar identity.
struct IdentityResiduals {
    double trace = 0.0;          // lap f - n lambda + (1 - n rho) R
    Vec<double> radial_ricci;    // Ric(grad f, .) - (1/2)(1-2(n-1)rho) grad R
    double scalar_identity = 0.0;
};

inline IdentityResiduals identity_residuals(const SolitonAnalysis& a) {
    detail::require_soliton(a, "identity_residuals");
    const int n = a.dim();
    IdentityResiduals out;
    out.trace = a.b.lap_potential - n * a.lambda + (1.0 - n * a.rho) * a.b.scalar;

    const double pref = 0.5 * (1.0 - 2.0 * (n - 1) * a.rho);
    out.radial_ricci = Vec<double>(n);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += a.b.ricci(j, k) * a.b.grad_potential_up(k);
        out.radial_ricci(j) = s - pref * a.b.grad_scalar(j);
    }

    out.scalar_identity = (1.0 - 2.0 * (n - 1) * a.rho) * a.b.lap_scalar - a.gradR_dot_gradf +
                          2.0 * a.ricci_norm2 -
                          2.0 * a.b.scalar * (a.rho * a.b.scalar + a.lambda);
    return out;
}

inline IdentityResiduals identity_residuals(const SolitonInstance& inst,
                                            std::span<const double> point) {
    return identity_residuals(analyze(inst, point));
}

/// |grad f|^2 + R - 2 lambda f. Constant on steady (rho = 0) solitons; for
/// rho != 0 the value is reported for exploration, nothing is asserted.
inline double hamilton_value(const SolitonAnalysis& a) {
    return a.b.gradf_norm2 + a.b.scalar - 2.0 * a.lambda * a.b.potential_value;
}

inline double hamilton_value(const SolitonInstance& inst, std::span<const double> point) {
    return hamilton_value(analyze(inst, point));
}

/// Normalized wedge defect |df ^ dR| / |df|^2: the g-norm of
/// |grad f|^2 grad R - <grad R, grad f> grad f, divided by |grad f|^2.
/// Zero iff grad R is parallel to grad f.
inline double rectifiability_defect(const SolitonAnalysis& a) {
    detail::require_regular(a, "rectifiability_defect");
    const int n = a.dim();
    const double g2 = a.b.gradf_norm2;
    Vec<double> w(n);
    for (int i = 0; i < n; ++i)
        w(i) = g2 * a.b.grad_scalar(i) - a.gradR_dot_gradf * a.b.grad_potential(i);
    return a.b.conorm(w) / g2;
}

inline double rectifiability_defect(const SolitonInstance& inst, std::span<const double> point) {
    return rectifiability_defect(analyze(inst, point));
}

/// Ricci spectrum in the radial frame; the value of xi_1 from the gradient
/// identity is cross-checked against the Rayleigh quotient Ric(e_1, e_1) and
/// a disagreement beyond 1e-5 is reported as an unmet hypothesis (the input
/// is not a rectifiable soliton at this point).
inline RadialSpectrum radial_spectrum(const SolitonAnalysis& a) {
    detail::require_regular(a, "radial_spectrum");
    {
        const double rd = rectifiability_defect(a);
        if (rd >= 1e-6)
            throw precondition_error("radial_spectrum: point is not rectifiable (defect " +
                                     std::to_string(rd) + ")");
    }
    const int n = a.dim();

    RadialSpectrum sp;
    sp.gradf_norm = a.gradf_norm;
    sp.xi1_formula = a.xi1;

    // e_1 and a g-orthonormal completion
    Mat<double> frame(n);
    std::vector<Vec<double>> basis;
    Vec<double> e1(n);
    for (int i = 0; i < n; ++i) e1(i) = a.b.grad_potential_up(i) / a.gradf_norm;
    basis.push_back(e1);

    auto gdot = [&](const Vec<double>& u, const Vec<double>& v) {
        double s = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) s += a.b.g(i, j) * u(i) * v(j);
        return s;
    };

    for (int cand = 0; cand < n && static_cast<int>(basis.size()) < n; ++cand) {
        Vec<double> v(n);
        v(cand) = 1.0;
        for (const auto& u : basis) {
            const double c = gdot(u, v);
            for (int i = 0; i < n; ++i) v(i) -= c * u(i);
        }
        const double nrm = std::sqrt(std::max(gdot(v, v), 0.0));
        if (nrm < 1e-6) continue;  // candidate nearly parallel to the span
        for (int i = 0; i < n; ++i) v(i) /= nrm;
        basis.push_back(v);
    }
    if (static_cast<int>(basis.size()) != n)
        throw evaluation_error("radial_spectrum: failed to complete the orthonormal frame");

    // Ricci restricted to the complement of e_1
    Eigen::MatrixXd m(n - 1, n - 1);
    for (int A = 1; A < n; ++A)
        for (int B = 1; B < n; ++B) {
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) s += a.b.ricci(i, j) * basis[A](i) * basis[B](j);
            m(A - 1, B - 1) = s;
        }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(m);

    sp.xi1_rayleigh = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) sp.xi1_rayleigh += a.b.ricci(i, j) * e1(i) * e1(j);

    if (std::abs(sp.xi1_formula - sp.xi1_rayleigh) > 1e-5)
        throw precondition_error(
            "radial_spectrum: the two xi_1 routes disagree (" + std::to_string(sp.xi1_formula) +
            " vs " + std::to_string(sp.xi1_rayleigh) +
            "); the input is not a rectifiable soliton at this point");

    sp.xi.resize(n);
    sp.xi[0] = sp.xi1_formula;
    for (int k = 1; k < n; ++k) sp.xi[k] = solver.eigenvalues()(k - 1);

    // rotate the complement to the Ricci eigenbasis
    sp.frame = Mat<double>(n);
    for (int i = 0; i < n; ++i) sp.frame(0, i) = e1(i);
    for (int k = 1; k < n; ++k)
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int A = 1; A < n; ++A) s += solver.eigenvectors()(A - 1, k - 1) * basis[A](i);
            sp.frame(k, i) = s;
        }

    // residual of e_1 as an eigenvector
    Vec<double> res(n);
    for (int i = 0; i < n; ++i) {
        double s = 0.0;
        for (int k = 0; k < n; ++k)
            for (int j = 0; j < n; ++j) s += a.b.g_inv(i, k) * a.b.ricci(k, j) * e1(j);
        res(i) = s - sp.xi1_formula * e1(i);
    }
    sp.e1_residual = std::sqrt(std::max(gdot(res, res), 0.0));
    return sp;
}

inline RadialSpectrum radial_spectrum(const SolitonInstance& inst,
                                      std::span<const double> point) {
    return radial_spectrum(analyze(inst, point));
}

/// mu from the curvature expression n xi_1^2 - 2 R xi_1 - ((n-1)|Ric|^2 - R^2).
inline double mu_curvature_form(const SolitonAnalysis& a) {
    detail::require_regular(a, "mu");
    const int n = a.dim();
    return n * a.xi1 * a.xi1 - 2.0 * a.b.scalar * a.xi1 -
           ((n - 1) * a.ricci_norm2 - a.b.scalar * a.b.scalar);
}

/// mu from the spectrum: (sum_{i>=2} xi_i)^2 - (n-1) sum_{i>=2} xi_i^2 <= 0.
inline double mu_eigen_form(const RadialSpectrum& sp) {
    const int n = static_cast<int>(sp.xi.size());
    double s1 = 0.0, s2 = 0.0;
    for (int i = 1; i < n; ++i) {
        s1 += sp.xi[i];
        s2 += sp.xi[i] * sp.xi[i];
    }
    return s1 * s1 - (n - 1) * s2;
}

struct MuResult {
    double curvature_form = 0.0;
    double eigen_form = 0.0;
    RadialSpectrum spectrum;
};

inline MuResult mu(const SolitonAnalysis& a) {
    MuResult r;
    r.spectrum = radial_spectrum(a);
    r.curvature_form = mu_curvature_form(a);
    r.eigen_form = mu_eigen_form(r.spectrum);
    return r;
}

inline MuResult mu(const SolitonInstance& inst, std::span<const double> point) {
    return mu(analyze(inst, point));
}

/// B(grad f, .) - mu / ((n-1)(n-2)^2) g(grad f, .), as a covector; near-zero
/// confirms that grad f is an eigenvector of the definitional Bach tensor.
inline Vec<double> bach_radial_residual(const SolitonAnalysis& a) {
    const MuResult m = mu(a);
    const int n = a.dim();
    const double factor = m.curvature_form / ((n - 1) * (n - 2) * (n - 2));
    Vec<double> r(n);
    for (int j = 0; j < n; ++j) {
        double s = 0.0;
        for (int k = 0; k < n; ++k) s += a.b.bach(j, k) * a.b.grad_potential_up(k);
        r(j) = s - factor * a.b.grad_potential(j);
    }
    return r;
}

inline Vec<double> bach_radial_residual(const SolitonInstance& inst,
                                        std::span<const double> point) {
    return bach_radial_residual(analyze(inst, point));
}

/// The Bach tensor predicted by the two soliton expressions: the first uses
/// hess R and lap R directly, the second eliminates them through xi_1 and its
/// gradient. Each must match the definitional tensor on a genuine soliton.
struct BachFormulaResult {
    Mat<double> direct;      // hess-R form
    Mat<double> eliminated;  // xi_1 form
};

inline BachFormulaResult bach_soliton_formula(const SolitonAnalysis& a) {
    detail::require_soliton(a, "bach_soliton_formula");
    const int n = a.dim();
    const double R = a.b.scalar;
    const double ric2 = a.ricci_norm2;
    const double c2 = (1.0 - 2.0 * (n - 1) * a.rho) / (2.0 * (n - 1));

    Mat<double> ric_sq(n);  // (Ric^2)_jk = R_j^l R_lk
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int l = 0; l < n; ++l)
                for (int m_ = 0; m_ < n; ++m_)
                    s += a.b.ricci(j, l) * a.b.g_inv(l, m_) * a.b.ricci(m_, k);
            ric_sq(j, k) = s;
        }

    Mat<double> div_term(n);  // (div Rm)(., grad f, .) entry (j,k) = (divRm)_{klj} grad^l f
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double s = 0.0;
            for (int l = 0; l < n; ++l) s += a.b.div_riem(k, l, j) * a.b.grad_potential_up(l);
            div_term(j, k) = s;
        }

    BachFormulaResult out;
    out.direct = Mat<double>(n);
    const double coef_ric = a.lambda - (n - (n - 1) * (n - 2) * a.rho) /
                                           (static_cast<double>(n - 1) * (n - 2)) * R;
    const double coef_g = (1.0 / (n - 2)) * (ric2 - R * R / (n - 1)) + c2 * a.b.lap_scalar;
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double s = 2.0 / (n - 2) * ric_sq(j, k) + coef_ric * a.b.ricci(j, k) -
                       coef_g * a.b.g(j, k) + c2 * a.b.hess_scalar(j, k) + div_term(j, k);
            out.direct(j, k) = s / (n - 2);
        }

    detail::require_regular(a, "bach_soliton_formula (eliminated form)");
    {
        const double rd = rectifiability_defect(a);
        if (rd >= 1e-6)
            throw precondition_error(
                "bach_soliton_formula: point is not rectifiable (defect " + std::to_string(rd) +
                ")");
    }
    out.eliminated = Mat<double>(n);
    const double coef_ric2 = ((n - 1) * (n - 2) * a.rho - n) /
                                 (static_cast<double>(n - 1) * (n - 2)) * R +
                             a.lambda - a.xi1 / (n - 1);
    const double coef_g2 = ((1.0 - (n - 1) * a.rho) / (n - 1) * R - a.lambda) * a.xi1 -
                           a.grad_xi1_dot_gradf / (n - 1) -
                           (1.0 / (n - 2)) * (ric2 - R * R / (n - 1));
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double s = 2.0 / (n - 2) * ric_sq(j, k) + coef_ric2 * a.b.ricci(j, k) +
                       coef_g2 * a.b.g(j, k) +
                       a.b.grad_potential(j) * a.grad_xi1(k) / (n - 1) + div_term(j, k);
            out.eliminated(j, k) = s / (n - 2);
        }
    return out;
}

inline BachFormulaResult bach_soliton_formula(const SolitonInstance& inst,
                                              std::span<const double> point) {
    return bach_soliton_formula(analyze(inst, point));
}

/// Definitional Cotton tensor minus its soliton expression
///   -( (1-2(n-1)rho) / (2(n-1)) ) (d_i R g_jk - d_j R g_ik) + R_jikl grad^l f.
inline Tensor<double, 3> cotton_soliton_residual(const SolitonAnalysis& a) {
    detail::require_soliton(a, "cotton_soliton_residual");
    const int n = a.dim();
    const double c2 = (1.0 - 2.0 * (n - 1) * a.rho) / (2.0 * (n - 1));
    Tensor<double, 3> r(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double rhs = -c2 * (a.b.grad_scalar(i) * a.b.g(j, k) -
                                    a.b.grad_scalar(j) * a.b.g(i, k));
                for (int l = 0; l < n; ++l)
                    rhs += a.b.riem(j, i, k, l) * a.b.grad_potential_up(l);
                r(i, j, k) = a.b.cotton(i, j, k) - rhs;
            }
    return r;
}

inline Tensor<double, 3> cotton_soliton_residual(const SolitonInstance& inst,
                                                 std::span<const double> point) {
    return cotton_soliton_residual(analyze(inst, point));
}

/// Residuals of the hess-R identity
///   (1/2)(1-2(n-1)rho) hess R = xi_1 ((rho R + lambda) g - Ric) + dxi_1 (x) df
/// and of its trace.
struct HessRIdentityResiduals {
    Mat<double> hess;
    double trace = 0.0;
};

inline HessRIdentityResiduals hessR_identity_residual(const SolitonAnalysis& a) {
    detail::require_regular(a, "hessR_identity_residual");
    {
        const double rd = rectifiability_defect(a);
        if (rd >= 1e-6)
            throw precondition_error("hessR_identity_residual: point is not rectifiable (defect " +
                                     std::to_string(rd) + ")");
    }
    const int n = a.dim();
    const double pref = 0.5 * (1.0 - 2.0 * (n - 1) * a.rho);
    const double factor = a.rho * a.b.scalar + a.lambda;

    HessRIdentityResiduals out;
    out.hess = Mat<double>(n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k)
            out.hess(j, k) = pref * a.b.hess_scalar(j, k) -
                             a.xi1 * (factor * a.b.g(j, k) - a.b.ricci(j, k)) -
                             a.grad_xi1(j) * a.b.grad_potential(k);
    out.trace = pref * a.b.lap_scalar -
                a.xi1 * (n * a.lambda - (1.0 - n * a.rho) * a.b.scalar) - a.grad_xi1_dot_gradf;
    return out;
}

inline HessRIdentityResiduals hessR_identity_residual(const SolitonInstance& inst,
                                                      std::span<const double> point) {
    return hessR_identity_residual(analyze(inst, point));
}

/// Residuals of the locally-conformally-flat radial identities (valid where
/// the Cotton tensor vanishes):
///   (div Rm)_{jik} grad^i f = (1/(2(n-1))) (<grad R, grad f> g_jk - d_j R d_k f)
///   R_jikl grad^l f = ((1-2(n-1)rho)/(2(n-1))) (d_i R g_jk - d_j R g_ik)
struct LcfRadialResiduals {
    Mat<double> divrm;
    Tensor<double, 3> riem;
};

inline LcfRadialResiduals lcf_radial_residuals(const SolitonAnalysis& a) {
    const double cnorm = max_abs(a.b.cotton);
    if (cnorm >= 1e-7)
        throw precondition_error("lcf_radial_residuals: Cotton tensor does not vanish here "
                                 "(max entry " +
                                 std::to_string(cnorm) + ")");
    const int n = a.dim();
    const double cn = 1.0 / (2.0 * (n - 1));
    const double c2 = (1.0 - 2.0 * (n - 1) * a.rho) / (2.0 * (n - 1));

    LcfRadialResiduals out;
    out.divrm = Mat<double>(n);
    for (int j = 0; j < n; ++j)
        for (int k = 0; k < n; ++k) {
            double lhs = 0.0;
            for (int i = 0; i < n; ++i) lhs += a.b.div_riem(j, i, k) * a.b.grad_potential_up(i);
            out.divrm(j, k) = lhs - cn * (a.gradR_dot_gradf * a.b.g(j, k) -
                                          a.b.grad_scalar(j) * a.b.grad_potential(k));
        }

    out.riem = Tensor<double, 3>(n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            for (int k = 0; k < n; ++k) {
                double lhs = 0.0;
                for (int l = 0; l < n; ++l)
                    lhs += a.b.riem(j, i, k, l) * a.b.grad_potential_up(l);
                out.riem(j, i, k) = lhs - c2 * (a.b.grad_scalar(i) * a.b.g(j, k) -
                                                a.b.grad_scalar(j) * a.b.g(i, k));
            }
    return out;
}

inline LcfRadialResiduals lcf_radial_residuals(const SolitonInstance& inst,
                                               std::span<const double> point) {
    return lcf_radial_residuals(analyze(inst, point));
}

/// Warped-product fiber equation: for a chart dt^2 + h(t)^2 g_F with Einstein
/// fiber Ric_F = (n-2) kappa g_F, returns
///   (n-2) kappa - (h h'' + (n-2) h'^2 - h h' f' + (rho R + lambda) h^2).
inline double fiber_ricci_residual(const SolitonInstance& inst, std::span<const double> point) {
    const auto& tag = inst.metric.warped();
    if (!tag)
        throw precondition_error("fiber_ricci_residual: chart is not tagged as a warped product");
    if (!tag->f)
        throw precondition_error("fiber_ricci_residual: warped tag has no radial potential");
    const int n = inst.dim();

    const CurvatureBundle b = evaluate_bundle(inst.metric, point);
    const Jet4 tj = Jet4::variable(n, 0, point[0]);
    const Jet4 hj = tag->h(tj);
    const Jet4 fj = (*tag->f)(tj);
    const MultiIndex d1 = MultiIndex::unit(n, 0);
    MultiIndex d2 = MultiIndex::zero(n);
    {
        std::array<int, kMaxDim> e{};
        e[0] = 2;
        d2 = MultiIndex::from_exponents(n, std::span<const int>(e.data(), n));
    }
    const double h = hj.value(), hp = hj.partial(d1), hpp = hj.partial(d2);
    const double fp = fj.partial(d1);
    const double kappa = tag->fiber.kappa;

    return (n - 2) * kappa -
           (h * hpp + (n - 2) * hp * hp - h * hp * fp +
            (inst.rho * b.scalar + inst.lambda) * h * h);
}

}  // namespace geoflow
