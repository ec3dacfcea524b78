#pragma once

#include <optional>
#include <vector>

#include "geoflow/chart.hpp"
#include "geoflow/jet.hpp"
#include "geoflow/linalg.hpp"
#include "geoflow/tensor.hpp"

namespace geoflow {

// Curvature convention used throughout:
//   Rm(d_i, d_j) d_k = nabla_j nabla_i d_k - nabla_i nabla_j d_k = R_ijk^r d_r,
//   R_ijkl = g_lr R_ijk^r,   R_ik = g^{jl} R_ijkl,   R = g^{ik} R_ik.
// With this sign the commutator identity reads
//   nabla_i nabla_j nabla_k f - nabla_j nabla_i nabla_k f = R_ijkl nabla^l f,
// which is kept as a regression sentinel (see commutator_defect below).

/// All curvature data at one chart point, as jets of decreasing order: the
/// metric carries order 4, each differentiation consumes one order, and the
/// chain bottoms out at the covariant divergence of the Cotton tensor.
struct CurvatureJets {
    int dim = 0;
    std::vector<double> point;

    Mat<Jet4> g;                  // metric components, order 4
    Mat<Jet4> g_inv;
    Tensor<Jet<3>, 3> gamma;      // gamma(k,i,j) = Gamma^k_ij
    Tensor<Jet<2>, 4> riem;       // R_ijkl
    Mat<Jet<2>> ricci;            // R_ik
    Jet<2> scalar;                // R
    Vec<Jet<1>> grad_scalar;      // d_i R
    Tensor<Jet<1>, 3> cov_ricci;  // nabla_i R_jk

    bool conformal_present = false;  // Weyl/Cotton assembled (dim >= 3)
    Tensor<Jet<2>, 4> weyl;          // W_ijkl
    Tensor<Jet<1>, 3> cotton;        // C_ijk

    bool has_potential = false;
    Jet4 f;
    Vec<Jet<3>> df;       // d_i f
    Mat<Jet<2>> hess_f;   // nabla_i nabla_j f
};

/// Plain-number snapshot of every pointwise curvature quantity.
struct CurvatureBundle {
    int dim = 0;
    std::vector<double> point;

    Mat<double> g, g_inv;
    Tensor<double, 3> gamma;        // Gamma^k_ij
    Tensor<double, 4> dgamma;       // dgamma(m,k,i,j) = d_m Gamma^k_ij
    Tensor<double, 5> ddgamma;      // ddgamma(m,p,k,i,j) = d_m d_p Gamma^k_ij
    Tensor<double, 4> riem;         // R_ijkl
    Mat<double> ricci;
    double scalar = 0.0;
    Vec<double> grad_scalar;        // nabla_i R
    Mat<double> hess_scalar;        // nabla_i nabla_j R
    double lap_scalar = 0.0;
    Tensor<double, 3> cov_ricci;    // nabla_i R_jk
    Tensor<double, 3> div_riem;     // (div Rm)_ijk = nabla^l R_ijkl
    Tensor<double, 4> weyl;
    Tensor<double, 3> cotton;
    Mat<double> bach;

    bool has_potential = false;
    double potential_value = 0.0;
    Vec<double> grad_potential;     // d_i f
    Vec<double> grad_potential_up;  // nabla^i f
    Mat<double> hess_potential;     // nabla_i nabla_j f
    double lap_potential = 0.0;
    double gradf_norm2 = 0.0;       // |nabla f|^2

    double gradf_norm() const { return std::sqrt(std::max(gradf_norm2, 0.0)); }

    /// g-norm of a covector.
    double conorm(const Vec<double>& w) const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) s += g_inv(i, j) * w(i) * w(j);
        return std::sqrt(std::max(s, 0.0));
    }

    /// |Ric|^2 = R_ij R^ij.
    double ricci_norm2() const {
        double s = 0.0;
        for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j)
                for (int k = 0; k < dim; ++k)
                    for (int l = 0; l < dim; ++l)
                        s += g_inv(i, k) * g_inv(j, l) * ricci(i, j) * ricci(k, l);
        return s;
    }
};

namespace detail {

template <int K, int R>
Tensor<Jet<K>, R> truncate_tensor(const Tensor<Jet4, R>& t, int jet_dim) {
    Tensor<Jet<K>, R> r(t.dim(), Jet<K>::constant(jet_dim, 0.0));
    auto it = r.begin();
    for (const auto& j : t) *it++ = j.template truncated<K>();
    return r;
}

}  // namespace detail

/// Full jet-valued curvature evaluation; works for dim >= 2, assembling the
/// conformal tensors (Weyl, Cotton) only when dim >= 3.
inline CurvatureJets evaluate_curvature_jets(const ChartMetric& metric,
                                             std::span<const double> point) {
    const int n = metric.dim();
    CurvatureJets out;
    out.dim = n;
    out.point.assign(point.begin(), point.end());

    out.g = metric.metric_jets(point);
    out.g_inv = jet_matrix_inverse(out.g);

    const auto z3 = Jet<3>::constant(n, 0.0);
    const auto z2 = Jet<2>::constant(n, 0.0);
    const auto z1 = Jet<1>::constant(n, 0.0);

    // Christoffel symbols: Gamma^k_ij = 1/2 g^{kl} (d_i g_jl + d_j g_il - d_l g_ij)
    Tensor<Jet<3>, 3> dg(n, z3);  // dg(k,i,j) = d_k g_ij
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) dg(k, i, j) = out.g(i, j).derivative(k);

    auto g_inv3 = detail::truncate_tensor<3>(out.g_inv, n);
    out.gamma = Tensor<Jet<3>, 3>(n, z3);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Jet<3> s = z3;
                for (int l = 0; l < n; ++l)
                    s += g_inv3(k, l) * (dg(i, j, l) + dg(j, i, l) - dg(l, i, j));
                s *= 0.5;
                out.gamma(k, i, j) = s;
                out.gamma(k, j, i) = s;
            }

    // Riemann: R_ijk^r = d_j Gamma^r_ik - d_i Gamma^r_jk
    //                    + Gamma^m_ik Gamma^r_jm - Gamma^m_jk Gamma^r_im
    Tensor<Jet<2>, 3> gamma2(n, z2);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gamma2(k, i, j) = out.gamma(k, i, j).truncated<2>();

    auto g2 = detail::truncate_tensor<2>(out.g, n);
    auto g_inv2 = detail::truncate_tensor<2>(out.g_inv, n);

    Tensor<Jet<2>, 4> riem_up(n, z2);  // R_ijk^r
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (j == i) continue;
            for (int k = 0; k < n; ++k)
                for (int r = 0; r < n; ++r) {
                    Jet<2> s = out.gamma(r, i, k).derivative(j) - out.gamma(r, j, k).derivative(i);
                    for (int m = 0; m < n; ++m)
                        s += gamma2(m, i, k) * gamma2(r, j, m) - gamma2(m, j, k) * gamma2(r, i, m);
                    riem_up(i, j, k, r) = s;
                }
        }

    out.riem = Tensor<Jet<2>, 4>(n, z2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    Jet<2> s = z2;
                    for (int r = 0; r < n; ++r) s += g2(l, r) * riem_up(i, j, k, r);
                    out.riem(i, j, k, l) = s;
                }

    out.ricci = Mat<Jet<2>>(n, z2);
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            Jet<2> s = z2;
            for (int j = 0; j < n; ++j)
                for (int l = 0; l < n; ++l) s += g_inv2(j, l) * out.riem(i, j, k, l);
            out.ricci(i, k) = s;
        }

    out.scalar = z2;
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) out.scalar += g_inv2(i, k) * out.ricci(i, k);

    out.grad_scalar = Vec<Jet<1>>(n, z1);
    for (int i = 0; i < n; ++i) out.grad_scalar(i) = out.scalar.derivative(i);

    // nabla_m R_jk
    Tensor<Jet<1>, 3> gamma1(n, z1);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gamma1(k, i, j) = out.gamma(k, i, j).truncated<1>();
    Mat<Jet<1>> ricci1(n, z1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) ricci1(i, j) = out.ricci(i, j).truncated<1>();

    out.cov_ricci = Tensor<Jet<1>, 3>(n, z1);
    for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                Jet<1> s = out.ricci(j, k).derivative(m);
                for (int r = 0; r < n; ++r)
                    s -= gamma1(r, m, j) * ricci1(r, k) + gamma1(r, m, k) * ricci1(j, r);
                out.cov_ricci(m, j, k) = s;
            }

    if (n >= 3) {
        out.conformal_present = true;
        Mat<Jet<1>> g1(n, z1);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g1(i, j) = out.g(i, j).truncated<1>();

        // Cotton: C_ijk = nabla_i R_jk - nabla_j R_ik
        //                 - (1/(2(n-1))) (g_jk nabla_i R - g_ik nabla_j R)
        const double cn = 1.0 / (2.0 * (n - 1));
        out.cotton = Tensor<Jet<1>, 3>(n, z1);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    out.cotton(i, j, k) =
                        out.cov_ricci(i, j, k) - out.cov_ricci(j, i, k) -
                        cn * (g1(j, k) * out.grad_scalar(i) - g1(i, k) * out.grad_scalar(j));

        // Weyl: the totally trace-free part of Riemann
        const double wn = 1.0 / (n - 2);
        const double sn = 1.0 / ((n - 1) * (n - 2));
        out.weyl = Tensor<Jet<2>, 4>(n, z2);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k)
                    for (int l = 0; l < n; ++l) {
                        Jet<2> s = out.riem(i, j, k, l);
                        s -= wn * (g2(i, k) * out.ricci(j, l) - g2(i, l) * out.ricci(j, k) -
                                   g2(j, k) * out.ricci(i, l) + g2(j, l) * out.ricci(i, k));
                        s += sn * (out.scalar * (g2(i, k) * g2(j, l) - g2(i, l) * g2(j, k)));
                        out.weyl(i, j, k, l) = s;
                    }
    }

    if (metric.has_potential()) {
        out.has_potential = true;
        out.f = metric.potential_jet(point);
        out.df = Vec<Jet<3>>(n, z3);
        for (int i = 0; i < n; ++i) out.df(i) = out.f.derivative(i);
        out.hess_f = Mat<Jet<2>>(n, z2);
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                Jet<2> s = out.df(j).derivative(i);
                for (int k = 0; k < n; ++k)
                    s -= gamma2(k, i, j) * out.df(k).truncated<2>();
                out.hess_f(i, j) = s;
                out.hess_f(j, i) = s;
            }
    }

    return out;
}

namespace detail {

/// Covariant divergence of the Cotton tensor, nabla^k C_kij, plus the
/// Ricci-Weyl contraction; assembled per the dimension (Bach tensor).
inline Mat<double> bach_from_jets(const CurvatureJets& J) {
    const int n = J.dim;
    Mat<double> bach(n);

    // nabla_m C_kij (values)
    Tensor<double, 4> covC(n);
    for (int m = 0; m < n; ++m)
        for (int k = 0; k < n; ++k)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    double s = J.cotton(k, i, j).derivative(m).value();
                    for (int r = 0; r < n; ++r) {
                        s -= J.gamma(r, m, k).value() * J.cotton(r, i, j).value();
                        s -= J.gamma(r, m, i).value() * J.cotton(k, r, j).value();
                        s -= J.gamma(r, m, j).value() * J.cotton(k, i, r).value();
                    }
                    covC(m, k, i, j) = s;
                }

    Mat<double> divC(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                for (int m = 0; m < n; ++m) s += J.g_inv(k, m).value() * covC(m, k, i, j);
            divC(i, j) = s;
        }

    if (n == 3) return divC;

    // R_kl W_i^k_j^l = R^{ab} W_iajb
    Mat<double> ric_up(n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) {
            double s = 0.0;
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l)
                    s += J.g_inv(a, k).value() * J.g_inv(b, l).value() * J.ricci(k, l).value();
            ric_up(a, b) = s;
        }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = divC(i, j);
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) s += ric_up(a, b) * J.weyl(i, a, j, b).value();
            bach(i, j) = s / (n - 2);
        }
    return bach;
}

}  // namespace detail

/// Plain-number snapshot extracted from a jet evaluation (dim >= 3).
inline CurvatureBundle bundle_from_jets(const CurvatureJets& J) {
    if (J.dim < 3)
        throw evaluation_error("curvature bundle requires chart dimension >= 3");
    const int n = J.dim;

    CurvatureBundle b;
    b.dim = n;
    b.point = J.point;
    b.g = Mat<double>(n);
    b.g_inv = Mat<double>(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            b.g(i, j) = J.g(i, j).value();
            b.g_inv(i, j) = J.g_inv(i, j).value();
        }

    b.gamma = Tensor<double, 3>(n);
    b.dgamma = Tensor<double, 4>(n);
    b.ddgamma = Tensor<double, 5>(n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                b.gamma(k, i, j) = J.gamma(k, i, j).value();
                for (int m = 0; m < n; ++m) {
                    const auto dG = J.gamma(k, i, j).derivative(m);
                    b.dgamma(m, k, i, j) = dG.value();
                    for (int p = 0; p < n; ++p) b.ddgamma(m, p, k, i, j) = dG.derivative(p).value();
                }
            }

    b.riem = Tensor<double, 4>(n);
    b.weyl = Tensor<double, 4>(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                for (int l = 0; l < n; ++l) {
                    b.riem(i, j, k, l) = J.riem(i, j, k, l).value();
                    b.weyl(i, j, k, l) = J.conformal_present ? J.weyl(i, j, k, l).value() : 0.0;
                }

    b.ricci = Mat<double>(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b.ricci(i, j) = J.ricci(i, j).value();
    b.scalar = J.scalar.value();

    b.grad_scalar = Vec<double>(n);
    for (int i = 0; i < n; ++i) b.grad_scalar(i) = J.grad_scalar(i).value();

    // nabla_i nabla_j R = d_i d_j R - Gamma^l_ij d_l R
    b.hess_scalar = Mat<double>(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double s = J.scalar.derivative(i).derivative(j).value();
            for (int l = 0; l < n; ++l) s -= b.gamma(l, i, j) * b.grad_scalar(l);
            b.hess_scalar(i, j) = s;
        }
    b.lap_scalar = 0.0;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) b.lap_scalar += b.g_inv(i, j) * b.hess_scalar(i, j);

    b.cov_ricci = Tensor<double, 3>(n);
    for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) b.cov_ricci(m, j, k) = J.cov_ricci(m, j, k).value();

    // (div Rm)_ijk = g^{lm} nabla_m R_ijkl
    b.div_riem = Tensor<double, 3>(n);
    {
        Tensor<double, 5> covRm(n);
        for (int m = 0; m < n; ++m)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    for (int k = 0; k < n; ++k)
                        for (int l = 0; l < n; ++l) {
                            double s = J.riem(i, j, k, l).derivative(m).value();
                            for (int r = 0; r < n; ++r) {
                                s -= b.gamma(r, m, i) * b.riem(r, j, k, l);
                                s -= b.gamma(r, m, j) * b.riem(i, r, k, l);
                                s -= b.gamma(r, m, k) * b.riem(i, j, r, l);
                                s -= b.gamma(r, m, l) * b.riem(i, j, k, r);
                            }
                            covRm(m, i, j, k, l) = s;
                        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j)
                for (int k = 0; k < n; ++k) {
                    double s = 0.0;
                    for (int l = 0; l < n; ++l)
                        for (int m = 0; m < n; ++m) s += b.g_inv(l, m) * covRm(m, i, j, k, l);
                    b.div_riem(i, j, k) = s;
                }
    }

    b.cotton = Tensor<double, 3>(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) b.cotton(i, j, k) = J.cotton(i, j, k).value();

    b.bach = detail::bach_from_jets(J);

    if (J.has_potential) {
        b.has_potential = true;
        b.potential_value = J.f.value();
        b.grad_potential = Vec<double>(n);
        b.grad_potential_up = Vec<double>(n);
        b.hess_potential = Mat<double>(n);
        for (int i = 0; i < n; ++i) b.grad_potential(i) = J.df(i).value();
        for (int i = 0; i < n; ++i) {
            double s = 0.0;
            for (int j = 0; j < n; ++j) s += b.g_inv(i, j) * b.grad_potential(j);
            b.grad_potential_up(i) = s;
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) b.hess_potential(i, j) = J.hess_f(i, j).value();
        b.lap_potential = 0.0;
        b.gradf_norm2 = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                b.lap_potential += b.g_inv(i, j) * b.hess_potential(i, j);
                b.gradf_norm2 += b.g_inv(i, j) * b.grad_potential(i) * b.grad_potential(j);
            }
    }
    return b;
}

/// Full pointwise curvature bundle of a chart metric (dim >= 3).
inline CurvatureBundle evaluate_bundle(const ChartMetric& metric,
                                       std::span<const double> point) {
    return bundle_from_jets(evaluate_curvature_jets(metric, point));
}

/// Covariant gradient/Hessian/Laplacian of the chart potential.
struct PotentialDerivatives {
    Vec<double> grad;     // d_i f
    Vec<double> grad_up;  // nabla^i f
    Mat<double> hess;     // nabla_i nabla_j f
    double lap = 0.0;
};

inline PotentialDerivatives covariant_hessian(const ChartMetric& metric,
                                              std::span<const double> point) {
    if (!metric.has_potential())
        throw precondition_error("covariant_hessian: chart has no potential");
    const CurvatureBundle b = evaluate_bundle(metric, point);
    return PotentialDerivatives{b.grad_potential, b.grad_potential_up, b.hess_potential,
                                b.lap_potential};
}

namespace detail {

/// nabla_i nabla_j nabla_k f as values, from the jet-valued Hessian.
inline Tensor<double, 3> third_covariant_derivative(const CurvatureJets& J) {
    const int n = J.dim;
    Tensor<double, 3> t(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double s = J.hess_f(j, k).derivative(i).value();
                for (int r = 0; r < n; ++r) {
                    s -= J.gamma(r, i, j).value() * J.hess_f(r, k).value();
                    s -= J.gamma(r, i, k).value() * J.hess_f(j, r).value();
                }
                t(i, j, k) = s;
            }
    return t;
}

}  // namespace detail

/// (nabla_i nabla_j nabla_k f - nabla_j nabla_i nabla_k f) - R_ijkl nabla^l f.
/// Vanishes identically in the pinned sign convention; any sign flip in the
/// Riemann assembly makes it O(|Rm| |df|) instead.
inline Tensor<double, 3> commutator_defect(const ChartMetric& metric,
                                           std::span<const double> point,
                                           bool flip_riemann_sign = false) {
    if (!metric.has_potential())
        throw precondition_error("commutator_defect: chart has no potential");
    const CurvatureJets J = evaluate_curvature_jets(metric, point);
    const int n = J.dim;
    const Tensor<double, 3> t3 = detail::third_covariant_derivative(J);

    Vec<double> gradf_up(n);
    for (int l = 0; l < n; ++l) {
        double s = 0.0;
        for (int m = 0; m < n; ++m) s += J.g_inv(l, m).value() * J.df(m).value();
        gradf_up(l) = s;
    }

    const double sign = flip_riemann_sign ? -1.0 : 1.0;
    Tensor<double, 3> d(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                double s = t3(i, j, k) - t3(j, i, k);
                for (int l = 0; l < n; ++l) s -= sign * J.riem(i, j, k, l).value() * gradf_up(l);
                d(i, j, k) = s;
            }
    return d;
}

/// nabla^l R_ijkl - (nabla_j R_ik - nabla_i R_jk), the two sides computed by
/// independent code paths (Riemann divergence vs. Ricci derivatives).
inline Tensor<double, 3> second_bianchi_defect(const ChartMetric& metric,
                                               std::span<const double> point) {
    const CurvatureBundle b = evaluate_bundle(metric, point);
    const int n = b.dim;
    Tensor<double, 3> d(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k)
                d(i, j, k) = b.div_riem(i, j, k) - (b.cov_ricci(j, i, k) - b.cov_ricci(i, j, k));
    return d;
}

}  // namespace geoflow
