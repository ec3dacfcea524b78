#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>

#include "geoflow/jet.hpp"
#include "geoflow/linalg.hpp"
#include "geoflow/tensor.hpp"

namespace geoflow {

/// Scalar function on a chart, evaluated as an order-4 jet at the point.
using ScalarField = std::function<Jet4(std::span<const double>)>;

/// Metric components as order-4 jets at a point.
using MetricField = std::function<Mat<Jet4>(std::span<const double>)>;

/// Univariate function applied to a coordinate jet (used by warped products).
using UnivariateFn = std::function<Jet4(const Jet4&)>;

/// Canonical fiber of a warped product: a space form of curvature kappa.
struct FiberSpec {
    enum class Kind { flat, sphere, hyperbolic };

    Kind kind = Kind::flat;
    int dim = 2;
    double kappa = 0.0;

    FiberSpec() = default;
    FiberSpec(Kind k, int d, double curv) : kind(k), dim(d), kappa(curv) {
        if (dim < 2) throw config_error("fiber dimension must be >= 2");
        const bool ok = (kind == Kind::flat && kappa == 0.0) ||
                        (kind == Kind::sphere && kappa > 0.0) ||
                        (kind == Kind::hyperbolic && kappa < 0.0);
        if (!ok) throw config_error("fiber curvature sign does not match its kind");
    }

    static FiberSpec flat(int d) { return FiberSpec(Kind::flat, d, 0.0); }
    static FiberSpec sphere(int d, double curv = 1.0) { return FiberSpec(Kind::sphere, d, curv); }
    static FiberSpec hyperbolic(int d, double curv = -1.0) {
        return FiberSpec(Kind::hyperbolic, d, curv);
    }

    /// Scalar curvature of the fiber: k(k-1)*kappa.
    double scalar_curvature() const { return dim * (dim - 1) * kappa; }

    /// Einstein constant: Ric_F = (dim-1)*kappa * g_F.
    double einstein_constant() const { return (dim - 1) * kappa; }
};

/// Warped-product bookkeeping attached to charts of the form
/// dt^2 + h(t)^2 g_F, with g_F in its conformal-to-flat chart.
struct WarpedTag {
    FiberSpec fiber;
    UnivariateFn h;
    std::optional<UnivariateFn> f;  // radial potential, if any
    double t_min = -3.0, t_max = 3.0;
};

/// Coordinate group that must stay inside a ball (conformal fiber charts).
struct BallConstraint {
    int start = 0;
    int len = 0;
    double radius = 0.0;
};

/// Per-coordinate sampling ranges for quasi-random point generation.
struct SampleBox {
    std::vector<std::pair<double, double>> range;
    std::vector<BallConstraint> balls;
    int dim() const { return static_cast<int>(range.size()); }
};

/// A coordinate chart: dimension, metric component evaluator producing jets,
/// optional scalar potential, named parameters, and a sampling domain.
class ChartMetric {
public:
    ChartMetric() = default;
    ChartMetric(int dim, std::string name, MetricField metric)
        : dim_(dim), name_(std::move(name)), metric_(std::move(metric)) {
        if (dim_ < 2 || dim_ > kMaxDim)
            throw config_error("chart dimension must be in [2, 6]");
    }

    int dim() const { return dim_; }
    const std::string& name() const { return name_; }

    ChartMetric& with_potential(ScalarField f) {
        potential_ = std::move(f);
        return *this;
    }
    ChartMetric& with_param(const std::string& key, double v) {
        params_[key] = v;
        return *this;
    }
    ChartMetric& with_domain(SampleBox box) {
        domain_ = std::move(box);
        return *this;
    }
    ChartMetric& with_warped_tag(WarpedTag tag) {
        warped_ = std::move(tag);
        return *this;
    }
    ChartMetric& with_name(std::string name) {
        name_ = std::move(name);
        return *this;
    }

    bool has_potential() const { return static_cast<bool>(potential_); }
    const std::map<std::string, double>& params() const { return params_; }
    const SampleBox& domain() const { return domain_; }
    const std::optional<WarpedTag>& warped() const { return warped_; }
    const ScalarField& potential_field() const { return potential_; }

    /// Metric components at a point; validates finiteness and positive
    /// definiteness of the value (smallest eigenvalue above 1e-10).
    Mat<Jet4> metric_jets(std::span<const double> point) const {
        check_point(point);
        Mat<Jet4> g = metric_(point);
        Mat<double> g0(dim_);
        for (int i = 0; i < dim_; ++i)
            for (int j = 0; j < dim_; ++j) {
                if (!g(i, j).finite())
                    throw evaluation_error("metric evaluation produced a non-finite jet");
                g0(i, j) = g(i, j).value();
            }
        if (smallest_eigenvalue(g0) <= 1e-10)
            throw evaluation_error("metric is not positive definite at the chart point (" +
                                   name_ + ")");
        return g;
    }

    Jet4 potential_jet(std::span<const double> point) const {
        if (!potential_) throw precondition_error("chart '" + name_ + "' has no potential");
        check_point(point);
        Jet4 f = potential_(point);
        if (!f.finite()) throw evaluation_error("potential evaluation produced a non-finite jet");
        return f;
    }

private:
    void check_point(std::span<const double> point) const {
        if (static_cast<int>(point.size()) != dim_)
            throw evaluation_error("point dimension does not match chart dimension");
    }

    int dim_ = 0;
    std::string name_;
    MetricField metric_;
    ScalarField potential_;
    std::map<std::string, double> params_;
    SampleBox domain_;
    std::optional<WarpedTag> warped_;
};

/// Builds a symmetric jet matrix from an upper-triangle generator, so
/// g_ij = g_ji holds exactly by construction.
template <typename F>
Mat<Jet4> symmetric_from_upper(int n, F&& entry) {
    Mat<Jet4> g(n, Jet4::constant(n, 0.0));
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            Jet4 e = entry(i, j);
            g(i, j) = e;
            if (i != j) g(j, i) = e;
        }
    return g;
}

/// Pointwise conformal change g -> e^{2 phi} g.
inline ChartMetric conformal_rescale(const ChartMetric& m, ScalarField phi) {
    MetricField scaled = [base = m, phi](std::span<const double> p) {
        Mat<Jet4> g = base.metric_jets(p);
        const Jet4 factor = exp(2.0 * phi(p));
        const int n = base.dim();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) g(i, j) = factor * g(i, j);
        return g;
    };
    ChartMetric out(m.dim(), m.name() + "+conformal", std::move(scaled));
    out.with_domain(m.domain());
    for (const auto& [k, v] : m.params()) out.with_param(k, v);
    if (m.has_potential()) out.with_potential(m.potential_field());
    return out;
}

}  // namespace geoflow
