#pragma once

#include <charconv>
#include <cstdint>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "geoflow/soliton.hpp"

namespace geoflow {

// ---------------------------------------------------------------------------
// quasi-random chart points (fixed seed, reproducible across runs)
// ---------------------------------------------------------------------------

class PointSampler {
public:
    explicit PointSampler(std::uint64_t seed) : rng_(seed) {}

    /// Uniform in [0,1) built from the top 53 bits, identical on every platform.
    double uniform01() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// One point of the box; ball-constrained coordinate groups are redrawn
    /// until they land inside their radius.
    std::vector<double> draw(const SampleBox& box) {
        std::vector<double> p(box.range.size());
        for (int attempt = 0; attempt < 1000; ++attempt) {
            for (std::size_t i = 0; i < box.range.size(); ++i)
                p[i] = uniform(box.range[i].first, box.range[i].second);
            bool ok = true;
            for (const auto& ball : box.balls) {
                double r2 = 0.0;
                for (int i = 0; i < ball.len; ++i) r2 += p[ball.start + i] * p[ball.start + i];
                if (r2 > ball.radius * ball.radius) {
                    ok = false;
                    break;
                }
            }
            if (ok) return p;
        }
        throw evaluation_error("point sampler failed to satisfy ball constraints");
    }

private:
    std::mt19937_64 rng_;
};

inline std::vector<std::vector<double>> sample_points(const ChartMetric& metric, int count,
                                                      std::uint64_t seed) {
    if (metric.domain().dim() != metric.dim())
        throw config_error("chart '" + metric.name() + "' has no sampling domain");
    PointSampler s(seed);
    std::vector<std::vector<double>> pts;
    pts.reserve(count);
    for (int i = 0; i < count; ++i) pts.push_back(s.draw(metric.domain()));
    return pts;
}

/// Points with |grad f| above the regular threshold; draws are skipped (and
/// redrawn) deterministically at critical points.
inline std::vector<std::vector<double>> sample_regular_points(const SolitonInstance& inst,
                                                              int count, std::uint64_t seed) {
    PointSampler s(seed);
    std::vector<std::vector<double>> pts;
    pts.reserve(count);
    int guard = 0;
    while (static_cast<int>(pts.size()) < count) {
        if (++guard > 100 * count + 1000)
            throw evaluation_error("could not find enough regular points in the sample domain");
        auto p = s.draw(inst.metric.domain());
        const Mat<Jet4> g = inst.metric.metric_jets(p);
        const Jet4 f = inst.metric.potential_jet(p);
        const int n = inst.dim();
        Mat<double> g0(n);
        Vec<double> df(n);
        for (int i = 0; i < n; ++i) {
            for (int j = 0; j < n; ++j) g0(i, j) = g(i, j).value();
            df(i) = f.derivative(i).value();
        }
        const Eigen::MatrixXd ginv = to_eigen(g0).inverse();
        double norm2 = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) norm2 += ginv(i, j) * df(i) * df(j);
        if (std::sqrt(std::max(norm2, 0.0)) > inst.regular_threshold) pts.push_back(std::move(p));
    }
    return pts;
}

// ---------------------------------------------------------------------------
// chart builders
// ---------------------------------------------------------------------------

inline ChartMetric euclidean_chart(int n) {
    ChartMetric m(n, "euclidean", [n](std::span<const double>) {
        return symmetric_from_upper(n, [n](int i, int j) {
            return Jet4::constant(n, i == j ? 1.0 : 0.0);
        });
    });
    SampleBox box;
    box.range.assign(n, {-1.2, 1.2});
    m.with_domain(box);
    return m;
}

namespace detail {

/// Conformal factor of the space-form chart: 4 / (1 + kappa |u|^2)^2 for
/// curvature kappa (stereographic for spheres, ball model for hyperbolic),
/// 1 for the flat fiber.
inline Jet4 fiber_conformal_factor(const FiberSpec& fiber, std::span<const Jet4> u) {
    const int n = u.empty() ? 1 : u[0].dim();
    if (fiber.kind == FiberSpec::Kind::flat) return Jet4::constant(n, 1.0);
    Jet4 r2 = Jet4::constant(n, 0.0);
    for (const auto& ui : u) r2 += ui * ui;
    if (fiber.kind == FiberSpec::Kind::hyperbolic && fiber.kappa * r2.value() <= -1.0)
        throw evaluation_error("fiber point lies outside the ball-model chart");
    return 4.0 * reciprocal(square(1.0 + fiber.kappa * r2));
}

inline SampleBox warped_box(int n, double t_min, double t_max, double fiber_halfwidth = 0.8) {
    SampleBox box;
    box.range.push_back({t_min, t_max});
    for (int i = 1; i < n; ++i) box.range.push_back({-fiber_halfwidth, fiber_halfwidth});
    box.balls.push_back({1, n - 1, 0.8});
    return box;
}

}  // namespace detail

/// Warped-product chart dt^2 + h(t)^2 g_F on (t, u_1, ..., u_{n-1}), with the
/// canonical fiber in its conformal-to-flat chart.
struct WarpedSpec {
    FiberSpec fiber;
    UnivariateFn h;
    std::optional<UnivariateFn> f;
    double t_min = -3.0, t_max = 3.0;
};

inline ChartMetric warped_chart(const WarpedSpec& spec, const std::string& name) {
    const int n = spec.fiber.dim + 1;
    if (n > kMaxDim) throw config_error("warped chart dimension exceeds the supported cap");
    ChartMetric m(n, name, [spec, n](std::span<const double> p) {
        auto c = coordinate_jets(p);
        const Jet4 h = spec.h(c[0]);
        if (h.value() <= 0.0)
            throw evaluation_error("warping function is not positive at the chart point");
        const Jet4 h2 = h * h;
        const Jet4 conf =
            detail::fiber_conformal_factor(spec.fiber, std::span<const Jet4>(c).subspan(1));
        return symmetric_from_upper(n, [&](int i, int j) {
            if (i == 0 && j == 0) return Jet4::constant(n, 1.0);
            if (i == j) return h2 * conf;
            return Jet4::constant(n, 0.0);
        });
    });
    m.with_domain(detail::warped_box(n, spec.t_min, spec.t_max));
    WarpedTag tag{spec.fiber, spec.h, spec.f, spec.t_min, spec.t_max};
    m.with_warped_tag(tag);
    if (spec.f) {
        m.with_potential([f = *spec.f, n](std::span<const double> p) {
            return f(Jet4::variable(n, 0, p[0]));
        });
    }
    return m;
}

// ---------------------------------------------------------------------------
// the explicit solitons
// ---------------------------------------------------------------------------

/// Euclidean space with f(x) = (lambda/2)|x|^2 + <v, x>; solves the equation
/// for every rho since Ric = 0 and R = 0.
inline SolitonInstance make_gaussian(int n, double lambda, std::vector<double> v,
                                     double rho = 0.0) {
    if (n < 3) throw config_error("gaussian soliton needs dimension >= 3");
    if (v.empty()) v.assign(n, 0.0);
    if (static_cast<int>(v.size()) != n)
        throw config_error("gaussian soliton: vector length must match the dimension");
    ChartMetric m = euclidean_chart(n);
    m.with_name("gaussian");
    m.with_potential([n, lambda, v](std::span<const double> p) {
        auto c = coordinate_jets(p);
        Jet4 f = Jet4::constant(n, 0.0);
        for (int i = 0; i < n; ++i) f += 0.5 * lambda * c[i] * c[i] + v[i] * c[i];
        return f;
    });
    m.with_param("lambda", lambda);
    return SolitonInstance(std::move(m), rho, lambda);
}

/// Product R^m x N^k of a Gaussian factor and an Einstein space form with
/// scalar curvature R_N; the parameter relation (1 - k rho) R_N = lambda k
/// fixes lambda, and f = ((rho R_N + lambda)/2)|x|^2 on the flat factor.
inline SolitonInstance make_rigid(int m, const FiberSpec& fiber, double rho) {
    const int k = fiber.dim;
    const int n = m + k;
    if (m < 1 || n < 3 || n > kMaxDim) throw config_error("rigid soliton: bad factor dimensions");
    const double r_n = fiber.scalar_curvature();
    const double lambda = (1.0 - k * rho) * r_n / k;
    const double coef = 0.5 * (rho * r_n + lambda);

    ChartMetric chart(n, "rigid", [m, n, fiber](std::span<const double> p) {
        auto c = coordinate_jets(p);
        const Jet4 conf =
            detail::fiber_conformal_factor(fiber, std::span<const Jet4>(c).subspan(m));
        return symmetric_from_upper(n, [&](int i, int j) {
            if (i != j) return Jet4::constant(n, 0.0);
            return i < m ? Jet4::constant(n, 1.0) : conf;
        });
    });
    chart.with_potential([m, n, coef](std::span<const double> p) {
        auto c = coordinate_jets(p);
        Jet4 f = Jet4::constant(n, 0.0);
        for (int i = 0; i < m; ++i) f += coef * c[i] * c[i];
        return f;
    });
    SampleBox box;
    box.range.assign(m, {-1.2, 1.2});
    for (int i = 0; i < k; ++i) box.range.push_back({-0.8, 0.8});
    box.balls.push_back({m, k, 0.8});
    chart.with_domain(box);
    chart.with_param("fiber_scalar_curvature", r_n);
    chart.with_param("lambda", lambda);
    return SolitonInstance(std::move(chart), rho, lambda);
}

/// The two complete traceless (rho = 1/3) solitons on R x_h F^2 with flat
/// fiber: steady with h = sqrt(1 + e^{-2t}), f = (1/3) log(e^{2t} + 1), and
/// shrinking with h = sqrt(t^2 + 1), f = (1/12)(4 log(t^2+1) + 2t^2 + 1).
inline SolitonInstance make_agila(int which) {
    WarpedSpec spec;
    spec.fiber = FiberSpec::flat(2);
    double lambda = 0.0;
    std::string name;
    if (which == 1) {
        name = "agila1";
        spec.h = [](const Jet4& t) { return sqrt(1.0 + exp(-2.0 * t)); };
        spec.f = [](const Jet4& t) { return log(exp(2.0 * t) + 1.0) / 3.0; };
        lambda = 0.0;
    } else if (which == 2) {
        name = "agila2";
        spec.h = [](const Jet4& t) { return sqrt(t * t + 1.0); };
        spec.f = [](const Jet4& t) {
            return (4.0 * log(t * t + 1.0) + 2.0 * t * t + 1.0) / 12.0;
        };
        lambda = 1.0 / 3.0;
    } else {
        throw config_error("make_agila: which must be 1 or 2");
    }
    ChartMetric chart = warped_chart(spec, name);
    chart.with_param("lambda", lambda);
    return SolitonInstance(std::move(chart), 1.0 / 3.0, lambda);
}

/// Product cylinder R x S^{n-1} or R x H^{n-1} with unit-curvature fiber
/// (h = 1); a pure chart metric, no potential.
inline ChartMetric make_cylinder(FiberSpec::Kind kind, int n) {
    if (n < 3) throw config_error("cylinder needs dimension >= 3");
    if (kind == FiberSpec::Kind::flat) throw config_error("cylinder fiber must be curved");
    WarpedSpec spec;
    spec.fiber = kind == FiberSpec::Kind::sphere ? FiberSpec::sphere(n - 1)
                                                 : FiberSpec::hyperbolic(n - 1);
    spec.h = [](const Jet4& t) { return 0.0 * t + 1.0; };
    return warped_chart(spec, kind == FiberSpec::Kind::sphere ? "cyl-sphere" : "cyl-hyperbolic");
}

/// General warped soliton; h must stay positive on the sampling domain.
inline SolitonInstance make_warped(const WarpedSpec& spec, double rho, double lambda,
                                   const std::string& name = "warped") {
    if (!spec.f) throw config_error("make_warped: soliton instance needs a potential");
    ChartMetric chart = warped_chart(spec, name);
    return SolitonInstance(std::move(chart), rho, lambda);
}

/// Round sphere or hyperbolic space in the conformal-to-flat chart
/// 4 delta / (1 + kappa |x|^2)^2 (Einstein catalog entries).
inline ChartMetric make_space_form(FiberSpec::Kind kind, int n) {
    if (kind == FiberSpec::Kind::flat) return euclidean_chart(n);
    const double kappa = kind == FiberSpec::Kind::sphere ? 1.0 : -1.0;
    const FiberSpec full(kind, n, kappa);
    ChartMetric m(n, kind == FiberSpec::Kind::sphere ? "sphere" : "hyperbolic",
                  [n, full](std::span<const double> p) {
                      auto c = coordinate_jets(p);
                      const Jet4 conf = detail::fiber_conformal_factor(full, c);
                      return symmetric_from_upper(n, [&](int i, int j) {
                          return i == j ? conf : Jet4::constant(n, 0.0);
                      });
                  });
    SampleBox box;
    box.range.assign(n, {-0.8, 0.8});
    box.balls.push_back({0, n, 0.8});
    m.with_domain(box);
    return m;
}

// ---------------------------------------------------------------------------
// name-based lookup (CLI surface)
// ---------------------------------------------------------------------------

/// Named univariate profiles available in warped:<spec> strings.
inline UnivariateFn named_univariate(const std::string& name) {
    if (name == "one") return [](const Jet4& t) { return 0.0 * t + 1.0; };
    if (name == "t") return [](const Jet4& t) { return t; };
    if (name == "sin") return [](const Jet4& t) { return sin(t); };
    if (name == "cosh") return [](const Jet4& t) { return cosh(t); };
    if (name == "sqrt-t2p1") return [](const Jet4& t) { return sqrt(t * t + 1.0); };
    if (name == "agila1-h") return [](const Jet4& t) { return sqrt(1.0 + exp(-2.0 * t)); };
    if (name == "agila1-f") return [](const Jet4& t) { return log(exp(2.0 * t) + 1.0) / 3.0; };
    if (name == "agila2-f")
        return [](const Jet4& t) { return (4.0 * log(t * t + 1.0) + 2.0 * t * t + 1.0) / 12.0; };
    if (name == "half-t2") return [](const Jet4& t) { return 0.5 * t * t; };
    throw config_error("unknown univariate profile '" + name + "'");
}

/// Parses "warped:fiber=<flat|sphere|hyperbolic>,n=<dim>,h=<profile>
/// [,f=<profile>][,kappa=<k>][,tmin=<a>][,tmax=<b>]".
inline WarpedSpec parse_warped_spec(const std::string& text) {
    std::string body = text;
    if (body.rfind("warped:", 0) == 0) body = body.substr(7);

    std::string fiber_kind = "flat", h_name, f_name;
    double kappa = 0.0, t_min = -3.0, t_max = 3.0;
    bool kappa_given = false;
    int n = 3;

    std::stringstream ss(body);
    std::string item;
    try {
        while (std::getline(ss, item, ',')) {
            const auto eq = item.find('=');
            if (eq == std::string::npos)
                throw config_error("warped spec items must be key=value, got '" + item + "'");
            const std::string key = item.substr(0, eq), val = item.substr(eq + 1);
            if (key == "fiber") fiber_kind = val;
            else if (key == "n") n = std::stoi(val);
            else if (key == "h") h_name = val;
            else if (key == "f") f_name = val;
            else if (key == "kappa") { kappa = std::stod(val); kappa_given = true; }
            else if (key == "tmin") t_min = std::stod(val);
            else if (key == "tmax") t_max = std::stod(val);
            else throw config_error("unknown warped spec key '" + key + "'");
        }
    } catch (const std::invalid_argument&) {
        throw config_error("warped spec has a malformed numeric value: '" + item + "'");
    } catch (const std::out_of_range&) {
        throw config_error("warped spec has a numeric value out of range: '" + item + "'");
    }
    if (h_name.empty()) throw config_error("warped spec needs h=<profile>");
    if (n < 3 || n > kMaxDim) throw config_error("warped spec dimension out of range");

    WarpedSpec spec;
    if (fiber_kind == "flat") spec.fiber = FiberSpec::flat(n - 1);
    else if (fiber_kind == "sphere") spec.fiber = FiberSpec::sphere(n - 1, kappa_given ? kappa : 1.0);
    else if (fiber_kind == "hyperbolic")
        spec.fiber = FiberSpec::hyperbolic(n - 1, kappa_given ? kappa : -1.0);
    else throw config_error("unknown fiber kind '" + fiber_kind + "'");
    spec.h = named_univariate(h_name);
    if (!f_name.empty()) spec.f = named_univariate(f_name);
    spec.t_min = t_min;
    spec.t_max = t_max;
    return spec;
}

/// A catalog entry: always a chart metric, plus the soliton instance when the
/// entry carries a potential.
struct CatalogEntry {
    ChartMetric metric;
    std::optional<SolitonInstance> soliton;
};

/// Looks up "gaussian", "rigid-r2xs2", "agila1", "agila2", "cyl-sphere",
/// "cyl-hyperbolic" or "warped:<spec>". rho/lambda apply to the entries whose
/// parameters are free (gaussian: both; rigid: rho; warped: both); the agila
/// instances have pinned parameters.
inline CatalogEntry catalog_lookup(const std::string& name, std::optional<double> rho,
                                   std::optional<double> lambda) {
    auto fixed_params = [&](const char* which) {
        if (rho || lambda)
            throw config_error(std::string(which) +
                               " has pinned parameters; --rho/--lambda are not accepted");
    };
    if (name == "gaussian") {
        const int n = 3;
        const double l = lambda.value_or(0.0);
        std::vector<double> v(n, 0.0);
        if (l == 0.0) v[0] = 1.0;  // steady default: f = x_1, regular everywhere
        SolitonInstance s = make_gaussian(n, l, v, rho.value_or(0.0));
        return CatalogEntry{s.metric, s};
    }
    if (name == "rigid-r2xs2") {
        if (lambda) throw config_error("rigid-r2xs2 derives lambda from its parameter relation");
        SolitonInstance s = make_rigid(2, FiberSpec::sphere(2), rho.value_or(0.0));
        return CatalogEntry{s.metric, s};
    }
    if (name == "agila1") {
        fixed_params("agila1");
        SolitonInstance s = make_agila(1);
        return CatalogEntry{s.metric, s};
    }
    if (name == "agila2") {
        fixed_params("agila2");
        SolitonInstance s = make_agila(2);
        return CatalogEntry{s.metric, s};
    }
    if (name == "cyl-sphere" || name == "cyl-hyperbolic") {
        fixed_params(name.c_str());
        return CatalogEntry{make_cylinder(name == "cyl-sphere" ? FiberSpec::Kind::sphere
                                                               : FiberSpec::Kind::hyperbolic,
                                          3),
                            std::nullopt};
    }
    if (name.rfind("warped:", 0) == 0) {
        WarpedSpec spec = parse_warped_spec(name);
        ChartMetric chart = warped_chart(spec, name);
        if (spec.f) {
            SolitonInstance s(chart, rho.value_or(0.0), lambda.value_or(0.0));
            return CatalogEntry{chart, s};
        }
        return CatalogEntry{chart, std::nullopt};
    }
    throw config_error("unknown catalog example '" + name + "'");
}

}  // namespace geoflow
