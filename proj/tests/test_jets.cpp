#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "geoflow/acceptance.hpp"  // fd::richardson
#include "geoflow/jet.hpp"

using namespace geoflow;
using Catch::Matchers::WithinAbs;

namespace {

Jet4 random_jet(std::mt19937_64& rng, int n) {
    auto u = [&] { return -2.0 + 4.0 * ((rng() >> 11) * 0x1.0p-53); };
    auto j = Jet4::constant(n, 0.0);
    for (int s = 0; s < j.size(); ++s) j.coeff(s) = u();
    return j;
}

MultiIndex uni(int k) {
    std::array<int, 1> e{k};
    return MultiIndex::from_exponents(1, std::span<const int>(e));
}

}  // namespace

TEST_CASE("coordinate jets", "[jets]") {
    SECTION("identity function in one variable") {
        const auto x = Jet4::variable(1, 0, 0.0);
        REQUIRE(x.size() == 5);
        CHECK(x.coeff(0) == 0.0);
        CHECK(x.coeff(1) == 1.0);
        CHECK(x.coeff(2) == 0.0);
        CHECK(x.coeff(3) == 0.0);
        CHECK(x.coeff(4) == 0.0);
    }
    SECTION("base value and unit slot in three variables") {
        const auto y = Jet4::variable(3, 1, 2.5);
        CHECK(y.value() == 2.5);
        CHECK(y.coeff(MultiIndex{0, 1, 0}) == 1.0);
        CHECK(y.coeff(MultiIndex{1, 0, 0}) == 0.0);
        CHECK(y.coeff(MultiIndex{0, 0, 1}) == 0.0);
    }
    SECTION("square of a shifted variable") {
        const auto x = Jet4::variable(1, 0, 3.0);
        const auto sq = x * x;
        CHECK(sq.coeff(0) == 9.0);
        CHECK(sq.coeff(1) == 6.0);
        CHECK(sq.coeff(2) == 1.0);
        CHECK(sq.coeff(3) == 0.0);
    }
    SECTION("index out of range") {
        CHECK_THROWS_AS(Jet4::variable(2, 2, 0.0), evaluation_error);
        CHECK_THROWS_AS(Jet4::variable(2, -1, 0.0), evaluation_error);
    }
}

TEST_CASE("truncated products", "[jets]") {
    SECTION("(1+x)^2") {
        const auto one_plus_x = 1.0 + Jet4::variable(1, 0, 0.0);
        const auto sq = one_plus_x * one_plus_x;
        CHECK(sq.coeff(0) == 1.0);
        CHECK(sq.coeff(1) == 2.0);
        CHECK(sq.coeff(2) == 1.0);
        CHECK(sq.coeff(3) == 0.0);
        CHECK(sq.coeff(4) == 0.0);
    }
    SECTION("x^2 * x^3 truncates to zero") {
        const auto x = Jet4::variable(1, 0, 0.0);
        const auto p = (x * x) * (x * x * x);
        for (int s = 0; s < p.size(); ++s) CHECK(p.coeff(s) == 0.0);
    }
    SECTION("sin * cos matches the jet of sin(2t)/2 at 0.7") {
        const double t0 = 0.7;
        const auto t = Jet4::variable(1, 0, t0);
        const auto prod = sin(t) * cos(t);
        // d^k of sin(2t)/2 is 2^{k-1} sin(2t + k pi/2)
        for (int k = 0; k <= 4; ++k) {
            const double expect = 0.5 * std::pow(2.0, k) * std::sin(2 * t0 + k * M_PI / 2);
            CHECK_THAT(prod.coeff(k), WithinAbs(expect / uni(k).factorial(), 1e-14));
        }
    }
    SECTION("dimension mismatch") {
        CHECK_THROWS_AS(Jet4::variable(1, 0, 0.0) * Jet4::variable(2, 0, 0.0),
                        evaluation_error);
    }
}

TEST_CASE("composition with univariate functions", "[jets]") {
    SECTION("exp at zero has factorial-reciprocal coefficients") {
        const auto e = exp(Jet4::variable(1, 0, 0.0));
        CHECK_THAT(e.coeff(0), WithinAbs(1.0, 1e-15));
        CHECK_THAT(e.coeff(1), WithinAbs(1.0, 1e-15));
        CHECK_THAT(e.coeff(2), WithinAbs(0.5, 1e-15));
        CHECK_THAT(e.coeff(3), WithinAbs(1.0 / 6, 1e-15));
        CHECK_THAT(e.coeff(4), WithinAbs(1.0 / 24, 1e-15));
    }
    SECTION("sqrt of a constant jet") {
        const auto r = sqrt(Jet4::constant(2, 4.0));
        CHECK(r.value() == 2.0);
        for (int s = 1; s < r.size(); ++s) CHECK(r.coeff(s) == 0.0);
    }
    SECTION("fourth derivative of log(1+t^2) at t=1 is 3") {
        const auto t = Jet4::variable(1, 0, 1.0);
        const auto lg = log(1.0 + t * t);
        CHECK_THAT(lg.partial(uni(4)), WithinAbs(3.0, 1e-12));
        CHECK_THAT(lg.coeff(4), WithinAbs(1.0 / 8.0, 1e-13));
        // cross-check against central differences
        const double fd4 =
            fd::richardson([](double t) { return std::log(1 + t * t); }, 1.0, 4, 1e-2);
        CHECK_THAT(lg.partial(uni(4)), WithinAbs(fd4, 1e-5));
    }
    SECTION("domain violations are reported, never NaN") {
        CHECK_THROWS_AS(sqrt(Jet4::constant(1, -1.0)), evaluation_error);
        CHECK_THROWS_AS(log(Jet4::constant(1, 0.0)), evaluation_error);
        CHECK_THROWS_AS(reciprocal(Jet4::constant(1, 0.0)), evaluation_error);
        CHECK_THROWS_AS(pow(Jet4::constant(1, -2.0), 0.5), evaluation_error);
    }
}

TEST_CASE("partial-derivative extraction", "[jets]") {
    SECTION("third derivative of exp at 0") {
        const auto e = exp(Jet4::variable(1, 0, 0.0));
        CHECK_THAT(e.partial(uni(3)), WithinAbs(1.0, 1e-15));
    }
    SECTION("constants have vanishing derivatives") {
        const auto c = Jet4::constant(2, 3.25);
        CHECK(c.partial(MultiIndex{1, 0}) == 0.0);
        CHECK(c.partial(MultiIndex{2, 2}) == 0.0);
    }
    SECTION("mixed partial of x*y") {
        const auto x = Jet4::variable(2, 0, 1.0);
        const auto y = Jet4::variable(2, 1, 1.0);
        CHECK_THAT((x * y).partial(MultiIndex{1, 1}), WithinAbs(1.0, 1e-15));
    }
    SECTION("invalid multi-index") {
        const auto x = Jet4::variable(2, 0, 1.0);
        CHECK_THROWS_AS(x.partial(MultiIndex{1}), evaluation_error);
        CHECK_THROWS_AS((MultiIndex{3, 2}), evaluation_error);  // order 5
    }
}

TEST_CASE("multi-index enumeration is graded and fixed", "[jets]") {
    const auto& L = jet_layout(2, 4);
    REQUIRE(L.size == 15);  // C(6, 2)
    CHECK(L.index[0] == MultiIndex{0, 0});
    CHECK(L.index[1] == MultiIndex{1, 0});
    CHECK(L.index[2] == MultiIndex{0, 1});
    CHECK(L.index[3] == MultiIndex{2, 0});
    CHECK(L.index[4] == MultiIndex{1, 1});
    CHECK(L.index[5] == MultiIndex{0, 2});
    CHECK(jet_basis_size(3, 4) == 35);
    CHECK(jet_basis_size(6, 4) == 210);
    CHECK(jet_basis_size(4, 2) == 15);
}

TEST_CASE("ring laws on random jets", "[jets]") {
    std::mt19937_64 rng(20240817);
    double worst = 0.0;
    for (int it = 0; it < 400; ++it) {
        const int n = 1 + (it % 4);
        const auto a = random_jet(rng, n), b = random_jet(rng, n), c = random_jet(rng, n);
        const auto assoc = (a * b) * c - a * (b * c);
        const auto dist = a * (b + c) - (a * b + a * c);
        const auto comm = a * b - b * a;
        for (int s = 0; s < a.size(); ++s) {
            worst = std::max(worst, std::abs(assoc.coeff(s)));
            worst = std::max(worst, std::abs(dist.coeff(s)));
            worst = std::max(worst, std::abs(comm.coeff(s)));
        }
    }
    CHECK(worst < 1e-13);
}

TEST_CASE("Leibniz rule through extraction", "[jets]") {
    std::mt19937_64 rng(99);
    double worst = 0.0;
    for (int it = 0; it < 100; ++it) {
        const int n = 1 + (it % 3);
        const auto a = random_jet(rng, n), b = random_jet(rng, n);
        const auto ab = a * b;
        const auto& L = jet_layout(n, kMaxOrder);
        for (int s = 0; s < L.size; ++s) {
            const MultiIndex alpha = L.index[s];
            double conv = 0.0;
            for (int u = 0; u < L.size; ++u) {
                const MultiIndex beta = L.index[u];
                std::array<int, kMaxDim> rest{};
                bool fits = true;
                for (int d = 0; d < n; ++d) {
                    if (beta[d] > alpha[d]) {
                        fits = false;
                        break;
                    }
                    rest[d] = alpha[d] - beta[d];
                }
                if (!fits) continue;
                const auto gamma = MultiIndex::from_exponents(n, std::span<const int>(rest.data(), n));
                conv += alpha.factorial() / (beta.factorial() * gamma.factorial()) *
                        a.partial(beta) * b.partial(gamma);
            }
            worst = std::max(worst, std::abs(ab.partial(alpha) - conv) / alpha.factorial());
        }
    }
    CHECK(worst < 1e-13);
}

TEST_CASE("chain rule against finite differences", "[jets]") {
    struct Case {
        const char* name;
        std::function<Jet4(const Jet4&)> jet;
        std::function<double(double)> ref;
    };
    const std::vector<Case> cases = {
        {"exp", [](const Jet4& x) { return exp(x); }, [](double x) { return std::exp(x); }},
        {"log", [](const Jet4& x) { return log(x); }, [](double x) { return std::log(x); }},
        {"sqrt", [](const Jet4& x) { return sqrt(x); }, [](double x) { return std::sqrt(x); }},
        {"sin", [](const Jet4& x) { return sin(x); }, [](double x) { return std::sin(x); }},
        {"cos", [](const Jet4& x) { return cos(x); }, [](double x) { return std::cos(x); }},
        {"sinh", [](const Jet4& x) { return sinh(x); }, [](double x) { return std::sinh(x); }},
        {"cosh", [](const Jet4& x) { return cosh(x); }, [](double x) { return std::cosh(x); }},
        {"recip", [](const Jet4& x) { return reciprocal(x); }, [](double x) { return 1 / x; }},
        {"pow1.7", [](const Jet4& x) { return pow(x, 1.7); },
         [](double x) { return std::pow(x, 1.7); }},
    };
    auto inner = [](double t) { return 1.4 + 0.5 * t + 0.3 * t * t - 0.1 * t * t * t; };
    const double t0 = 0.8;
    const Jet4 u = [&] {
        const auto t = Jet4::variable(1, 0, t0);
        return 1.4 + 0.5 * t + 0.3 * t * t - 0.1 * t * t * t;
    }();
    for (const auto& c : cases) {
        INFO(c.name);
        const Jet4 composed = c.jet(u);
        for (int k = 1; k <= 4; ++k) {
            const double jet_val = composed.partial(uni(k));
            const double fd_val =
                fd::richardson([&](double t) { return c.ref(inner(t)); }, t0, k, 1e-2);
            const double rel = std::abs(jet_val - fd_val) / std::max(1.0, std::abs(fd_val));
            INFO("derivative order " << k);
            CHECK(rel < 1e-6);
        }
    }
}

TEST_CASE("division round-trips against multiplication", "[jets]") {
    // Near |b0| = 0.1 the quotient's own coefficients reach ~(2/0.1)^4, so the
    // round-trip error is measured per coefficient relative to the quotient
    // scale (an absolute bound would test the input conditioning, not the
    // arithmetic).
    std::mt19937_64 rng(4242);
    double worst = 0.0;
    for (int it = 0; it < 200; ++it) {
        const int n = 1 + (it % 3);
        const auto a = random_jet(rng, n);
        auto b = random_jet(rng, n);
        while (std::abs(b.value()) <= 0.1)
            b.coeff(0) = -2.0 + 4.0 * ((rng() >> 11) * 0x1.0p-53);
        const auto q = a / b;
        double qscale = 1.0;
        for (int s = 0; s < q.size(); ++s) qscale = std::max(qscale, std::abs(q.coeff(s)));
        const auto rt = q * b - a;
        for (int s = 0; s < rt.size(); ++s)
            worst = std::max(worst, std::abs(rt.coeff(s)) / qscale);
    }
    CHECK(worst < 1e-12);
}

TEST_CASE("derivative operator shifts coefficients", "[jets]") {
    const auto t = Jet4::variable(1, 0, 0.3);
    const auto de = exp(t).derivative(0);
    for (int k = 0; k <= 3; ++k) CHECK_THAT(de.partial(uni(k)), WithinAbs(std::exp(0.3), 1e-13));
}
