#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "netform/typed.hpp"
#include "support.hpp"

using namespace netform;
using namespace testsupport;

namespace {

TypedModel two_type_model(double v, double c01, double sigma) {
    // reciprocated-pair motif plus a linear cross-type cost
    std::vector<double> linear{0.0, c01, c01, 0.0};
    return TypedModel({0.5, 0.5}, MotifModel({Motif::reciprocal_pair()}, {v}, sigma),
                      std::move(linear));
}

} // namespace

TEST_CASE("typed model validation") {
    MotifModel motifs({Motif::single_link()}, {1.0}, 0.5);
    REQUIRE_THROWS_AS(TypedModel({0.5, 0.6}, motifs, std::vector<double>(4, 0.0)),
                      InvalidInputError); // weights off simplex
    REQUIRE_THROWS_AS(TypedModel({0.5, 0.5}, motifs, std::vector<double>(3, 0.0)),
                      InvalidInputError); // wrong matrix shape
    REQUIRE_THROWS_AS(TypedModel({1.0, 0.0}, motifs, std::vector<double>(4, 0.0)),
                      InvalidInputError); // support must be full
    REQUIRE_THROWS_AS(
        TypedModel({0.5, 0.5}, motifs, std::vector<double>(4, 0.0),
                   CesAggregator{std::vector<double>(4, -1.0), {1.0, 1.0}}),
        InvalidInputError); // negative CES weights
    REQUIRE_THROWS_AS(
        TypedModel({0.5, 0.5}, motifs, std::vector<double>(4, 0.0),
                   CesAggregator{std::vector<double>(4, 1.0), {1.5, 1.0}}),
        InvalidInputError); // exponent outside (0,1]
    // a valid CES aggregator passes the regularity spot checks
    REQUIRE_NOTHROW(TypedModel({0.5, 0.5}, motifs, std::vector<double>(4, 0.0),
                               CesAggregator{{1.0, 0.5, 0.5, 1.0}, {0.5, 0.8}}));
}

TEST_CASE("kernel motif density") {
    const std::vector<double> w{0.3, 0.7};
    for (const Motif& m : {Motif::single_link(), Motif::reciprocal_pair(), Motif::directed_cycle(3)}) {
        const Kernel constant(2, 0.37);
        REQUIRE_THAT(kernel_motif_density(m, constant, w),
                     Catch::Matchers::WithinAbs(detail::int_pow(0.37, m.edge_count()), 1e-14));
        REQUIRE(kernel_motif_density(m, Kernel(2, 0.0), w) == 0.0);
    }
    // L=2 single link with uniform weights: the plain average of entries
    Kernel psi(2);
    psi.at(0, 0) = 0.2;
    psi.at(0, 1) = 0.4;
    psi.at(1, 0) = 0.6;
    psi.at(1, 1) = 0.8;
    REQUIRE_THAT(kernel_motif_density(Motif::single_link(), psi, std::vector<double>{0.5, 0.5}),
                 Catch::Matchers::WithinAbs(0.5, 1e-15));
}

TEST_CASE("typed potential reduces to the scalar one for a single type") {
    Rng rng(61);
    for (int trial = 0; trial < 10; ++trial) {
        const double v = 0.5 + 2.0 * rng.next_unit();
        const double a1 = 2.0 * rng.next_unit() - 1.0;
        const double sigma = 0.2 + 0.6 * rng.next_unit();
        const double c11 = 2.0 * rng.next_unit() - 1.0;
        TypedModel model({1.0},
                         MotifModel({Motif::single_link(), Motif::reciprocal_pair()}, {a1, v}, sigma),
                         {c11});
        const double rho = rng.next_unit();
        Kernel psi(1, rho);
        const EAPProblem scalar({{a1, 1, 1}, {v, 2, 2}}, model.beta());
        REQUIRE_THAT(typed_eap(psi, model),
                     Catch::Matchers::WithinAbs(eap(rho, scalar) + model.beta() * c11 * rho, 1e-12));
    }
}

TEST_CASE("typed potential at the half kernel") {
    // reciprocity motifs, no neighborhood term: beta(-c/2 + v/8) + ln 2
    const double v = 3.0, c = 1.0, sigma = 0.4;
    TypedModel model({0.25, 0.25, 0.25, 0.25},
                     MotifModel({Motif::single_link(), Motif::reciprocal_pair()}, {-c, v}, sigma),
                     std::vector<double>(16, 0.0));
    const double beta = (1.0 - sigma) / sigma;
    REQUIRE_THAT(typed_eap(Kernel(4, 0.5), model),
                 Catch::Matchers::WithinAbs(beta * (-c / 2.0 + v / 8.0) + std::log(2.0), 1e-12));
}

TEST_CASE("typed potential matches the trade objective term by term") {
    // L=3 trade-style model evaluated at a random kernel
    const int L = 3;
    const double v = 2.0, gamma = 4.0, sigma = 0.3;
    std::vector<double> linear(9);
    auto dist = [&](int s, int t) {
        const int d = std::min(std::abs(s - t), L - std::abs(s - t));
        return static_cast<double>(d) / L;
    };
    for (int s = 0; s < L; ++s)
        for (int t = 0; t < L; ++t) linear[static_cast<std::size_t>(s) * L + t] = -gamma * dist(s, t);
    TypedModel model({1.0 / 3, 1.0 / 3, 1.0 / 3},
                     MotifModel({Motif::reciprocal_pair()}, {v}, sigma), linear);

    Rng rng(62);
    Kernel psi(L);
    for (int s = 0; s < L; ++s)
        for (int t = 0; t < L; ++t) psi.at(s, t) = 0.05 + 0.9 * rng.next_unit();

    const double beta = (1.0 - sigma) / sigma;
    double expected = 0.0;
    for (int s = 0; s < L; ++s)
        for (int t = 0; t < L; ++t) {
            const double w2 = (1.0 / 3) * (1.0 / 3);
            expected += w2 * (beta * (v / 2.0 * psi.at(s, t) * psi.at(t, s) -
                                      gamma * dist(s, t) * psi.at(s, t)) +
                              entropy(psi.at(s, t)));
        }
    REQUIRE_THAT(typed_eap(psi, model), Catch::Matchers::WithinAbs(expected, 1e-12));
}

TEST_CASE("kernel solver on degenerate cases") {
    // single type: matches the scalar solver with the linear part folded in
    {
        const double a1 = 0.8, c11 = -0.3, sigma = 0.5;
        TypedModel model({1.0}, MotifModel({Motif::single_link()}, {a1}, sigma), {c11});
        const KernelSolution sol = solve_kernel(model);
        // FOC: beta(a1 + c11) + ln((1-x)/x) = 0
        const double expected = 1.0 / (1.0 + std::exp(-model.beta() * (a1 + c11)));
        REQUIRE_THAT(sol.kernel.at(0, 0), Catch::Matchers::WithinAbs(expected, 1e-9));
        REQUIRE(sol.converged);
    }
    // zero incentives: pure entropy, kernel pinned at one half
    {
        TypedModel model({0.5, 0.5}, MotifModel({Motif::single_link()}, {0.0}, 0.5),
                         std::vector<double>(4, 0.0));
        const KernelSolution sol = solve_kernel(model);
        for (int s = 0; s < 2; ++s)
            for (int t = 0; t < 2; ++t)
                REQUIRE_THAT(sol.kernel.at(s, t), Catch::Matchers::WithinAbs(0.5, 1e-10));
    }
}

TEST_CASE("kernel solver satisfies its own first-order conditions with CES") {
    TypedModel model({0.4, 0.6},
                     MotifModel({Motif::reciprocal_pair()}, {1.5}, 0.5),
                     {0.2, -0.5, -0.5, 0.1},
                     CesAggregator{{0.8, 0.3, 0.3, 0.8}, {0.6, 0.6}});
    const KernelSolution sol = solve_kernel(model);
    // numeric stationarity: small perturbations never improve Gamma
    const double base = typed_eap(sol.kernel, model);
    Rng rng(63);
    for (int trial = 0; trial < 40; ++trial) {
        Kernel nudged = sol.kernel;
        const int s = static_cast<int>(rng.next_below(2));
        const int t = static_cast<int>(rng.next_below(2));
        const double eps = (rng.next_bernoulli(0.5) ? 1.0 : -1.0) * 1e-5;
        nudged.at(s, t) = std::clamp(nudged.at(s, t) + eps, 0.0, 1.0);
        REQUIRE(typed_eap(nudged, model) <= base + 1e-9);
    }
}

TEST_CASE("finite-N typed utilities") {
    // homogeneity forces u(0) = 0: the empty network pays nothing
    TypedModel model = two_type_model(2.0, -0.7, 0.5);
    const std::vector<int> types{0, 1, 0, 1};
    REQUIRE(finite_n_typed_utility(0, DirectedNetwork(4), types, model) == 0.0);

    // linear expansion: motif utility plus per-neighbor linear costs
    Rng rng(64);
    for (int trial = 0; trial < 20; ++trial) {
        DirectedNetwork g(4);
        for (int k = 0; k < 12; ++k)
            if (rng.next_bernoulli(0.5)) g.toggle_in_place(dyad_at(4, k));
        const int i = static_cast<int>(rng.next_below(4));
        double expected = motif_utility(i, g, model.motifs());
        for (int j = 0; j < 4; ++j)
            if (j != i && g.has({i, j}))
                expected += model.linear_cost(types[static_cast<std::size_t>(i)],
                                              types[static_cast<std::size_t>(j)]);
        REQUIRE_THAT(finite_n_typed_utility(i, g, types, model),
                     Catch::Matchers::WithinAbs(expected, 1e-12));
    }

    REQUIRE_THROWS_AS(finite_n_typed_utility(0, DirectedNetwork(3), types, model),
                      InvalidInputError);
}

TEST_CASE("typed marginals drive the same increments as full utilities") {
    TypedModel model({0.5, 0.5},
                     MotifModel({Motif::reciprocal_pair(), Motif::single_link()}, {2.0, -0.4}, 0.5),
                     {0.0, -0.8, -0.8, 0.0},
                     CesAggregator{{0.5, 0.2, 0.2, 0.5}, {0.7, 0.7}});
    const std::vector<int> types{0, 0, 1, 1};
    Rng rng(65);
    for (int trial = 0; trial < 25; ++trial) {
        DirectedNetwork g(4);
        for (int k = 0; k < 12; ++k)
            if (rng.next_bernoulli(0.5)) g.toggle_in_place(dyad_at(4, k));
        const Dyad d = dyad_at(4, static_cast<int>(rng.next_below(12)));
        const double direct = finite_n_typed_utility(d.source, g.toggled(d), types, model) -
                              finite_n_typed_utility(d.source, g, types, model);
        REQUIRE_THAT(typed_marginal_utility(model, types, g, d),
                     Catch::Matchers::WithinAbs(direct, 1e-10));
    }
}
