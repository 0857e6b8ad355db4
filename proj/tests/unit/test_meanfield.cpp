#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "netform/meanfield.hpp"
#include "support.hpp"

using namespace netform;
using namespace testsupport;

namespace {

double logistic_ref(double x) { return 1.0 / (1.0 + std::exp(-x)); }

EAPProblem reciprocity_problem(double v, double c, double beta) {
    return EAPProblem({{-c, 1, 1}, {v, 2, 2}}, beta);
}

} // namespace

TEST_CASE("bernoulli entropy") {
    REQUIRE(entropy(0.0) == 0.0);
    REQUIRE(entropy(1.0) == 0.0);
    REQUIRE_THAT(entropy(0.5), Catch::Matchers::WithinAbs(std::log(2.0), 1e-15));
    const double h25 = -0.25 * std::log(0.25) - 0.75 * std::log(0.75);
    REQUIRE_THAT(entropy(0.25), Catch::Matchers::WithinAbs(h25, 1e-15));
    REQUIRE_THAT(entropy(0.25), Catch::Matchers::WithinAbs(0.5623351446188083, 1e-12));
    REQUIRE_THROWS_AS(entropy(-0.01), InvalidInputError);
    REQUIRE_THROWS_AS(entropy(1.01), InvalidInputError);
}

TEST_CASE("entropy-adjusted potential values") {
    // zero values: pure entropy, maximized at 1/2
    const EAPProblem flat({{0.0, 1, 1}}, 1.0);
    REQUIRE(eap(0.3, flat) == entropy(0.3));
    REQUIRE_THAT(solve_eap(flat).rho_star, Catch::Matchers::WithinAbs(0.5, 1e-12));

    const EAPProblem link({{1.0, 1, 1}}, 1.0);
    REQUIRE_THAT(eap(0.5, link), Catch::Matchers::WithinAbs(0.5 + std::log(2.0), 1e-15));

    // reciprocity motifs: Gamma = beta(-c rho + v rho^2 / 2) + H(rho)
    const EAPProblem trade = reciprocity_problem(3.0, 1.0, 1.7);
    Rng rng(51);
    for (int k = 0; k < 20; ++k) {
        const double rho = rng.next_unit();
        const double expected = 1.7 * (-rho + 1.5 * rho * rho) + entropy(rho);
        REQUIRE_THAT(eap(rho, trade), Catch::Matchers::WithinAbs(expected, 1e-14));
    }

    // the multi-edge sign restriction is enforced
    REQUIRE_THROWS_AS(EAPProblem({{-1.0, 2, 2}}, 1.0), InvalidInputError);
}

TEST_CASE("single-link solutions match the closed form") {
    Rng rng(52);
    for (int trial = 0; trial < 20; ++trial) {
        const double a = 6.0 * rng.next_unit() - 3.0;
        const double beta = 0.2 + 4.0 * rng.next_unit();
        const EAPSolution sol = solve_eap(EAPProblem({{a, 1, 1}}, beta));
        REQUIRE(sol.unique);
        REQUIRE(std::abs(sol.rho_star - logistic_ref(beta * a)) < 1e-10);
    }
}

TEST_CASE("solution is the global maximum on a dense audit grid") {
    Rng rng(53);
    for (int trial = 0; trial < 5; ++trial) {
        const EAPProblem pb = reciprocity_problem(1.0 + 5.0 * rng.next_unit(), 1.0,
                                                  0.5 + 3.0 * rng.next_unit());
        const EAPSolution sol = solve_eap(pb);
        for (int k = 1; k < 10000; ++k)
            REQUIRE(sol.zeta >= eap(static_cast<double>(k) / 10000.0, pb) - 1e-10);
    }
}

TEST_CASE("two local maxima coexist near the reciprocity transition") {
    // beta c = 3; the exchange of global maxima happens at beta v = 6
    const EAPSolution below = solve_eap(reciprocity_problem(5.8, 3.0, 1.0));
    const EAPSolution above = solve_eap(reciprocity_problem(6.2, 3.0, 1.0));
    REQUIRE(below.local_maxima.size() == 2);
    REQUIRE(above.local_maxima.size() == 2);
    REQUIRE(below.rho_star < 0.5);
    REQUIRE(above.rho_star > 0.5);

    // exactly at v = 2c the potential is symmetric under rho -> 1 - rho
    const EAPSolution at = solve_eap(reciprocity_problem(6.0, 3.0, 1.0));
    REQUIRE_FALSE(at.unique);
    REQUIRE(at.rho_star > 0.5); // tie-break to the larger density
}

TEST_CASE("long chains saturate at high value") {
    const EAPSolution sol = solve_eap(EAPProblem({{50.0, 4, 1}}, 1.0));
    REQUIRE(sol.rho_star > 0.99);
}

TEST_CASE("sweep flags no jump for the single-link model") {
    std::vector<double> path;
    for (int k = 0; k <= 120; ++k) path.push_back(-3.0 + 6.0 * k / 120.0);
    const SweepResult sweep = sweep_phase(
        [](double a) { return EAPProblem({{a, 1, 1}}, 2.0); }, path);
    REQUIRE(sweep.transitions().empty());
    for (const TransitionCandidate& c : sweep.candidates) REQUIRE(c.gap() < 0.05);
}

TEST_CASE("sweep finds the reciprocity transition from both directions") {
    std::vector<double> forward;
    for (int k = 0; k < 200; ++k) forward.push_back(1e-9 + 20.0 * k / 199.0);
    auto family = [](double v) { return reciprocity_problem(v, 3.0, 1.0); };

    const SweepResult fwd = sweep_phase(family, forward);
    REQUIRE(fwd.transitions().size() == 1);
    const TransitionCandidate t = fwd.transitions()[0];
    REQUIRE(t.gap() > 0.3);
    REQUIRE_THAT(t.critical(), Catch::Matchers::WithinAbs(6.0, 1e-2));

    std::vector<double> backward(forward.rbegin(), forward.rend());
    const SweepResult rev = sweep_phase(family, backward);
    REQUIRE(rev.transitions().size() == 1);
    REQUIRE(std::abs(rev.transitions()[0].critical() - t.critical()) < 1e-4);
}

TEST_CASE("sigma paths sweep smoothly off the tie line") {
    // v > 2c: the high branch holds the global maximum for every sigma, so
    // lowering the noise moves the density continuously toward 1
    std::vector<double> sigmas;
    for (int k = 0; k < 100; ++k) sigmas.push_back(0.8 - 0.7 * k / 99.0);
    const SweepResult sweep = sweep_phase(
        [](double sigma) { return reciprocity_problem(3.0, 1.0, (1.0 - sigma) / sigma); }, sigmas);
    REQUIRE(sweep.transitions().empty());
    for (std::size_t k = 1; k < sweep.points.size(); ++k)
        REQUIRE(sweep.points[k].solution.rho_star >= sweep.points[k - 1].solution.rho_star - 1e-9);
    REQUIRE(sweep.points.back().solution.rho_star > 0.95);
}

TEST_CASE("sweep path must be monotone") {
    std::vector<double> path{0.0, 1.0, 0.5};
    REQUIRE_THROWS_AS(sweep_phase([](double a) { return EAPProblem({{a, 1, 1}}, 1.0); }, path),
                      InvalidInputError);
}

TEST_CASE("chain families: 5 nodes continuous, 7 and 9 nodes jump") {
    auto chain_family = [](int nodes) {
        return [nodes](double v) { return EAPProblem({{v, nodes - 1, 1}}, 1.0); };
    };
    std::vector<double> path;
    for (int k = 0; k < 200; ++k) path.push_back(1e-9 + 60.0 * k / 199.0);

    const SweepResult five = sweep_phase(chain_family(5), path);
    REQUIRE(five.transitions().empty());
    for (const TransitionCandidate& c : five.candidates) REQUIRE(c.gap() < 0.05);

    for (int nodes : {7, 9}) {
        const SweepResult res = sweep_phase(chain_family(nodes), path);
        REQUIRE(res.transitions().size() == 1);
        REQUIRE(res.transitions()[0].gap() > 0.2);
    }
}

TEST_CASE("transition classification separates incentives from entropy") {
    // reciprocity trade: the critical v pins to 2c as sigma -> 0
    const double c = 1.0;
    auto trade_family = [c](double v, double sigma) {
        return reciprocity_problem(v, c, (1.0 - sigma) / sigma);
    };
    std::vector<double> path;
    for (int k = 0; k < 160; ++k) path.push_back(1e-6 + 8.0 * k / 159.0);
    const ClassificationResult trade = classify_transition(trade_family, path, 0.25);
    REQUIRE(trade.kind == TransitionKind::IncentiveDriven);
    REQUIRE(std::abs(trade.critical_at_sigma_min - 2.0 * c) / (2.0 * c) < 0.02);

    // 7-node chain: the jump drifts toward v = 0 as sigma -> 0
    auto chain_family = [](double v, double sigma) {
        return EAPProblem({{v, 6, 1}}, (1.0 - sigma) / sigma);
    };
    std::vector<double> chain_path;
    for (int k = 0; k < 160; ++k) chain_path.push_back(1e-6 + 30.0 * k / 159.0);
    const ClassificationResult chain = classify_transition(chain_family, chain_path, 0.5);
    REQUIRE(chain.kind == TransitionKind::EntropyDriven);

    // nothing to classify for the single-link model
    auto link_family = [](double a, double sigma) {
        return EAPProblem({{a, 1, 1}}, (1.0 - sigma) / sigma);
    };
    std::vector<double> link_path;
    for (int k = 0; k < 60; ++k) link_path.push_back(-2.0 + 4.0 * k / 59.0);
    REQUIRE_THROWS_AS(classify_transition(link_family, link_path, 0.5), InvalidInputError);
}

TEST_CASE("finite-N scaled normalization constants approach the limit") {
    // single-link model: zeta_N = (N-1)/N * log(1 + e^{beta a}), zeta = Gamma(rho*)
    for (double a : {-1.0, 0.5, 2.0}) {
        const double beta = 1.0;
        const MotifModel model({Motif::single_link()}, {a}, 0.5);
        const EAPSolution sol = solve_eap(EAPProblem::from_model(model));
        auto zeta_n = [&](int n) {
            const PotentialTable phi = motif_potential_table(model, n);
            double hi = phi[0];
            for (std::uint64_t g = 1; g < phi.size(); ++g) hi = std::max(hi, phi[g]);
            double total = 0.0;
            for (std::uint64_t g = 0; g < phi.size(); ++g) total += std::exp(beta * (phi[g] - hi));
            return (beta * hi + std::log(total)) / (n * n);
        };
        const double z3 = zeta_n(3), z4 = zeta_n(4);
        REQUIRE(std::abs(z4 - sol.zeta) < std::abs(z3 - sol.zeta));
        // the enumeration matches the closed form of this special case
        REQUIRE_THAT(z4, Catch::Matchers::WithinAbs(3.0 / 4.0 * std::log1p(std::exp(beta * a)), 1e-12));
    }
}
