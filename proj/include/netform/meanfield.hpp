#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "netform/errors.hpp"
#include "netform/motif.hpp"
#include "netform/parallel.hpp"

namespace netform {

/// Bernoulli entropy H(p) = -p ln p - (1-p) ln(1-p), with H(0) = H(1) = 0.
inline double entropy(double p) {
    if (!(p >= 0.0 && p <= 1.0)) throw InvalidInputError("entropy argument must lie in [0,1]");
    double h = 0.0;
    if (p > 0.0) h -= p * std::log(p);
    if (p < 1.0) h -= (1.0 - p) * std::log(1.0 - p);
    return h;
}

/// One motif reduced to what the entropy-adjusted potential needs.
struct MotifTerm {
    double value = 0.0; // a_m
    int edges = 1;      // e_m
    int degeneracy = 1; // h_m
};

/// The homogeneous variational problem: maximize
/// Gamma(rho) = beta * sum_m (a_m / h_m) rho^{e_m} + H(rho) over [0,1].
/// Requires a_m > 0 for every motif with e_m > 1; single-edge motifs may
/// carry any sign.
struct EAPProblem {
    std::vector<MotifTerm> terms;
    double beta = 1.0;

    EAPProblem(std::vector<MotifTerm> t, double b) : terms(std::move(t)), beta(b) {
        if (terms.empty()) throw InvalidInputError("entropy-adjusted potential needs motif terms");
        if (!(beta > 0.0)) throw InvalidInputError("beta must be positive");
        for (const MotifTerm& m : terms) {
            if (m.edges < 1 || m.degeneracy < 1)
                throw InvalidInputError("motif term needs edges >= 1 and degeneracy >= 1");
            if (m.edges > 1 && !(m.value > 0.0))
                throw InvalidInputError("multi-edge motif values must be positive here");
        }
    }

    static EAPProblem from_model(const MotifModel& model) {
        std::vector<MotifTerm> terms;
        terms.reserve(model.motifs().size());
        for (std::size_t k = 0; k < model.motifs().size(); ++k)
            terms.push_back({model.value(k), model.motifs()[k].edge_count(),
                             model.motifs()[k].degeneracy()});
        return EAPProblem(std::move(terms), model.beta());
    }
};

inline double eap(double rho, const EAPProblem& pb) {
    if (!(rho >= 0.0 && rho <= 1.0)) throw InvalidInputError("density must lie in [0,1]");
    double motif_value = 0.0;
    for (const MotifTerm& m : pb.terms)
        motif_value += m.value / m.degeneracy * detail::int_pow(rho, m.edges);
    return pb.beta * motif_value + entropy(rho);
}

namespace detail {

inline double eap_slope(double rho, const EAPProblem& pb) {
    double s = 0.0;
    for (const MotifTerm& m : pb.terms)
        s += m.value * m.edges / m.degeneracy * int_pow(rho, m.edges - 1);
    return pb.beta * s + std::log((1.0 - rho) / rho);
}

inline double eap_curvature(double rho, const EAPProblem& pb) {
    double c = 0.0;
    for (const MotifTerm& m : pb.terms)
        if (m.edges >= 2)
            c += m.value * m.edges * (m.edges - 1) / m.degeneracy * int_pow(rho, m.edges - 2);
    return pb.beta * c - 1.0 / (rho * (1.0 - rho));
}

struct ScalarMaximum {
    double x = 0.0;
    double value = 0.0;
    bool boundary = false; // maximum clamped at the numeric grid edge
};

/// Root of `slope` inside [a, b] with slope(a) > 0 > slope(b): bisection
/// with Newton acceleration where `curvature` permits. Root to ~1e-14.
template <class SlopeFn, class CurvatureFn>
double polish_descending_root(const SlopeFn& slope, const CurvatureFn& curvature,
                              double a, double b) {
    double x = 0.5 * (a + b);
    for (int it = 0; it < 200 && b - a > 1e-15; ++it) {
        const double s = slope(x);
        if (s == 0.0) return x;
        (s > 0.0 ? a : b) = x;
        double next = std::numeric_limits<double>::quiet_NaN();
        const double c = curvature(x);
        if (c != 0.0) next = x - s / c;
        if (!(next > a && next < b)) next = 0.5 * (a + b);
        x = next;
    }
    return x;
}

/// All local maxima of F on [lo, hi], where F' = slope: interior roots
/// where the slope crosses + -> -, plus the grid edges when the slope
/// pushes outward there (maximum sits below/above the numeric floor).
template <class SlopeFn, class CurvatureFn, class ValueFn>
std::vector<ScalarMaximum> bracket_maxima(const SlopeFn& slope, const CurvatureFn& curvature,
                                          const ValueFn& value, double lo, double hi, int grid) {
    std::vector<ScalarMaximum> maxima;
    double prev_x = lo;
    double prev_s = slope(lo);
    if (prev_s < 0.0) maxima.push_back({lo, value(lo), true});
    for (int k = 1; k < grid; ++k) {
        const double x = lo + (hi - lo) * static_cast<double>(k) / (grid - 1);
        const double s = slope(x);
        if (prev_s > 0.0 && s <= 0.0) {
            const double root = polish_descending_root(slope, curvature, prev_x, x);
            maxima.push_back({root, value(root), false});
        }
        prev_x = x;
        prev_s = s;
    }
    if (prev_s > 0.0) maxima.push_back({hi, value(hi), true});
    return maxima;
}

} // namespace detail

struct LocalMaximum {
    double rho = 0.0;
    double gamma = 0.0;
};

struct EAPSolution {
    double rho_star = 0.0;
    double zeta = 0.0;
    std::vector<LocalMaximum> local_maxima; // ordered by rho
    /// False when a second local maximum trails the best by <= 1e-8 in
    /// Gamma; rho_star then tie-breaks to the larger density.
    bool unique = true;
};

struct SolveEapOptions {
    int grid = 2001;
    double edge = 1e-6;
    double tie_gap = 1e-8;
};

/// Global maximization of the entropy-adjusted potential via dense
/// bracketing of the first-order condition and bisection+Newton polish.
inline EAPSolution solve_eap(const EAPProblem& pb, const SolveEapOptions& opt = {}) {
    const auto maxima = detail::bracket_maxima(
        [&](double r) { return detail::eap_slope(r, pb); },
        [&](double r) { return detail::eap_curvature(r, pb); },
        [&](double r) { return eap(r, pb); }, opt.edge, 1.0 - opt.edge, opt.grid);
    if (maxima.empty()) throw NumericalError("entropy-adjusted potential has no maximum candidate");

    EAPSolution sol;
    for (const auto& m : maxima) sol.local_maxima.push_back({m.x, m.value});

    std::size_t best = 0;
    for (std::size_t k = 1; k < maxima.size(); ++k)
        if (maxima[k].value > maxima[best].value) best = k;
    double second = -std::numeric_limits<double>::infinity();
    std::size_t arg_tie = best;
    for (std::size_t k = 0; k < maxima.size(); ++k) {
        if (k == best) continue;
        second = std::max(second, maxima[k].value);
        if (maxima[best].value - maxima[k].value <= opt.tie_gap && maxima[k].x > maxima[arg_tie].x)
            arg_tie = k;
    }
    sol.unique = maxima.size() == 1 || maxima[best].value - second > opt.tie_gap;
    const std::size_t pick = sol.unique ? best : std::max(best, arg_tie);
    sol.rho_star = maxima[pick].x;
    sol.zeta = maxima[pick].value;
    return sol;
}

struct SweepOptions {
    double jump_threshold = 0.05;
    double refine_tol = 1e-6; // final parameter-bracket width
    double step_max = 1e-3;   // a flagged jump must be localized below this
    int workers = 1;          // grid points are independent solves
    SolveEapOptions solver;
};

/// A steep segment of the sweep, refined by parameter bisection. Flagged
/// when the density gap survives localization to refine_tol, which
/// separates genuine discontinuities from steep continuous responses.
struct TransitionCandidate {
    double param_lo = 0.0;
    double param_hi = 0.0;
    double rho_lo = 0.0;
    double rho_hi = 0.0;
    bool flagged = false;

    double gap() const { return std::abs(rho_hi - rho_lo); }
    double critical() const { return 0.5 * (param_lo + param_hi); }
};

struct SweepPoint {
    double param = 0.0;
    EAPSolution solution;
};

struct SweepResult {
    std::vector<SweepPoint> points;
    std::vector<TransitionCandidate> candidates; // refined, flagged or not

    std::vector<TransitionCandidate> transitions() const {
        std::vector<TransitionCandidate> out;
        for (const auto& c : candidates)
            if (c.flagged) out.push_back(c);
        return out;
    }
};

/// rho*(parameter) along a monotone 1-parameter path with jump detection.
inline SweepResult sweep_phase(const std::function<EAPProblem(double)>& problem_at,
                               std::span<const double> path, const SweepOptions& opt = {}) {
    if (path.size() < 2) {
        SweepResult r;
        for (double p : path) r.points.push_back({p, solve_eap(problem_at(p), opt.solver)});
        return r;
    }
    const bool increasing = path[1] > path[0];
    for (std::size_t k = 1; k < path.size(); ++k)
        if ((path[k] > path[k - 1]) != increasing || path[k] == path[k - 1])
            throw InvalidInputError("sweep path must be strictly monotone");

    SweepResult result;
    result.points.resize(path.size());
    parallel_for(path.size(), opt.workers, [&](std::size_t k) {
        result.points[k] = {path[k], solve_eap(problem_at(path[k]), opt.solver)};
    });

    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
        const double r0 = result.points[k].solution.rho_star;
        const double r1 = result.points[k + 1].solution.rho_star;
        if (std::abs(r1 - r0) <= opt.jump_threshold) continue;

        TransitionCandidate cand{path[k], path[k + 1], r0, r1, false};
        while (std::abs(cand.param_hi - cand.param_lo) > opt.refine_tol) {
            const double mid = 0.5 * (cand.param_lo + cand.param_hi);
            const double rho_mid = solve_eap(problem_at(mid), opt.solver).rho_star;
            if (std::abs(rho_mid - cand.rho_lo) <= std::abs(rho_mid - cand.rho_hi)) {
                cand.param_lo = mid;
                cand.rho_lo = rho_mid;
            } else {
                cand.param_hi = mid;
                cand.rho_hi = rho_mid;
            }
        }
        cand.flagged = cand.gap() > opt.jump_threshold &&
                       std::abs(cand.param_hi - cand.param_lo) <= opt.step_max;
        result.candidates.push_back(cand);
    }
    return result;
}

enum class TransitionKind { IncentiveDriven, EntropyDriven };

struct ClassificationStep {
    double sigma = 0.0;
    bool found = false;
    double critical = 0.0;
    double gap = 0.0;
};

struct ClassificationResult {
    TransitionKind kind = TransitionKind::EntropyDriven;
    std::vector<ClassificationStep> steps;
    double critical_at_sigma_min = std::numeric_limits<double>::quiet_NaN();
};

struct ClassifyOptions {
    double sigma_min = 1e-3;
    /// Relative drift of the critical parameter allowed over the last
    /// sigma halving for the transition to count as persisting in place.
    double stability_rel = 0.1;
    SweepOptions sweep;
};

/// Re-detects a jump along sigma in {sigma0, sigma0/2, ..., sigma_min}.
/// Incentive-driven means the jump persists at sigma_min with a critical
/// parameter that has stopped moving (the sigma -> 0 limit of rho* is
/// discontinuous at an interior point); a jump that keeps drifting, or
/// vanishes, is entropy-driven.
inline ClassificationResult classify_transition(
    const std::function<EAPProblem(double, double)>& problem_at_param_sigma,
    std::span<const double> path, double sigma0, const ClassifyOptions& opt = {}) {
    if (!(sigma0 > opt.sigma_min))
        throw InvalidInputError("classification needs sigma0 above sigma_min");

    std::vector<double> sigmas;
    for (double s = sigma0; s > opt.sigma_min; s *= 0.5) sigmas.push_back(s);
    sigmas.push_back(opt.sigma_min);

    ClassificationResult result;
    double tracked = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t k = 0; k < sigmas.size(); ++k) {
        const double sigma = sigmas[k];
        const SweepResult sweep = sweep_phase(
            [&](double p) { return problem_at_param_sigma(p, sigma); }, path, opt.sweep);
        const auto transitions = sweep.transitions();

        ClassificationStep step;
        step.sigma = sigma;
        if (!transitions.empty()) {
            std::size_t pick = 0;
            if (!std::isnan(tracked))
                for (std::size_t t = 1; t < transitions.size(); ++t)
                    if (std::abs(transitions[t].critical() - tracked) <
                        std::abs(transitions[pick].critical() - tracked))
                        pick = t;
            step.found = true;
            step.critical = transitions[pick].critical();
            step.gap = transitions[pick].gap();
            tracked = step.critical;
        }
        if (k == 0 && !step.found)
            throw InvalidInputError("no transition detected at sigma0; nothing to classify");
        result.steps.push_back(step);
    }

    const ClassificationStep& last = result.steps.back();
    const ClassificationStep& prev = result.steps[result.steps.size() - 2];
    result.critical_at_sigma_min = last.found ? last.critical
                                              : std::numeric_limits<double>::quiet_NaN();
    const bool stable =
        last.found && prev.found &&
        std::abs(last.critical - prev.critical) <=
            opt.stability_rel * std::max(std::abs(last.critical), 1e-12);
    result.kind = (last.found && last.gap > opt.sweep.jump_threshold && stable)
                      ? TransitionKind::IncentiveDriven
                      : TransitionKind::EntropyDriven;
    return result;
}

} // namespace netform
