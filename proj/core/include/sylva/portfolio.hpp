#pragma once

#include <vector>

namespace sylva {

using Vector = std::vector<double>;
using Matrix = std::vector<std::vector<double>>;

/// One realization of next period's endowment: target bundle a2 and money
/// endowment m2.
struct SpotScenario {
    double prob = 0.0;
    Vector a2;
    double m2 = 0.0;
};

/// One realization of the asset return vector r.
struct ReturnScenario {
    double prob = 0.0;
    Vector r;
};

/// Two-period consumption/portfolio problem with quadratic felicity
/// -1/2 (x - a)' Q (x - a) per period, goods prices p1/p2, asset prices q,
/// first-period money m1, and an uncertain second period. The joint
/// distribution is the product of the endowment scenarios and the return
/// scenarios (returns are independent of endowments by construction).
struct PortfolioProblem {
    Matrix q1;
    Matrix q2;
    Vector a1;
    Vector p1;
    Vector p2;
    /// Asset price vector (one entry per asset).
    Vector asset_prices;
    double m1 = 0.0;
    std::vector<SpotScenario> spot;
    std::vector<ReturnScenario> returns;
};

struct SecondPeriodSolution {
    /// Budget multiplier lambda2.
    double multiplier = 0.0;
    Vector x2;
    /// Maximized second-period felicity.
    double utility = 0.0;
};

/// Closed form for the second period given a realized (a2, m2), realized
/// returns r, and a portfolio b: lambda2 = (p2'a2 - m2 - r'b) / (p2' Q2^-1 p2),
/// x2 = a2 - lambda2 Q2^-1 p2.
SecondPeriodSolution solve_second_period(const PortfolioProblem& problem,
                                         const SpotScenario& spot, const Vector& r,
                                         const Vector& b);

struct FirstPeriodReduction {
    /// Second-moment matrix of returns, E[r r'].
    Matrix second_moment;
    /// S = E[r r'] / (p2' Q2^-1 p2); quadratic penalty on portfolio error.
    Matrix s;
    /// Penalty-minimizing portfolio b*.
    Vector b_star;
    /// Constant term: E(p2'a2 - m2)^2 - b*' R b*.
    double c = 0.0;
    /// d = p2' Q2^-1 p2.
    double d = 0.0;
    /// The reduced objective equals
    /// -1/2 (x1-a1)' Q1 (x1-a1) - 1/2 (b-b*)' S (b-b*) - constant.
    double constant = 0.0;
    /// Set when a matrix involved is numerically near-singular
    /// (condition number above 1e12).
    bool warn_ill_conditioned = false;
};

/// Integrates the second period out of the problem, leaving a deterministic
/// quadratic objective in (x1, b). DomainError when E[r r'] is singular.
FirstPeriodReduction reduce_first_period(const PortfolioProblem& problem);

struct FirstPeriodSolution {
    /// Budget multiplier lambda1.
    double multiplier = 0.0;
    Vector x1;
    Vector b;
    /// lambda1 >= 0, so money has non-negative shadow value.
    bool sensible_multiplier = false;
    /// Best uniform gap min(p2'a2 - m2) - max(r'b) over the finite support;
    /// non-negative means some threshold separates spot needs from
    /// portfolio payoffs in every scenario.
    double separation_gap = 0.0;
    bool sensible_separation = false;
    bool warn_ill_conditioned = false;
};

/// Closed form for the first period:
/// lambda1 = (p1'a1 + q'b* - m1) / (p1' Q1^-1 p1 + q' S^-1 q),
/// x1 = a1 - lambda1 Q1^-1 p1, b = b* - lambda1 S^-1 q.
FirstPeriodSolution solve_first_period(const PortfolioProblem& problem);

/// One scenario of an uncertain penalty target: the pair (b*, S).
struct EnlivenedScenario {
    double prob = 0.0;
    Vector b_star;
    Matrix s;
};

struct EnlivenedObjective {
    /// S_hat = E[S].
    Matrix s_hat;
    /// b_hat* = S_hat^-1 E[S b*]; the certainty-equivalent target.
    Vector b_hat_star;
};

/// Folds scenario-wise quadratic penalties into a single quadratic with the
/// averaged matrix and the matrix-weighted average target. Each scenario
/// matrix must be symmetric positive semidefinite and the average positive
/// definite.
EnlivenedObjective enlivened_objective(const std::vector<EnlivenedScenario>& scenarios);

struct QpSolution {
    Vector z;
    /// One multiplier per equality constraint.
    Vector multipliers;
    double primal_residual = 0.0;
    double stationarity_residual = 0.0;
};

/// Independent oracle: maximizes -1/2 (z-f)' H (z-f) subject to A z = rhs by
/// solving the KKT system directly. Raises DomainError when the KKT matrix
/// is singular (for example a rank-deficient A), and InternalError when the
/// computed solution fails its own residual checks (primal <= 1e-10,
/// stationarity <= 1e-8).
QpSolution qp_oracle(const Matrix& h, const Vector& f, const Matrix& a, const Vector& rhs);

} // namespace sylva
