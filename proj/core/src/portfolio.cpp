#include "sylva/portfolio.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "sylva/errors.hpp"

namespace sylva {

namespace {

constexpr double kProbabilityTol = 1e-9;
constexpr double kSymmetryTol = 1e-12;
constexpr double kConditionLimit = 1e12;

Eigen::VectorXd to_eigen(const Vector& v, const std::string& name) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!std::isfinite(v[i])) {
            throw DomainError(name + " has a non-finite entry");
        }
        out[static_cast<Eigen::Index>(i)] = v[i];
    }
    return out;
}

Eigen::MatrixXd to_eigen(const Matrix& m, const std::string& name) {
    if (m.empty()) {
        throw DomainError(name + " is empty");
    }
    const std::size_t cols = m.front().size();
    Eigen::MatrixXd out(static_cast<Eigen::Index>(m.size()), static_cast<Eigen::Index>(cols));
    for (std::size_t i = 0; i < m.size(); ++i) {
        if (m[i].size() != cols) {
            throw DomainError(name + " has rows of unequal length");
        }
        for (std::size_t j = 0; j < cols; ++j) {
            if (!std::isfinite(m[i][j])) {
                throw DomainError(name + " has a non-finite entry");
            }
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = m[i][j];
        }
    }
    return out;
}

Vector from_eigen(const Eigen::VectorXd& v) {
    return Vector(v.data(), v.data() + v.size());
}

Matrix from_eigen(const Eigen::MatrixXd& m) {
    Matrix out(static_cast<std::size_t>(m.rows()), Vector(static_cast<std::size_t>(m.cols())));
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            out[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = m(i, j);
        }
    }
    return out;
}

void require_symmetric(const Eigen::MatrixXd& m, const std::string& name) {
    if (m.rows() != m.cols()) {
        throw DomainError(name + " is not square");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if ((m - m.transpose()).cwiseAbs().maxCoeff() > kSymmetryTol * scale) {
        throw DomainError(name + " is not symmetric");
    }
}

Eigen::LLT<Eigen::MatrixXd> require_spd(const Eigen::MatrixXd& m, const std::string& name) {
    require_symmetric(m, name);
    Eigen::LLT<Eigen::MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) {
        throw DomainError(name + " is not positive definite");
    }
    return llt;
}

bool ill_conditioned(const Eigen::MatrixXd& m) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const auto& sigma = svd.singularValues();
    const double smin = sigma[sigma.size() - 1];
    return smin <= 0.0 || sigma[0] / smin > kConditionLimit;
}

void check_distribution(std::size_t count, double total, const std::string& name) {
    if (count == 0) {
        throw DomainError(name + " must have at least one scenario");
    }
    if (std::abs(total - 1.0) > kProbabilityTol) {
        throw DomainError(name + " probabilities sum to " + std::to_string(total) +
                          ", expected 1");
    }
}

struct CheckedProblem {
    Eigen::MatrixXd q1;
    Eigen::MatrixXd q2;
    Eigen::VectorXd a1;
    Eigen::VectorXd p1;
    Eigen::VectorXd p2;
    Eigen::VectorXd asset_prices;
};

CheckedProblem check_problem(const PortfolioProblem& problem) {
    CheckedProblem checked{to_eigen(problem.q1, "Q1"),
                           to_eigen(problem.q2, "Q2"),
                           to_eigen(problem.a1, "a1"),
                           to_eigen(problem.p1, "p1"),
                           to_eigen(problem.p2, "p2"),
                           to_eigen(problem.asset_prices, "asset prices")};
    require_symmetric(checked.q1, "Q1");
    require_symmetric(checked.q2, "Q2");
    if (checked.a1.size() != checked.q1.rows() || checked.p1.size() != checked.q1.rows()) {
        throw DomainError("a1 and p1 must match Q1's dimension");
    }
    if (checked.p2.size() != checked.q2.rows()) {
        throw DomainError("p2 must match Q2's dimension");
    }
    if (!std::isfinite(problem.m1)) {
        throw DomainError("m1 is not finite");
    }
    double spot_total = 0.0;
    for (const SpotScenario& spot : problem.spot) {
        if (!(spot.prob > 0.0) || !std::isfinite(spot.prob)) {
            throw DomainError("endowment scenario probabilities must be positive");
        }
        if (!std::isfinite(spot.m2)) {
            throw DomainError("m2 is not finite");
        }
        if (static_cast<Eigen::Index>(spot.a2.size()) != checked.q2.rows()) {
            throw DomainError("a2 must match Q2's dimension");
        }
        spot_total += spot.prob;
    }
    check_distribution(problem.spot.size(), spot_total, "endowment");
    double return_total = 0.0;
    for (const ReturnScenario& scenario : problem.returns) {
        if (!(scenario.prob > 0.0) || !std::isfinite(scenario.prob)) {
            throw DomainError("return scenario probabilities must be positive");
        }
        if (scenario.r.size() != problem.asset_prices.size()) {
            throw DomainError("return vectors must match the number of assets");
        }
        return_total += scenario.prob;
    }
    check_distribution(problem.returns.size(), return_total, "return");
    return checked;
}

} // namespace

SecondPeriodSolution solve_second_period(const PortfolioProblem& problem,
                                         const SpotScenario& spot, const Vector& r,
                                         const Vector& b) {
    const CheckedProblem checked = check_problem(problem);
    const Eigen::VectorXd a2 = to_eigen(spot.a2, "a2");
    const Eigen::VectorXd rv = to_eigen(r, "r");
    const Eigen::VectorXd bv = to_eigen(b, "b");
    if (a2.size() != checked.q2.rows()) {
        throw DomainError("a2 must match Q2's dimension");
    }
    if (rv.size() != bv.size() || rv.size() != checked.asset_prices.size()) {
        throw DomainError("r and b must match the number of assets");
    }

    const auto llt = require_spd(checked.q2, "Q2");
    const Eigen::VectorXd q2inv_p2 = llt.solve(checked.p2);
    const double d = checked.p2.dot(q2inv_p2);
    const double lambda2 = (checked.p2.dot(a2) - spot.m2 - rv.dot(bv)) / d;
    const Eigen::VectorXd x2 = a2 - lambda2 * q2inv_p2;
    return SecondPeriodSolution{lambda2, from_eigen(x2), -lambda2 * lambda2 * d / 2.0};
}

FirstPeriodReduction reduce_first_period(const PortfolioProblem& problem) {
    const CheckedProblem checked = check_problem(problem);
    const auto llt = require_spd(checked.q2, "Q2");
    const Eigen::VectorXd q2inv_p2 = llt.solve(checked.p2);
    const double d = checked.p2.dot(q2inv_p2);

    const Eigen::Index assets = checked.asset_prices.size();
    Eigen::MatrixXd second_moment = Eigen::MatrixXd::Zero(assets, assets);
    Eigen::VectorXd mean_return = Eigen::VectorXd::Zero(assets);
    for (const ReturnScenario& scenario : problem.returns) {
        const Eigen::VectorXd rv = to_eigen(scenario.r, "r");
        second_moment += scenario.prob * rv * rv.transpose();
        mean_return += scenario.prob * rv;
    }

    double mean_need = 0.0;
    double mean_need_sq = 0.0;
    for (const SpotScenario& spot : problem.spot) {
        const Eigen::VectorXd a2 = to_eigen(spot.a2, "a2");
        const double need = checked.p2.dot(a2) - spot.m2;
        mean_need += spot.prob * need;
        mean_need_sq += spot.prob * need * need;
    }

    Eigen::FullPivLU<Eigen::MatrixXd> lu(second_moment);
    if (!lu.isInvertible()) {
        throw DomainError("the second-moment matrix of returns is singular");
    }
    const Eigen::VectorXd b_star = lu.solve(mean_return * mean_need);
    const double c = mean_need_sq - b_star.dot(second_moment * b_star);
    const Eigen::MatrixXd s = second_moment / d;

    FirstPeriodReduction reduction;
    reduction.second_moment = from_eigen(second_moment);
    reduction.s = from_eigen(s);
    reduction.b_star = from_eigen(b_star);
    reduction.c = c;
    reduction.d = d;
    reduction.constant = c / (2.0 * d);
    reduction.warn_ill_conditioned = ill_conditioned(checked.q2) || ill_conditioned(second_moment);
    return reduction;
}

FirstPeriodSolution solve_first_period(const PortfolioProblem& problem) {
    const CheckedProblem checked = check_problem(problem);
    const FirstPeriodReduction reduction = reduce_first_period(problem);
    const Eigen::MatrixXd s = to_eigen(reduction.s, "S");
    const Eigen::VectorXd b_star = to_eigen(reduction.b_star, "b*");

    const auto q1_llt = require_spd(checked.q1, "Q1");
    const auto s_llt = require_spd(s, "S");
    const Eigen::VectorXd q1inv_p1 = q1_llt.solve(checked.p1);
    const Eigen::VectorXd sinv_q = s_llt.solve(checked.asset_prices);

    const double numerator =
        checked.p1.dot(checked.a1) + checked.asset_prices.dot(b_star) - problem.m1;
    const double denominator =
        checked.p1.dot(q1inv_p1) + checked.asset_prices.dot(sinv_q);
    const double lambda1 = numerator / denominator;
    const Eigen::VectorXd x1 = checked.a1 - lambda1 * q1inv_p1;
    const Eigen::VectorXd b = b_star - lambda1 * sinv_q;

    double min_need = std::numeric_limits<double>::infinity();
    for (const SpotScenario& spot : problem.spot) {
        const Eigen::VectorXd a2 = to_eigen(spot.a2, "a2");
        min_need = std::min(min_need, checked.p2.dot(a2) - spot.m2);
    }
    double max_payoff = -std::numeric_limits<double>::infinity();
    for (const ReturnScenario& scenario : problem.returns) {
        const Eigen::VectorXd rv = to_eigen(scenario.r, "r");
        max_payoff = std::max(max_payoff, rv.dot(b));
    }
    const double gap = min_need - max_payoff;

    FirstPeriodSolution solution;
    solution.multiplier = lambda1;
    solution.x1 = from_eigen(x1);
    solution.b = from_eigen(b);
    solution.sensible_multiplier = lambda1 >= 0.0;
    solution.separation_gap = gap;
    solution.sensible_separation = gap >= 0.0;
    solution.warn_ill_conditioned = reduction.warn_ill_conditioned ||
                                    ill_conditioned(checked.q1) || ill_conditioned(s);
    return solution;
}

EnlivenedObjective enlivened_objective(const std::vector<EnlivenedScenario>& scenarios) {
    if (scenarios.empty()) {
        throw DomainError("enlivened objective needs at least one scenario");
    }
    const Eigen::MatrixXd first = to_eigen(scenarios.front().s, "S");
    const Eigen::Index dim = first.rows();
    Eigen::MatrixXd s_hat = Eigen::MatrixXd::Zero(dim, dim);
    Eigen::VectorXd weighted_target = Eigen::VectorXd::Zero(dim);
    double total = 0.0;
    for (const EnlivenedScenario& scenario : scenarios) {
        if (!(scenario.prob > 0.0) || !std::isfinite(scenario.prob)) {
            throw DomainError("scenario probabilities must be positive");
        }
        const Eigen::MatrixXd s = to_eigen(scenario.s, "S");
        require_symmetric(s, "S");
        if (s.rows() != dim) {
            throw DomainError("scenario matrices must share one dimension");
        }
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigen(s);
        const double scale = std::max(1.0, s.cwiseAbs().maxCoeff());
        if (eigen.eigenvalues().minCoeff() < -kProbabilityTol * scale) {
            throw DomainError("scenario matrices must be positive semidefinite");
        }
        const Eigen::VectorXd b_star = to_eigen(scenario.b_star, "b*");
        if (b_star.size() != dim) {
            throw DomainError("scenario targets must match the matrix dimension");
        }
        s_hat += scenario.prob * s;
        weighted_target += scenario.prob * (s * b_star);
        total += scenario.prob;
    }
    check_distribution(scenarios.size(), total, "scenario");

    const auto llt = require_spd(s_hat, "the averaged matrix");
    const Eigen::VectorXd b_hat_star = llt.solve(weighted_target);
    return EnlivenedObjective{from_eigen(s_hat), from_eigen(b_hat_star)};
}

QpSolution qp_oracle(const Matrix& h, const Vector& f, const Matrix& a, const Vector& rhs) {
    const Eigen::MatrixXd hm = to_eigen(h, "H");
    const Eigen::VectorXd fv = to_eigen(f, "f");
    const Eigen::MatrixXd am = to_eigen(a, "A");
    const Eigen::VectorXd rv = to_eigen(rhs, "rhs");
    require_symmetric(hm, "H");
    if (fv.size() != hm.rows()) {
        throw DomainError("f must match H's dimension");
    }
    if (am.cols() != hm.rows()) {
        throw DomainError("A must have one column per variable");
    }
    if (rv.size() != am.rows()) {
        throw DomainError("rhs must have one entry per constraint");
    }

    const Eigen::Index n = hm.rows();
    const Eigen::Index k = am.rows();
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    kkt.topLeftCorner(n, n) = hm;
    kkt.topRightCorner(n, k) = am.transpose();
    kkt.bottomLeftCorner(k, n) = am;
    Eigen::VectorXd kkt_rhs(n + k);
    kkt_rhs.head(n) = hm * fv;
    kkt_rhs.tail(k) = rv;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    if (!lu.isInvertible()) {
        throw DomainError("the KKT system is singular");
    }
    const Eigen::VectorXd solution = lu.solve(kkt_rhs);
    const Eigen::VectorXd z = solution.head(n);
    const Eigen::VectorXd mu = solution.tail(k);

    const double primal = k == 0 ? 0.0 : (am * z - rv).cwiseAbs().maxCoeff();
    const double stationarity = (hm * (z - fv) + am.transpose() * mu).cwiseAbs().maxCoeff();
    if (primal > 1e-10) {
        throw InternalError("qp_oracle primal residual " + std::to_string(primal) +
                            " exceeds 1e-10");
    }
    if (stationarity > 1e-8) {
        throw InternalError("qp_oracle stationarity residual " + std::to_string(stationarity) +
                            " exceeds 1e-8");
    }
    return QpSolution{from_eigen(z), from_eigen(mu), primal, stationarity};
}

} // namespace sylva
