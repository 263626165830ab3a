#pragma once

#include "drove/design.hpp"
#include "drove/estimator.hpp"

#include <boost/math/distributions/normal.hpp>

#include <cmath>
#include <cstdio>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace drove {

enum class PolicySource { ESTIMATED_OPTIMAL, FIXED, OBSERVED, CUSTOM };

inline std::string to_string(PolicySource s)
{
	switch (s) {
	case PolicySource::ESTIMATED_OPTIMAL: return "estimated-optimal";
	case PolicySource::FIXED: return "fixed";
	case PolicySource::OBSERVED: return "observed";
	case PolicySource::CUSTOM: return "custom";
	}
	return "unknown";
}

template <typename Scalar = double>
struct PolicyAssignment {
	std::vector<Scalar> actions;
	/// 1-based grid levels; actions[i] == grid.level(level_indices[i]).
	std::vector<int> level_indices;
	PolicySource source = PolicySource::CUSTOM;
	Scalar fixed_action = 0;

	std::size_t size() const { return level_indices.size(); }
};

template <typename Scalar = double>
struct ValueEstimate {
	Scalar point = 0;
	Scalar se = 0;
	Scalar ci_lo = 0, ci_hi = 0;
	Scalar alpha = Scalar(0.05);
	Eigen::Index n = 0;
	Eigen::Index N = 0;
	/// se^2 * n = model_variance_term + population_variance_term.
	Scalar model_variance_term = 0;
	Scalar population_variance_term = 0;
	/// P_N of the policy-feature (or contrast-feature) rows.
	VectorX<Scalar> feature_mean;
	std::vector<std::string> warnings;
};

template <typename Scalar>
Scalar normal_quantile(Scalar prob)
{
	if (!(prob > 0 && prob < 1))
		throw std::domain_error("normal quantile needs probability in (0,1)");
	return static_cast<Scalar>(boost::math::quantile(boost::math::normal_distribution<double>(),
							 static_cast<double>(prob)));
}

/// Level index maximizing psi_k^T x over k = 1..L with psi_1 = 0; the
/// smallest index wins ties.
template <typename Scalar, typename Row>
int best_level(const VectorX<Scalar> &beta, const Row &x, int num_levels)
{
	const Eigen::Index d = x.size();
	int best = 1;
	Scalar best_score = 0;
	for (int k = 2; k <= num_levels; ++k) {
		const Scalar s = beta.segment(block_offset(k, d), d).dot(x.transpose());
		if (s > best_score) {
			best_score = s;
			best = k;
		}
	}
	return best;
}

template <typename Scalar>
void check_model_shape(const VectorX<Scalar> &beta, const MatrixX<Scalar> &X, const ActionGrid<Scalar> &grid)
{
	if (beta.size() != X.cols() * grid.size())
		throw std::invalid_argument("coefficient length " + std::to_string(beta.size()) + " != d * L = " +
					    std::to_string(X.cols() * grid.size()));
}

template <typename Scalar>
PolicyAssignment<Scalar> optimal_policy(const VectorX<Scalar> &beta, const MatrixX<Scalar> &Xtest,
					const ActionGrid<Scalar> &grid)
{
	check_model_shape(beta, Xtest, grid);
	require_finite_rows(Xtest, "optimal_policy");
	PolicyAssignment<Scalar> pa;
	pa.source = PolicySource::ESTIMATED_OPTIMAL;
	pa.level_indices.resize(static_cast<std::size_t>(Xtest.rows()));
	pa.actions.resize(static_cast<std::size_t>(Xtest.rows()));
	for (Eigen::Index i = 0; i < Xtest.rows(); ++i) {
		const int k = best_level(beta, Xtest.row(i), grid.size());
		pa.level_indices[static_cast<std::size_t>(i)] = k;
		pa.actions[static_cast<std::size_t>(i)] = grid.level(k);
	}
	return pa;
}

template <typename Scalar>
PolicyAssignment<Scalar> optimal_policy(const FittedModel<Scalar> &model, const MatrixX<Scalar> &Xtest,
					const ActionGrid<Scalar> &grid)
{
	return optimal_policy(model.beta, Xtest, grid);
}

/// psi_0^T x + max(0, max_k psi_k^T x) per row.
template <typename Scalar>
VectorX<Scalar> optimal_q(const VectorX<Scalar> &beta, const MatrixX<Scalar> &Xtest, const ActionGrid<Scalar> &grid)
{
	check_model_shape(beta, Xtest, grid);
	const Eigen::Index d = Xtest.cols();
	VectorX<Scalar> q(Xtest.rows());
	for (Eigen::Index i = 0; i < Xtest.rows(); ++i) {
		Scalar best = 0;
		for (int k = 2; k <= grid.size(); ++k)
			best = std::max(best, beta.segment(block_offset(k, d), d).dot(Xtest.row(i).transpose()));
		q(i) = beta.head(d).dot(Xtest.row(i).transpose()) + best;
	}
	return q;
}

template <typename Scalar>
VectorX<Scalar> optimal_q(const FittedModel<Scalar> &model, const MatrixX<Scalar> &Xtest, const ActionGrid<Scalar> &grid)
{
	return optimal_q(model.beta, Xtest, grid);
}

template <typename Scalar>
PolicyAssignment<Scalar> fixed_policy(Eigen::Index N, const ActionGrid<Scalar> &grid, Scalar action)
{
	const int k = level_index(grid, action);
	PolicyAssignment<Scalar> pa;
	pa.source = PolicySource::FIXED;
	pa.fixed_action = action;
	pa.level_indices.assign(static_cast<std::size_t>(N), k);
	pa.actions.assign(static_cast<std::size_t>(N), grid.level(k));
	return pa;
}

/// Snaps per-row actions to their grid levels.
template <typename Scalar>
PolicyAssignment<Scalar> policy_from_actions(const VectorX<Scalar> &actions, const ActionGrid<Scalar> &grid,
					     PolicySource source = PolicySource::OBSERVED)
{
	PolicyAssignment<Scalar> pa;
	pa.source = source;
	for (Eigen::Index i = 0; i < actions.size(); ++i) {
		if (!(actions(i) >= Scalar(0) && actions(i) <= Scalar(1)))
			throw InputError("action outside [0,1] at row " + std::to_string(i), {i});
		const int k = level_index(grid, actions(i));
		pa.level_indices.push_back(k);
		pa.actions.push_back(grid.level(k));
	}
	return pa;
}

template <typename Scalar>
PolicyAssignment<Scalar> policy_from_rule(const MatrixX<Scalar> &Xtest, const ActionGrid<Scalar> &grid,
					  const DecisionRule<Scalar> &rule)
{
	VectorX<Scalar> a(Xtest.rows());
	for (Eigen::Index i = 0; i < Xtest.rows(); ++i)
		a(i) = rule(Xtest.row(i));
	return policy_from_actions(a, grid, PolicySource::CUSTOM);
}

namespace detail {

/// Shared core of the value estimators. F holds one feature (or feature
/// contrast) row per test unit; the estimate is beta^T P_N F with variance
/// n c^T U0 V U0^T c + (n/N) var(F beta), c = P_N F.
template <typename Scalar>
ValueEstimate<Scalar> value_from_features(const FittedModel<Scalar> &model, const MatrixX<Scalar> &F, Scalar alpha)
{
	if (!(alpha > 0 && alpha < 1))
		throw std::invalid_argument("alpha must lie in (0,1)");
	const Eigen::Index N = F.rows();
	if (N == 0)
		throw std::invalid_argument("testing sample is empty (N = 0)");
	if (F.cols() != model.p())
		throw std::invalid_argument("feature width does not match the model");
	const Eigen::Index s = model.s_hat();
	if (s > 0 && (model.theta_sandwich.rows() != s || !model.theta_sandwich.allFinite()))
		throw std::runtime_error("restricted bread matrix unavailable or singular (s_hat = " + std::to_string(s) +
					 ", n = " + std::to_string(model.n) + ")");

	ValueEstimate<Scalar> v;
	v.alpha = alpha;
	v.n = model.n;
	v.N = N;
	v.feature_mean = F.colwise().mean().transpose();
	const VectorX<Scalar> q = F * model.beta;
	v.point = model.beta.dot(v.feature_mean);

	if (s > 0) {
		const VectorX<Scalar> u = model.null_basis.transpose() * v.feature_mean;
		v.model_variance_term = std::max(Scalar(0), Scalar(model.n) * u.dot(model.theta_sandwich * u));
	}
	if (N > 1) {
		const Scalar mean = q.mean();
		const Scalar var = (q.array() - mean).square().sum() / Scalar(N - 1);
		v.population_variance_term = Scalar(model.n) / Scalar(N) * var;
	} else {
		v.warnings.push_back("N = 1: population variance term set to 0");
	}
	if (v.population_variance_term == Scalar(0))
		v.warnings.push_back("population variance term is zero (deterministic value over the testing sample)");
	const Scalar total = v.model_variance_term + v.population_variance_term;
	v.se = model.n > 0 ? std::sqrt(total / Scalar(model.n)) : Scalar(0);
	const Scalar z = normal_quantile(Scalar(1) - alpha / Scalar(2));
	v.ci_lo = v.point - z * v.se;
	v.ci_hi = v.point + z * v.se;
	return v;
}

} // namespace detail

template <typename Scalar>
MatrixX<Scalar> policy_features(const MatrixX<Scalar> &Xtest, const ActionGrid<Scalar> &grid,
				const PolicyAssignment<Scalar> &pa)
{
	if (pa.size() != static_cast<std::size_t>(Xtest.rows()))
		throw std::invalid_argument("policy assignment length differs from the testing sample");
	return build_policy_features_from_levels(Xtest, grid, pa.level_indices);
}

/// P_N Q-hat* with its sandwich standard error and a normal CI.
template <typename Scalar>
ValueEstimate<Scalar> estimate_optimal_value(const FittedModel<Scalar> &model, const MatrixX<Scalar> &Xtest,
					     const ActionGrid<Scalar> &grid, Scalar alpha = Scalar(0.05))
{
	const auto pa = optimal_policy(model, Xtest, grid);
	return detail::value_from_features(model, policy_features(Xtest, grid, pa), alpha);
}

/// Value of a given assignment, with the same variance construction as the
/// optimal value.
template <typename Scalar>
ValueEstimate<Scalar> evaluate_rule(const FittedModel<Scalar> &model, const MatrixX<Scalar> &Xtest,
				    const ActionGrid<Scalar> &grid, const PolicyAssignment<Scalar> &pa,
				    Scalar alpha = Scalar(0.05))
{
	check_model_shape(model.beta, Xtest, grid);
	return detail::value_from_features(model, policy_features(Xtest, grid, pa), alpha);
}

template <typename Scalar>
ValueEstimate<Scalar> evaluate_rule(const FittedModel<Scalar> &model, const MatrixX<Scalar> &Xtest,
				    const ActionGrid<Scalar> &grid, const DecisionRule<Scalar> &rule,
				    Scalar alpha = Scalar(0.05))
{
	check_model_shape(model.beta, Xtest, grid);
	return detail::value_from_features(model, build_policy_features(Xtest, grid, rule), alpha);
}

/// P_N Q-hat* - P_N Q-hat(., pi) with the contrast sandwich variance.
template <typename Scalar>
ValueEstimate<Scalar> value_difference(const FittedModel<Scalar> &model, const MatrixX<Scalar> &Xtest,
				       const ActionGrid<Scalar> &grid, const PolicyAssignment<Scalar> &pa,
				       Scalar alpha = Scalar(0.05))
{
	const auto opt = optimal_policy(model, Xtest, grid);
	const MatrixX<Scalar> F = policy_features(Xtest, grid, opt) - policy_features(Xtest, grid, pa);
	return detail::value_from_features(model, F, alpha);
}

template <typename Scalar>
ValueEstimate<Scalar> value_difference(const FittedModel<Scalar> &model, const MatrixX<Scalar> &Xtest,
				       const ActionGrid<Scalar> &grid, const DecisionRule<Scalar> &rule,
				       Scalar alpha = Scalar(0.05))
{
	return value_difference(model, Xtest, grid, policy_from_rule(Xtest, grid, rule), alpha);
}

template <typename Scalar = double>
struct ContrastInterval {
	Scalar point = 0;
	Scalar se = 0;
	Scalar lo = 0, hi = 0;
	bool degenerate = false;
};

template <typename Scalar = double>
struct ContrastReport {
	std::vector<ContrastInterval<Scalar>> intervals;
	/// Largest |Omega (I - U0 U0^T)| entry; should be ~0.
	Scalar off_support = 0;
	std::vector<std::string> warnings;
};

/// Normal CIs for Omega * beta from the coefficient sandwich
/// Cov(beta-hat) ~ U0 B^{-1} M B^{-1} U0^T.
template <typename Scalar>
ContrastReport<Scalar> contrast_ci(const FittedModel<Scalar> &model, const MatrixX<Scalar> &Omega,
				   Scalar alpha = Scalar(0.05), Scalar support_tol = Scalar(1e-8))
{
	if (!(alpha > 0 && alpha < 1))
		throw std::invalid_argument("alpha must lie in (0,1)");
	if (Omega.cols() != model.p())
		throw std::invalid_argument("contrast matrix must have p columns");
	const Eigen::Index s = model.s_hat();
	if (Omega.rows() > s)
		throw std::invalid_argument("contrast rows q = " + std::to_string(Omega.rows()) + " exceed s_hat = " +
					    std::to_string(s));
	ContrastReport<Scalar> rep;
	const MatrixX<Scalar> OU = Omega * model.null_basis;
	const MatrixX<Scalar> resid = Omega - OU * model.null_basis.transpose();
	rep.off_support = resid.size() ? resid.cwiseAbs().maxCoeff() : Scalar(0);
	if (rep.off_support > support_tol)
		rep.warnings.push_back("contrast rows are not supported on the detected signal space");
	const MatrixX<Scalar> cov = OU * model.theta_sandwich * OU.transpose();
	const Scalar z = normal_quantile(Scalar(1) - alpha / Scalar(2));
	const VectorX<Scalar> pt = Omega * model.beta;
	for (Eigen::Index r = 0; r < Omega.rows(); ++r) {
		ContrastInterval<Scalar> ci;
		ci.point = pt(r);
		ci.se = std::sqrt(std::max(Scalar(0), cov(r, r)));
		ci.lo = ci.point - z * ci.se;
		ci.hi = ci.point + z * ci.se;
		ci.degenerate = ci.se == Scalar(0);
		if (ci.degenerate)
			rep.warnings.push_back("row " + std::to_string(r) + ": zero-width interval");
		rep.intervals.push_back(ci);
	}
	return rep;
}

template <typename Scalar = double>
struct StrategyRow {
	std::string name;
	PolicySource source = PolicySource::FIXED;
	Scalar value = 0;
	/// Absent for the estimated optimal strategy itself.
	std::optional<ValueEstimate<Scalar>> difference;
};

/// Value table: every fixed grid level, the observed actions when given,
/// and the estimated optimal strategy (last).
template <typename Scalar>
std::vector<StrategyRow<Scalar>> compare_strategies(const FittedModel<Scalar> &model, const MatrixX<Scalar> &Xtest,
						    const ActionGrid<Scalar> &grid,
						    const std::optional<VectorX<Scalar>> &observed, Scalar alpha)
{
	std::vector<StrategyRow<Scalar>> rows;
	auto add = [&](std::string name, PolicySource src, const PolicyAssignment<Scalar> &pa) {
		StrategyRow<Scalar> r;
		r.name = std::move(name);
		r.source = src;
		r.value = evaluate_rule(model, Xtest, grid, pa, alpha).point;
		r.difference = value_difference(model, Xtest, grid, pa, alpha);
		rows.push_back(std::move(r));
	};
	for (int k = 1; k <= grid.size(); ++k) {
		char buf[64];
		std::snprintf(buf, sizeof buf, "fixed(%g)", static_cast<double>(grid.level(k)));
		add(buf, PolicySource::FIXED, fixed_policy(Xtest.rows(), grid, grid.level(k)));
	}
	if (observed)
		add("observed", PolicySource::OBSERVED, policy_from_actions(*observed, grid));
	StrategyRow<Scalar> opt;
	opt.name = "estimated-optimal";
	opt.source = PolicySource::ESTIMATED_OPTIMAL;
	opt.value = estimate_optimal_value(model, Xtest, grid, alpha).point;
	rows.push_back(std::move(opt));
	return rows;
}

} // namespace drove
