#pragma once

#include "drove/design.hpp"
#include "drove/genlasso.hpp"
#include "drove/null_space.hpp"
#include "drove/penalty.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace drove {

enum class EstimatorKind { DROVE, GENLASSO, STD_SCAD, STD_LASSO, ORACLE };

inline std::string to_string(EstimatorKind k)
{
	switch (k) {
	case EstimatorKind::DROVE: return "drove";
	case EstimatorKind::GENLASSO: return "genlasso";
	case EstimatorKind::STD_SCAD: return "std-scad";
	case EstimatorKind::STD_LASSO: return "std-lasso";
	case EstimatorKind::ORACLE: return "oracle";
	}
	return "unknown";
}

inline EstimatorKind estimator_kind_from_string(const std::string &s)
{
	if (s == "drove") return EstimatorKind::DROVE;
	if (s == "genlasso") return EstimatorKind::GENLASSO;
	if (s == "std-scad") return EstimatorKind::STD_SCAD;
	if (s == "std-lasso") return EstimatorKind::STD_LASSO;
	if (s == "oracle") return EstimatorKind::ORACLE;
	throw std::invalid_argument("unknown estimator '" + s + "'");
}

/// The restricted problem has no more observations than free parameters, or
/// its normal matrix is singular.
class RefitError : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// Design and response with cached sufficient statistics.
template <typename Scalar = double>
struct RegressionProblem {
	MatrixX<Scalar> X;
	VectorX<Scalar> y;
	GramSystem<Scalar> gram;

	RegressionProblem(MatrixX<Scalar> design, VectorX<Scalar> response)
		: X(std::move(design)), y(std::move(response)), gram(GramSystem<Scalar>::from(X, y))
	{
	}

	Eigen::Index n() const { return X.rows(); }
	Eigen::Index p() const { return X.cols(); }

	RegressionProblem subset(const std::vector<Eigen::Index> &idx) const
	{
		MatrixX<Scalar> Xs(static_cast<Eigen::Index>(idx.size()), X.cols());
		VectorX<Scalar> ys(static_cast<Eigen::Index>(idx.size()));
		for (std::size_t r = 0; r < idx.size(); ++r) {
			Xs.row(static_cast<Eigen::Index>(r)) = X.row(idx[r]);
			ys(static_cast<Eigen::Index>(r)) = y(idx[r]);
		}
		return RegressionProblem(std::move(Xs), std::move(ys));
	}
};

template <typename Scalar = double>
struct FitSettings {
	SolverSettings<Scalar> solver;
	int max_glla_iterations = 20;
	/// Null rows satisfy |d_k^T beta| <= null_tol_factor * max(1, ||beta||_inf).
	Scalar null_tol_factor = Scalar(1e-6);
	/// Penalize in column-normalized coordinates (see column_scales).
	bool normalize = true;
};

template <typename Scalar = double>
struct FittedModel {
	EstimatorKind kind = EstimatorKind::DROVE;
	PenaltySpec<Scalar> penalty;
	/// Coefficients in block layout (psi_0, psi_2, ..., psi_L).
	VectorX<Scalar> beta;
	/// Rows of the penalty matrix the model was fitted with that vanish at beta.
	std::vector<int> null_rows;
	/// Orthonormal basis (p x s_hat) of null(D_null).
	MatrixX<Scalar> null_basis;
	VectorX<Scalar> residuals;
	Scalar dispersion = 0;
	Scalar lambda_used = 0;
	int glla_iterations = 0;
	bool converged = true;
	/// Estimation sample size.
	Eigen::Index n = 0;
	/// B^{-1} (sum_i z_i z_i^T e_i^2) B^{-1} with B = Xs^T Xs and Xs = X U0.
	MatrixX<Scalar> theta_sandwich;

	/// Penalized iterate before the refit, and the Step I value (raw scale).
	VectorX<Scalar> raw_beta;
	VectorX<Scalar> initial_beta;
	/// Column scales the penalty was applied under (ones when not normalized).
	VectorX<Scalar> column_scale;
	std::vector<std::vector<int>> partition_history;
	/// Penalized criterion at successive GLLA iterates, in the coordinates the
	/// penalty was applied in.
	std::vector<Scalar> objective_history;
	int solver_iterations = 0;

	Eigen::Index s_hat() const { return null_basis.cols(); }
	Eigen::Index p() const { return beta.size(); }
};

template <typename Scalar>
Scalar null_tolerance(const VectorX<Scalar> &beta, Scalar factor)
{
	return factor * std::max(Scalar(1), beta.size() ? beta.template lpNorm<Eigen::Infinity>() : Scalar(0));
}

/// Rows of D with |d_k^T beta| <= tau.
template <typename Scalar>
std::vector<int> classify_null_rows(const PenaltyMatrix<Scalar> &D, const VectorX<Scalar> &beta, Scalar tau)
{
	const VectorX<Scalar> Db = D.rows * beta;
	std::vector<int> out;
	for (Eigen::Index k = 0; k < Db.size(); ++k)
		if (std::abs(Db(k)) <= tau)
			out.push_back(static_cast<int>(k));
	return out;
}

/// Gaussian penalized criterion (1/(2n)) ||y - X beta||^2 + sum_k p_lambda(|d_k^T beta|).
template <typename Scalar>
Scalar penalized_objective(const GramSystem<Scalar> &g, const PenaltyMatrix<Scalar> &D, const PenaltySpec<Scalar> &spec,
			   const VectorX<Scalar> &beta)
{
	const Scalar loss = Scalar(0.5) * beta.dot(g.H * beta) - g.b.dot(beta) + Scalar(0.5) * g.yy;
	const VectorX<Scalar> Db = D.rows * beta;
	Scalar pen = 0;
	for (Eigen::Index k = 0; k < Db.size(); ++k)
		pen += penalty_value(spec, std::abs(Db(k)));
	return loss + pen;
}

/// Per-column scales r with every column scaled to unit root-mean-square,
/// pooled over columns that share a penalty row. Pooling keeps
/// d_k^T (r .* beta) = r_k * d_k^T beta, so null sets and fused groups are the
/// same in both coordinate systems. Zero columns keep scale 1.
template <typename Scalar>
VectorX<Scalar> column_scales(const MatrixX<Scalar> &X, const PenaltyMatrix<Scalar> &D)
{
	const Eigen::Index p = X.cols();
	if (D.p() != p)
		throw std::invalid_argument("column_scales: penalty matrix and design widths differ");
	detail::DisjointSets sets(static_cast<int>(p));
	using It = typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor>::InnerIterator;
	for (Eigen::Index k = 0; k < D.K(); ++k) {
		int first = -1;
		for (It it(D.rows, k); it; ++it) {
			if (it.value() == Scalar(0))
				continue;
			if (first < 0)
				first = static_cast<int>(it.col());
			else
				sets.unite(first, static_cast<int>(it.col()));
		}
	}
	std::vector<Scalar> ss(static_cast<std::size_t>(p), Scalar(0));
	std::vector<Eigen::Index> count(static_cast<std::size_t>(p), 0);
	for (Eigen::Index j = 0; j < p; ++j) {
		const auto root = static_cast<std::size_t>(sets.find(static_cast<int>(j)));
		ss[root] += X.col(j).squaredNorm();
		count[root] += X.rows();
	}
	VectorX<Scalar> r(p);
	for (Eigen::Index j = 0; j < p; ++j) {
		const auto root = static_cast<std::size_t>(sets.find(static_cast<int>(j)));
		const Scalar rms = count[root] ? std::sqrt(ss[root] / Scalar(count[root])) : Scalar(0);
		r(j) = rms > Scalar(0) ? rms : Scalar(1);
	}
	return r;
}

/// Gram system of the design with columns divided by r.
template <typename Scalar>
GramSystem<Scalar> scale_gram(const GramSystem<Scalar> &g, const VectorX<Scalar> &r)
{
	GramSystem<Scalar> out = g;
	const VectorX<Scalar> inv = r.cwiseInverse();
	out.H = inv.asDiagonal() * g.H * inv.asDiagonal();
	out.b = g.b.cwiseProduct(inv);
	return out;
}

/// Least squares restricted to null(D_null): beta = U0 argmin ||y - X U0 theta||^2,
/// plus residuals, dispersion and the coefficient sandwich.
template <typename Scalar>
FittedModel<Scalar> refit_on_null_set(const RegressionProblem<Scalar> &prob, const PenaltyMatrix<Scalar> &D,
				      std::vector<int> null_rows)
{
	FittedModel<Scalar> m;
	m.n = prob.n();
	m.null_rows = std::move(null_rows);
	m.null_basis = null_space_basis(D, m.null_rows);
	const Eigen::Index s = m.null_basis.cols();
	const Eigen::Index n = prob.n();
	if (n <= s)
		throw RefitError("restricted refit is under-determined: n = " + std::to_string(n) +
				 " <= s_hat = " + std::to_string(s));
	m.beta = VectorX<Scalar>::Zero(prob.p());
	if (s > 0) {
		const MatrixX<Scalar> Xs = prob.X * m.null_basis;
		const MatrixX<Scalar> B = Xs.transpose() * Xs;
		Eigen::LLT<MatrixX<Scalar>> llt(B);
		if (llt.info() != Eigen::Success)
			throw RefitError("restricted normal matrix is singular (s_hat = " + std::to_string(s) +
					 ", n = " + std::to_string(n) + ")");
		const VectorX<Scalar> theta = llt.solve(Xs.transpose() * prob.y);
		m.beta = m.null_basis * theta;
		m.residuals = prob.y - prob.X * m.beta;
		const MatrixX<Scalar> meat = Xs.transpose() * m.residuals.array().square().matrix().asDiagonal() * Xs;
		const MatrixX<Scalar> Binv = llt.solve(MatrixX<Scalar>::Identity(s, s));
		m.theta_sandwich = Binv * meat * Binv;
	} else {
		m.residuals = prob.y;
		m.theta_sandwich.resize(0, 0);
	}
	m.dispersion = m.residuals.squaredNorm() / Scalar(n - s);
	return m;
}

namespace detail {

/// Penalized iterates in working coordinates.
template <typename Scalar>
struct PenalizedPath {
	VectorX<Scalar> beta;
	VectorX<Scalar> initial;
	std::vector<int> null_rows;
	std::vector<std::vector<int>> history;
	std::vector<Scalar> objectives;
	int glla_iterations = 0;
	int solver_iterations = 0;
	bool converged = true;
};

template <typename Scalar>
std::vector<int> partition_of(const PenaltyMatrix<Scalar> &D, const VectorX<Scalar> &b, Scalar factor)
{
	return classify_null_rows(D, b, null_tolerance(b, factor));
}

template <typename Scalar>
PenalizedPath<Scalar> glla_path(const GramSystem<Scalar> &g, const PenaltyMatrix<Scalar> &D,
				const PenaltySpec<Scalar> &spec, const FitSettings<Scalar> &settings,
				const std::optional<VectorX<Scalar>> &init)
{
	PenalizedPath<Scalar> path;
	VectorX<Scalar> beta;
	bool solver_ok = true;
	if (init) {
		beta = *init;
	} else {
		const auto res =
			solve_weighted_genlasso(g, WeightedPenaltyOperator<Scalar>::uniform(D), spec.lambda, settings.solver);
		beta = res.beta;
		path.solver_iterations += res.diagnostics.iterations;
		solver_ok = res.diagnostics.converged;
	}
	path.initial = beta;
	path.history.push_back(partition_of(D, beta, settings.null_tol_factor));
	path.objectives.push_back(penalized_objective(g, D, spec, beta));

	VectorX<Scalar> best = beta;
	Scalar best_obj = path.objectives.back();
	bool stable = false;
	for (int m = 1; m <= settings.max_glla_iterations; ++m) {
		const VectorX<Scalar> Db = D.rows * beta;
		VectorX<Scalar> w(D.K());
		for (Eigen::Index k = 0; k < D.K(); ++k)
			w(k) = rho_prime(spec, std::abs(Db(k)));
		SolverSettings<Scalar> s = settings.solver;
		s.warm_start = beta;
		const auto res =
			solve_weighted_genlasso(g, WeightedPenaltyOperator<Scalar>(D, std::move(w)), spec.lambda, s);
		path.solver_iterations += res.diagnostics.iterations;
		solver_ok = solver_ok && res.diagnostics.converged;
		beta = res.beta;
		path.glla_iterations = m;
		path.history.push_back(partition_of(D, beta, settings.null_tol_factor));
		path.objectives.push_back(penalized_objective(g, D, spec, beta));
		if (path.objectives.back() < best_obj) {
			best_obj = path.objectives.back();
			best = beta;
		}
		if (path.history.back() == path.history[path.history.size() - 2]) {
			stable = true;
			break;
		}
	}
	path.beta = stable ? beta : best;
	path.null_rows = partition_of(D, path.beta, settings.null_tol_factor);
	path.converged = stable && solver_ok;
	return path;
}

template <typename Scalar>
PenalizedPath<Scalar> single_path(const GramSystem<Scalar> &g, const PenaltyMatrix<Scalar> &D, Scalar lambda,
				  const FitSettings<Scalar> &settings)
{
	PenalizedPath<Scalar> path;
	const auto res = solve_weighted_genlasso(g, WeightedPenaltyOperator<Scalar>::uniform(D), lambda, settings.solver);
	path.beta = res.beta;
	path.initial = res.beta;
	path.null_rows = partition_of(D, res.beta, settings.null_tol_factor);
	path.history = {path.null_rows};
	path.solver_iterations = res.diagnostics.iterations;
	path.converged = res.diagnostics.converged;
	return path;
}

template <typename Scalar>
FittedModel<Scalar> finish(const RegressionProblem<Scalar> &prob, const PenaltyMatrix<Scalar> &D,
			   PenalizedPath<Scalar> path, const VectorX<Scalar> &r)
{
	FittedModel<Scalar> model = refit_on_null_set(prob, D, std::move(path.null_rows));
	model.glla_iterations = path.glla_iterations;
	model.converged = path.converged;
	model.raw_beta = path.beta.cwiseQuotient(r);
	model.initial_beta = path.initial.cwiseQuotient(r);
	model.column_scale = r;
	model.partition_history = std::move(path.history);
	model.objective_history = std::move(path.objectives);
	model.solver_iterations = path.solver_iterations;
	return model;
}

} // namespace detail

template <typename Scalar>
VectorX<Scalar> working_scales(const RegressionProblem<Scalar> &prob, const PenaltyMatrix<Scalar> &D,
			       const FitSettings<Scalar> &settings)
{
	return settings.normalize ? column_scales(prob.X, D) : VectorX<Scalar>::Ones(prob.p());
}

/// Generalized local linear approximation: reweighted generalized lasso with
/// weights rho'(|d_k^T beta|), iterated until the null-row partition repeats,
/// then least squares on the detected null space. `init` is on the raw scale.
template <typename Scalar>
FittedModel<Scalar> fit_glla(const RegressionProblem<Scalar> &prob, const PenaltyMatrix<Scalar> &D,
			     const PenaltySpec<Scalar> &spec, const FitSettings<Scalar> &settings = {},
			     const std::optional<VectorX<Scalar>> &init = std::nullopt)
{
	spec.validate();
	if (!(spec.lambda > Scalar(0)))
		throw std::invalid_argument("fit_glla requires lambda > 0");
	if (D.p() != prob.p())
		throw std::invalid_argument("penalty matrix and design have different column counts");
	if (init && init->size() != prob.p())
		throw std::invalid_argument("initial value length must equal p");
	const VectorX<Scalar> r = working_scales(prob, D, settings);
	std::optional<VectorX<Scalar>> w_init;
	if (init)
		w_init = init->cwiseProduct(r);
	SolverSettings<Scalar> solver = settings.solver;
	if (solver.warm_start)
		solver.warm_start = solver.warm_start->cwiseProduct(r);
	FitSettings<Scalar> fs = settings;
	fs.solver = solver;
	auto path = detail::glla_path(scale_gram(prob.gram, r), D, spec, fs, w_init);
	FittedModel<Scalar> model = detail::finish(prob, D, std::move(path), r);
	model.penalty = spec;
	model.lambda_used = spec.lambda;
	return model;
}

/// One generalized-lasso solve, null classification, restricted refit.
template <typename Scalar>
FittedModel<Scalar> fit_single_solve(const RegressionProblem<Scalar> &prob, const PenaltyMatrix<Scalar> &D,
				     Scalar lambda, const FitSettings<Scalar> &settings = {})
{
	if (D.p() != prob.p())
		throw std::invalid_argument("penalty matrix and design have different column counts");
	const VectorX<Scalar> r = working_scales(prob, D, settings);
	FitSettings<Scalar> fs = settings;
	if (fs.solver.warm_start)
		fs.solver.warm_start = fs.solver.warm_start->cwiseProduct(r);
	auto path = detail::single_path(scale_gram(prob.gram, r), D, lambda, fs);
	FittedModel<Scalar> model = detail::finish(prob, D, std::move(path), r);
	model.penalty = PenaltySpec<Scalar>::l1(lambda);
	model.lambda_used = lambda;
	return model;
}

/// Dispatches on the estimator kind. The standard kinds replace D with the
/// p x p identity; ORACLE regresses on the null space of the supplied rows.
template <typename Scalar>
FittedModel<Scalar> fit(EstimatorKind kind, const RegressionProblem<Scalar> &prob, const PenaltyMatrix<Scalar> &D,
			const PenaltySpec<Scalar> &spec, const FitSettings<Scalar> &settings = {},
			const std::optional<std::vector<int>> &true_null = std::nullopt)
{
	FittedModel<Scalar> model;
	switch (kind) {
	case EstimatorKind::DROVE:
		model = fit_glla(prob, D, spec, settings);
		break;
	case EstimatorKind::STD_SCAD:
		model = fit_glla(prob, PenaltyMatrix<Scalar>::identity(prob.p()), spec, settings);
		break;
	case EstimatorKind::GENLASSO:
		model = fit_single_solve(prob, D, spec.lambda, settings);
		break;
	case EstimatorKind::STD_LASSO:
		model = fit_single_solve(prob, PenaltyMatrix<Scalar>::identity(prob.p()), spec.lambda, settings);
		break;
	case EstimatorKind::ORACLE:
		if (!true_null)
			throw std::invalid_argument("ORACLE estimator requires the true null row set");
		model = refit_on_null_set(prob, D, *true_null);
		model.penalty = spec;
		model.lambda_used = 0;
		model.raw_beta = model.beta;
		model.initial_beta = model.beta;
		model.column_scale = VectorX<Scalar>::Ones(prob.p());
		break;
	}
	model.kind = kind;
	return model;
}

/// Deterministic train/validation split of 0..n-1.
inline std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> split_indices(Eigen::Index n, double fraction,
											 std::uint64_t seed)
{
	if (!(fraction > 0 && fraction < 1))
		throw std::invalid_argument("split fraction must lie in (0,1)");
	std::vector<Eigen::Index> idx(static_cast<std::size_t>(n));
	std::iota(idx.begin(), idx.end(), Eigen::Index(0));
	std::mt19937_64 rng(seed);
	for (std::size_t i = idx.size(); i > 1; --i) {
		const std::size_t j = static_cast<std::size_t>(rng() % i);
		std::swap(idx[i - 1], idx[j]);
	}
	const auto n_train = static_cast<std::size_t>(std::llround(fraction * double(n)));
	std::vector<Eigen::Index> train(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
	std::vector<Eigen::Index> valid(idx.begin() + static_cast<std::ptrdiff_t>(n_train), idx.end());
	std::sort(train.begin(), train.end());
	std::sort(valid.begin(), valid.end());
	return {std::move(train), std::move(valid)};
}

template <typename Scalar = double>
struct ValidationRow {
	Scalar lambda = 0;
	Scalar validation_mse = std::numeric_limits<Scalar>::infinity();
	bool converged = false;
	bool failed = false;
	Eigen::Index s_hat = 0;
	std::string error;
};

template <typename Scalar = double>
struct TuneResult {
	Scalar best_lambda = 0;
	std::vector<ValidationRow<Scalar>> table;
	FittedModel<Scalar> model;
	std::vector<Eigen::Index> train_rows, validation_rows;
};

/// Mean squared prediction error of beta on the given rows.
template <typename Scalar>
Scalar prediction_mse(const RegressionProblem<Scalar> &prob, const std::vector<Eigen::Index> &rows,
		      const VectorX<Scalar> &beta)
{
	Scalar acc = 0;
	for (Eigen::Index i : rows) {
		const Scalar r = prob.y(i) - prob.X.row(i).dot(beta);
		acc += r * r;
	}
	return rows.empty() ? Scalar(0) : acc / Scalar(rows.size());
}

/// Selects lambda on a grid by validation MSE after fitting on a seeded
/// training split, then refits on the full sample at the selected lambda.
template <typename Scalar>
TuneResult<Scalar> tune_lambda(EstimatorKind kind, const RegressionProblem<Scalar> &prob, const PenaltyMatrix<Scalar> &D,
			       const PenaltySpec<Scalar> &spec_template, std::vector<Scalar> grid, double split,
			       std::uint64_t seed, const FitSettings<Scalar> &settings = {},
			       const std::optional<std::vector<int>> &true_null = std::nullopt)
{
	if (grid.empty())
		throw std::invalid_argument("lambda grid must not be empty");
	TuneResult<Scalar> out;
	if (kind == EstimatorKind::ORACLE) {
		out.model = fit(kind, prob, D, spec_template, settings, true_null);
		return out;
	}
	std::sort(grid.begin(), grid.end(), std::greater<Scalar>());
	grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

	auto [train, valid] = split_indices(prob.n(), split, seed);
	const RegressionProblem<Scalar> tr = prob.subset(train);
	const bool generalized = kind == EstimatorKind::DROVE || kind == EstimatorKind::GENLASSO;
	const PenaltyMatrix<Scalar> Dk = generalized ? D : PenaltyMatrix<Scalar>::identity(prob.p());
	const bool reweighted = kind == EstimatorKind::DROVE || kind == EstimatorKind::STD_SCAD;
	const VectorX<Scalar> r = working_scales(tr, Dk, settings);
	const GramSystem<Scalar> g = scale_gram(tr.gram, r);

	// Descending lambda, each Step I solve warm-started from the previous one.
	std::optional<VectorX<Scalar>> warm;
	for (Scalar lambda : grid) {
		ValidationRow<Scalar> row;
		row.lambda = lambda;
		try {
			FitSettings<Scalar> fs = settings;
			fs.solver.warm_start = warm;
			const auto init = solve_weighted_genlasso(g, WeightedPenaltyOperator<Scalar>::uniform(Dk), lambda,
								  fs.solver);
			warm = init.beta;
			detail::PenalizedPath<Scalar> path;
			if (reweighted) {
				fs.solver.warm_start.reset();
				path = detail::glla_path(g, Dk, spec_template.with_lambda(lambda), fs,
							 std::optional<VectorX<Scalar>>(init.beta));
				path.converged = path.converged && init.diagnostics.converged;
			} else {
				path.beta = init.beta;
				path.null_rows = detail::partition_of(Dk, init.beta, settings.null_tol_factor);
				path.converged = init.diagnostics.converged;
			}
			const FittedModel<Scalar> m = refit_on_null_set(tr, Dk, std::move(path.null_rows));
			row.converged = path.converged;
			row.s_hat = m.s_hat();
			row.validation_mse = prediction_mse(prob, valid, m.beta);
		} catch (const std::exception &e) {
			row.failed = true;
			row.error = e.what();
		}
		out.table.push_back(row);
	}
	std::size_t best = out.table.size();
	for (std::size_t i = 0; i < out.table.size(); ++i) {
		if (out.table[i].failed)
			continue;
		if (best == out.table.size() || out.table[i].validation_mse < out.table[best].validation_mse)
			best = i;
	}
	const bool any_converged = std::any_of(out.table.begin(), out.table.end(),
					       [](const auto &r) { return !r.failed && r.converged; });
	if (best == out.table.size() || !any_converged) {
		std::string msg = "lambda tuning failed: no converged fit on the grid;";
		for (const auto &r : out.table)
			msg += " [lambda=" + std::to_string(static_cast<double>(r.lambda)) +
			       (r.failed ? " error: " + r.error : std::string(" not converged")) + "]";
		throw std::runtime_error(msg);
	}
	out.best_lambda = out.table[best].lambda;
	out.model = fit(kind, prob, D, spec_template.with_lambda(out.best_lambda), settings, true_null);
	out.train_rows = std::move(train);
	out.validation_rows = std::move(valid);
	return out;
}

/// Log-spaced grid of `count` points between lo and hi (inclusive).
template <typename Scalar = double>
std::vector<Scalar> log_grid(Scalar lo, Scalar hi, int count)
{
	if (!(lo > 0 && hi >= lo) || count < 1)
		throw std::invalid_argument("log_grid needs 0 < lo <= hi and count >= 1");
	std::vector<Scalar> g(static_cast<std::size_t>(count));
	for (int i = 0; i < count; ++i) {
		const Scalar t = count == 1 ? Scalar(0) : Scalar(i) / Scalar(count - 1);
		g[static_cast<std::size_t>(i)] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
	}
	g.front() = lo;
	g.back() = hi;
	return g;
}

template <typename Scalar = double>
struct MinimalSignalReport {
	std::optional<Scalar> g_hat;
	Scalar lambda = 0;
	std::optional<Scalar> ratio;
};

/// Half the smallest nonzero |d_k^T beta_hat| and its ratio to lambda.
template <typename Scalar>
MinimalSignalReport<Scalar> check_minimal_signal(const FittedModel<Scalar> &model, const PenaltyMatrix<Scalar> &D)
{
	MinimalSignalReport<Scalar> rep;
	rep.lambda = model.lambda_used;
	const VectorX<Scalar> Db = D.rows * model.beta;
	std::vector<char> is_null(static_cast<std::size_t>(D.K()), 0);
	for (int k : model.null_rows)
		if (k >= 0 && k < D.K())
			is_null[static_cast<std::size_t>(k)] = 1;
	const Scalar tau = null_tolerance(model.beta, Scalar(1e-6));
	Scalar smallest = std::numeric_limits<Scalar>::infinity();
	for (Eigen::Index k = 0; k < Db.size(); ++k)
		if (!is_null[static_cast<std::size_t>(k)] && std::abs(Db(k)) > tau)
			smallest = std::min(smallest, std::abs(Db(k)));
	if (std::isfinite(static_cast<double>(smallest))) {
		rep.g_hat = smallest / Scalar(2);
		if (rep.lambda > 0)
			rep.ratio = *rep.g_hat / rep.lambda;
	}
	return rep;
}

template <typename Scalar = double>
struct InitialConditionReport {
	Scalar max_null_component = 0;
	Scalar null_bound = 0;
	Scalar min_signal = 0;
	Scalar signal_bound = 0;
	bool satisfied = false;
};

/// Checks an initial value against the one-step conditions: components of
/// theta = M^{-1} beta outside span(U0) at most a2*lambda, and every true
/// signal row at least a*lambda in magnitude. M = [U0, U0_perp] is orthogonal.
/// Needs the true null set, so it is a simulation diagnostic.
template <typename Scalar>
InitialConditionReport<Scalar> check_initial_condition(const VectorX<Scalar> &init, const PenaltyMatrix<Scalar> &D,
						       const std::vector<int> &true_null, const PenaltySpec<Scalar> &spec)
{
	InitialConditionReport<Scalar> rep;
	const MatrixX<Scalar> U0 = null_space_basis(D, true_null);
	const Eigen::Index p = D.p();
	Eigen::HouseholderQR<MatrixX<Scalar>> qr(U0);
	const MatrixX<Scalar> Q = qr.householderQ() * MatrixX<Scalar>::Identity(p, p);
	const VectorX<Scalar> theta_null = Q.rightCols(p - U0.cols()).transpose() * init;
	rep.max_null_component = theta_null.size() ? theta_null.template lpNorm<Eigen::Infinity>() : Scalar(0);
	// a2: rho' >= a1 > 0 on (0, a2*lambda); SCAD attains rho' = 1 there with a2 = 1.
	const Scalar a2 = spec.family == PenaltyFamily::MCP ? spec.shape / Scalar(2) : Scalar(1);
	rep.null_bound = a2 * spec.lambda;
	rep.signal_bound = (spec.family == PenaltyFamily::L1 ? Scalar(0) : spec.shape) * spec.lambda;
	std::vector<char> is_null(static_cast<std::size_t>(D.K()), 0);
	for (int k : true_null)
		is_null[static_cast<std::size_t>(k)] = 1;
	const VectorX<Scalar> Db = D.rows * init;
	rep.min_signal = std::numeric_limits<Scalar>::infinity();
	for (Eigen::Index k = 0; k < D.K(); ++k)
		if (!is_null[static_cast<std::size_t>(k)])
			rep.min_signal = std::min(rep.min_signal, std::abs(Db(k)));
	rep.satisfied = rep.max_null_component <= rep.null_bound && rep.min_signal >= rep.signal_bound;
	return rep;
}

} // namespace drove
