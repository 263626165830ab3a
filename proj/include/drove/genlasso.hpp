#pragma once

#include "drove/design.hpp"
#include "drove/null_space.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace drove {

/// Sufficient statistics of a least-squares problem: H = X^T X / n,
/// b = X^T y / n, yy = y^T y / n.
template <typename Scalar = double>
struct GramSystem {
	MatrixX<Scalar> H;
	VectorX<Scalar> b;
	Scalar yy = 0;
	Eigen::Index n = 0;

	static GramSystem from(const MatrixX<Scalar> &X, const VectorX<Scalar> &y)
	{
		if (X.rows() != y.size())
			throw std::invalid_argument("design and response lengths differ");
		GramSystem g;
		g.n = X.rows();
		const Scalar inv_n = Scalar(1) / Scalar(g.n);
		g.H = MatrixX<Scalar>(X.transpose() * X) * inv_n;
		g.b = X.transpose() * y * inv_n;
		g.yy = y.squaredNorm() * inv_n;
		return g;
	}

	Eigen::Index p() const { return H.rows(); }
};

/// Penalty rows d_k scaled by nonnegative weights w_k; zero-weight rows are
/// unpenalized and never enter the solver.
template <typename Scalar = double>
struct WeightedPenaltyOperator {
	PenaltyMatrix<Scalar> base;
	VectorX<Scalar> weights;

	WeightedPenaltyOperator() = default;
	WeightedPenaltyOperator(PenaltyMatrix<Scalar> D, VectorX<Scalar> w) : base(std::move(D)), weights(std::move(w))
	{
		validate();
	}
	static WeightedPenaltyOperator uniform(PenaltyMatrix<Scalar> D, Scalar w = Scalar(1))
	{
		const Eigen::Index K = D.K();
		return WeightedPenaltyOperator(std::move(D), VectorX<Scalar>::Constant(K, w));
	}

	void validate() const
	{
		if (weights.size() != base.K())
			throw std::invalid_argument("penalty weights length must equal the number of penalty rows");
		for (Eigen::Index k = 0; k < weights.size(); ++k)
			if (!(std::isfinite(static_cast<double>(weights(k))) && weights(k) >= Scalar(0)))
				throw std::invalid_argument("penalty weights must be finite and nonnegative");
	}

	std::vector<int> active_rows() const
	{
		std::vector<int> out;
		for (Eigen::Index k = 0; k < weights.size(); ++k)
			if (weights(k) > Scalar(0))
				out.push_back(static_cast<int>(k));
		return out;
	}

	/// Operator with the zero-weight rows removed.
	WeightedPenaltyOperator compressed() const
	{
		const auto rows = active_rows();
		VectorX<Scalar> w(static_cast<Eigen::Index>(rows.size()));
		for (std::size_t r = 0; r < rows.size(); ++r)
			w(static_cast<Eigen::Index>(r)) = weights(rows[r]);
		return WeightedPenaltyOperator(base.select(rows), std::move(w));
	}
};

template <typename Scalar = double>
struct SolverSettings {
	int max_iterations = 50000;
	Scalar primal_tol = Scalar(1e-8);
	Scalar dual_tol = Scalar(1e-8);
	/// Initial ADMM penalty parameter; adapted by residual balancing.
	Scalar step_parameter = Scalar(1);
	Scalar relaxation = Scalar(1.6);
	int check_interval = 25;
	std::optional<VectorX<Scalar>> warm_start;

	void validate() const
	{
		if (max_iterations < 1)
			throw std::invalid_argument("max_iterations must be >= 1");
		if (!(primal_tol > 0) || !(dual_tol > 0) || !(step_parameter > 0))
			throw std::invalid_argument("solver tolerances and step parameter must be positive");
	}
};

template <typename Scalar = double>
struct SolverDiagnostics {
	int iterations = 0;
	bool converged = false;
	bool polished = false;
	/// Unpenalized problem was rank deficient; minimum-norm solution returned.
	bool min_norm = false;
	int refactorizations = 0;
	Scalar primal_residual = 0;
	Scalar dual_residual = 0;
	Scalar kkt_residual = 0;
	Scalar kkt_tolerance = 0;
	Scalar objective = 0;
	Scalar final_step_parameter = 0;
	/// Objective of the returned incumbent at every residual check.
	std::vector<Scalar> objective_trace;
};

template <typename Scalar = double>
struct GenlassoResult {
	VectorX<Scalar> beta;
	SolverDiagnostics<Scalar> diagnostics;
};

/// (1/(2n)) ||Y - X beta||^2 + lambda * sum_k w_k |d_k^T beta|, computed from
/// the raw data.
template <typename Scalar>
Scalar objective(const VectorX<Scalar> &Y, const MatrixX<Scalar> &design, const WeightedPenaltyOperator<Scalar> &op,
		 Scalar lambda, const VectorX<Scalar> &beta)
{
	const Scalar n = Scalar(Y.size());
	const Scalar loss = (Y - design * beta).squaredNorm() / (Scalar(2) * n);
	const VectorX<Scalar> Db = op.base.rows * beta;
	return loss + lambda * (op.weights.array() * Db.array().abs()).sum();
}

template <typename Scalar>
Scalar objective(const GramSystem<Scalar> &g, const WeightedPenaltyOperator<Scalar> &op, Scalar lambda,
		 const VectorX<Scalar> &beta)
{
	const Scalar loss = Scalar(0.5) * beta.dot(g.H * beta) - g.b.dot(beta) + Scalar(0.5) * g.yy;
	const VectorX<Scalar> Db = op.base.rows * beta;
	return loss + lambda * (op.weights.array() * Db.array().abs()).sum();
}

namespace detail {

/// Solves A x = rhs for symmetric A, falling back from Cholesky to a complete
/// orthogonal decomposition (minimum-norm) when A is not positive definite.
template <typename Scalar>
class SymmetricSolver {
public:
	void compute(const MatrixX<Scalar> &A)
	{
		llt_.compute(A);
		use_llt_ = llt_.info() == Eigen::Success && llt_.matrixL().toDenseMatrix().diagonal().minCoeff() >
								   Scalar(1e-12) * std::sqrt(std::max(A.diagonal().maxCoeff(), Scalar(1)));
		if (!use_llt_)
			cod_.compute(A);
	}
	VectorX<Scalar> solve(const VectorX<Scalar> &rhs) const { return use_llt_ ? VectorX<Scalar>(llt_.solve(rhs)) : VectorX<Scalar>(cod_.solve(rhs)); }
	bool positive_definite() const { return use_llt_; }

private:
	Eigen::LLT<MatrixX<Scalar>> llt_;
	Eigen::CompleteOrthogonalDecomposition<MatrixX<Scalar>> cod_;
	bool use_llt_ = true;
};

/// Box-constrained least squares over the subgradients of the zero rows:
/// min_{|u_k| <= 1} || g + lambda * sum_k u_k theta_k ||, by cyclic coordinate
/// descent. Returns the sup-norm of the residual vector.
template <typename Scalar>
Scalar min_stationarity_residual(VectorX<Scalar> g, const WeightedPenaltyOperator<Scalar> &op, Scalar lambda,
				 const std::vector<int> &free_rows, std::vector<Scalar> u)
{
	using It = typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor>::InnerIterator;
	if (free_rows.empty() || lambda == Scalar(0))
		return g.template lpNorm<Eigen::Infinity>();
	u.resize(free_rows.size(), Scalar(0));
	std::vector<Scalar> sq(free_rows.size());
	for (std::size_t r = 0; r < free_rows.size(); ++r) {
		const int k = free_rows[r];
		const Scalar a = lambda * op.weights(k);
		Scalar s = 0;
		for (It it(op.base.rows, k); it; ++it)
			s += a * a * it.value() * it.value();
		sq[r] = s;
		u[r] = std::clamp(u[r], Scalar(-1), Scalar(1));
		for (It it(op.base.rows, k); it; ++it)
			g(it.col()) += a * it.value() * u[r];
	}
	const Scalar scale = std::max(Scalar(1), g.template lpNorm<Eigen::Infinity>());
	for (int sweep = 0; sweep < 2000; ++sweep) {
		Scalar max_change = 0;
		for (std::size_t r = 0; r < free_rows.size(); ++r) {
			if (sq[r] == Scalar(0))
				continue;
			const int k = free_rows[r];
			const Scalar a = lambda * op.weights(k);
			Scalar dot = 0;
			for (It it(op.base.rows, k); it; ++it)
				dot += a * it.value() * g(it.col());
			const Scalar next = std::clamp(u[r] - dot / sq[r], Scalar(-1), Scalar(1));
			const Scalar delta = next - u[r];
			if (delta != Scalar(0)) {
				for (It it(op.base.rows, k); it; ++it)
					g(it.col()) += a * it.value() * delta;
				u[r] = next;
				max_change = std::max(max_change, std::abs(delta) * std::sqrt(sq[r]));
			}
		}
		if (max_change <= Scalar(1e-15) * scale)
			break;
	}
	return g.template lpNorm<Eigen::Infinity>();
}

} // namespace detail

/// Sup-norm KKT residual of beta for the weighted generalized lasso: the
/// smallest ||H beta - b + lambda Theta^T u||_inf over subgradients u. Rows
/// with |w_k d_k^T beta| <= zero_tol are treated as zero.
template <typename Scalar>
Scalar kkt_residual(const GramSystem<Scalar> &g, const WeightedPenaltyOperator<Scalar> &op, Scalar lambda,
		    const VectorX<Scalar> &beta, Scalar zero_tol = Scalar(-1))
{
	using It = typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor>::InnerIterator;
	if (zero_tol < 0)
		zero_tol = Scalar(1e-9) * std::max(Scalar(1), beta.template lpNorm<Eigen::Infinity>());
	VectorX<Scalar> grad = g.H * beta - g.b;
	std::vector<int> free_rows;
	for (Eigen::Index k = 0; k < op.base.K(); ++k) {
		if (op.weights(k) == Scalar(0))
			continue;
		Scalar t = 0;
		for (It it(op.base.rows, k); it; ++it)
			t += it.value() * beta(it.col());
		if (std::abs(op.weights(k) * t) <= zero_tol) {
			free_rows.push_back(static_cast<int>(k));
			continue;
		}
		const Scalar s = t > 0 ? Scalar(1) : Scalar(-1);
		for (It it(op.base.rows, k); it; ++it)
			grad(it.col()) += lambda * op.weights(k) * s * it.value();
	}
	return detail::min_stationarity_residual(std::move(grad), op, lambda, free_rows, {});
}

namespace detail {

template <typename Scalar>
class AdmmGenlasso {
public:
	AdmmGenlasso(const GramSystem<Scalar> &g, const WeightedPenaltyOperator<Scalar> &op, Scalar lambda,
		     const SolverSettings<Scalar> &settings)
		: g_(g), op_(op), lambda_(lambda), settings_(settings)
	{
	}

	GenlassoResult<Scalar> run()
	{
		GenlassoResult<Scalar> res;
		auto &diag = res.diagnostics;
		const Eigen::Index p = g_.p();
		diag.kkt_tolerance = settings_.primal_tol * (Scalar(1) + g_.b.template lpNorm<Eigen::Infinity>());
		rows_ = op_.active_rows();
		if (lambda_ == Scalar(0) || rows_.empty())
			return least_squares();

		setup_scaling();
		rho_ = settings_.step_parameter;
		factorize();
		diag.refactorizations = 1;

		VectorX<Scalar> gamma = VectorX<Scalar>::Zero(p);
		if (settings_.warm_start) {
			if (settings_.warm_start->size() != p)
				throw std::invalid_argument("warm start length must equal p");
			gamma = settings_.warm_start->cwiseQuotient(scale_);
		}
		const Eigen::Index m = F_.rows();
		VectorX<Scalar> Fg = F_ * gamma;
		VectorX<Scalar> z = soft(Fg);
		VectorX<Scalar> u = VectorX<Scalar>::Zero(m);
		VectorX<Scalar> z_old(m);

		best_beta_ = scale_.cwiseProduct(gamma);
		best_obj_ = objective(g_, op_, lambda_, best_beta_);
		const Scalar alpha = settings_.relaxation;
		std::vector<signed char> last_pattern;
		int it = 0;
		for (it = 1; it <= settings_.max_iterations; ++it) {
			gamma = solver_.solve(b_scaled_ + rho_ * (F_.transpose() * (z - u)));
			Fg.noalias() = F_ * gamma;
			const VectorX<Scalar> relaxed = alpha * Fg + (Scalar(1) - alpha) * z;
			z_old = z;
			z = soft(relaxed + u);
			u += relaxed - z;

			if (it % settings_.check_interval != 0 && it != settings_.max_iterations)
				continue;

			const Scalar r_norm = (Fg - z).norm();
			const Scalar s_norm = rho_ * (F_.transpose() * (z - z_old)).norm();
			diag.primal_residual = r_norm;
			diag.dual_residual = s_norm;

			consider(scale_.cwiseProduct(gamma));
			const auto pattern = sign_pattern(z);
			if (pattern != last_pattern) {
				last_pattern = pattern;
				if (polish(z, u, diag)) {
					diag.objective_trace.push_back(best_obj_);
					break;
				}
			}
			diag.objective_trace.push_back(best_obj_);

			const Scalar eps_pri = settings_.primal_tol *
					       (Scalar(1e-3) * std::sqrt(Scalar(m)) + std::max(Fg.norm(), z.norm()));
			const Scalar eps_dual = settings_.dual_tol *
						(Scalar(1e-3) * std::sqrt(Scalar(p)) + rho_ * (F_.transpose() * u).norm());
			if (r_norm <= eps_pri && s_norm <= eps_dual) {
				const Scalar kkt = kkt_residual(g_, op_, lambda_, best_beta_);
				if (kkt <= diag.kkt_tolerance) {
					diag.converged = true;
					break;
				}
			}
			if (r_norm > Scalar(10) * s_norm || s_norm > Scalar(10) * r_norm) {
				const Scalar factor = r_norm > s_norm ? Scalar(2) : Scalar(0.5);
				rho_ *= factor;
				u /= factor;
				factorize();
				++diag.refactorizations;
			}
		}
		diag.iterations = std::min(it, settings_.max_iterations);
		diag.final_step_parameter = rho_;
		res.beta = best_beta_;
		diag.objective = best_obj_;
		diag.kkt_residual = kkt_residual(g_, op_, lambda_, res.beta);
		if (diag.polished)
			diag.kkt_residual = std::min(diag.kkt_residual, polished_kkt_);
		diag.converged = diag.converged || diag.kkt_residual <= diag.kkt_tolerance;
		return res;
	}

private:
	GenlassoResult<Scalar> least_squares()
	{
		GenlassoResult<Scalar> res;
		auto &diag = res.diagnostics;
		diag.kkt_tolerance = settings_.primal_tol * (Scalar(1) + g_.b.template lpNorm<Eigen::Infinity>());
		SymmetricSolver<Scalar> s;
		s.compute(g_.H);
		res.beta = s.solve(g_.b);
		diag.min_norm = !s.positive_definite();
		diag.objective = objective(g_, op_, lambda_, res.beta);
		diag.objective_trace.push_back(diag.objective);
		diag.kkt_residual = (g_.H * res.beta - g_.b).template lpNorm<Eigen::Infinity>();
		diag.converged = diag.kkt_residual <= diag.kkt_tolerance;
		diag.polished = true;
		return res;
	}

	void setup_scaling()
	{
		using It = typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor>::InnerIterator;
		const Eigen::Index p = g_.p();
		scale_.resize(p);
		for (Eigen::Index j = 0; j < p; ++j)
			scale_(j) = g_.H(j, j) > Scalar(0) ? Scalar(1) / std::sqrt(g_.H(j, j)) : Scalar(1);
		H_scaled_ = scale_.asDiagonal() * g_.H * scale_.asDiagonal();
		b_scaled_ = scale_.cwiseProduct(g_.b);

		std::vector<Eigen::Triplet<Scalar>> trip;
		thresholds_.resize(static_cast<Eigen::Index>(rows_.size()));
		for (std::size_t r = 0; r < rows_.size(); ++r) {
			const int k = rows_[r];
			Scalar norm2 = 0;
			for (It it(op_.base.rows, k); it; ++it) {
				const Scalar v = op_.weights(k) * it.value() * scale_(it.col());
				norm2 += v * v;
			}
			const Scalar c = std::sqrt(norm2);
			for (It it(op_.base.rows, k); it; ++it)
				trip.emplace_back(static_cast<int>(r), static_cast<int>(it.col()),
						  op_.weights(k) * it.value() * scale_(it.col()) / c);
			thresholds_(static_cast<Eigen::Index>(r)) = lambda_ * c;
		}
		F_.resize(static_cast<Eigen::Index>(rows_.size()), p);
		F_.setFromTriplets(trip.begin(), trip.end());
		FtF_ = MatrixX<Scalar>(F_.transpose() * F_);
	}

	void factorize() { solver_.compute(H_scaled_ + rho_ * FtF_); }

	VectorX<Scalar> soft(const VectorX<Scalar> &v) const
	{
		VectorX<Scalar> out(v.size());
		for (Eigen::Index i = 0; i < v.size(); ++i) {
			const Scalar t = thresholds_(i) / rho_;
			out(i) = v(i) > t ? v(i) - t : (v(i) < -t ? v(i) + t : Scalar(0));
		}
		return out;
	}

	static std::vector<signed char> sign_pattern(const VectorX<Scalar> &z)
	{
		std::vector<signed char> s(static_cast<std::size_t>(z.size()));
		for (Eigen::Index i = 0; i < z.size(); ++i)
			s[static_cast<std::size_t>(i)] = static_cast<signed char>((z(i) > 0) - (z(i) < 0));
		return s;
	}

	void consider(const VectorX<Scalar> &beta)
	{
		const Scalar obj = objective(g_, op_, lambda_, beta);
		if (obj < best_obj_) {
			best_obj_ = obj;
			best_beta_ = beta;
		}
	}

	/// Solves the equality-constrained problem implied by the zero/sign
	/// pattern of z exactly and accepts it when it satisfies the KKT system.
	bool polish(const VectorX<Scalar> &z, const VectorX<Scalar> &u, SolverDiagnostics<Scalar> &diag)
	{
		using It = typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor>::InnerIterator;
		std::vector<int> zero_rows, zero_pos;
		VectorX<Scalar> q = g_.b;
		std::vector<std::pair<int, Scalar>> signed_rows;
		for (std::size_t r = 0; r < rows_.size(); ++r) {
			const Scalar zr = z(static_cast<Eigen::Index>(r));
			const int k = rows_[r];
			if (zr == Scalar(0)) {
				zero_rows.push_back(k);
				zero_pos.push_back(static_cast<int>(r));
				continue;
			}
			const Scalar s = zr > 0 ? Scalar(1) : Scalar(-1);
			signed_rows.emplace_back(k, s);
			for (It it(op_.base.rows, k); it; ++it)
				q(it.col()) -= lambda_ * op_.weights(k) * s * it.value();
		}
		const MatrixX<Scalar> U = null_space_basis(op_.base, zero_rows);
		VectorX<Scalar> beta = VectorX<Scalar>::Zero(g_.p());
		if (U.cols() > 0) {
			const MatrixX<Scalar> G = U.transpose() * g_.H * U;
			Eigen::LLT<MatrixX<Scalar>> llt(G);
			if (llt.info() != Eigen::Success)
				return false;
			const VectorX<Scalar> theta = llt.solve(U.transpose() * q);
			if (!theta.allFinite())
				return false;
			beta = U * theta;
		}
		const Scalar tiny = Scalar(1e-12) * std::max(Scalar(1), beta.template lpNorm<Eigen::Infinity>());
		VectorX<Scalar> grad = g_.H * beta - g_.b;
		for (const auto &[k, s] : signed_rows) {
			Scalar t = 0;
			for (It it(op_.base.rows, k); it; ++it)
				t += it.value() * beta(it.col());
			if (s * t < -tiny)
				return false;
			for (It it(op_.base.rows, k); it; ++it)
				grad(it.col()) += lambda_ * op_.weights(k) * s * it.value();
		}
		std::vector<Scalar> u0(zero_pos.size());
		for (std::size_t i = 0; i < zero_pos.size(); ++i) {
			const Eigen::Index r = zero_pos[i];
			u0[i] = std::clamp(rho_ * u(r) / thresholds_(r), Scalar(-1), Scalar(1));
		}
		const Scalar kkt = min_stationarity_residual(std::move(grad), op_, lambda_, zero_rows, u0);
		if (!(kkt <= diag.kkt_tolerance))
			return false;
		const Scalar obj = objective(g_, op_, lambda_, beta);
		diag.polished = true;
		diag.converged = true;
		polished_kkt_ = kkt;
		if (obj <= best_obj_ + Scalar(1e-12) * std::max(Scalar(1), std::abs(best_obj_))) {
			best_obj_ = std::min(obj, best_obj_);
			best_beta_ = beta;
		}
		return true;
	}

	const GramSystem<Scalar> &g_;
	const WeightedPenaltyOperator<Scalar> &op_;
	Scalar lambda_;
	const SolverSettings<Scalar> &settings_;

	std::vector<int> rows_;
	VectorX<Scalar> scale_, b_scaled_, thresholds_;
	MatrixX<Scalar> H_scaled_, FtF_;
	Eigen::SparseMatrix<Scalar, Eigen::RowMajor> F_;
	SymmetricSolver<Scalar> solver_;
	Scalar rho_ = 1;
	VectorX<Scalar> best_beta_;
	Scalar best_obj_ = 0;
	Scalar polished_kkt_ = 0;
};

} // namespace detail

/// Weighted generalized lasso on precomputed sufficient statistics.
template <typename Scalar>
GenlassoResult<Scalar> solve_weighted_genlasso(const GramSystem<Scalar> &g, const WeightedPenaltyOperator<Scalar> &op,
					       Scalar lambda, const SolverSettings<Scalar> &settings = {})
{
	if (!(lambda >= Scalar(0)))
		throw std::invalid_argument("lambda must be >= 0");
	settings.validate();
	op.validate();
	if (op.base.p() != g.p())
		throw std::invalid_argument("penalty matrix and design have different column counts");
	return detail::AdmmGenlasso<Scalar>(g, op, lambda, settings).run();
}

/// Minimizes (1/(2n)) ||Y - X beta||^2 + lambda ||Theta beta||_1 with Theta the
/// weighted penalty rows, by over-relaxed ADMM on the splitting z = Theta beta
/// followed by an exact solve on the identified zero pattern.
template <typename Scalar>
GenlassoResult<Scalar> solve_weighted_genlasso(const VectorX<Scalar> &Y, const MatrixX<Scalar> &design,
					       const WeightedPenaltyOperator<Scalar> &op, Scalar lambda,
					       const SolverSettings<Scalar> &settings = {})
{
	return solve_weighted_genlasso(GramSystem<Scalar>::from(design, Y), op, lambda, settings);
}

} // namespace drove
