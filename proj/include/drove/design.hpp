#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace drove {

template <typename Scalar>
using MatrixX = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;
template <typename Scalar>
using RowVectorX = Eigen::Matrix<Scalar, 1, Eigen::Dynamic>;

/// Raw sample: covariates X (n x d), actions A in [0,1], outcomes Y.
template <typename Scalar = double>
struct ObservationSet {
	MatrixX<Scalar> X;
	VectorX<Scalar> A;
	VectorX<Scalar> Y;

	Eigen::Index n() const { return X.rows(); }
	Eigen::Index d() const { return X.cols(); }
};

/// Validation failure carrying the offending row indices.
class InputError : public std::invalid_argument {
public:
	InputError(const std::string &what, std::vector<Eigen::Index> rows = {})
		: std::invalid_argument(what), rows_(std::move(rows)) {}
	const std::vector<Eigen::Index> &rows() const { return rows_; }

private:
	std::vector<Eigen::Index> rows_;
};

/// Discretization A_(1) = 0 < ... < A_(L) = 1 with half-open bins
/// [A_(k), A_(k+1)); the last bin is closed by a sentinel above 1.
template <typename Scalar = double>
class ActionGrid {
public:
	ActionGrid() = default;

	explicit ActionGrid(std::vector<Scalar> levels, Scalar upper_sentinel = Scalar(2))
		: levels_(std::move(levels)), upper_(upper_sentinel)
	{
		if (levels_.size() < 2)
			throw std::invalid_argument("action grid needs at least 2 levels");
		if (levels_.front() != Scalar(0) || levels_.back() != Scalar(1))
			throw std::invalid_argument("action grid must start at 0 and end at 1");
		for (std::size_t k = 1; k < levels_.size(); ++k)
			if (!(levels_[k] > levels_[k - 1]))
				throw std::invalid_argument("action grid levels must be strictly increasing");
		if (!(upper_ > Scalar(1)))
			throw std::invalid_argument("action grid sentinel must exceed 1");
	}

	/// Levels 0, 1/(L-1), ..., 1.
	static ActionGrid uniform(int num_levels)
	{
		if (num_levels < 2)
			throw std::invalid_argument("action grid needs at least 2 levels");
		std::vector<Scalar> lv(num_levels);
		for (int k = 0; k < num_levels; ++k)
			lv[k] = Scalar(k) / Scalar(num_levels - 1);
		lv.back() = Scalar(1);
		return ActionGrid(std::move(lv));
	}

	int size() const { return static_cast<int>(levels_.size()); }
	const std::vector<Scalar> &levels() const { return levels_; }
	Scalar upper_sentinel() const { return upper_; }
	/// 1-based level lookup.
	Scalar level(int k) const { return levels_.at(k - 1); }

	bool operator==(const ActionGrid &o) const { return levels_ == o.levels_ && upper_ == o.upper_; }

private:
	std::vector<Scalar> levels_;
	Scalar upper_ = Scalar(2);
};

/// Bin of action `a`: the k (1-based) with a in [A_(k), A_(k+1)).
template <typename Scalar>
int level_index(const ActionGrid<Scalar> &grid, Scalar a)
{
	if (!(a >= Scalar(0) && a <= Scalar(1)))
		throw std::domain_error("action outside [0,1]");
	const auto &lv = grid.levels();
	auto it = std::upper_bound(lv.begin(), lv.end(), a);
	return static_cast<int>(it - lv.begin());
}

/// Column offset of coefficient block `block` (0 for main effects, 2..L for
/// interactions) in the p = d*L layout.
inline Eigen::Index block_offset(int block, Eigen::Index d)
{
	return block == 0 ? 0 : (block - 1) * d;
}

template <typename Scalar>
void require_finite_rows(const MatrixX<Scalar> &X, const std::string &what)
{
	std::vector<Eigen::Index> bad;
	for (Eigen::Index i = 0; i < X.rows(); ++i)
		if (!X.row(i).allFinite())
			bad.push_back(i);
	if (!bad.empty())
		throw InputError(what + ": non-finite values in " + std::to_string(bad.size()) + " row(s)", bad);
}

/// Interaction design X-check (n x d*L).
template <typename Scalar>
MatrixX<Scalar> build_design(const MatrixX<Scalar> &X, const VectorX<Scalar> &A, const ActionGrid<Scalar> &grid)
{
	if (A.size() != X.rows())
		throw std::invalid_argument("build_design: X and A lengths differ");
	require_finite_rows(X, "build_design");
	std::vector<Eigen::Index> bad;
	for (Eigen::Index i = 0; i < A.size(); ++i)
		if (!(std::isfinite(static_cast<double>(A(i))) && A(i) >= Scalar(0) && A(i) <= Scalar(1)))
			bad.push_back(i);
	if (!bad.empty())
		throw InputError("build_design: actions outside [0,1] in " + std::to_string(bad.size()) + " row(s)", bad);

	const Eigen::Index d = X.cols();
	MatrixX<Scalar> out = MatrixX<Scalar>::Zero(X.rows(), d * grid.size());
	for (Eigen::Index i = 0; i < X.rows(); ++i) {
		const int k = level_index(grid, A(i));
		out.row(i).head(d) = X.row(i);
		if (k >= 2)
			out.row(i).segment(block_offset(k, d), d) = X.row(i);
	}
	return out;
}

template <typename Scalar>
MatrixX<Scalar> build_design(const ObservationSet<Scalar> &obs, const ActionGrid<Scalar> &grid)
{
	return build_design(obs.X, obs.A, grid);
}

/// Rows of the design evaluated at the actions chosen by a decision rule.
template <typename Scalar>
using DecisionRule = std::function<Scalar(const RowVectorX<Scalar> &)>;

template <typename Scalar>
MatrixX<Scalar> build_policy_features(const MatrixX<Scalar> &X, const ActionGrid<Scalar> &grid,
				      const DecisionRule<Scalar> &rule)
{
	VectorX<Scalar> actions(X.rows());
	for (Eigen::Index i = 0; i < X.rows(); ++i) {
		const Scalar a = rule(X.row(i));
		if (!(a >= Scalar(0) && a <= Scalar(1)))
			throw InputError("decision rule returned action outside [0,1] at row " + std::to_string(i), {i});
		actions(i) = a;
	}
	return build_design(X, actions, grid);
}

/// Policy features for per-row level indices (1-based), skipping the rule call.
template <typename Scalar>
MatrixX<Scalar> build_policy_features_from_levels(const MatrixX<Scalar> &X, const ActionGrid<Scalar> &grid,
						  const std::vector<int> &levels)
{
	const Eigen::Index d = X.cols();
	MatrixX<Scalar> out = MatrixX<Scalar>::Zero(X.rows(), d * grid.size());
	for (Eigen::Index i = 0; i < X.rows(); ++i) {
		out.row(i).head(d) = X.row(i);
		const int k = levels[static_cast<std::size_t>(i)];
		if (k >= 2)
			out.row(i).segment(block_offset(k, d), d) = X.row(i);
	}
	return out;
}

enum class PenaltyRowKind { Coef, Fuse };

/// Generalized penalty matrix D (K x p): unit rows on every coefficient,
/// followed by adjacent differences psi_{k,j} - psi_{k+1,j}.
template <typename Scalar = double>
struct PenaltyMatrix {
	Eigen::SparseMatrix<Scalar, Eigen::RowMajor> rows;
	std::vector<PenaltyRowKind> kinds;

	Eigen::Index K() const { return rows.rows(); }
	Eigen::Index p() const { return rows.cols(); }

	/// Row k as a dense vector.
	VectorX<Scalar> row(Eigen::Index k) const { return VectorX<Scalar>(rows.row(k).transpose()); }

	/// Sub-matrix made of the listed rows.
	PenaltyMatrix select(const std::vector<int> &idx) const
	{
		std::vector<Eigen::Triplet<Scalar>> trip;
		PenaltyMatrix out;
		for (std::size_t r = 0; r < idx.size(); ++r) {
			for (typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor>::InnerIterator it(rows, idx[r]); it; ++it)
				trip.emplace_back(static_cast<int>(r), static_cast<int>(it.col()), it.value());
			out.kinds.push_back(kinds[static_cast<std::size_t>(idx[r])]);
		}
		out.rows.resize(static_cast<Eigen::Index>(idx.size()), p());
		out.rows.setFromTriplets(trip.begin(), trip.end());
		return out;
	}

	/// p x p identity, used by the standard (non-generalized) estimators.
	static PenaltyMatrix identity(Eigen::Index p)
	{
		PenaltyMatrix out;
		out.rows.resize(p, p);
		out.rows.setIdentity();
		out.kinds.assign(static_cast<std::size_t>(p), PenaltyRowKind::Coef);
		return out;
	}

	static PenaltyMatrix from_dense(const MatrixX<Scalar> &D)
	{
		PenaltyMatrix out;
		out.rows = D.sparseView();
		for (Eigen::Index k = 0; k < D.rows(); ++k)
			out.kinds.push_back((D.row(k).array() != Scalar(0)).count() == 1 ? PenaltyRowKind::Coef
										 : PenaltyRowKind::Fuse);
		return out;
	}
};

template <typename Scalar>
PenaltyMatrix<Scalar> build_penalty_matrix(Eigen::Index d, const ActionGrid<Scalar> &grid)
{
	if (d < 1)
		throw std::invalid_argument("build_penalty_matrix: d must be >= 1");
	const int L = grid.size();
	const Eigen::Index p = d * L;
	const Eigen::Index K = p + d * (L - 2);
	std::vector<Eigen::Triplet<Scalar>> trip;
	trip.reserve(static_cast<std::size_t>(p + 2 * d * (L - 2)));
	PenaltyMatrix<Scalar> D;
	for (Eigen::Index c = 0; c < p; ++c) {
		trip.emplace_back(static_cast<int>(c), static_cast<int>(c), Scalar(1));
		D.kinds.push_back(PenaltyRowKind::Coef);
	}
	Eigen::Index r = p;
	for (int k = 2; k <= L - 1; ++k) {
		for (Eigen::Index j = 0; j < d; ++j, ++r) {
			trip.emplace_back(static_cast<int>(r), static_cast<int>(block_offset(k, d) + j), Scalar(1));
			trip.emplace_back(static_cast<int>(r), static_cast<int>(block_offset(k + 1, d) + j), Scalar(-1));
			D.kinds.push_back(PenaltyRowKind::Fuse);
		}
	}
	D.rows.resize(K, p);
	D.rows.setFromTriplets(trip.begin(), trip.end());
	return D;
}

/// Smallest eigenvalue of R R^T above `tol` (R = listed rows of D); returns 0
/// for an empty selection.
template <typename Scalar>
Scalar min_nonzero_eigenvalue(const PenaltyMatrix<Scalar> &D, const std::vector<int> &rows, Scalar tol = Scalar(1e-9))
{
	if (rows.empty())
		return Scalar(0);
	const MatrixX<Scalar> R = MatrixX<Scalar>(D.select(rows).rows);
	const MatrixX<Scalar> G = R * R.transpose();
	Eigen::SelfAdjointEigenSolver<MatrixX<Scalar>> es(G, Eigen::EigenvaluesOnly);
	Scalar best = std::numeric_limits<Scalar>::infinity();
	for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
		if (es.eigenvalues()(i) > tol)
			best = std::min(best, es.eigenvalues()(i));
	return std::isfinite(static_cast<double>(best)) ? best : Scalar(0);
}

template <typename Scalar>
Scalar max_row_norm(const PenaltyMatrix<Scalar> &D)
{
	Scalar best = 0;
	for (Eigen::Index k = 0; k < D.K(); ++k)
		best = std::max(best, D.rows.row(k).norm());
	return best;
}

} // namespace drove
