#pragma once

#include "drove/design.hpp"

#include <Eigen/QR>

#include <numeric>
#include <vector>

namespace drove {

namespace detail {

struct DisjointSets {
	std::vector<int> parent;
	explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
	int find(int i)
	{
		while (parent[static_cast<std::size_t>(i)] != i) {
			parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
			i = parent[static_cast<std::size_t>(i)];
		}
		return i;
	}
	void unite(int a, int b)
	{
		a = find(a);
		b = find(b);
		if (a != b)
			parent[static_cast<std::size_t>(std::max(a, b))] = std::min(a, b);
	}
};

} // namespace detail

/// True when every listed row is a scaled unit vector or a scaled difference
/// e_i - e_j. Null spaces of such row sets are spanned by group indicators.
template <typename Scalar>
bool is_chain_structured(const PenaltyMatrix<Scalar> &D, const std::vector<int> &rows)
{
	using It = typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor>::InnerIterator;
	for (int r : rows) {
		int nnz = 0;
		Scalar sum = 0;
		for (It it(D.rows, r); it; ++it) {
			if (it.value() == Scalar(0))
				continue;
			sum += it.value();
			++nnz;
		}
		if (nnz > 2 || (nnz == 2 && sum != Scalar(0)))
			return false;
	}
	return true;
}

/// Orthonormal basis of null(D_rows) for chain-structured rows: one column
/// 1_G / sqrt(|G|) per free group of coordinates. Entries are exact, so
/// D_rows * U is exactly zero and products U * theta are exactly fused.
template <typename Scalar>
MatrixX<Scalar> chain_null_basis(const PenaltyMatrix<Scalar> &D, const std::vector<int> &rows)
{
	using It = typename Eigen::SparseMatrix<Scalar, Eigen::RowMajor>::InnerIterator;
	const int p = static_cast<int>(D.p());
	detail::DisjointSets sets(p);
	std::vector<char> zeroed(static_cast<std::size_t>(p), 0);
	for (int r : rows) {
		int cols[2], nnz = 0;
		for (It it(D.rows, r); it; ++it)
			if (it.value() != Scalar(0))
				cols[nnz++] = static_cast<int>(it.col());
		if (nnz == 1)
			zeroed[static_cast<std::size_t>(cols[0])] = 1;
		else if (nnz == 2)
			sets.unite(cols[0], cols[1]);
	}
	std::vector<char> group_zero(static_cast<std::size_t>(p), 0);
	for (int j = 0; j < p; ++j)
		if (zeroed[static_cast<std::size_t>(j)])
			group_zero[static_cast<std::size_t>(sets.find(j))] = 1;

	std::vector<int> column_of_root(static_cast<std::size_t>(p), -1);
	std::vector<std::vector<int>> groups;
	for (int j = 0; j < p; ++j) {
		const int root = sets.find(j);
		if (group_zero[static_cast<std::size_t>(root)])
			continue;
		int &col = column_of_root[static_cast<std::size_t>(root)];
		if (col < 0) {
			col = static_cast<int>(groups.size());
			groups.emplace_back();
		}
		groups[static_cast<std::size_t>(col)].push_back(j);
	}
	MatrixX<Scalar> U = MatrixX<Scalar>::Zero(p, static_cast<Eigen::Index>(groups.size()));
	for (std::size_t g = 0; g < groups.size(); ++g) {
		const Scalar v = Scalar(1) / std::sqrt(Scalar(groups[g].size()));
		for (int j : groups[g])
			U(j, static_cast<Eigen::Index>(g)) = v;
	}
	return U;
}

/// Orthonormal basis of null(D_rows) from a rank-revealing QR of D_rows^T.
template <typename Scalar>
MatrixX<Scalar> qr_null_basis(const PenaltyMatrix<Scalar> &D, const std::vector<int> &rows,
			      Scalar rank_tol = Scalar(1e-10))
{
	const Eigen::Index p = D.p();
	if (rows.empty())
		return MatrixX<Scalar>::Identity(p, p);
	const MatrixX<Scalar> Dt = MatrixX<Scalar>(D.select(rows).rows).transpose();
	Eigen::ColPivHouseholderQR<MatrixX<Scalar>> qr(Dt);
	qr.setThreshold(rank_tol);
	const Eigen::Index r = qr.rank();
	const MatrixX<Scalar> Q = qr.householderQ();
	return Q.rightCols(p - r);
}

/// Orthonormal basis of null(D_rows); exact group-indicator basis when the rows
/// allow it, rank-revealing QR otherwise.
template <typename Scalar>
MatrixX<Scalar> null_space_basis(const PenaltyMatrix<Scalar> &D, const std::vector<int> &rows)
{
	if (is_chain_structured(D, rows))
		return chain_null_basis(D, rows);
	return qr_null_basis(D, rows);
}

/// rank(D_rows) = p - dim null(D_rows).
template <typename Scalar>
Eigen::Index penalty_rank(const PenaltyMatrix<Scalar> &D, const std::vector<int> &rows)
{
	return D.p() - null_space_basis(D, rows).cols();
}

} // namespace drove
