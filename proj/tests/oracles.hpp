#pragma once

// Test-only reference computations, independent of the library's solvers.

#include "drove/genlasso.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>

namespace drove::testing {

/// Random weighted generalized lasso with n <= 100, p <= 12, K <= 15; about a
/// quarter of the weights are zero.
struct Instance {
	Eigen::MatrixXd X;
	Eigen::VectorXd y;
	Eigen::MatrixXd D;
	Eigen::VectorXd w;
	double lambda = 0;
};

inline Instance random_instance(std::mt19937_64 &rng)
{
	std::normal_distribution<double> N;
	std::uniform_real_distribution<double> U(0, 1);
	Instance in;
	const int n = 20 + static_cast<int>(rng() % 81);
	const int p = 2 + static_cast<int>(rng() % 11);
	const int K = 1 + static_cast<int>(rng() % 15);
	in.X.resize(n, p);
	for (Eigen::Index i = 0; i < in.X.size(); ++i)
		in.X.data()[i] = N(rng);
	Eigen::VectorXd beta(p);
	for (int j = 0; j < p; ++j)
		beta(j) = rng() % 2 ? N(rng) : 0.0;
	in.y = in.X * beta;
	for (int i = 0; i < n; ++i)
		in.y(i) += 0.5 * N(rng);
	in.D = Eigen::MatrixXd::Zero(K, p);
	for (int k = 0; k < K; ++k) {
		const int i = static_cast<int>(rng() % p), j = static_cast<int>(rng() % p);
		in.D(k, i) += 1;
		if (j != i && rng() % 2)
			in.D(k, j) -= 1;
	}
	in.w.resize(K);
	for (int k = 0; k < K; ++k)
		in.w(k) = rng() % 4 == 0 ? 0.0 : 0.1 + 1.9 * U(rng);
	in.lambda = 0.01 + 0.49 * U(rng);
	return in;
}

struct DualOracleResult {
	Eigen::VectorXd beta;
	double objective = 0;
};

/// Accelerated projected gradient on the box-constrained dual of the weighted
/// generalized lasso (requires H positive definite):
///   min_{|u|_inf <= 1}  0.5 (b - lambda T^T u)^T H^{-1} (b - lambda T^T u),
/// with T the weighted penalty rows; beta(u) = H^{-1}(b - lambda T^T u).
inline DualOracleResult dual_projected_gradient(const Eigen::MatrixXd &X, const Eigen::VectorXd &y,
						const Eigen::MatrixXd &D, const Eigen::VectorXd &w, double lambda,
						int iterations = 200000)
{
	const double n = double(X.rows());
	const Eigen::MatrixXd H = X.transpose() * X / n;
	const Eigen::VectorXd b = X.transpose() * y / n;
	const Eigen::MatrixXd T = w.asDiagonal() * D;
	const Eigen::LLT<Eigen::MatrixXd> llt(H);
	const Eigen::MatrixXd HinvTt = llt.solve(T.transpose());
	const Eigen::VectorXd Hinvb = llt.solve(b);
	const Eigen::MatrixXd Q = lambda * lambda * T * HinvTt;
	const double L = std::max(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Q).eigenvalues().maxCoeff(), 1e-300);
	const Eigen::VectorXd c = lambda * T * Hinvb;

	auto project = [](Eigen::VectorXd v) { return Eigen::VectorXd(v.cwiseMax(-1.0).cwiseMin(1.0)); };
	auto dual_obj = [&](const Eigen::VectorXd &u) { return 0.5 * u.dot(Q * u) - c.dot(u); };
	Eigen::VectorXd u = Eigen::VectorXd::Zero(T.rows()), v = u, u_prev = u;
	double t = 1;
	double f_prev = dual_obj(u);
	for (int it = 0; it < iterations; ++it) {
		u = project(v - (Q * v - c) / L);
		const double f = dual_obj(u);
		if (f > f_prev) { // adaptive restart
			t = 1;
			v = u_prev;
			u = project(v - (Q * v - c) / L);
		}
		const double t_next = 0.5 * (1 + std::sqrt(1 + 4 * t * t));
		v = u + ((t - 1) / t_next) * (u - u_prev);
		u_prev = u;
		t = t_next;
		f_prev = dual_obj(u);
	}
	DualOracleResult out;
	out.beta = Hinvb - lambda * HinvTt * u;
	out.objective = (y - X * out.beta).squaredNorm() / (2 * n) + lambda * (T * out.beta).cwiseAbs().sum();
	return out;
}

} // namespace drove::testing
