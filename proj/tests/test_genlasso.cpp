#include "drove/genlasso.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <random>

using namespace drove;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd ols(const MatrixXd &X, const VectorXd &y)
{
	return X.colPivHouseholderQr().solve(y);
}

} // namespace

TEST_CASE("lambda = 0 and zero weights give least squares")
{
	std::mt19937_64 rng(5);
	const testing::Instance in = testing::random_instance(rng);
	const auto D = PenaltyMatrix<double>::from_dense(in.D);
	const VectorXd ls = ols(in.X, in.y);
	const auto r0 = solve_weighted_genlasso<double>(in.y, in.X, WeightedPenaltyOperator<double>::uniform(D), 0.0);
	CHECK((r0.beta - ls).norm() <= 1e-8 * (1 + ls.norm()));
	const auto rw = solve_weighted_genlasso<double>(in.y, in.X, WeightedPenaltyOperator<double>(D, VectorXd::Zero(D.K())),
							5.0);
	CHECK((rw.beta - ls).norm() <= 1e-8 * (1 + ls.norm()));
	CHECK(rw.diagnostics.converged);
}

TEST_CASE("orthonormal design reduces to soft thresholding")
{
	std::mt19937_64 rng(17);
	std::normal_distribution<double> N;
	const int n = 50, p = 6;
	MatrixXd Z(n, p);
	for (Eigen::Index i = 0; i < Z.size(); ++i)
		Z.data()[i] = N(rng);
	const MatrixXd Q = Eigen::HouseholderQR<MatrixXd>(Z).householderQ() * MatrixXd::Identity(n, p);
	const MatrixXd X = std::sqrt(double(n)) * Q;
	VectorXd y(n);
	for (int i = 0; i < n; ++i)
		y(i) = N(rng);
	const double lambda = 0.12;
	const auto r = solve_weighted_genlasso<double>(y, X, WeightedPenaltyOperator<double>::uniform(PenaltyMatrix<double>::identity(p)),
						       lambda);
	const VectorXd z = X.transpose() * y / double(n);
	for (int j = 0; j < p; ++j) {
		const double st = std::copysign(std::max(std::abs(z(j)) - lambda, 0.0), z(j));
		CHECK(std::abs(r.beta(j) - st) <= 1e-6);
	}
}

TEST_CASE("objective formula")
{
	std::mt19937_64 rng(23);
	const testing::Instance in = testing::random_instance(rng);
	const WeightedPenaltyOperator<double> op(PenaltyMatrix<double>::from_dense(in.D), in.w);
	const double n = double(in.y.size());
	CHECK(objective<double>(in.y, in.X, op, in.lambda, VectorXd::Zero(in.X.cols())) ==
	      doctest::Approx(in.y.squaredNorm() / (2 * n)).epsilon(1e-14));

	// Naive loops on a random beta.
	std::normal_distribution<double> N;
	VectorXd b(in.X.cols());
	for (Eigen::Index j = 0; j < b.size(); ++j)
		b(j) = N(rng);
	double loss = 0;
	for (Eigen::Index i = 0; i < in.X.rows(); ++i) {
		double f = 0;
		for (Eigen::Index j = 0; j < in.X.cols(); ++j)
			f += in.X(i, j) * b(j);
		loss += (in.y(i) - f) * (in.y(i) - f);
	}
	double pen = 0;
	for (Eigen::Index k = 0; k < in.D.rows(); ++k) {
		double dk = 0;
		for (Eigen::Index j = 0; j < in.D.cols(); ++j)
			dk += in.D(k, j) * b(j);
		pen += in.w(k) * std::abs(dk);
	}
	const double naive = loss / (2 * n) + in.lambda * pen;
	CHECK(objective<double>(in.y, in.X, op, in.lambda, b) == doctest::Approx(naive).epsilon(1e-12));
	const auto g = GramSystem<double>::from(in.X, in.y);
	CHECK(objective<double>(g, op, in.lambda, b) == doctest::Approx(naive).epsilon(1e-10));

	// Interpolating beta with D beta = 0 has zero objective.
	MatrixXd Xs = MatrixXd::Ones(5, 1);
	const VectorXd ys = VectorXd::Constant(5, 0.0);
	MatrixXd Ds(1, 1);
	Ds << 1;
	const WeightedPenaltyOperator<double> ops(PenaltyMatrix<double>::from_dense(Ds), VectorXd::Ones(1));
	CHECK(objective<double>(ys, Xs, ops, 1.0, VectorXd::Zero(1)) == 0.0);
}

TEST_CASE("solver agrees with the dual reference solver")
{
	std::mt19937_64 rng(99);
	for (int t = 0; t < 12; ++t) {
		const testing::Instance in = testing::random_instance(rng);
		const WeightedPenaltyOperator<double> op(PenaltyMatrix<double>::from_dense(in.D), in.w);
		const auto r = solve_weighted_genlasso<double>(in.y, in.X, op, in.lambda);
		const auto o = testing::dual_projected_gradient(in.X, in.y, in.D, in.w, in.lambda, 50000);
		CHECK(r.diagnostics.converged);
		CHECK(r.diagnostics.objective <= o.objective + 1e-6 * std::abs(o.objective));
		CHECK(std::abs(r.diagnostics.objective - o.objective) <= 1e-6 * std::abs(o.objective));
		CHECK(r.diagnostics.kkt_residual <= 1e-8);
	}
}

TEST_CASE("warm starts do not change the solution")
{
	std::mt19937_64 rng(7);
	std::normal_distribution<double> N;
	for (int t = 0; t < 5; ++t) {
		const testing::Instance in = testing::random_instance(rng);
		const WeightedPenaltyOperator<double> op(PenaltyMatrix<double>::from_dense(in.D), in.w);
		const auto cold = solve_weighted_genlasso<double>(in.y, in.X, op, in.lambda);
		SolverSettings<double> s;
		VectorXd start(in.X.cols());
		for (Eigen::Index j = 0; j < start.size(); ++j)
			start(j) = 3 * N(rng);
		s.warm_start = start;
		const auto warm = solve_weighted_genlasso<double>(in.y, in.X, op, in.lambda, s);
		CHECK((warm.beta - cold.beta).norm() <= 1e-7 * (1 + cold.beta.norm()));
		CHECK(warm.diagnostics.objective == doctest::Approx(cold.diagnostics.objective).epsilon(1e-10));
	}
}

TEST_CASE("objective trace of the incumbent never increases")
{
	std::mt19937_64 rng(31);
	const testing::Instance in = testing::random_instance(rng);
	const WeightedPenaltyOperator<double> op(PenaltyMatrix<double>::from_dense(in.D), in.w);
	const auto r = solve_weighted_genlasso<double>(in.y, in.X, op, in.lambda);
	for (std::size_t i = 1; i < r.diagnostics.objective_trace.size(); ++i)
		CHECK(r.diagnostics.objective_trace[i] <= r.diagnostics.objective_trace[i - 1]);
}

TEST_CASE("kkt residual is zero at the exact solution of a scalar problem")
{
	// One coefficient, y = 2 x, D = [1]: beta = max(2 - lambda / mean(x^2), 0).
	MatrixXd X = MatrixXd::Constant(4, 1, 1.0);
	VectorXd y = VectorXd::Constant(4, 2.0);
	MatrixXd D(1, 1);
	D << 1;
	const auto op = WeightedPenaltyOperator<double>::uniform(PenaltyMatrix<double>::from_dense(D));
	const auto g = GramSystem<double>::from(X, y);
	CHECK(kkt_residual<double>(g, op, 0.5, VectorXd::Constant(1, 1.5)) <= 1e-15);
	CHECK(kkt_residual<double>(g, op, 0.5, VectorXd::Constant(1, 1.0)) > 0.1);
	const auto r = solve_weighted_genlasso<double>(g, op, 3.0);
	CHECK(r.beta(0) == 0.0);
}

TEST_CASE("bad inputs")
{
	MatrixXd X = MatrixXd::Ones(3, 2);
	VectorXd y = VectorXd::Ones(3);
	const auto D = PenaltyMatrix<double>::identity(2);
	CHECK_THROWS_AS(solve_weighted_genlasso<double>(y, X, WeightedPenaltyOperator<double>::uniform(D), -1.0),
			std::invalid_argument);
	CHECK_THROWS_AS(WeightedPenaltyOperator<double>(D, VectorXd::Constant(2, -1.0)), std::invalid_argument);
	CHECK_THROWS_AS(WeightedPenaltyOperator<double>(D, VectorXd::Ones(3)), std::invalid_argument);
	CHECK_THROWS_AS(GramSystem<double>::from(X, VectorXd::Ones(4)), std::invalid_argument);
}
