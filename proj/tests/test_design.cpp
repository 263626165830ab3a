#include "drove/design.hpp"

#include <doctest.h>

#include <random>

using namespace drove;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("level lookup on the uniform 11-level grid")
{
	const auto g = ActionGrid<double>::uniform(11);
	CHECK(level_index(g, 0.35) == 4);
	CHECK(level_index(g, 0.0) == 1);
	CHECK(level_index(g, 1.0) == 11);
	CHECK(level_index(g, 0.3) == 4);
	CHECK(level_index(g, 0.999) == 10);
	CHECK_THROWS_AS(level_index(g, -0.01), std::domain_error);
	CHECK_THROWS_AS(level_index(g, 1.01), std::domain_error);
	CHECK_THROWS_AS(level_index(g, std::nan("")), std::domain_error);
}

TEST_CASE("grid validation")
{
	CHECK_THROWS_AS(ActionGrid<double>({0.0}), std::invalid_argument);
	CHECK_THROWS_AS(ActionGrid<double>({0.0, 0.5, 0.5, 1.0}), std::invalid_argument);
	CHECK_THROWS_AS(ActionGrid<double>({0.1, 1.0}), std::invalid_argument);
	CHECK_THROWS_AS(ActionGrid<double>::uniform(1), std::invalid_argument);
	CHECK(ActionGrid<double>::uniform(3) == ActionGrid<double>({0.0, 0.5, 1.0}));
}

TEST_CASE("design rows for the three bins of a 3-level grid")
{
	const ActionGrid<double> g({0.0, 0.5, 1.0});
	MatrixXd X(1, 2);
	X << 1, 2;
	auto row = [&](double a) { return MatrixXd(build_design<double>(X, VectorXd::Constant(1, a), g)); };
	Eigen::RowVectorXd r0(6), r1(6), r2(6);
	r0 << 1, 2, 0, 0, 0, 0;
	r1 << 1, 2, 1, 2, 0, 0;
	r2 << 1, 2, 0, 0, 1, 2;
	CHECK(row(0.0) == r0);
	CHECK(row(0.6) == r1);
	CHECK(row(1.0) == r2);
}

TEST_CASE("non-finite inputs are reported by row")
{
	const auto g = ActionGrid<double>::uniform(3);
	MatrixXd X = MatrixXd::Ones(4, 2);
	X(2, 1) = std::numeric_limits<double>::infinity();
	try {
		build_design<double>(X, VectorXd::Zero(4), g);
		FAIL("expected InputError");
	} catch (const InputError &e) {
		REQUIRE(e.rows().size() == 1);
		CHECK(e.rows()[0] == 2);
	}
	X(2, 1) = 0;
	VectorXd A = VectorXd::Zero(4);
	A(3) = 1.5;
	try {
		build_design(X, A, g);
		FAIL("expected InputError");
	} catch (const InputError &e) {
		CHECK(e.rows() == std::vector<Eigen::Index>{3});
	}
}

TEST_CASE("policy features")
{
	const auto g = ActionGrid<double>::uniform(5);
	std::mt19937_64 rng(3);
	std::normal_distribution<double> N;
	MatrixXd X(20, 3);
	for (Eigen::Index i = 0; i < X.size(); ++i)
		X.data()[i] = N(rng);
	const auto F0 = build_policy_features<double>(X, g, [](const Eigen::RowVectorXd &) { return 0.0; });
	CHECK(F0.rightCols(12).isZero(0));
	CHECK(F0.leftCols(3) == X);
	const auto F1 = build_policy_features<double>(X, g, [](const Eigen::RowVectorXd &) { return 1.0; });
	CHECK(F1.middleCols(3, 9).isZero(0));
	CHECK(F1.rightCols(3) == X);

	// Any action inside a bin gives the same features.
	auto left = [&](const Eigen::RowVectorXd &x) { return g.level(1 + (x(0) > 0) + 2 * (x(1) > 0)); };
	auto mid = [&](const Eigen::RowVectorXd &x) {
		const int k = 1 + (x(0) > 0) + 2 * (x(1) > 0);
		return g.level(k) + 0.5 * (g.level(k + 1) - g.level(k));
	};
	CHECK(build_policy_features<double>(X, g, left) == build_policy_features<double>(X, g, mid));

	CHECK_THROWS_AS(build_policy_features<double>(X, g, [](const Eigen::RowVectorXd &) { return 2.0; }), InputError);
}

TEST_CASE("design matches a brute-force construction on random small cases")
{
	std::mt19937_64 rng(2024);
	std::uniform_real_distribution<double> U(0, 1);
	std::normal_distribution<double> N;
	for (int c = 0; c < 1000; ++c) {
		const int L = 2 + static_cast<int>(rng() % 6);
		const int d = 1 + static_cast<int>(rng() % 4);
		const int n = 1 + static_cast<int>(rng() % 8);
		std::vector<double> lv{0.0};
		for (int k = 1; k < L - 1; ++k)
			lv.push_back(lv.back() + (1.0 - lv.back()) * (0.05 + 0.9 * U(rng)) / (L - k));
		lv.push_back(1.0);
		const ActionGrid<double> g(lv);
		MatrixXd X(n, d);
		VectorXd A(n);
		for (int i = 0; i < n; ++i) {
			for (int j = 0; j < d; ++j)
				X(i, j) = N(rng);
			// Hit grid points exactly a third of the time.
			A(i) = rng() % 3 == 0 ? lv[rng() % lv.size()] : U(rng);
		}
		const MatrixXd got = build_design(X, A, g);
		REQUIRE(got.cols() == d * L);
		for (int i = 0; i < n; ++i) {
			int bin = 0;
			for (int k = 1; k <= L; ++k) {
				const double hi = k < L ? lv[k] : 2.0;
				if (A(i) >= lv[k - 1] && A(i) < hi)
					bin = k;
			}
			for (int col = 0; col < d * L; ++col) {
				const int j = col % d;
				const int block = col < d ? 0 : col / d + 1;
				const double expect = (block == 0 || block == bin) ? X(i, j) : 0.0;
				REQUIRE(got(i, col) == expect);
			}
		}
	}
}

TEST_CASE("penalty matrix layout")
{
	const auto D = build_penalty_matrix<double>(9, ActionGrid<double>::uniform(11));
	CHECK(D.p() == 99);
	CHECK(D.K() == 180);
	CHECK(std::count(D.kinds.begin(), D.kinds.end(), PenaltyRowKind::Coef) == 99);
	CHECK(std::count(D.kinds.begin(), D.kinds.end(), PenaltyRowKind::Fuse) == 81);
	for (Eigen::Index k = 0; k < D.K(); ++k) {
		const double nrm = D.rows.row(k).norm();
		CHECK((nrm == 1.0 || nrm == std::sqrt(2.0)));
	}
	CHECK(max_row_norm(D) == doctest::Approx(std::sqrt(2.0)));
	CHECK(build_penalty_matrix<double>(2, ActionGrid<double>::uniform(3)).K() == 8);

	// Fuse row for psi_{2,1} - psi_{3,1} with d = 2, L = 3: columns 2 and 4.
	const auto D2 = build_penalty_matrix<double>(2, ActionGrid<double>::uniform(3));
	const VectorXd r = D2.row(6);
	CHECK(r(2) == 1.0);
	CHECK(r(4) == -1.0);
	CHECK(r.cwiseAbs().sum() == 2.0);
}

TEST_CASE("smallest nonzero eigenvalue over row subsets is bounded away from zero")
{
	const auto D = build_penalty_matrix<double>(3, ActionGrid<double>::uniform(6));
	std::mt19937_64 rng(9);
	double worst = std::numeric_limits<double>::infinity();
	for (int t = 0; t < 200; ++t) {
		std::vector<int> rows;
		for (int k = 0; k < D.K(); ++k)
			if (rng() % 2)
				rows.push_back(k);
		if (rows.empty())
			continue;
		worst = std::min(worst, min_nonzero_eigenvalue(D, rows));
	}
	CHECK(worst > 0.05);
	CHECK(min_nonzero_eigenvalue(D, {}) == 0.0);
}
