#include "drove/penalty.hpp"

#include <doctest.h>

#include <random>
#include <vector>

using namespace drove;

TEST_CASE("penalty values at reference points")
{
	CHECK(penalty_value(PenaltySpec<double>::l1(0.5), 2.0) == doctest::Approx(1.0).epsilon(1e-15));
	const auto scad = PenaltySpec<double>::scad(1.0, 3.7);
	CHECK(penalty_value(scad, 0.0) == 0.0);
	CHECK(penalty_value(scad, 10.0) == doctest::Approx(2.35).epsilon(1e-14));
	// Constant beyond a * lambda.
	CHECK(penalty_value(scad, 3.7) == doctest::Approx(penalty_value(scad, 50.0)).epsilon(1e-14));
	const auto mcp = PenaltySpec<double>::mcp(2.0, 3.0);
	CHECK(penalty_value(mcp, 100.0) == doctest::Approx(3.0 * 4.0 / 2.0));
}

TEST_CASE("rho_prime branches")
{
	const auto scad = PenaltySpec<double>::scad(1.0, 3.7);
	CHECK(rho_prime(scad, 0.5) == 1.0);
	CHECK(rho_prime(scad, 2.0) == doctest::Approx(1.7 / 2.7).epsilon(1e-14));
	CHECK(rho_prime(scad, 4.0) == 0.0);
	CHECK(rho_prime(PenaltySpec<double>::l1(0.3), 100.0) == 1.0);
	CHECK(rho_prime(PenaltySpec<double>::scad(0.0), 1.0) == 0.0);
	CHECK(rho(PenaltySpec<double>::mcp(0.0), 1.0) == 0.0);

	// rho'(0+) = 1 regardless of lambda; zero past a * lambda.
	for (double lam : {1e-3, 0.1, 7.0}) {
		for (auto spec : {PenaltySpec<double>::scad(lam), PenaltySpec<double>::mcp(lam), PenaltySpec<double>::l1(lam)})
			CHECK(rho_prime(spec, 1e-14 * lam) == doctest::Approx(1.0));
		CHECK(rho_prime(PenaltySpec<double>::scad(lam), 3.70001 * lam) == 0.0);
		CHECK(rho_prime(PenaltySpec<double>::mcp(lam), 3.00001 * lam) == 0.0);
	}
}

TEST_CASE("negative arguments and bad shapes are rejected")
{
	const auto scad = PenaltySpec<double>::scad(1.0);
	CHECK_THROWS_AS(penalty_value(scad, -0.1), std::domain_error);
	CHECK_THROWS_AS(rho_prime(scad, -1e-300), std::domain_error);
	CHECK_THROWS_AS(PenaltySpec<double>::scad(1.0, 2.0).validate(), std::domain_error);
	CHECK_THROWS_AS(PenaltySpec<double>::mcp(1.0, 1.0).validate(), std::domain_error);
	CHECK_THROWS_AS(PenaltySpec<double>::l1(-1.0).validate(), std::domain_error);
	CHECK_THROWS_AS(penalty_family_from_string("ridge"), std::invalid_argument);
	CHECK(penalty_family_from_string("mcp") == PenaltyFamily::MCP);
}

TEST_CASE("rho_prime matches central finite differences of the penalty")
{
	std::mt19937_64 rng(11);
	std::uniform_real_distribution<double> U(0, 1);
	int checked = 0;
	for (int rep = 0; rep < 400; ++rep) {
		const double lam = 0.01 + 2 * U(rng);
		const double a = 2.2 + 3 * U(rng);
		const PenaltySpec<double> specs[] = {PenaltySpec<double>::scad(lam, a), PenaltySpec<double>::mcp(lam, a),
						     PenaltySpec<double>::l1(lam)};
		for (const auto &s : specs) {
			const double t = 1e-3 + (a + 1) * lam * U(rng);
			const double h = 1e-6 * lam;
			// Stay away from the kinks at lambda and a * lambda.
			if (std::abs(t - lam) < 10 * h || std::abs(t - a * lam) < 10 * h || t < 10 * h)
				continue;
			const double fd = (penalty_value(s, t + h) - penalty_value(s, t - h)) / (2 * h) / lam;
			CHECK(std::abs(fd - rho_prime(s, t)) <= 1e-6);
			++checked;
		}
	}
	CHECK(checked > 1000);
}

namespace convex_hook {

struct Quadratic {};
inline double scaled_value(const Quadratic &, double t) { return t * t; }
inline double scaled_derivative(const Quadratic &, double t) { return 2 * t + 1e-3; }

} // namespace convex_hook

TEST_CASE("folded-concave shape check")
{
	std::vector<double> grid;
	for (int i = 1; i <= 50; ++i)
		grid.push_back(0.1 * i);
	CHECK(check_folded_concave(PenaltySpec<double>::scad(1.0), grid).passed);
	CHECK(check_folded_concave(PenaltySpec<double>::mcp(1.0), grid).passed);
	CHECK(check_folded_concave(PenaltySpec<double>::l1(1.0), grid).passed);
	const auto bad = check_folded_concave(convex_hook::Quadratic{}, grid);
	CHECK_FALSE(bad.passed);
	CHECK_FALSE(bad.violations.empty());
	std::vector<double> unsorted{1.0, 0.5};
	CHECK_FALSE(check_folded_concave(PenaltySpec<double>::scad(1.0), unsorted).passed);
}
