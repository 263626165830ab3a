#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace drove {

enum class PenaltyFamily { SCAD, MCP, L1 };

inline std::string to_string(PenaltyFamily f)
{
	switch (f) {
	case PenaltyFamily::SCAD: return "scad";
	case PenaltyFamily::MCP: return "mcp";
	case PenaltyFamily::L1: return "l1";
	}
	return "unknown";
}

inline PenaltyFamily penalty_family_from_string(const std::string &name)
{
	if (name == "scad" || name == "SCAD") return PenaltyFamily::SCAD;
	if (name == "mcp" || name == "MCP") return PenaltyFamily::MCP;
	if (name == "l1" || name == "L1" || name == "lasso") return PenaltyFamily::L1;
	throw std::invalid_argument("unknown penalty family '" + name + "'");
}

/// Folded concave penalty p_lambda(t) together with its scaled form
/// rho(t) = p_lambda(t) / lambda.
///
/// `shape` is the constant `a` of SCAD (> 2) or MCP (> 1); it is ignored for L1.
template <typename Scalar = double>
struct PenaltySpec {
	PenaltyFamily family = PenaltyFamily::SCAD;
	Scalar lambda = Scalar(0);
	Scalar shape = Scalar(3.7);

	static PenaltySpec scad(Scalar lambda, Scalar a = Scalar(3.7)) { return {PenaltyFamily::SCAD, lambda, a}; }
	static PenaltySpec mcp(Scalar lambda, Scalar a = Scalar(3.0)) { return {PenaltyFamily::MCP, lambda, a}; }
	static PenaltySpec l1(Scalar lambda) { return {PenaltyFamily::L1, lambda, Scalar(0)}; }

	static Scalar default_shape(PenaltyFamily f)
	{
		switch (f) {
		case PenaltyFamily::SCAD: return Scalar(3.7);
		case PenaltyFamily::MCP: return Scalar(3.0);
		case PenaltyFamily::L1: return Scalar(0);
		}
		return Scalar(0);
	}

	void validate() const
	{
		if (!(lambda >= Scalar(0)) || !std::isfinite(static_cast<double>(lambda)))
			throw std::domain_error("penalty lambda must be finite and >= 0");
		if (family == PenaltyFamily::SCAD && !(shape > Scalar(2)))
			throw std::domain_error("SCAD shape must exceed 2");
		if (family == PenaltyFamily::MCP && !(shape > Scalar(1)))
			throw std::domain_error("MCP shape must exceed 1");
	}

	PenaltySpec with_lambda(Scalar l) const
	{
		PenaltySpec out = *this;
		out.lambda = l;
		return out;
	}
};

namespace detail {
template <typename Scalar>
void require_nonnegative(Scalar t)
{
	if (!(t >= Scalar(0)))
		throw std::domain_error("penalty argument must be nonnegative");
}
} // namespace detail

template <typename Scalar>
Scalar penalty_value(const PenaltySpec<Scalar> &spec, Scalar t)
{
	detail::require_nonnegative(t);
	const Scalar lam = spec.lambda;
	const Scalar a = spec.shape;
	switch (spec.family) {
	case PenaltyFamily::L1:
		return lam * t;
	case PenaltyFamily::SCAD:
		if (t <= lam)
			return lam * t;
		if (t <= a * lam)
			return (Scalar(2) * a * lam * t - t * t - lam * lam) / (Scalar(2) * (a - Scalar(1)));
		return (a + Scalar(1)) * lam * lam / Scalar(2);
	case PenaltyFamily::MCP:
		if (t <= a * lam)
			return lam * t - t * t / (Scalar(2) * a);
		return a * lam * lam / Scalar(2);
	}
	return Scalar(0);
}

/// rho(t, lambda) = p_lambda(t) / lambda; zero when lambda == 0.
template <typename Scalar>
Scalar rho(const PenaltySpec<Scalar> &spec, Scalar t)
{
	if (spec.lambda == Scalar(0)) {
		detail::require_nonnegative(t);
		return Scalar(0);
	}
	return penalty_value(spec, t) / spec.lambda;
}

/// Derivative of rho in t, used as the reweighting factor in local linear
/// approximation. Kinks take the left limit. lambda == 0 returns 0.
template <typename Scalar>
Scalar rho_prime(const PenaltySpec<Scalar> &spec, Scalar t)
{
	detail::require_nonnegative(t);
	const Scalar lam = spec.lambda;
	if (lam == Scalar(0))
		return Scalar(0);
	const Scalar a = spec.shape;
	switch (spec.family) {
	case PenaltyFamily::L1:
		return Scalar(1);
	case PenaltyFamily::SCAD:
		if (t <= lam)
			return Scalar(1);
		if (t <= a * lam)
			return (a * lam - t) / ((a - Scalar(1)) * lam);
		return Scalar(0);
	case PenaltyFamily::MCP:
		if (t <= a * lam)
			return Scalar(1) - t / (a * lam);
		return Scalar(0);
	}
	return Scalar(0);
}

inline double scaled_value(const PenaltySpec<double> &spec, double t) { return rho(spec, t); }
inline double scaled_derivative(const PenaltySpec<double> &spec, double t) { return rho_prime(spec, t); }

struct ShapeViolation {
	double t = 0;
	std::string what;
};

struct ShapeReport {
	bool passed = true;
	std::vector<ShapeViolation> violations;
};

/// Numerically checks that rho is nondecreasing and concave (rho' nonincreasing)
/// on a sorted grid, and that rho'(0+) > 0. Any penalty type works if
/// `scaled_value(pen, t)` and `scaled_derivative(pen, t)` are found by ADL.
template <typename Penalty>
ShapeReport check_folded_concave(const Penalty &pen, std::span<const double> grid, double slack = 1e-12)
{
	ShapeReport report;
	auto flag = [&](double t, std::string what) {
		report.passed = false;
		report.violations.push_back({t, std::move(what)});
	};
	for (std::size_t i = 0; i < grid.size(); ++i) {
		if (grid[i] < 0)
			flag(grid[i], "negative grid point");
		if (i > 0 && grid[i] < grid[i - 1])
			flag(grid[i], "grid not sorted");
	}
	if (!report.passed)
		return report;
	if (!(scaled_derivative(pen, 1e-12) > 0))
		flag(0.0, "rho'(0+) is not positive");
	for (std::size_t i = 1; i < grid.size(); ++i) {
		const double t0 = grid[i - 1], t1 = grid[i];
		if (scaled_value(pen, t1) < scaled_value(pen, t0) - slack)
			flag(t1, "rho decreasing");
		if (scaled_derivative(pen, t1) > scaled_derivative(pen, t0) + slack)
			flag(t1, "rho' increasing (not concave)");
	}
	return report;
}


} // namespace drove
