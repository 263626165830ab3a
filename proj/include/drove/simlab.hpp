#pragma once

#include "drove/design.hpp"
#include "drove/estimator.hpp"
#include "drove/inference.hpp"
#include "drove/penalty.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace drove::sim {

enum class CovariateKind { Intercept, Binary, Categorical, Continuous };

std::string to_string(CovariateKind k);
CovariateKind covariate_kind_from_string(const std::string &s);

/// Population moments of a raw covariate before standardization.
double covariate_mean(CovariateKind k);
double covariate_sd(CovariateKind k);

/// A structural check of the coefficient fixture failed.
class FixtureError : public std::invalid_argument {
public:
	using std::invalid_argument::invalid_argument;
};

struct Fixture {
	std::string name = "default";
	ActionGrid<double> grid;
	std::vector<CovariateKind> covariates;
	/// Block layout (psi_0, psi_2, ..., psi_L), length d * L.
	Eigen::VectorXd beta_star;

	int d() const { return static_cast<int>(covariates.size()); }
	Eigen::Index p() const { return beta_star.size(); }
};

struct FixtureStats {
	Eigen::Index p = 0;
	Eigen::Index K = 0;
	int zero_coefficients = 0;
	int nonzero_coefficients = 0;
	Eigen::Index rank_null = 0;
	Eigen::Index s_n = 0;
	double g_n = 0;
	std::vector<int> true_null;
};

/// Zero count, rank(D_null), s_n and g_n of a fixture.
FixtureStats fixture_stats(const Fixture &fx, double zero_tol = 0.0);

/// Expected structural statistics; any field left unset is not checked.
struct FixtureExpectation {
	std::optional<Eigen::Index> p, K, rank_null, s_n;
	std::optional<int> zero_coefficients;
	std::optional<double> g_n;
};

/// Throws FixtureError naming the first failing check.
FixtureStats validate_fixture(const Fixture &fx, const FixtureExpectation &expect = {});

/// d = 9 (intercept, 3 binary, 2 categorical, 3 continuous), 11 uniform
/// levels, 55 zero coefficients, rank(D_null) = 76, s_n = 23, g_n = 0.4.
/// Structure is verified on construction.
const Fixture &default_fixture();
FixtureExpectation default_expectation();

/// Same covariates and grid with every interaction block zero.
Fixture degenerate_fixture();

/// Fixed-action decision rule or an arbitrary covariate map.
struct SimRule {
	std::string name;
	std::optional<double> fixed_action;
	DecisionRule<double> custom;

	static SimRule fixed(double a);
	double operator()(const Eigen::RowVectorXd &x) const { return fixed_action ? *fixed_action : custom(x); }
};

struct SimConfig {
	Fixture fixture = default_fixture();
	int n = 2000;
	int N = 5000;
	double noise_sd = 0.5;
	int replications = 100;
	std::uint64_t seed = 20240607;
	std::vector<EstimatorKind> estimators{EstimatorKind::ORACLE, EstimatorKind::DROVE, EstimatorKind::STD_SCAD,
					      EstimatorKind::STD_LASSO};
	/// Estimator used for the coverage experiments.
	EstimatorKind inference_estimator = EstimatorKind::DROVE;
	std::vector<double> lambda_grid = default_lambda_grid();
	/// When set, tuning is skipped and this lambda is used for every fit.
	std::optional<double> fixed_lambda;
	double split = 0.8;
	PenaltySpec<double> penalty = PenaltySpec<double>::scad(0.0);
	double target_sd = 0.1;
	std::vector<double> alphas{0.10, 0.05, 0.01};
	std::vector<SimRule> rules;
	long truth_draws = 2'000'000;
	std::uint64_t truth_seed = 777;
	/// 0 = hardware concurrency.
	int threads = 0;
	FitSettings<double> fit_settings;

	static std::vector<double> default_lambda_grid();
	void validate() const;
};

/// SplitMix64 finalizer; derives independent stream seeds.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// Raw covariate draws (intercept column constant 1).
Eigen::MatrixXd draw_raw_covariates(const Fixture &fx, Eigen::Index rows, std::mt19937_64 &rng);

/// Centers and scales non-constant columns using their sample moments
/// (sd with denominator n - 1). Constant columns are left untouched.
struct Standardizer {
	Eigen::VectorXd center;
	Eigen::VectorXd scale;
	std::vector<bool> active;
	double target_sd = 0.1;
	/// Subtract the post-transform column mean (sample-fitted standardizers).
	bool recenter = false;

	static Standardizer fit(const Eigen::MatrixXd &X, double target_sd = 0.1);
	/// Population moments of the fixture's raw covariates.
	static Standardizer population(const Fixture &fx, double target_sd = 0.1);
	Eigen::MatrixXd apply(const Eigen::MatrixXd &X) const;
};

struct SimDataset {
	ObservationSet<double> est;
	Eigen::MatrixXd Xtest;
	std::vector<int> levels;
};

/// Estimation sample (sample-standardized X, A uniform over grid levels,
/// Y = beta*^T Xcheck + eps) and an independent population-standardized
/// testing sample.
SimDataset generate_dataset(const SimConfig &cfg, std::uint64_t rep);

struct SelectionCounts {
	int false_positives = 0;
	int false_negatives = 0;
	int negatives = 0;
	int positives = 0;
};

/// |beta_hat_j| > threshold counts as selected.
SelectionCounts selection_counts(const Eigen::VectorXd &beta_hat, const Eigen::VectorXd &beta_star,
				 double threshold = 1e-4);

struct Summary {
	double mean = 0;
	double sd = 0;
	std::size_t count = 0;

	double mc_se() const;
	static Summary of(const std::vector<double> &v);
};

struct EstimatorRuns {
	EstimatorKind kind = EstimatorKind::DROVE;
	std::vector<double> l2, l1, fp_rate, fn_rate, lambda;
	/// l2 error of the penalized iterate before the refit.
	std::vector<double> penalized_l2;
	std::vector<char> converged;
	std::vector<char> failed;
	int boundary_low = 0, boundary_high = 0;
};

struct MetricsRow {
	EstimatorKind kind = EstimatorKind::DROVE;
	Summary l2, l1, fp_rate, fn_rate, lambda, penalized_l2;
	int nonconverged = 0;
	int failures = 0;
	int boundary_low = 0, boundary_high = 0;
};

struct Table1Report {
	SimConfig config;
	FixtureStats stats;
	std::vector<EstimatorRuns> runs;
	std::vector<MetricsRow> rows;
	double elapsed_seconds = 0;
};

Table1Report run_table1(const SimConfig &cfg);

struct Truth {
	double optimal_value = 0;
	std::vector<double> rule_values;
	std::vector<double> differences;
	long draws = 0;
	std::uint64_t seed = 0;
};

/// E(Q*) and E(Q(., pi)) for each rule under the testing law, by Monte-Carlo
/// quadrature over `draws` covariate vectors.
Truth compute_truth(const Fixture &fx, const std::vector<SimRule> &rules, long draws, std::uint64_t seed,
		    double target_sd = 0.1);

struct CoverageTarget {
	std::string name;
	double truth = 0;
	std::vector<double> points, ses;
	/// hits[a][r]: CI at alphas[a] covered the truth in replication r.
	std::vector<std::vector<char>> hits;

	double coverage(std::size_t alpha_index) const;
	Summary point_summary() const { return Summary::of(points); }
	Summary se_summary() const { return Summary::of(ses); }
};

struct CoverageReport {
	SimConfig config;
	Truth truth;
	/// Optimal value first (when requested), then one entry per rule.
	std::vector<CoverageTarget> targets;
	std::vector<double> lambdas;
	int failures = 0;
	int nonconverged = 0;
	double elapsed_seconds = 0;
};

/// One pass over replications: fit, optimal-value CI and value-difference
/// CIs for cfg.rules on the same fits.
CoverageReport run_coverage(const SimConfig &cfg, bool include_optimal = true);
CoverageReport run_table2(const SimConfig &cfg);
CoverageReport run_table3(const SimConfig &cfg);

/// Runs fn(rep) for rep in [0, count) on `threads` workers; results are
/// stored by replication index.
void parallel_for(int count, int threads, const std::function<void(int)> &fn);

} // namespace drove::sim
