#include "drove/simlab.hpp"

#include "drove/null_space.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <mutex>
#include <thread>

namespace drove::sim {

std::string to_string(CovariateKind k)
{
	switch (k) {
	case CovariateKind::Intercept: return "intercept";
	case CovariateKind::Binary: return "binary";
	case CovariateKind::Categorical: return "categorical";
	case CovariateKind::Continuous: return "continuous";
	}
	return "unknown";
}

CovariateKind covariate_kind_from_string(const std::string &s)
{
	if (s == "intercept") return CovariateKind::Intercept;
	if (s == "binary") return CovariateKind::Binary;
	if (s == "categorical") return CovariateKind::Categorical;
	if (s == "continuous") return CovariateKind::Continuous;
	throw std::invalid_argument("unknown covariate kind '" + s + "'");
}

// Bernoulli(1/2), uniform on {0,1,2}, standard normal.
double covariate_mean(CovariateKind k)
{
	switch (k) {
	case CovariateKind::Intercept: return 1.0;
	case CovariateKind::Binary: return 0.5;
	case CovariateKind::Categorical: return 1.0;
	case CovariateKind::Continuous: return 0.0;
	}
	return 0.0;
}

double covariate_sd(CovariateKind k)
{
	switch (k) {
	case CovariateKind::Intercept: return 0.0;
	case CovariateKind::Binary: return 0.5;
	case CovariateKind::Categorical: return std::sqrt(2.0 / 3.0);
	case CovariateKind::Continuous: return 1.0;
	}
	return 0.0;
}

FixtureStats fixture_stats(const Fixture &fx, double zero_tol)
{
	if (fx.p() != static_cast<Eigen::Index>(fx.d()) * fx.grid.size())
		throw FixtureError("beta_star length " + std::to_string(fx.p()) + " != d * L = " +
				   std::to_string(fx.d() * fx.grid.size()));
	FixtureStats st;
	const auto D = build_penalty_matrix<double>(fx.d(), fx.grid);
	st.p = fx.p();
	st.K = D.K();
	for (Eigen::Index j = 0; j < fx.p(); ++j)
		(std::abs(fx.beta_star(j)) <= zero_tol ? st.zero_coefficients : st.nonzero_coefficients)++;
	st.true_null = classify_null_rows(D, fx.beta_star, zero_tol);
	st.s_n = null_space_basis(D, st.true_null).cols();
	st.rank_null = st.p - st.s_n;
	const Eigen::VectorXd Db = D.rows * fx.beta_star;
	double smallest = std::numeric_limits<double>::infinity();
	for (Eigen::Index k = 0; k < Db.size(); ++k)
		if (std::abs(Db(k)) > zero_tol)
			smallest = std::min(smallest, std::abs(Db(k)));
	st.g_n = std::isfinite(smallest) ? smallest / 2 : 0.0;
	return st;
}

FixtureStats validate_fixture(const Fixture &fx, const FixtureExpectation &e)
{
	if (fx.d() < 1)
		throw FixtureError("fixture has no covariates");
	if (!fx.beta_star.allFinite())
		throw FixtureError("beta_star has non-finite entries");
	const FixtureStats st = fixture_stats(fx);
	auto expect = [](const char *what, auto want, auto got) {
		if (want && *want != got)
			throw FixtureError(std::string("fixture check failed: ") + what + " expected " +
					   std::to_string(*want) + ", got " + std::to_string(got));
	};
	expect("p", e.p, st.p);
	expect("K", e.K, st.K);
	expect("zero coefficients", e.zero_coefficients, st.zero_coefficients);
	expect("rank(D_null)", e.rank_null, st.rank_null);
	expect("s_n", e.s_n, st.s_n);
	if (e.g_n && std::abs(*e.g_n - st.g_n) > 1e-12)
		throw FixtureError("fixture check failed: g_n expected " + std::to_string(*e.g_n) + ", got " +
				   std::to_string(st.g_n));
	return st;
}

FixtureExpectation default_expectation()
{
	FixtureExpectation e;
	e.p = 99;
	e.K = 180;
	e.zero_coefficients = 55;
	e.rank_null = 76;
	e.s_n = 23;
	e.g_n = 0.4;
	return e;
}

namespace {

using CK = CovariateKind;

Fixture base_fixture()
{
	Fixture fx;
	fx.grid = ActionGrid<double>::uniform(11);
	fx.covariates = {CK::Intercept, CK::Binary,	CK::Binary,	CK::Binary,    CK::Categorical,
			 CK::Categorical, CK::Continuous, CK::Continuous, CK::Continuous};
	fx.beta_star = Eigen::VectorXd::Zero(9 * 11);
	return fx;
}

Fixture build_default_fixture()
{
	Fixture fx = base_fixture();
	const int d = 9;
	fx.beta_star.head(d) << 1.0, 1.5, -1.0, 0.0, 2.0, 0.0, 1.2, -0.8, 1.0;
	auto set = [&](int j, int k_lo, int k_hi, double v) {
		for (int k = k_lo; k <= k_hi; ++k)
			fx.beta_star(block_offset(k, d) + j) = v;
	};
	set(0, 2, 6, 0.8);
	set(0, 10, 11, -1.0);
	set(1, 2, 4, 2.0);
	set(1, 5, 6, 1.0);
	set(2, 6, 8, -2.0);
	set(3, 10, 11, 1.5);
	set(4, 2, 3, 1.5);
	set(4, 6, 7, -1.5);
	set(5, 11, 11, 2.0);
	set(6, 4, 6, 3.0);
	set(6, 7, 8, 4.0);
	set(6, 9, 11, 2.0);
	set(7, 2, 2, -2.5);
	set(7, 9, 11, 2.5);
	set(8, 5, 6, -3.0);
	set(8, 7, 7, -1.5);
	validate_fixture(fx, default_expectation());
	return fx;
}

} // namespace

const Fixture &default_fixture()
{
	static const Fixture fx = build_default_fixture();
	return fx;
}

Fixture degenerate_fixture()
{
	Fixture fx = base_fixture();
	fx.name = "degenerate";
	fx.beta_star.head(9) = default_fixture().beta_star.head(9);
	return fx;
}

SimRule SimRule::fixed(double a)
{
	SimRule r;
	char buf[48];
	std::snprintf(buf, sizeof buf, "fixed(%g)", a);
	r.name = buf;
	r.fixed_action = a;
	return r;
}

std::vector<double> SimConfig::default_lambda_grid()
{
	return log_grid(1e-4, 1.0, 20);
}

void SimConfig::validate() const
{
	if (n < 2 || N < 1)
		throw std::invalid_argument("simulation needs n >= 2 and N >= 1");
	if (!(noise_sd >= 0))
		throw std::invalid_argument("noise_sd must be >= 0");
	if (replications < 1)
		throw std::invalid_argument("replications must be >= 1");
	if (lambda_grid.empty() && !fixed_lambda)
		throw std::invalid_argument("lambda_grid is empty");
	for (double l : lambda_grid)
		if (!(l > 0))
			throw std::invalid_argument("lambda_grid entries must be > 0");
	if (fixed_lambda && !(*fixed_lambda > 0))
		throw std::invalid_argument("fixed_lambda must be > 0");
	if (!(split > 0 && split < 1))
		throw std::invalid_argument("split must lie in (0,1)");
	if (!(target_sd > 0))
		throw std::invalid_argument("target_sd must be > 0");
	for (double a : alphas)
		if (!(a > 0 && a < 1))
			throw std::invalid_argument("alphas must lie in (0,1)");
	if (truth_draws < 1)
		throw std::invalid_argument("truth_draws must be >= 1");
	for (const auto &r : rules) {
		if (r.fixed_action && !(*r.fixed_action >= 0 && *r.fixed_action <= 1))
			throw std::invalid_argument("rule '" + r.name + "' action outside [0,1]");
		if (!r.fixed_action && !r.custom)
			throw std::invalid_argument("rule '" + r.name + "' has neither a fixed action nor a map");
	}
	penalty.with_lambda(1.0).validate();
	fixture_stats(fixture);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream)
{
	auto splitmix = [](std::uint64_t z) {
		z += 0x9e3779b97f4a7c15ULL;
		z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
		z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
		return z ^ (z >> 31);
	};
	return splitmix(splitmix(seed) ^ (stream * 0xd1b54a32d192ed03ULL + 1));
}

Eigen::MatrixXd draw_raw_covariates(const Fixture &fx, Eigen::Index rows, std::mt19937_64 &rng)
{
	std::bernoulli_distribution coin(0.5);
	std::uniform_int_distribution<int> cat(0, 2);
	std::normal_distribution<double> gauss(0.0, 1.0);
	Eigen::MatrixXd X(rows, fx.d());
	// Row-major draw order keeps a row's values contiguous in the stream.
	for (Eigen::Index i = 0; i < rows; ++i)
		for (int j = 0; j < fx.d(); ++j) {
			switch (fx.covariates[static_cast<std::size_t>(j)]) {
			case CK::Intercept: X(i, j) = 1.0; break;
			case CK::Binary: X(i, j) = coin(rng) ? 1.0 : 0.0; break;
			case CK::Categorical: X(i, j) = cat(rng); break;
			case CK::Continuous: X(i, j) = gauss(rng); break;
			}
		}
	return X;
}

Standardizer Standardizer::fit(const Eigen::MatrixXd &X, double target_sd)
{
	Standardizer s;
	s.target_sd = target_sd;
	s.recenter = true;
	const Eigen::Index d = X.cols();
	s.center = Eigen::VectorXd::Zero(d);
	s.scale = Eigen::VectorXd::Ones(d);
	s.active.assign(static_cast<std::size_t>(d), false);
	if (X.rows() < 2)
		return s;
	for (Eigen::Index j = 0; j < d; ++j) {
		const double m = X.col(j).mean();
		const double sd = std::sqrt((X.col(j).array() - m).square().sum() / double(X.rows() - 1));
		if (sd > 0) {
			s.center(j) = m;
			s.scale(j) = target_sd / sd;
			s.active[static_cast<std::size_t>(j)] = true;
		}
	}
	return s;
}

Standardizer Standardizer::population(const Fixture &fx, double target_sd)
{
	Standardizer s;
	s.target_sd = target_sd;
	const int d = fx.d();
	s.center = Eigen::VectorXd::Zero(d);
	s.scale = Eigen::VectorXd::Ones(d);
	s.active.assign(static_cast<std::size_t>(d), false);
	for (int j = 0; j < d; ++j) {
		const auto k = fx.covariates[static_cast<std::size_t>(j)];
		if (k == CK::Intercept)
			continue;
		s.center(j) = covariate_mean(k);
		s.scale(j) = target_sd / covariate_sd(k);
		s.active[static_cast<std::size_t>(j)] = true;
	}
	return s;
}

Eigen::MatrixXd Standardizer::apply(const Eigen::MatrixXd &X) const
{
	if (X.cols() != center.size())
		throw std::invalid_argument("standardizer width mismatch");
	Eigen::MatrixXd out = X;
	for (Eigen::Index j = 0; j < X.cols(); ++j) {
		if (!active[static_cast<std::size_t>(j)])
			continue;
		out.col(j) = ((X.col(j).array() - center(j)) * scale(j)).matrix();
		// Sample-fitted centering leaves a rounding residue in the mean; remove it.
		if (recenter && X.rows() > 0)
			out.col(j).array() -= out.col(j).mean();
	}
	return out;
}

SimDataset generate_dataset(const SimConfig &cfg, std::uint64_t rep)
{
	const Fixture &fx = cfg.fixture;
	std::mt19937_64 rng(mix_seed(cfg.seed, rep));
	SimDataset ds;
	const Eigen::MatrixXd raw = draw_raw_covariates(fx, cfg.n, rng);
	ds.est.X = Standardizer::fit(raw, cfg.target_sd).apply(raw);
	std::uniform_int_distribution<int> level(1, fx.grid.size());
	ds.est.A.resize(cfg.n);
	ds.levels.resize(static_cast<std::size_t>(cfg.n));
	for (int i = 0; i < cfg.n; ++i) {
		const int k = level(rng);
		ds.levels[static_cast<std::size_t>(i)] = k;
		ds.est.A(i) = fx.grid.level(k);
	}
	const Eigen::MatrixXd design = build_policy_features_from_levels(ds.est.X, fx.grid, ds.levels);
	std::normal_distribution<double> noise(0.0, 1.0);
	ds.est.Y = design * fx.beta_star;
	for (int i = 0; i < cfg.n; ++i)
		ds.est.Y(i) += cfg.noise_sd * noise(rng);
	const Eigen::MatrixXd raw_test = draw_raw_covariates(fx, cfg.N, rng);
	ds.Xtest = Standardizer::population(fx, cfg.target_sd).apply(raw_test);
	return ds;
}

SelectionCounts selection_counts(const Eigen::VectorXd &beta_hat, const Eigen::VectorXd &beta_star, double threshold)
{
	if (beta_hat.size() != beta_star.size())
		throw std::invalid_argument("selection_counts: length mismatch");
	SelectionCounts c;
	for (Eigen::Index j = 0; j < beta_star.size(); ++j) {
		const bool truly_zero = beta_star(j) == 0.0;
		const bool selected = std::abs(beta_hat(j)) > threshold;
		if (truly_zero) {
			++c.negatives;
			c.false_positives += selected;
		} else {
			++c.positives;
			c.false_negatives += !selected;
		}
	}
	return c;
}

double Summary::mc_se() const
{
	return count > 0 ? sd / std::sqrt(double(count)) : 0.0;
}

Summary Summary::of(const std::vector<double> &v)
{
	Summary s;
	s.count = v.size();
	if (v.empty())
		return s;
	double acc = 0;
	for (double x : v)
		acc += x;
	s.mean = acc / double(v.size());
	if (v.size() > 1) {
		double ss = 0;
		for (double x : v)
			ss += (x - s.mean) * (x - s.mean);
		s.sd = std::sqrt(ss / double(v.size() - 1));
	}
	return s;
}

void parallel_for(int count, int threads, const std::function<void(int)> &fn)
{
	if (threads <= 0)
		threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
	threads = std::min(threads, std::max(count, 1));
	if (threads == 1) {
		for (int i = 0; i < count; ++i)
			fn(i);
		return;
	}
	std::atomic<int> next{0};
	std::exception_ptr first_error;
	std::mutex err_mu;
	std::vector<std::thread> pool;
	for (int t = 0; t < threads; ++t)
		pool.emplace_back([&] {
			for (int i = next++; i < count; i = next++) {
				try {
					fn(i);
				} catch (...) {
					std::lock_guard<std::mutex> lk(err_mu);
					if (!first_error)
						first_error = std::current_exception();
				}
			}
		});
	for (auto &th : pool)
		th.join();
	if (first_error)
		std::rethrow_exception(first_error);
}

namespace {

struct RepFit {
	FittedModel<double> model;
	double lambda = 0;
	bool converged = false;
	bool failed = false;
	bool at_low = false, at_high = false;
};

RepFit fit_one(const SimConfig &cfg, EstimatorKind kind, const RegressionProblem<double> &prob,
	       const PenaltyMatrix<double> &D, const std::vector<int> &true_null, std::uint64_t split_seed)
{
	RepFit out;
	try {
		if (kind == EstimatorKind::ORACLE) {
			out.model = fit(kind, prob, D, cfg.penalty, cfg.fit_settings, std::optional(true_null));
		} else if (cfg.fixed_lambda) {
			out.model = fit(kind, prob, D, cfg.penalty.with_lambda(*cfg.fixed_lambda), cfg.fit_settings);
			out.lambda = *cfg.fixed_lambda;
		} else {
			auto tr = tune_lambda(kind, prob, D, cfg.penalty, cfg.lambda_grid, cfg.split, split_seed,
					      cfg.fit_settings);
			out.model = std::move(tr.model);
			out.lambda = tr.best_lambda;
			if (cfg.lambda_grid.size() > 2) {
				const auto [lo, hi] = std::minmax_element(cfg.lambda_grid.begin(), cfg.lambda_grid.end());
				out.at_low = out.lambda == *lo;
				out.at_high = out.lambda == *hi;
			}
		}
		out.converged = out.model.converged;
	} catch (const std::exception &) {
		out.failed = true;
	}
	return out;
}

double seconds_since(std::chrono::steady_clock::time_point t0)
{
	return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

Table1Report run_table1(const SimConfig &cfg)
{
	cfg.validate();
	const auto t0 = std::chrono::steady_clock::now();
	Table1Report rep;
	rep.config = cfg;
	rep.stats = fixture_stats(cfg.fixture);
	const auto D = build_penalty_matrix<double>(cfg.fixture.d(), cfg.fixture.grid);
	const std::size_t E = cfg.estimators.size();
	const auto R = static_cast<std::size_t>(cfg.replications);
	std::vector<std::vector<RepFit>> fits(R);

	parallel_for(cfg.replications, cfg.threads, [&](int r) {
		const SimDataset ds = generate_dataset(cfg, static_cast<std::uint64_t>(r));
		RegressionProblem<double> prob(build_design(ds.est, cfg.fixture.grid), ds.est.Y);
		std::vector<RepFit> row;
		for (EstimatorKind k : cfg.estimators) {
			RepFit f = fit_one(cfg, k, prob, D, rep.stats.true_null, mix_seed(cfg.seed ^ 0x5a5a5a5aULL, r));
			// Keep only what the report needs.
			f.model.residuals.resize(0);
			f.model.theta_sandwich.resize(0, 0);
			f.model.null_basis.resize(0, 0);
			row.push_back(std::move(f));
		}
		fits[static_cast<std::size_t>(r)] = std::move(row);
	});

	for (std::size_t e = 0; e < E; ++e) {
		EstimatorRuns runs;
		runs.kind = cfg.estimators[e];
		MetricsRow mr;
		mr.kind = runs.kind;
		for (std::size_t r = 0; r < R; ++r) {
			const RepFit &f = fits[r][e];
			runs.failed.push_back(f.failed);
			runs.converged.push_back(f.converged);
			if (f.failed) {
				++mr.failures;
				continue;
			}
			mr.nonconverged += !f.converged;
			runs.boundary_low += f.at_low;
			runs.boundary_high += f.at_high;
			const Eigen::VectorXd diff = f.model.beta - cfg.fixture.beta_star;
			runs.l2.push_back(diff.norm());
			runs.l1.push_back(diff.lpNorm<1>());
			const auto sc = selection_counts(f.model.beta, cfg.fixture.beta_star);
			runs.fp_rate.push_back(sc.negatives ? double(sc.false_positives) / sc.negatives : 0.0);
			runs.fn_rate.push_back(sc.positives ? double(sc.false_negatives) / sc.positives : 0.0);
			runs.lambda.push_back(f.lambda);
			runs.penalized_l2.push_back((f.model.raw_beta - cfg.fixture.beta_star).norm());
		}
		mr.l2 = Summary::of(runs.l2);
		mr.l1 = Summary::of(runs.l1);
		mr.fp_rate = Summary::of(runs.fp_rate);
		mr.fn_rate = Summary::of(runs.fn_rate);
		mr.lambda = Summary::of(runs.lambda);
		mr.penalized_l2 = Summary::of(runs.penalized_l2);
		mr.boundary_low = runs.boundary_low;
		mr.boundary_high = runs.boundary_high;
		rep.rows.push_back(mr);
		rep.runs.push_back(std::move(runs));
	}
	rep.elapsed_seconds = seconds_since(t0);
	return rep;
}

Truth compute_truth(const Fixture &fx, const std::vector<SimRule> &rules, long draws, std::uint64_t seed,
		    double target_sd)
{
	if (draws < 1)
		throw std::invalid_argument("compute_truth needs draws >= 1");
	Truth t;
	t.draws = draws;
	t.seed = seed;
	const Standardizer pop = Standardizer::population(fx, target_sd);
	std::mt19937_64 rng(mix_seed(seed, 0xc0ffee));
	const long chunk = 100000;
	long double acc_opt = 0;
	std::vector<long double> acc_rule(rules.size(), 0), acc_diff(rules.size(), 0);
	for (long done = 0; done < draws; done += chunk) {
		const long m = std::min(chunk, draws - done);
		const Eigen::MatrixXd X = pop.apply(draw_raw_covariates(fx, m, rng));
		const Eigen::VectorXd qstar = optimal_q(fx.beta_star, X, fx.grid);
		acc_opt += qstar.sum();
		for (std::size_t r = 0; r < rules.size(); ++r) {
			const auto pa = policy_from_rule<double>(X, fx.grid, [&](const Eigen::RowVectorXd &x) { return rules[r](x); });
			const Eigen::VectorXd q = build_policy_features_from_levels(X, fx.grid, pa.level_indices) * fx.beta_star;
			acc_rule[r] += q.sum();
			acc_diff[r] += (qstar - q).sum();
		}
	}
	t.optimal_value = static_cast<double>(acc_opt / draws);
	for (std::size_t r = 0; r < rules.size(); ++r) {
		t.rule_values.push_back(static_cast<double>(acc_rule[r] / draws));
		t.differences.push_back(static_cast<double>(acc_diff[r] / draws));
	}
	return t;
}

double CoverageTarget::coverage(std::size_t alpha_index) const
{
	const auto &h = hits.at(alpha_index);
	if (h.empty())
		return 0.0;
	std::size_t c = 0;
	for (char x : h)
		c += x != 0;
	return double(c) / double(h.size());
}

CoverageReport run_coverage(const SimConfig &cfg, bool include_optimal)
{
	cfg.validate();
	const auto t0 = std::chrono::steady_clock::now();
	CoverageReport rep;
	rep.config = cfg;
	rep.truth = compute_truth(cfg.fixture, cfg.rules, cfg.truth_draws, cfg.truth_seed, cfg.target_sd);
	const FixtureStats stats = fixture_stats(cfg.fixture);
	const auto D = build_penalty_matrix<double>(cfg.fixture.d(), cfg.fixture.grid);
	const std::size_t A = cfg.alphas.size();
	const auto R = static_cast<std::size_t>(cfg.replications);

	struct RepOut {
		bool failed = true;
		bool converged = false;
		double lambda = 0;
		// One ValueEstimate per (target, alpha).
		std::vector<std::vector<ValueEstimate<double>>> est;
	};
	std::vector<RepOut> outs(R);
	parallel_for(cfg.replications, cfg.threads, [&](int r) {
		const SimDataset ds = generate_dataset(cfg, static_cast<std::uint64_t>(r));
		RegressionProblem<double> prob(build_design(ds.est, cfg.fixture.grid), ds.est.Y);
		RepFit f = fit_one(cfg, cfg.inference_estimator, prob, D, stats.true_null,
				   mix_seed(cfg.seed ^ 0x5a5a5a5aULL, r));
		RepOut o;
		if (f.failed) {
			outs[static_cast<std::size_t>(r)] = std::move(o);
			return;
		}
		try {
			if (include_optimal) {
				std::vector<ValueEstimate<double>> per_alpha;
				for (double a : cfg.alphas)
					per_alpha.push_back(estimate_optimal_value(f.model, ds.Xtest, cfg.fixture.grid, a));
				o.est.push_back(std::move(per_alpha));
			}
			for (const auto &rule : cfg.rules) {
				const auto pa = policy_from_rule<double>(ds.Xtest, cfg.fixture.grid,
									 [&](const Eigen::RowVectorXd &x) { return rule(x); });
				std::vector<ValueEstimate<double>> per_alpha;
				for (double a : cfg.alphas)
					per_alpha.push_back(value_difference(f.model, ds.Xtest, cfg.fixture.grid, pa, a));
				o.est.push_back(std::move(per_alpha));
			}
			o.failed = false;
			o.converged = f.converged;
			o.lambda = f.lambda;
		} catch (const std::exception &) {
			o.failed = true;
		}
		outs[static_cast<std::size_t>(r)] = std::move(o);
	});

	if (include_optimal) {
		CoverageTarget t;
		t.name = "optimal-value";
		t.truth = rep.truth.optimal_value;
		rep.targets.push_back(std::move(t));
	}
	for (std::size_t i = 0; i < cfg.rules.size(); ++i) {
		CoverageTarget t;
		t.name = "difference:" + cfg.rules[i].name;
		t.truth = rep.truth.differences[i];
		rep.targets.push_back(std::move(t));
	}
	for (auto &t : rep.targets)
		t.hits.assign(A, {});
	for (const RepOut &o : outs) {
		if (o.failed) {
			++rep.failures;
			continue;
		}
		rep.nonconverged += !o.converged;
		rep.lambdas.push_back(o.lambda);
		for (std::size_t t = 0; t < rep.targets.size(); ++t) {
			CoverageTarget &tg = rep.targets[t];
			tg.points.push_back(o.est[t][0].point);
			tg.ses.push_back(o.est[t][0].se);
			for (std::size_t a = 0; a < A; ++a)
				tg.hits[a].push_back(o.est[t][a].ci_lo <= tg.truth && tg.truth <= o.est[t][a].ci_hi);
		}
	}
	rep.elapsed_seconds = seconds_since(t0);
	return rep;
}

CoverageReport run_table2(const SimConfig &cfg)
{
	SimConfig c = cfg;
	c.rules.clear();
	return run_coverage(c, true);
}

CoverageReport run_table3(const SimConfig &cfg)
{
	if (cfg.rules.empty())
		throw std::invalid_argument("run_table3 needs at least one rule");
	return run_coverage(cfg, false);
}

} // namespace drove::sim
