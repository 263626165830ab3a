// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include "drove/cli.hpp"
#include "drove/io.hpp"
#include "drove/simlab.hpp"

#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <unistd.h>

using namespace drove;
using Eigen::MatrixXd;
using Eigen::VectorXd;
namespace fs = std::filesystem;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0)
{
	return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int failures = 0;

void verdict(int id, bool ok, const std::string &detail)
{
	std::cout << "criterion " << id << ": " << (ok ? "PASS" : "FAIL") << "  " << detail << std::endl;
	failures += !ok;
}

std::string num(double v, int prec = 4)
{
	std::ostringstream s;
	s.precision(prec);
	s << v;
	return s.str();
}

void criterion1()
{
	std::mt19937_64 rng(20240601);
	double solver_secs = 0, worst_rel = 0, worst_kkt = 0;
	int bad = 0;
	for (int t = 0; t < 50; ++t) {
		const auto in = testing::random_instance(rng);
		const WeightedPenaltyOperator<double> op(PenaltyMatrix<double>::from_dense(in.D), in.w);
		const auto t0 = std::chrono::steady_clock::now();
		const auto r = solve_weighted_genlasso<double>(in.y, in.X, op, in.lambda);
		solver_secs += seconds_since(t0);
		const auto o = testing::dual_projected_gradient(in.X, in.y, in.D, in.w, in.lambda);
		const double rel = std::abs(r.diagnostics.objective - o.objective) / std::abs(o.objective);
		worst_rel = std::max(worst_rel, rel);
		worst_kkt = std::max(worst_kkt, r.diagnostics.kkt_residual);
		bad += !(rel <= 1e-6 && r.diagnostics.kkt_residual <= 1e-8 && r.diagnostics.converged);
	}
	verdict(1, bad == 0 && solver_secs < 5,
		"50 instances, worst rel objective gap " + num(worst_rel) + ", worst KKT " + num(worst_kkt) + ", solver time " +
			num(solver_secs) + " s");
}

void criterion2()
{
	// Strong signal: small noise and lambda well below g_n.
	sim::SimConfig cfg;
	cfg.n = 2000;
	cfg.N = 10;
	cfg.noise_sd = 0.05;
	cfg.seed = 4242;
	const double lambda = 0.01;
	const auto &fx = cfg.fixture;
	const auto stats = sim::fixture_stats(fx);
	const auto D = build_penalty_matrix<double>(fx.d(), fx.grid);
	const auto spec = PenaltySpec<double>::scad(lambda);
	int reached = 0, agree = 0, agree_exact = 0;
	double worst = 0;
	const int R = 200;
	for (int r = 0; r < R; ++r) {
		const auto ds = sim::generate_dataset(cfg, static_cast<std::uint64_t>(r));
		const RegressionProblem<double> prob(build_design(ds.est, fx.grid), ds.est.Y);
		const auto m = fit_glla(prob, D, spec);
		bool hit = false;
		for (std::size_t k = 0; k < m.partition_history.size() && k <= 2; ++k)
			hit = hit || m.partition_history[k] == stats.true_null;
		reached += hit;
		if (m.null_rows == stats.true_null) {
			++agree;
			const auto oracle = refit_on_null_set(prob, D, stats.true_null);
			const double diff = (m.beta - oracle.beta).lpNorm<Eigen::Infinity>();
			worst = std::max(worst, diff);
			agree_exact += diff <= 1e-8;
		}
	}
	const double rate = double(reached) / R;
	verdict(2, rate >= 0.95 && agree_exact == agree,
		"g_n/lambda = " + num(stats.g_n / lambda) + ", oracle partition within 2 updates in " + std::to_string(reached) +
			"/" + std::to_string(R) + ", final partitions agree " + std::to_string(agree) + ", max |beta - oracle LS| " +
			num(worst));
}

struct Gap {
	double mean = 0, se = 0;
	bool ok() const { return mean > 0 && mean >= 2 * se; }
};

// Paired gap b - a over replications where neither fit failed.
Gap paired_gap(const sim::EstimatorRuns &a, const sim::EstimatorRuns &b, std::vector<double> sim::EstimatorRuns::*field)
{
	std::vector<double> d;
	for (std::size_t r = 0; r < (a.*field).size(); ++r)
		if (!a.failed[r] && !b.failed[r])
			d.push_back((b.*field)[r] - (a.*field)[r]);
	const auto s = sim::Summary::of(d);
	return {s.mean, s.mc_se()};
}

void criterion3()
{
	sim::SimConfig cfg;
	cfg.n = 2000;
	cfg.replications = 100;
	const auto t0 = std::chrono::steady_clock::now();
	const auto rep = sim::run_table1(cfg);
	const double secs = seconds_since(t0);
	const auto &runs = rep.runs; // ORACLE, DROVE, STD_SCAD, STD_LASSO
	std::ostringstream msg;
	for (const auto &row : rep.rows)
		msg << to_string(row.kind) << " l2 " << num(row.l2.mean) << " (pen " << num(row.penalized_l2.mean)
		    << ") fp/n " << num(row.fp_rate.mean) << " fn/p " << num(row.fn_rate.mean) << "; ";
	bool ok = true;
	const char *names[] = {"ORACLE", "DROVE", "STD_SCAD", "STD_LASSO"};
	for (std::size_t e = 0; e + 1 < runs.size(); ++e) {
		const Gap g = paired_gap(runs[e], runs[e + 1], &sim::EstimatorRuns::l2);
		msg << "l2 " << names[e] << "<" << names[e + 1] << " gap " << num(g.mean) << " (" << num(g.mean / g.se, 3)
		    << " SE)" << (g.ok() ? "" : " MISSED") << "; ";
		ok = ok && g.ok();
	}
	for (std::size_t e = 1; e + 1 < runs.size(); ++e) {
		const Gap g = paired_gap(runs[e], runs[e + 1], &sim::EstimatorRuns::fp_rate);
		msg << "fp/n " << names[e] << "<" << names[e + 1] << " gap " << num(g.mean) << " (" << num(g.mean / g.se, 3)
		    << " SE)" << (g.ok() ? "" : " MISSED") << "; ";
		ok = ok && g.ok();
	}
	msg << "elapsed " << num(secs) << " s";
	verdict(3, ok, msg.str());
}

void criteria4and5()
{
	sim::SimConfig cfg;
	cfg.n = 2000;
	cfg.N = 5000;
	cfg.replications = 200;
	cfg.rules = {sim::SimRule::fixed(0.0), sim::SimRule::fixed(1.0)};
	const std::size_t a95 = 1;
	const auto t0 = std::chrono::steady_clock::now();
	const auto r2000 = sim::run_coverage(cfg, true);
	sim::SimConfig c3 = cfg;
	c3.n = 3000;
	c3.rules.clear();
	const auto r3000 = sim::run_table2(c3);
	const double secs = seconds_since(t0);

	const auto &opt = r2000.targets[0];
	const double cov = opt.coverage(a95);
	const double se2 = opt.se_summary().mean, se3 = r3000.targets[0].se_summary().mean;
	verdict(4, cov >= 0.87 && cov <= 0.97 && se3 < se2,
		"95% coverage " + num(cov) + " at n=2000 (" + num(r3000.targets[0].coverage(a95)) + " at n=3000), mean se " +
			num(se2) + " -> " + num(se3) + ", truth " + num(opt.truth) + ", failures " +
			std::to_string(r2000.failures + r3000.failures) + ", elapsed " + num(secs) + " s");

	// Truth stability: another seed and twice the draws.
	const auto alt_seed = sim::compute_truth(cfg.fixture, cfg.rules, cfg.truth_draws, cfg.truth_seed + 1);
	const auto doubled = sim::compute_truth(cfg.fixture, cfg.rules, 2 * cfg.truth_draws, cfg.truth_seed);
	double drift = std::max(std::abs(alt_seed.optimal_value - r2000.truth.optimal_value),
				std::abs(doubled.optimal_value - r2000.truth.optimal_value));
	for (std::size_t k = 0; k < cfg.rules.size(); ++k)
		drift = std::max({drift, std::abs(alt_seed.differences[k] - r2000.truth.differences[k]),
				  std::abs(doubled.differences[k] - r2000.truth.differences[k])});
	bool ok = cfg.truth_draws >= 1'000'000 && drift < 0.002;
	std::string msg;
	for (std::size_t k = 1; k < r2000.targets.size(); ++k) {
		const auto &t = r2000.targets[k];
		const double c = t.coverage(a95);
		ok = ok && c >= 0.87 && c <= 0.97;
		msg += t.name + " coverage " + num(c) + " (truth " + num(t.truth) + "); ";
	}
	msg += "truth draws " + std::to_string(cfg.truth_draws) + ", max drift " + num(drift);
	verdict(5, ok, msg);
}

void criterion6()
{
	try {
		const auto st = sim::validate_fixture(sim::default_fixture(), sim::default_expectation());
		const bool ok = st.p == 99 && st.zero_coefficients == 55 && st.rank_null == 76 && st.s_n == 23 &&
				st.g_n == 0.4 && st.K == 180;
		verdict(6, ok,
			"p=" + std::to_string(st.p) + " zeros=" + std::to_string(st.zero_coefficients) + " rank(D_null)=" +
				std::to_string(st.rank_null) + " s_n=" + std::to_string(st.s_n) + " g_n=" + num(st.g_n) +
				" K=" + std::to_string(st.K));
	} catch (const std::exception &e) {
		verdict(6, false, e.what());
	}
}

bool penalty_fd()
{
	std::mt19937_64 rng(3);
	std::uniform_real_distribution<double> U(0, 1);
	for (int rep = 0; rep < 2000; ++rep) {
		const double lam = 0.01 + 2 * U(rng), a = 2.2 + 3 * U(rng);
		for (const auto &s : {PenaltySpec<double>::scad(lam, a), PenaltySpec<double>::mcp(lam, a)}) {
			const double t = 1e-3 + (a + 1) * lam * U(rng), h = 1e-6 * lam;
			if (std::abs(t - lam) < 10 * h || std::abs(t - a * lam) < 10 * h)
				continue;
			const double fd = (penalty_value(s, t + h) - penalty_value(s, t - h)) / (2 * h) / lam;
			if (std::abs(fd - rho_prime(s, t)) > 1e-6)
				return false;
		}
	}
	return true;
}

bool design_brute_force()
{
	std::mt19937_64 rng(9);
	std::uniform_real_distribution<double> U(0, 1);
	std::normal_distribution<double> N;
	for (int c = 0; c < 1000; ++c) {
		const int L = 2 + static_cast<int>(rng() % 6), d = 1 + static_cast<int>(rng() % 4),
			  n = 1 + static_cast<int>(rng() % 8);
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
			A(i) = rng() % 3 == 0 ? lv[rng() % lv.size()] : U(rng);
		}
		const MatrixXd got = build_design(X, A, g);
		for (int i = 0; i < n; ++i) {
			int bin = 0;
			for (int k = 1; k <= L; ++k)
				if (A(i) >= lv[k - 1] && A(i) < (k < L ? lv[k] : 2.0))
					bin = k;
			for (int col = 0; col < d * L; ++col) {
				const int block = col < d ? 0 : col / d + 1;
				if (got(i, col) != ((block == 0 || block == bin) ? X(i, col % d) : 0.0))
					return false;
			}
		}
	}
	return true;
}

bool refit_null_and_argmax()
{
	sim::SimConfig cfg;
	cfg.n = 2000;
	cfg.N = 1000;
	cfg.seed = 31;
	const auto &fx = cfg.fixture;
	const auto D = build_penalty_matrix<double>(fx.d(), fx.grid);
	for (int r = 0; r < 10; ++r) {
		const auto ds = sim::generate_dataset(cfg, static_cast<std::uint64_t>(r));
		const RegressionProblem<double> prob(build_design(ds.est, fx.grid), ds.est.Y);
		const auto m = fit_glla(prob, D, PenaltySpec<double>::scad(0.005));
		for (int k : m.null_rows)
			if (D.row(k).dot(m.beta) != 0.0)
				return false;
		const auto pa = optimal_policy(m, ds.Xtest, fx.grid);
		for (double c : {1e-3, 7.0, 1e5}) {
			FittedModel<double> scaled = m;
			scaled.beta *= c;
			if (optimal_policy(scaled, ds.Xtest, fx.grid).level_indices != pa.level_indices)
				return false;
		}
	}
	return true;
}

int cli(std::vector<std::string> args)
{
	std::ostringstream out, err;
	return run_cli(args, out, err);
}

// Every output of a full CLI session, run twice in separate directories.
bool cli_determinism(std::string &detail)
{
	const fs::path root = fs::temp_directory_path() / ("drove_acceptance_" + std::to_string(::getpid()));
	fs::remove_all(root);
	std::vector<std::string> files;
	for (const char *tag : {"a", "b"}) {
		const std::string dir = (root / tag).string();
		fs::create_directories(dir);
		io::write_text(dir + "/cfg.json", R"({"n": 800, "N": 600, "seed": 12, "replications": 2,
  "lambda_grid": {"lo": 0.001, "hi": 1, "count": 5}, "truth_draws": 100000, "rules": [0, 1]})");
		const std::vector<std::vector<std::string>> steps = {
			{"simulate", "--config", dir + "/cfg.json", "--out", dir + "/data", "--export-dataset", "3"},
			{"fit", "--train", dir + "/data/train.csv", "--out", dir + "/fit", "--levels", "11"},
			{"policy", "--model", dir + "/fit/model.json", "--test", dir + "/data/test.csv", "--out", dir + "/use"},
			{"value", "--model", dir + "/fit/model.json", "--test", dir + "/data/test.csv", "--out", dir + "/use",
			 "--alpha", "0.1", "--alpha", "0.05"},
			{"compare", "--model", dir + "/fit/model.json", "--test", dir + "/data/test.csv", "--out", dir + "/use"},
			{"simulate", "--config", dir + "/cfg.json", "--out", dir + "/sim", "--threads", "2"}};
		for (const auto &s : steps)
			if (cli(s) != EXIT_OK) {
				detail = "CLI step '" + s[0] + "' failed";
				fs::remove_all(root);
				return false;
			}
	}
	int compared = 0;
	bool same = true;
	for (const auto &e : fs::recursive_directory_iterator(root / "a")) {
		if (!e.is_regular_file())
			continue;
		const fs::path rel = fs::relative(e.path(), root / "a");
		std::string a = io::read_text(e.path().string()), b = io::read_text((root / "b" / rel).string());
		// Input paths echoed into run_config differ by the directory name only.
		const std::string da = (root / "a").string(), db = (root / "b").string();
		for (std::size_t pos; (pos = b.find(db)) != std::string::npos;)
			b.replace(pos, db.size(), da);
		same = same && a == b;
		++compared;
	}
	fs::remove_all(root);
	detail = std::to_string(compared) + " output files byte-identical";
	return same && compared >= 12;
}

void criterion7()
{
	std::string cli_detail;
	const bool fd = penalty_fd(), design = design_brute_force(), refit = refit_null_and_argmax(),
		   det = cli_determinism(cli_detail);
	verdict(7, fd && design && refit && det,
		std::string("penalty finite differences ") + (fd ? "ok" : "FAILED") + ", design brute force " +
			(design ? "ok" : "FAILED") + ", D_null beta = 0 and argmax scale invariance " +
			(refit ? "ok" : "FAILED") + ", CLI determinism: " + cli_detail);
}

} // namespace

int main()
{
	const auto t0 = std::chrono::steady_clock::now();
	criterion1();
	criterion2();
	criterion3();
	criteria4and5();
	criterion6();
	criterion7();
	std::cout << "acceptance: " << (7 - failures) << "/7 criteria passed in " << num(seconds_since(t0)) << " s"
		  << std::endl;
	return failures == 0 ? 0 : 1;
}
