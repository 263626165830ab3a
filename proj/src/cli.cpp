#include "drove/cli.hpp"

#include "drove/io.hpp"
#include "drove/null_space.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iostream>
#include <set>
#include <sstream>

namespace drove {

namespace {

namespace fs = std::filesystem;
using io::json;

const char *const kCaveats[] = {
	"the interval is asymptotic; its rate conditions on the signal dimension and the growth of the action grid "
	"cannot be checked from data",
	"the conditional-moment and design-eigenvalue conditions behind the interval are assumed, not verified",
	"the estimation and testing samples must be independent",
};

struct Options {
	std::string train, test, model, out, config;
	std::string grid;
	int levels = 0;
	std::string penalty = "scad";
	double shape = 0;
	std::optional<double> lambda;
	std::string lambda_grid;
	std::vector<double> alpha{0.05};
	std::uint64_t seed = 1;
	std::string estimator = "drove";
	double split = 0.8;
	bool standardize = true;
	bool allow_overlap = false;
	int threads = 0;
	int export_rep = -1;
};

std::vector<double> parse_list(const std::string &s, const char *flag)
{
	std::vector<double> out;
	std::stringstream ss(s);
	std::string cell;
	while (std::getline(ss, cell, ',')) {
		char *end = nullptr;
		const double v = std::strtod(cell.c_str(), &end);
		if (cell.empty() || *end != '\0')
			throw InputError(std::string(flag) + ": cannot parse '" + cell + "'");
		out.push_back(v);
	}
	if (out.empty())
		throw InputError(std::string(flag) + ": empty list");
	return out;
}

ActionGrid<double> resolve_grid(const Options &o)
{
	try {
		if (!o.grid.empty())
			return ActionGrid<double>(parse_list(o.grid, "--grid"));
		if (o.levels > 0)
			return ActionGrid<double>::uniform(o.levels);
	} catch (const std::invalid_argument &e) {
		throw InputError(e.what());
	}
	throw InputError("one of --grid or --levels is required");
}

void ensure_dir(const std::string &dir)
{
	std::error_code ec;
	fs::create_directories(dir, ec);
	if (ec)
		throw InputError("cannot create output directory '" + dir + "': " + ec.message());
}

std::string join(const std::string &dir, const std::string &file)
{
	return (fs::path(dir) / file).string();
}

void check_overlap(const io::ModelBundle &b, const io::DataFile &test, bool allow)
{
	if (allow)
		return;
	const std::set<std::string> train(b.train_ids.begin(), b.train_ids.end());
	std::size_t hits = 0;
	std::string first;
	for (const auto &id : test.ids)
		if (train.count(id) && hits++ == 0)
			first = id;
	if (hits)
		throw InputError("test file shares " + std::to_string(hits) + " id(s) with the training sample (first: '" +
				 first + "'); pass --allow-overlap to proceed");
}

struct LoadedTest {
	io::ModelBundle bundle;
	io::DataFile data;
	Eigen::MatrixXd X;
};

LoadedTest load_model_and_test(const Options &o)
{
	LoadedTest lt;
	json j;
	try {
		j = json::parse(io::read_text(o.model));
	} catch (const json::exception &e) {
		throw InputError("model file: " + std::string(e.what()));
	}
	lt.bundle = io::model_from_json(j);
	lt.data = io::read_data_csv(o.test, false, false);
	const auto d = static_cast<Eigen::Index>(lt.bundle.covariate_names.size());
	if (lt.data.X.cols() != d)
		throw InputError(o.test + ": has " + std::to_string(lt.data.X.cols()) + " covariates, model expects " +
				 std::to_string(d));
	check_overlap(lt.bundle, lt.data, o.allow_overlap);
	lt.X = lt.bundle.standardizer ? lt.bundle.standardizer->apply(lt.data.X) : lt.data.X;
	return lt;
}

/// Runs of adjacent levels whose fuse rows are null, per covariate.
std::string fused_groups(const FittedModel<double> &m, const ActionGrid<double> &grid, Eigen::Index d,
			 const PenaltyMatrix<double> &D)
{
	const int L = grid.size();
	std::vector<char> is_null(static_cast<std::size_t>(D.K()), 0);
	for (int k : m.null_rows)
		is_null[static_cast<std::size_t>(k)] = 1;
	const Eigen::Index p = D.p();
	std::ostringstream out;
	int groups = 0;
	for (Eigen::Index j = 0; j < d; ++j) {
		int start = 2;
		for (int k = 2; k <= L; ++k) {
			// Fuse row between levels k and k+1 for covariate j.
			const bool fused_next = k < L && is_null[static_cast<std::size_t>(p + (k - 2) * d + j)];
			if (fused_next)
				continue;
			const double v = m.beta(block_offset(k, d) + j);
			if (k > start && v != 0.0) {
				char buf[128];
				std::snprintf(buf, sizeof buf, "  x%lld: levels %d-%d share effect %.6g\n",
					      static_cast<long long>(j + 1), start, k, v);
				out << buf;
				++groups;
			}
			start = k + 1;
		}
	}
	if (!groups)
		return "  (none)\n";
	return out.str();
}

std::string fit_summary(const io::ModelBundle &b, const PenaltyMatrix<double> &D, std::size_t grid_points)
{
	const auto &m = b.model;
	const auto d = static_cast<Eigen::Index>(b.covariate_names.size());
	std::ostringstream s;
	s << "estimator: " << to_string(m.kind) << "\n";
	s << "penalty: " << to_string(m.penalty.family);
	if (m.penalty.family != PenaltyFamily::L1)
		s << " (shape " << io::fmt(m.penalty.shape) << ")";
	s << "\n";
	s << "lambda: " << io::fmt(m.lambda_used);
	if (grid_points > 1)
		s << " (selected by validation MSE over " << grid_points << " grid values)";
	s << "\n";
	s << "converged: " << (m.converged ? "yes" : "NO") << " (reweighting iterations " << m.glla_iterations
	  << ", solver iterations " << m.solver_iterations << ")\n";
	s << "n: " << m.n << ", p: " << m.p() << ", K: " << D.K() << "\n";
	s << "s_hat: " << m.s_hat() << "\n";
	s << "null rows: " << m.null_rows.size() << " of " << D.K() << "\n";
	int zeros = 0;
	for (Eigen::Index i = 0; i < m.beta.size(); ++i)
		zeros += m.beta(i) == 0.0;
	s << "zero coefficients: " << zeros << "\n";
	const auto sig = check_minimal_signal(m, D);
	if (sig.g_hat) {
		s << "minimal signal g_hat: " << io::fmt(*sig.g_hat);
		if (sig.ratio)
			s << " (g_hat / lambda = " << io::fmt(*sig.ratio) << ")";
		s << "\n";
	} else {
		s << "minimal signal g_hat: undefined (every penalty row is null)\n";
	}
	s << "fused groups:\n" << fused_groups(m, b.grid, d, D);
	return s.str();
}

int cmd_fit(const Options &o, std::ostream &out)
{
	const ActionGrid<double> grid = resolve_grid(o);
	const io::DataFile f = io::read_data_csv(o.train, true, true);
	const EstimatorKind kind = estimator_kind_from_string(o.estimator);
	if (kind == EstimatorKind::ORACLE)
		throw InputError("--estimator oracle needs the true null set and is only available in simulation");
	PenaltySpec<double> spec;
	spec.family = penalty_family_from_string(o.penalty);
	spec.shape = o.shape > 0 ? o.shape : PenaltySpec<double>::default_shape(spec.family);
	if (kind == EstimatorKind::STD_LASSO || kind == EstimatorKind::GENLASSO)
		spec = PenaltySpec<double>::l1(0.0);

	std::vector<double> lambdas;
	if (o.lambda) {
		if (!o.lambda_grid.empty())
			throw InputError("--lambda and --lambda-grid are mutually exclusive");
		lambdas = {*o.lambda};
	} else {
		lambdas = o.lambda_grid.empty() ? sim::SimConfig::default_lambda_grid() : parse_list(o.lambda_grid, "--lambda-grid");
	}
	for (double l : lambdas)
		if (!(l > 0) || !std::isfinite(l))
			throw InputError("lambda values must be finite and > 0");
	spec.with_lambda(lambdas.front()).validate();

	io::ModelBundle b;
	b.grid = grid;
	b.covariate_names = f.covariate_names;
	b.train_ids = f.ids;
	ObservationSet<double> obs{f.X, *f.A, *f.Y};
	if (o.standardize) {
		b.standardizer = sim::Standardizer::fit(f.X, 0.1);
		obs.X = b.standardizer->apply(f.X);
		b.standardizer->recenter = false;
	}
	require_finite_rows(obs.X, "covariates");
	const RegressionProblem<double> prob(build_design(obs, grid), obs.Y);
	const PenaltyMatrix<double> D = build_penalty_matrix(obs.d(), grid);

	FitSettings<double> settings;
	if (lambdas.size() == 1) {
		b.model = fit(kind, prob, D, spec.with_lambda(lambdas.front()), settings);
	} else {
		auto tr = tune_lambda(kind, prob, D, spec, lambdas, o.split, o.seed, settings);
		b.model = std::move(tr.model);
		b.validation = std::move(tr.table);
		b.selected_lambda = tr.best_lambda;
	}

	ensure_dir(o.out);
	json j = io::model_to_json(b);
	j["run_config"] = {{"command", "fit"},
			   {"train", o.train},
			   {"grid", grid.levels()},
			   {"estimator", to_string(kind)},
			   {"penalty", {{"family", to_string(spec.family)}, {"shape", spec.shape}}},
			   {"lambda_grid", lambdas},
			   {"split", o.split},
			   {"seed", o.seed},
			   {"standardize", o.standardize},
			   {"target_sd", 0.1}};
	io::write_text(join(o.out, "model.json"), j.dump(2) + "\n");
	const std::string summary = fit_summary(b, D, lambdas.size());
	io::write_text(join(o.out, "fit_report.txt"), summary);
	out << summary;
	if (!b.model.converged) {
		out << "warning: the fit did not converge; model written and flagged\n";
		return EXIT_NONCONVERGED;
	}
	return EXIT_OK;
}

int cmd_policy(const Options &o, std::ostream &out)
{
	const LoadedTest lt = load_model_and_test(o);
	const auto pa = optimal_policy(lt.bundle.model, lt.X, lt.bundle.grid);
	const Eigen::VectorXd q = optimal_q(lt.bundle.model, lt.X, lt.bundle.grid);
	std::ostringstream csv;
	csv << "id,level,action,q_star\n";
	for (std::size_t i = 0; i < pa.size(); ++i)
		csv << lt.data.ids[i] << ',' << pa.level_indices[i] << ',' << io::fmt(pa.actions[i]) << ','
		    << io::fmt(q(static_cast<Eigen::Index>(i))) << "\n";
	ensure_dir(o.out);
	io::write_text(join(o.out, "policy.csv"), csv.str());
	out << "wrote " << pa.size() << " assignments to " << join(o.out, "policy.csv") << "\n";
	return EXIT_OK;
}

int cmd_value(const Options &o, std::ostream &out)
{
	const LoadedTest lt = load_model_and_test(o);
	json estimates = json::array();
	for (double a : o.alpha) {
		if (!(a > 0 && a < 1))
			throw InputError("--alpha must lie in (0, 1)");
		const auto v = estimate_optimal_value(lt.bundle.model, lt.X, lt.bundle.grid, a);
		estimates.push_back(io::value_to_json(v));
		out << "alpha " << io::fmt(a) << ": value " << io::fmt(v.point) << " [" << io::fmt(v.ci_lo) << ", "
		    << io::fmt(v.ci_hi) << "] se " << io::fmt(v.se) << "\n";
		for (const auto &w : v.warnings)
			out << "warning: " << w << "\n";
	}
	json caveats = json::array();
	for (const char *c : kCaveats) {
		caveats.push_back(c);
		out << "caveat: " << c << "\n";
	}
	json j = {{"target", "optimal-value"},
		  {"estimates", estimates},
		  {"caveats", caveats},
		  {"run_config",
		   {{"command", "value"},
		    {"model", o.model},
		    {"test", o.test},
		    {"alpha", o.alpha},
		    {"allow_overlap", o.allow_overlap}}}};
	ensure_dir(o.out);
	io::write_text(join(o.out, "value.json"), j.dump(2) + "\n");
	return EXIT_OK;
}

int cmd_compare(const Options &o, std::ostream &out)
{
	const LoadedTest lt = load_model_and_test(o);
	if (o.alpha.size() != 1)
		throw InputError("compare takes a single --alpha");
	const double alpha = o.alpha.front();
	if (!(alpha > 0 && alpha < 1))
		throw InputError("--alpha must lie in (0, 1)");
	const auto rows = compare_strategies(lt.bundle.model, lt.X, lt.bundle.grid, lt.data.A, alpha);
	std::ostringstream csv;
	csv << "strategy,source,value,difference,se,ci_lo,ci_hi\n";
	for (const auto &r : rows) {
		csv << r.name << ',' << to_string(r.source) << ',' << io::fmt(r.value);
		if (r.difference)
			csv << ',' << io::fmt(r.difference->point) << ',' << io::fmt(r.difference->se) << ','
			    << io::fmt(r.difference->ci_lo) << ',' << io::fmt(r.difference->ci_hi);
		else
			csv << ",,,,";
		csv << "\n";
	}
	ensure_dir(o.out);
	io::write_text(join(o.out, "strategies.csv"), csv.str());
	out << csv.str();
	for (const char *c : kCaveats)
		out << "caveat: " << c << "\n";
	return EXIT_OK;
}

int cmd_simulate(const Options &o, std::ostream &out, std::ostream &err)
{
	json j;
	try {
		j = json::parse(io::read_text(o.config));
	} catch (const json::exception &e) {
		throw InputError("config: " + std::string(e.what()));
	}
	std::vector<int> tables;
	sim::SimConfig cfg = io::sim_config_from_json(j, &tables);
	if (o.threads > 0)
		cfg.threads = o.threads;
	ensure_dir(o.out);
	const json resolved = io::sim_config_to_json(cfg);

	if (o.export_rep >= 0) {
		const sim::SimDataset ds = sim::generate_dataset(cfg, static_cast<std::uint64_t>(o.export_rep));
		io::write_text(join(o.out, "train.csv"), io::dataset_to_csv(ds.est, "e"));
		io::write_text(join(o.out, "test.csv"), io::covariates_to_csv(ds.Xtest, "t"));
		io::write_text(join(o.out, "config.json"), resolved.dump(2) + "\n");
		out << "exported replication " << o.export_rep << " to " << o.out << "\n";
		return EXIT_OK;
	}

	io::write_text(join(o.out, "config.json"), resolved.dump(2) + "\n");
	const auto t0 = std::chrono::steady_clock::now();
	const auto want = [&](int t) { return std::find(tables.begin(), tables.end(), t) != tables.end(); };
	if (want(1)) {
		const auto r = sim::run_table1(cfg);
		io::write_text(join(o.out, "table1.csv"), io::table1_to_csv(r));
		io::write_text(join(o.out, "table1.json"), io::table1_to_json(r).dump(2) + "\n");
		out << io::table1_to_csv(r);
	}
	if (want(2) || want(3)) {
		sim::SimConfig c = cfg;
		if (!want(3))
			c.rules.clear();
		else if (c.rules.empty())
			throw InputError("config: table 3 needs at least one entry in 'rules'");
		const auto r = sim::run_coverage(c, want(2));
		io::write_text(join(o.out, "coverage.csv"), io::coverage_to_csv(r));
		io::write_text(join(o.out, "coverage.json"), io::coverage_to_json(r).dump(2) + "\n");
		io::write_text(join(o.out, "coverage_long.csv"), io::coverage_long_csv(r));
		out << io::coverage_to_csv(r);
	}
	const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
	err << "simulate finished in " << secs << " s\n";
	return EXIT_OK;
}

} // namespace

int run_cli(const std::vector<std::string> &args, std::ostream &out, std::ostream &err)
{
	CLI::App app{"Discretized-action regression with generalized folded-concave penalties"};
	app.require_subcommand(1);
	Options o;

	auto add_model_test = [&](CLI::App *c) {
		c->add_option("--model", o.model, "model.json written by fit")->required();
		c->add_option("--test", o.test, "testing CSV: id, x1..xd, optional a")->required();
		c->add_option("--out", o.out, "output directory")->required();
		c->add_flag("--allow-overlap", o.allow_overlap, "permit ids shared with the training sample");
	};

	auto *fit = app.add_subcommand("fit", "fit a model on a training CSV");
	fit->add_option("--train", o.train, "training CSV: id, a, y, x1..xd")->required();
	fit->add_option("--out", o.out, "output directory")->required();
	auto *g = fit->add_option("--grid", o.grid, "comma-separated action levels from 0 to 1");
	fit->add_option("--levels", o.levels, "uniform grid with this many levels")->excludes(g);
	fit->add_option("--penalty", o.penalty, "scad | mcp | l1");
	fit->add_option("--shape", o.shape, "shape parameter a (default 3.7 for scad, 3 for mcp)");
	fit->add_option("--lambda", o.lambda, "fixed tuning parameter");
	fit->add_option("--lambda-grid", o.lambda_grid, "comma-separated lambda candidates");
	fit->add_option("--estimator", o.estimator, "drove | genlasso | std-scad | std-lasso");
	fit->add_option("--seed", o.seed, "seed of the train/validation split");
	fit->add_option("--split", o.split, "training fraction used when tuning lambda");
	fit->add_flag("--standardize,!--no-standardize", o.standardize, "scale covariates to sd 0.1 (default on)");

	auto *policy = app.add_subcommand("policy", "estimated optimal action for each test row");
	add_model_test(policy);

	auto *value = app.add_subcommand("value", "optimal policy value with confidence intervals");
	add_model_test(value);
	value->add_option("--alpha", o.alpha, "significance level(s)");

	auto *compare = app.add_subcommand("compare", "value of fixed, observed and optimal strategies");
	add_model_test(compare);
	compare->add_option("--alpha", o.alpha, "significance level");

	auto *simulate = app.add_subcommand("simulate", "Monte-Carlo experiments from a JSON config");
	simulate->add_option("--config", o.config, "simulation config (JSON)")->required();
	simulate->add_option("--out", o.out, "output directory")->required();
	simulate->add_option("--threads", o.threads, "worker threads (0 = all cores)");
	simulate->add_option("--export-dataset", o.export_rep,
			     "write train.csv / test.csv for this replication instead of running");

	std::vector<std::string> rev(args.rbegin(), args.rend());
	try {
		app.parse(rev);
	} catch (const CLI::CallForHelp &) {
		out << app.help();
		return EXIT_OK;
	} catch (const CLI::ParseError &e) {
		err << "error: " << e.what() << "\n";
		return EXIT_INPUT;
	}

	try {
		if (*fit)
			return cmd_fit(o, out);
		if (*policy)
			return cmd_policy(o, out);
		if (*value)
			return cmd_value(o, out);
		if (*compare)
			return cmd_compare(o, out);
		if (*simulate)
			return cmd_simulate(o, out, err);
	} catch (const RefitError &e) {
		err << "error: " << e.what() << "\n";
		return EXIT_NONCONVERGED;
	} catch (const std::invalid_argument &e) {
		// InputError, FixtureError and malformed enum strings.
		err << "error: " << e.what() << "\n";
		return EXIT_INPUT;
	} catch (const std::domain_error &e) {
		err << "error: " << e.what() << "\n";
		return EXIT_INPUT;
	} catch (const std::exception &e) {
		err << "error: " << e.what() << "\n";
		return EXIT_NONCONVERGED;
	}
	return EXIT_INPUT;
}

int run_cli(int argc, char **argv)
{
	std::vector<std::string> args(argv + 1, argv + argc);
	return run_cli(args, std::cout, std::cerr);
}

} // namespace drove
