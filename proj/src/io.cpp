#include "drove/io.hpp"

#include <algorithm>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

namespace drove::io {

namespace {

std::string trim(std::string s)
{
	const auto issp = [](unsigned char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
	while (!s.empty() && issp(static_cast<unsigned char>(s.back())))
		s.pop_back();
	std::size_t i = 0;
	while (i < s.size() && issp(static_cast<unsigned char>(s[i])))
		++i;
	s.erase(0, i);
	if (s.size() >= 2 && s.front() == '"' && s.back() == '"')
		s = s.substr(1, s.size() - 2);
	return s;
}

std::vector<std::string> split_line(const std::string &line)
{
	std::vector<std::string> out;
	std::string cell;
	std::istringstream ss(line);
	while (std::getline(ss, cell, ','))
		out.push_back(trim(cell));
	if (!line.empty() && line.back() == ',')
		out.emplace_back();
	return out;
}

double parse_cell(const std::string &cell, std::size_t row, const std::string &col, const std::string &path)
{
	const auto fail = [&](const std::string &why) {
		return InputError(path + ": row " + std::to_string(row) + ", column '" + col + "': " + why,
				  {static_cast<Eigen::Index>(row)});
	};
	if (cell.empty())
		throw fail("empty value");
	errno = 0;
	char *end = nullptr;
	const double v = std::strtod(cell.c_str(), &end);
	if (end != cell.c_str() + cell.size() || errno == ERANGE)
		throw fail("not a number: '" + cell + "'");
	if (!std::isfinite(v))
		throw fail("non-finite value");
	return v;
}

json vec_json(const Eigen::VectorXd &v)
{
	json a = json::array();
	for (Eigen::Index i = 0; i < v.size(); ++i)
		a.push_back(v(i));
	return a;
}

Eigen::VectorXd json_vec(const json &a)
{
	Eigen::VectorXd v(static_cast<Eigen::Index>(a.size()));
	for (std::size_t i = 0; i < a.size(); ++i)
		v(static_cast<Eigen::Index>(i)) = a[i].get<double>();
	return v;
}

json mat_json(const Eigen::MatrixXd &M)
{
	json rows = json::array();
	for (Eigen::Index i = 0; i < M.rows(); ++i)
		rows.push_back(vec_json(M.row(i).transpose()));
	return rows;
}

Eigen::MatrixXd json_mat(const json &rows, Eigen::Index cols_if_empty)
{
	if (rows.empty())
		return Eigen::MatrixXd(0, cols_if_empty);
	const auto r = static_cast<Eigen::Index>(rows.size());
	const auto c = static_cast<Eigen::Index>(rows[0].size());
	Eigen::MatrixXd M(r, c);
	for (Eigen::Index i = 0; i < r; ++i) {
		if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(i)].size()) != c)
			throw InputError("ragged matrix in model file");
		for (Eigen::Index j = 0; j < c; ++j)
			M(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)].get<double>();
	}
	return M;
}

json summary_json(const sim::Summary &s)
{
	return {{"mean", s.mean}, {"sd", s.sd}, {"mc_se", s.mc_se()}, {"count", s.count}};
}

json penalty_json(const PenaltySpec<double> &p)
{
	return {{"family", to_string(p.family)}, {"lambda", p.lambda}, {"shape", p.shape}};
}

PenaltySpec<double> penalty_from_json(const json &j)
{
	PenaltySpec<double> p;
	p.family = penalty_family_from_string(j.at("family").get<std::string>());
	p.shape = j.contains("shape") ? j["shape"].get<double>() : PenaltySpec<double>::default_shape(p.family);
	p.lambda = j.contains("lambda") ? j["lambda"].get<double>() : 0.0;
	return p;
}

std::string pct_label(double alpha)
{
	char buf[32];
	std::snprintf(buf, sizeof buf, "%g", 100.0 * (1.0 - alpha));
	return buf;
}

void check_keys(const json &j, std::initializer_list<const char *> allowed, const std::string &where)
{
	for (auto it = j.begin(); it != j.end(); ++it) {
		bool ok = false;
		for (const char *k : allowed)
			ok = ok || it.key() == k;
		if (!ok)
			throw InputError(where + ": unknown key '" + it.key() + "'");
	}
}

} // namespace

int CsvTable::column(const std::string &name) const
{
	auto it = std::find(header.begin(), header.end(), name);
	return it == header.end() ? -1 : static_cast<int>(it - header.begin());
}

CsvTable read_csv(const std::string &path)
{
	std::ifstream in(path);
	if (!in)
		throw InputError("cannot open '" + path + "'");
	CsvTable t;
	std::string line;
	bool have_header = false;
	std::size_t lineno = 0;
	while (std::getline(in, line)) {
		++lineno;
		if (trim(line).empty())
			continue;
		auto cells = split_line(line);
		if (!have_header) {
			if (!cells.empty() && cells[0].rfind("\xEF\xBB\xBF", 0) == 0)
				cells[0].erase(0, 3);
			t.header = std::move(cells);
			have_header = true;
			continue;
		}
		if (cells.size() != t.header.size())
			throw InputError(path + ": line " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
						 " fields, header has " + std::to_string(t.header.size()),
					 {static_cast<Eigen::Index>(t.rows.size() + 1)});
		t.rows.push_back(std::move(cells));
	}
	if (!have_header)
		throw InputError(path + ": missing header line");
	return t;
}

DataFile read_data_csv(const std::string &path, bool need_action, bool need_outcome)
{
	const CsvTable t = read_csv(path);
	const auto require = [&](const char *name) {
		const int c = t.column(name);
		if (c < 0)
			throw InputError(path + ": missing required column '" + std::string(name) + "'");
		return c;
	};
	const int cid = require("id");
	const int ca = need_action ? require("a") : t.column("a");
	const int cy = need_outcome ? require("y") : t.column("y");

	static const std::regex xre("x([1-9][0-9]*)");
	std::map<int, int> xcols;
	for (std::size_t c = 0; c < t.header.size(); ++c) {
		std::smatch m;
		if (std::regex_match(t.header[c], m, xre))
			xcols[std::stoi(m[1].str())] = static_cast<int>(c);
	}
	if (xcols.empty())
		throw InputError(path + ": missing required column 'x1'");
	const int d = xcols.rbegin()->first;
	for (int k = 1; k <= d; ++k)
		if (!xcols.count(k))
			throw InputError(path + ": missing required column 'x" + std::to_string(k) + "'");

	DataFile f;
	const auto n = static_cast<Eigen::Index>(t.rows.size());
	if (n == 0)
		throw InputError(path + ": no data rows");
	f.X.resize(n, d);
	if (ca >= 0)
		f.A = Eigen::VectorXd(n);
	if (cy >= 0)
		f.Y = Eigen::VectorXd(n);
	for (int k = 1; k <= d; ++k)
		f.covariate_names.push_back("x" + std::to_string(k));
	for (Eigen::Index i = 0; i < n; ++i) {
		const auto &row = t.rows[static_cast<std::size_t>(i)];
		const std::size_t r1 = static_cast<std::size_t>(i) + 1;
		f.ids.push_back(row[static_cast<std::size_t>(cid)]);
		if (f.ids.back().empty())
			throw InputError(path + ": row " + std::to_string(r1) + ", column 'id': empty value", {i + 1});
		for (int k = 1; k <= d; ++k)
			f.X(i, k - 1) = parse_cell(row[static_cast<std::size_t>(xcols[k])], r1, "x" + std::to_string(k), path);
		if (ca >= 0) {
			const double a = parse_cell(row[static_cast<std::size_t>(ca)], r1, "a", path);
			if (a < 0.0 || a > 1.0)
				throw InputError(path + ": row " + std::to_string(r1) + ", column 'a': action outside [0,1]",
						 {i + 1});
			(*f.A)(i) = a;
		}
		if (cy >= 0)
			(*f.Y)(i) = parse_cell(row[static_cast<std::size_t>(cy)], r1, "y", path);
	}
	return f;
}

void write_text(const std::string &path, const std::string &content)
{
	std::ofstream out(path, std::ios::binary);
	if (!out)
		throw InputError("cannot write '" + path + "'");
	out << content;
}

std::string read_text(const std::string &path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw InputError("cannot open '" + path + "'");
	std::ostringstream ss;
	ss << in.rdbuf();
	return ss.str();
}

std::string fmt(double v)
{
	return json(v).dump();
}

json model_to_json(const ModelBundle &b)
{
	const auto &m = b.model;
	const auto d = static_cast<Eigen::Index>(b.covariate_names.size());
	json blocks = json::object();
	if (d > 0 && m.beta.size() % d == 0) {
		const int L = static_cast<int>(m.beta.size() / d);
		blocks["psi_0"] = vec_json(m.beta.segment(0, d));
		for (int k = 2; k <= L; ++k)
			blocks["psi_" + std::to_string(k)] = vec_json(m.beta.segment(block_offset(k, d), d));
	}
	json j;
	j["format"] = "drove-model/1";
	j["estimator"] = to_string(m.kind);
	j["penalty"] = penalty_json(m.penalty);
	j["lambda"] = m.lambda_used;
	j["grid"] = b.grid.levels();
	j["covariates"] = b.covariate_names;
	j["coefficients"] = blocks;
	j["beta"] = vec_json(m.beta);
	j["null_rows"] = m.null_rows;
	j["null_basis"] = mat_json(m.null_basis);
	j["theta_sandwich"] = mat_json(m.theta_sandwich);
	j["dispersion"] = m.dispersion;
	j["n"] = m.n;
	j["s_hat"] = m.s_hat();
	j["converged"] = m.converged;
	j["glla_iterations"] = m.glla_iterations;
	j["solver_iterations"] = m.solver_iterations;
	j["objective_history"] = m.objective_history;
	j["raw_beta"] = vec_json(m.raw_beta);
	j["column_scale"] = vec_json(m.column_scale);
	if (b.standardizer) {
		const auto &s = *b.standardizer;
		j["standardization"] = {{"center", vec_json(s.center)},
					{"scale", vec_json(s.scale)},
					{"active", s.active},
					{"target_sd", s.target_sd}};
	} else {
		j["standardization"] = nullptr;
	}
	j["train_ids"] = b.train_ids;
	json vt = json::array();
	for (const auto &r : b.validation) {
		json row = {{"lambda", r.lambda}, {"converged", r.converged}, {"failed", r.failed}, {"s_hat", r.s_hat}};
		row["validation_mse"] = std::isfinite(r.validation_mse) ? json(r.validation_mse) : json(nullptr);
		if (!r.error.empty())
			row["error"] = r.error;
		vt.push_back(row);
	}
	j["validation"] = vt;
	j["selected_lambda"] = b.selected_lambda ? json(*b.selected_lambda) : json(nullptr);
	return j;
}

ModelBundle model_from_json(const json &j)
{
	try {
		if (j.value("format", "") != "drove-model/1")
			throw InputError("model file: unrecognized format tag");
		ModelBundle b;
		auto &m = b.model;
		m.kind = estimator_kind_from_string(j.at("estimator").get<std::string>());
		m.penalty = penalty_from_json(j.at("penalty"));
		m.lambda_used = j.at("lambda").get<double>();
		b.grid = ActionGrid<double>(j.at("grid").get<std::vector<double>>());
		b.covariate_names = j.at("covariates").get<std::vector<std::string>>();
		m.beta = json_vec(j.at("beta"));
		m.null_rows = j.at("null_rows").get<std::vector<int>>();
		m.null_basis = json_mat(j.at("null_basis"), 0);
		m.theta_sandwich = json_mat(j.at("theta_sandwich"), 0);
		m.dispersion = j.at("dispersion").get<double>();
		m.n = j.at("n").get<Eigen::Index>();
		m.converged = j.at("converged").get<bool>();
		m.glla_iterations = j.value("glla_iterations", 0);
		m.solver_iterations = j.value("solver_iterations", 0);
		m.objective_history = j.value("objective_history", std::vector<double>{});
		m.raw_beta = json_vec(j.value("raw_beta", json::array()));
		m.column_scale = json_vec(j.value("column_scale", json::array()));
		const auto d = static_cast<Eigen::Index>(b.covariate_names.size());
		if (d == 0 || m.beta.size() != d * b.grid.size())
			throw InputError("model file: coefficient length does not match grid and covariates");
		if (m.null_basis.rows() != m.beta.size() || m.theta_sandwich.rows() != m.null_basis.cols() ||
		    m.theta_sandwich.cols() != m.null_basis.cols())
			throw InputError("model file: null basis / sandwich shape mismatch");
		if (!j.at("standardization").is_null()) {
			const auto &s = j["standardization"];
			sim::Standardizer st;
			st.center = json_vec(s.at("center"));
			st.scale = json_vec(s.at("scale"));
			st.active = s.at("active").get<std::vector<bool>>();
			st.target_sd = s.at("target_sd").get<double>();
			st.recenter = false;
			if (st.center.size() != d || st.scale.size() != d || static_cast<Eigen::Index>(st.active.size()) != d)
				throw InputError("model file: standardization width mismatch");
			b.standardizer = st;
		}
		b.train_ids = j.at("train_ids").get<std::vector<std::string>>();
		for (const auto &r : j.value("validation", json::array())) {
			ValidationRow<double> row;
			row.lambda = r.at("lambda").get<double>();
			if (!r.at("validation_mse").is_null())
				row.validation_mse = r["validation_mse"].get<double>();
			row.converged = r.at("converged").get<bool>();
			row.failed = r.at("failed").get<bool>();
			row.s_hat = r.at("s_hat").get<Eigen::Index>();
			row.error = r.value("error", "");
			b.validation.push_back(std::move(row));
		}
		if (j.contains("selected_lambda") && !j["selected_lambda"].is_null())
			b.selected_lambda = j["selected_lambda"].get<double>();
		return b;
	} catch (const json::exception &e) {
		throw InputError(std::string("model file: ") + e.what());
	}
}

json value_to_json(const ValueEstimate<double> &v)
{
	return {{"point", v.point},
		{"se", v.se},
		{"ci_lo", v.ci_lo},
		{"ci_hi", v.ci_hi},
		{"alpha", v.alpha},
		{"n", v.n},
		{"N", v.N},
		{"model_variance_term", v.model_variance_term},
		{"population_variance_term", v.population_variance_term},
		{"warnings", v.warnings}};
}

json sim_config_to_json(const sim::SimConfig &cfg)
{
	json fx;
	fx["name"] = cfg.fixture.name;
	fx["levels"] = cfg.fixture.grid.levels();
	json cov = json::array();
	for (auto k : cfg.fixture.covariates)
		cov.push_back(sim::to_string(k));
	fx["covariates"] = cov;
	fx["beta_star"] = vec_json(cfg.fixture.beta_star);

	json est = json::array();
	for (auto k : cfg.estimators)
		est.push_back(to_string(k));
	json rules = json::array();
	for (const auto &r : cfg.rules) {
		if (!r.fixed_action)
			throw std::invalid_argument("custom rules cannot be serialized");
		rules.push_back(*r.fixed_action);
	}
	json j;
	j["fixture"] = fx;
	j["n"] = cfg.n;
	j["N"] = cfg.N;
	j["noise_sd"] = cfg.noise_sd;
	j["replications"] = cfg.replications;
	j["seed"] = cfg.seed;
	j["estimators"] = est;
	j["inference_estimator"] = to_string(cfg.inference_estimator);
	j["lambda_grid"] = cfg.lambda_grid;
	j["fixed_lambda"] = cfg.fixed_lambda ? json(*cfg.fixed_lambda) : json(nullptr);
	j["split"] = cfg.split;
	j["penalty"] = {{"family", to_string(cfg.penalty.family)}, {"shape", cfg.penalty.shape}};
	j["target_sd"] = cfg.target_sd;
	j["alphas"] = cfg.alphas;
	j["rules"] = rules;
	j["truth_draws"] = cfg.truth_draws;
	j["truth_seed"] = cfg.truth_seed;
	j["normalize"] = cfg.fit_settings.normalize;
	j["max_glla_iterations"] = cfg.fit_settings.max_glla_iterations;
	return j;
}

sim::SimConfig sim_config_from_json(const json &j, std::vector<int> *tables)
{
	try {
		if (!j.is_object())
			throw InputError("config: expected a JSON object");
		check_keys(j,
			   {"fixture", "n", "N", "noise_sd", "replications", "seed", "estimators", "inference_estimator",
			    "lambda_grid", "fixed_lambda", "split", "penalty", "target_sd", "alphas", "rules", "truth_draws",
			    "truth_seed", "threads", "normalize", "max_glla_iterations", "tables"},
			   "config");
		sim::SimConfig cfg;
		if (j.contains("fixture")) {
			const auto &f = j["fixture"];
			if (f.is_string()) {
				const auto name = f.get<std::string>();
				if (name == "default")
					cfg.fixture = sim::default_fixture();
				else if (name == "degenerate")
					cfg.fixture = sim::degenerate_fixture();
				else
					throw InputError("config: unknown fixture '" + name + "'");
			} else {
				check_keys(f, {"name", "levels", "covariates", "beta_star", "expect"}, "config.fixture");
				sim::Fixture fx;
				fx.name = f.value("name", "custom");
				fx.grid = ActionGrid<double>(f.at("levels").get<std::vector<double>>());
				for (const auto &c : f.at("covariates"))
					fx.covariates.push_back(sim::covariate_kind_from_string(c.get<std::string>()));
				fx.beta_star = json_vec(f.at("beta_star"));
				sim::FixtureExpectation ex;
				if (f.contains("expect")) {
					const auto &e = f["expect"];
					check_keys(e, {"p", "K", "rank_null", "s_n", "zero_coefficients", "g_n"},
						   "config.fixture.expect");
					if (e.contains("p"))
						ex.p = e["p"].get<Eigen::Index>();
					if (e.contains("K"))
						ex.K = e["K"].get<Eigen::Index>();
					if (e.contains("rank_null"))
						ex.rank_null = e["rank_null"].get<Eigen::Index>();
					if (e.contains("s_n"))
						ex.s_n = e["s_n"].get<Eigen::Index>();
					if (e.contains("zero_coefficients"))
						ex.zero_coefficients = e["zero_coefficients"].get<int>();
					if (e.contains("g_n"))
						ex.g_n = e["g_n"].get<double>();
				}
				sim::validate_fixture(fx, ex);
				cfg.fixture = std::move(fx);
			}
		}
		cfg.n = j.value("n", cfg.n);
		cfg.N = j.value("N", cfg.N);
		cfg.noise_sd = j.value("noise_sd", cfg.noise_sd);
		cfg.replications = j.value("replications", cfg.replications);
		cfg.seed = j.value("seed", cfg.seed);
		if (j.contains("estimators")) {
			cfg.estimators.clear();
			for (const auto &e : j["estimators"])
				cfg.estimators.push_back(estimator_kind_from_string(e.get<std::string>()));
		}
		if (j.contains("inference_estimator"))
			cfg.inference_estimator = estimator_kind_from_string(j["inference_estimator"].get<std::string>());
		if (j.contains("lambda_grid")) {
			const auto &g = j["lambda_grid"];
			if (g.is_object()) {
				check_keys(g, {"lo", "hi", "count"}, "config.lambda_grid");
				cfg.lambda_grid = log_grid(g.at("lo").get<double>(), g.at("hi").get<double>(), g.at("count").get<int>());
			} else {
				cfg.lambda_grid = g.get<std::vector<double>>();
			}
		}
		if (j.contains("fixed_lambda") && !j["fixed_lambda"].is_null())
			cfg.fixed_lambda = j["fixed_lambda"].get<double>();
		cfg.split = j.value("split", cfg.split);
		if (j.contains("penalty")) {
			check_keys(j["penalty"], {"family", "shape"}, "config.penalty");
			cfg.penalty = penalty_from_json(j["penalty"]);
			cfg.penalty.lambda = 0;
		}
		cfg.target_sd = j.value("target_sd", cfg.target_sd);
		if (j.contains("alphas"))
			cfg.alphas = j["alphas"].get<std::vector<double>>();
		if (j.contains("rules")) {
			cfg.rules.clear();
			for (const auto &r : j["rules"])
				cfg.rules.push_back(sim::SimRule::fixed(r.get<double>()));
		}
		cfg.truth_draws = j.value("truth_draws", cfg.truth_draws);
		cfg.truth_seed = j.value("truth_seed", cfg.truth_seed);
		cfg.threads = j.value("threads", cfg.threads);
		cfg.fit_settings.normalize = j.value("normalize", cfg.fit_settings.normalize);
		cfg.fit_settings.max_glla_iterations = j.value("max_glla_iterations", cfg.fit_settings.max_glla_iterations);
		if (tables) {
			*tables = j.contains("tables") ? j["tables"].get<std::vector<int>>() : std::vector<int>{1, 2, 3};
			for (int t : *tables)
				if (t < 1 || t > 3)
					throw InputError("config: tables must be drawn from {1, 2, 3}");
		}
		cfg.validate();
		return cfg;
	} catch (const json::exception &e) {
		throw InputError(std::string("config: ") + e.what());
	}
}

json table1_to_json(const sim::Table1Report &r)
{
	json rows = json::array();
	for (const auto &m : r.rows)
		rows.push_back({{"estimator", to_string(m.kind)},
				{"l2", summary_json(m.l2)},
				{"l1", summary_json(m.l1)},
				{"fp_rate", summary_json(m.fp_rate)},
				{"fn_rate", summary_json(m.fn_rate)},
				{"lambda", summary_json(m.lambda)},
				{"penalized_l2", summary_json(m.penalized_l2)},
				{"nonconverged", m.nonconverged},
				{"failures", m.failures},
				{"boundary_low", m.boundary_low},
				{"boundary_high", m.boundary_high}});
	json runs = json::array();
	for (const auto &e : r.runs)
		runs.push_back({{"estimator", to_string(e.kind)},
				{"l2", e.l2},
				{"l1", e.l1},
				{"fp_rate", e.fp_rate},
				{"fn_rate", e.fn_rate},
				{"lambda", e.lambda},
				{"penalized_l2", e.penalized_l2}});
	return {{"config", sim_config_to_json(r.config)},
		{"fixture_stats",
		 {{"p", r.stats.p},
		  {"K", r.stats.K},
		  {"zero_coefficients", r.stats.zero_coefficients},
		  {"rank_null", r.stats.rank_null},
		  {"s_n", r.stats.s_n},
		  {"g_n", r.stats.g_n}}},
		{"rows", rows},
		{"replications", runs}};
}

std::string table1_to_csv(const sim::Table1Report &r)
{
	std::ostringstream out;
	out << "# config: " << sim_config_to_json(r.config).dump() << "\n";
	out << "estimator,l2_mean,l2_sd,l1_mean,l1_sd,fp_rate_mean,fp_rate_sd,fn_rate_mean,fn_rate_sd,lambda_mean,"
	       "penalized_l2_mean,nonconverged,failures,boundary_low,boundary_high\n";
	for (const auto &m : r.rows)
		out << to_string(m.kind) << ',' << fmt(m.l2.mean) << ',' << fmt(m.l2.sd) << ',' << fmt(m.l1.mean) << ','
		    << fmt(m.l1.sd) << ',' << fmt(m.fp_rate.mean) << ',' << fmt(m.fp_rate.sd) << ',' << fmt(m.fn_rate.mean)
		    << ',' << fmt(m.fn_rate.sd) << ',' << fmt(m.lambda.mean) << ',' << fmt(m.penalized_l2.mean) << ','
		    << m.nonconverged << ',' << m.failures << ',' << m.boundary_low << ',' << m.boundary_high << "\n";
	return out.str();
}

json coverage_to_json(const sim::CoverageReport &r)
{
	json targets = json::array();
	for (const auto &t : r.targets) {
		json cov = json::object();
		for (std::size_t a = 0; a < r.config.alphas.size(); ++a)
			cov[pct_label(r.config.alphas[a])] = t.coverage(a);
		targets.push_back({{"name", t.name},
				   {"truth", t.truth},
				   {"point", summary_json(t.point_summary())},
				   {"se", summary_json(t.se_summary())},
				   {"coverage", cov},
				   {"points", t.points},
				   {"ses", t.ses}});
	}
	return {{"config", sim_config_to_json(r.config)},
		{"truth",
		 {{"optimal_value", r.truth.optimal_value},
		  {"rule_values", r.truth.rule_values},
		  {"differences", r.truth.differences},
		  {"draws", r.truth.draws},
		  {"seed", r.truth.seed}}},
		{"targets", targets},
		{"lambdas", r.lambdas},
		{"failures", r.failures},
		{"nonconverged", r.nonconverged}};
}

std::string coverage_to_csv(const sim::CoverageReport &r)
{
	std::ostringstream out;
	out << "# config: " << sim_config_to_json(r.config).dump() << "\n";
	out << "target,truth,point_mean,point_sd,se_mean";
	for (double a : r.config.alphas)
		out << ",coverage_" << pct_label(a);
	out << "\n";
	for (const auto &t : r.targets) {
		const auto ps = t.point_summary();
		out << t.name << ',' << fmt(t.truth) << ',' << fmt(ps.mean) << ',' << fmt(ps.sd) << ','
		    << fmt(t.se_summary().mean);
		for (std::size_t a = 0; a < r.config.alphas.size(); ++a)
			out << ',' << fmt(t.coverage(a));
		out << "\n";
	}
	return out.str();
}

std::string coverage_long_csv(const sim::CoverageReport &r)
{
	std::ostringstream out;
	out << "# config: " << sim_config_to_json(r.config).dump() << "\n";
	out << "target,n,alpha,nominal,coverage,coverage_mc_se,replications\n";
	for (const auto &t : r.targets)
		for (std::size_t a = 0; a < r.config.alphas.size(); ++a) {
			const double c = t.coverage(a);
			const auto reps = t.hits[a].size();
			const double se = reps ? std::sqrt(c * (1 - c) / static_cast<double>(reps)) : 0.0;
			out << t.name << ',' << r.config.n << ',' << fmt(r.config.alphas[a]) << ','
			    << fmt(1 - r.config.alphas[a]) << ',' << fmt(c) << ',' << fmt(se) << ',' << reps << "\n";
		}
	return out.str();
}

std::string dataset_to_csv(const ObservationSet<double> &obs, const std::string &id_prefix)
{
	std::ostringstream out;
	out << "id,a,y";
	for (Eigen::Index j = 0; j < obs.d(); ++j)
		out << ",x" << j + 1;
	out << "\n";
	for (Eigen::Index i = 0; i < obs.n(); ++i) {
		out << id_prefix << i + 1 << ',' << fmt(obs.A(i)) << ',' << fmt(obs.Y(i));
		for (Eigen::Index j = 0; j < obs.d(); ++j)
			out << ',' << fmt(obs.X(i, j));
		out << "\n";
	}
	return out.str();
}

std::string covariates_to_csv(const Eigen::MatrixXd &X, const std::string &id_prefix)
{
	std::ostringstream out;
	out << "id";
	for (Eigen::Index j = 0; j < X.cols(); ++j)
		out << ",x" << j + 1;
	out << "\n";
	for (Eigen::Index i = 0; i < X.rows(); ++i) {
		out << id_prefix << i + 1;
		for (Eigen::Index j = 0; j < X.cols(); ++j)
			out << ',' << fmt(X(i, j));
		out << "\n";
	}
	return out.str();
}

} // namespace drove::io
