#pragma once

#include "drove/design.hpp"
#include "drove/estimator.hpp"
#include "drove/inference.hpp"
#include "drove/simlab.hpp"

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

namespace drove::io {

using json = nlohmann::ordered_json;

struct CsvTable {
	std::vector<std::string> header;
	std::vector<std::vector<std::string>> rows;

	/// Column index by name, or -1.
	int column(const std::string &name) const;
};

/// Comma-separated file with a header line. Throws InputError on ragged rows.
CsvTable read_csv(const std::string &path);

/// Parsed data file: id, optional a and y, covariates x1..xd in header order.
struct DataFile {
	std::vector<std::string> ids;
	std::vector<std::string> covariate_names;
	Eigen::MatrixXd X;
	std::optional<Eigen::VectorXd> A;
	std::optional<Eigen::VectorXd> Y;
};

/// Requires an `id` column and at least one covariate column named x<k>.
/// `need_action` / `need_outcome` make `a` / `y` mandatory. Cell-level
/// failures raise InputError naming the row (1-based data line) and column.
DataFile read_data_csv(const std::string &path, bool need_action, bool need_outcome);

void write_text(const std::string &path, const std::string &content);
std::string read_text(const std::string &path);

/// Shortest round-trip decimal form of a double.
std::string fmt(double v);

/// Everything a saved model needs for prediction and inference.
struct ModelBundle {
	FittedModel<double> model;
	ActionGrid<double> grid;
	std::vector<std::string> covariate_names;
	std::optional<sim::Standardizer> standardizer;
	std::vector<std::string> train_ids;
	std::vector<ValidationRow<double>> validation;
	std::optional<double> selected_lambda;
};

json model_to_json(const ModelBundle &b);
ModelBundle model_from_json(const json &j);

json value_to_json(const ValueEstimate<double> &v);

json sim_config_to_json(const sim::SimConfig &cfg);
/// Unknown keys are rejected. `tables` receives the requested table ids.
sim::SimConfig sim_config_from_json(const json &j, std::vector<int> *tables = nullptr);

json table1_to_json(const sim::Table1Report &r);
std::string table1_to_csv(const sim::Table1Report &r);
json coverage_to_json(const sim::CoverageReport &r);
std::string coverage_to_csv(const sim::CoverageReport &r);
/// One line per (target, alpha): plot-ready long format.
std::string coverage_long_csv(const sim::CoverageReport &r);

/// id,a,y,x1..xd (estimation) or id,x1..xd (testing).
std::string dataset_to_csv(const ObservationSet<double> &obs, const std::string &id_prefix);
std::string covariates_to_csv(const Eigen::MatrixXd &X, const std::string &id_prefix);

} // namespace drove::io
