#pragma once

#include <uqlab/harness/study.hpp>

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace uqlab::harness
{
	/*
	 * Report files, all with headers and a fixed row order:
	 *   metrics.json          full bundle (config echo, provenance, classification and uncertainty tables)
	 *   runs.csv              run,accuracy,sensitivity,specificity,auc
	 *   sweep.csv             method,threshold,tc,tu,fu,fc,usen,uspe,upre,uacc   (methods x grid)
	 *   reliability.csv       bin,lower,upper, then <method>_count,<method>_accuracy,<method>_confidence  (M rows)
	 *   entropy_hist.csv      method,outcome,bin,lower,upper,count
	 *   records_<method>.csv  record interchange format (see records_io.hpp)
	 *   *.svg                 renderings of the same tables (write_svg)
	 * Undefined ratios are written as NA in CSV and null in JSON. A bundle without methods writes
	 * only metrics.json and runs.csv.
	 */
	inline constexpr const char *runs_csv_header = "run,accuracy,sensitivity,specificity,auc";
	inline constexpr const char *sweep_csv_header = "method,threshold,tc,tu,fu,fc,usen,uspe,upre,uacc";
	inline constexpr const char *entropy_hist_csv_header = "method,outcome,bin,lower,upper,count";

	std::string reliability_csv_header(const ReportBundle &bundle);

	nlohmann::json bundle_to_json(const ReportBundle &bundle);

	/// Returns the written file names in write order. Throws IoError when out_dir is not writable.
	std::vector<std::string> emit_reports(const ReportBundle &bundle, const std::filesystem::path &out_dir);

	nlohmann::json sweep_row_to_json(const metrics::SweepRow &row);
	nlohmann::json ece_to_json(const metrics::EceResult &result);
	nlohmann::json classical_to_json(const metrics::ClassicalMetrics &classical, std::optional<double> auc);

	/// Long-format sweep table for a single record set (the `sweep` subcommand).
	void write_sweep_csv(const std::string &label, std::span<const metrics::SweepRow> rows, const std::filesystem::path &path);
}
