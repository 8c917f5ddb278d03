#pragma once

#include <uqlab/metrics/metrics.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace uqlab::metrics
{
	inline constexpr const char *records_csv_header = "true_label,predicted_label,confidence,entropy";

	/// Record interchange CSV. Reals are written in shortest round-trip form, so metrics recomputed from the file are exact.
	void write_records_csv(std::span<const PredictionRecord> records, const std::filesystem::path &path);
	std::vector<PredictionRecord> read_records_csv(const std::filesystem::path &path);

	/// Shortest round-trip formatting shared by every CSV writer.
	std::string format_real(double value);
}
