#pragma once

#include <uqlab/data/dataset.hpp>
#include <uqlab/nn/mlp.hpp>

#include <json.hpp>

#include <filesystem>
#include <optional>

namespace uqlab::nn
{
	/*
	 * Model file (`*.model.json`):
	 * {
	 *   "format": "uqlab.model", "version": 1,
	 *   "architecture": { "input_dim", "hidden_sizes", "output_dim", "dropout_retain", "seed" },
	 *   "layers": [ { "fan_in", "fan_out", "weights": [[...fan_out] x fan_in], "bias": [...] } ],
	 *   "standardization": { "mean": [...], "stddev": [...] }     // optional
	 * }
	 * Numbers are written in shortest round-trip form, so save -> load is bit-exact.
	 */
	struct ModelFile
	{
			Model model;
			std::optional<data::StandardizationStats> standardization;
	};

	nlohmann::json architecture_to_json(const MlpArchitecture &arch);
	MlpArchitecture architecture_from_json(const nlohmann::json &j);
	nlohmann::json model_to_json(const ModelFile &file);
	ModelFile model_from_json(const nlohmann::json &j);

	void save_model(const ModelFile &file, const std::filesystem::path &path);
	ModelFile load_model(const std::filesystem::path &path);

	nlohmann::json read_json_file(const std::filesystem::path &path);
	void write_json_file(const nlohmann::json &j, const std::filesystem::path &path);
}
