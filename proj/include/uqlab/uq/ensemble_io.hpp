#pragma once

#include <uqlab/data/dataset.hpp>
#include <uqlab/nn/mlp.hpp>
#include <uqlab/uq/predictors.hpp>

#include <json.hpp>

#include <filesystem>
#include <optional>
#include <vector>

namespace uqlab::uq
{
	/*
	 * Ensemble directory layout:
	 *   manifest.json          {"format": "uqlab.ensemble", "version": 1, "spec": {...},
	 *                           "members": [{"file": "member_000.model.json", "seed": ...}, ...]}
	 *   member_000.model.json  one model file per member (see model_io.hpp)
	 */
	struct EnsembleBundle
	{
			EnsembleSpec spec;
			std::vector<nn::Model> members;
			std::optional<data::StandardizationStats> standardization;
	};

	inline constexpr const char *ensemble_manifest_name = "manifest.json";

	nlohmann::json ensemble_spec_to_json(const EnsembleSpec &spec);
	EnsembleSpec ensemble_spec_from_json(const nlohmann::json &j);

	void save_ensemble(const EnsembleBundle &bundle, const std::filesystem::path &directory);
	EnsembleBundle load_ensemble(const std::filesystem::path &directory);
}
