#pragma once

#include <uqlab/uq/predictors.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace uqlab::harness
{
	enum class Method
	{
		mcd,
		ensemble,
		emcd
	};

	std::string to_string(Method method);
	Method method_from_string(const std::string &name);
	/// "mcd", "ensemble", "emcd" or "all" (comma separated lists allowed).
	std::vector<Method> parse_methods(const std::string &text);

	std::string to_string(uq::LogBase base);
	uq::LogBase log_base_from_string(const std::string &name);

	struct SyntheticSource
	{
			std::size_t n = 2000;
			std::size_t dims = 10;
			double separation = 3.0;
			double noise_std = 1.0;
	};

	struct CsvSource
	{
			std::string path;
			std::string label_column = "label";
			std::string label_map; // empty: HAM10000 default for HMNIST files, identity otherwise
	};

	struct DataConfig
	{
			enum class Source
			{
				synthetic,
				csv
			};
			Source source = Source::synthetic;
			SyntheticSource synthetic;
			CsvSource csv;
			double train_fraction = 0.8;
			bool stratified = false;
	};

	struct ModelConfig
	{
			std::vector<std::size_t> hidden_sizes { 32, 16 };
			double dropout_retain = 0.75;
			std::size_t epochs = 20;
			std::size_t batch_size = 32;
			double learning_rate = 0.001;
	};

	struct ExperimentConfig
	{
			std::string profile = "desk";
			DataConfig data;
			ModelConfig model;
			std::vector<Method> methods { Method::mcd, Method::ensemble, Method::emcd };
			std::size_t mc_samples = 50;
			uq::EnsembleSpec ensemble;
			/// Ensemble member 0 is the base (MCD) model instead of a freshly drawn architecture.
			bool anchor_base_model = true;
			double grid_start = 0.1;
			double grid_end = 0.9;
			double grid_step = 0.05;
			double spotlight_threshold = 0.4;
			std::size_t ece_bins = 10;
			std::size_t entropy_bins = 20;
			std::size_t repetitions = 10;
			uq::LogBase log_base = uq::LogBase::natural;
			std::uint64_t seed = 42;
			std::size_t threads = 1;
			bool write_svg = true;

			/// Throws ConfigError on any out-of-range field.
			void validate() const;
	};

	/// Small synthetic task, reduced network and ensemble, finishes in seconds.
	ExperimentConfig desk_profile();
	/// Full-scale hyperparameters: 512/256/64 network, T = 200, 30 members, 100 repetitions.
	ExperimentConfig paper_profile();
	ExperimentConfig profile_by_name(const std::string &name);

	/// Overlays the keys present in j onto base. Unknown keys are rejected.
	ExperimentConfig config_from_json(const nlohmann::json &j, ExperimentConfig base);
	ExperimentConfig load_config(const std::filesystem::path &path, ExperimentConfig base);
	nlohmann::json config_to_json(const ExperimentConfig &config);

	/// Seed precedence: config < UQLAB_SEED environment variable < command-line flag.
	std::uint64_t resolve_seed(std::uint64_t config_seed, std::optional<std::uint64_t> flag_seed);
}
