#pragma once

#include <uqlab/data/dataset.hpp>
#include <uqlab/harness/config.hpp>
#include <uqlab/metrics/metrics.hpp>
#include <uqlab/nn/mlp.hpp>
#include <uqlab/uq/predictors.hpp>

#include <json.hpp>

#include <optional>
#include <string>
#include <vector>

/*
 * Experiment driver. Every random draw comes from a stream derived from the master seed:
 *   (seed, 1)  synthetic data          (seed, 4)  ensemble base seed
 *   (seed, 2)  UQ-study split          (seed, 5)  MC-Dropout passes
 *   (seed, 3)  base model seed         (seed, 6)  EMCD passes
 *   (seed, 100).fork(r)  repetition r of the base-model study (fork 0 split, fork 1 model seed)
 * Models are trained with RngStream(arch.seed, 0), the same rule used for ensemble members.
 */
namespace uqlab::harness
{
	inline constexpr const char *uqlab_version = "1.0.0";

	struct LoadedData
	{
			data::Dataset dataset;
			/// Set for CSV sources: the map that was applied.
			std::optional<data::LabelMap> label_map;
			std::string label_map_source;
	};

	/// Synthetic blobs from (seed, 1) or the configured CSV. An unset label map means the HAM10000
	/// default for HMNIST files and the identity map for generic files.
	LoadedData load_dataset(const ExperimentConfig &config);

	struct PreparedSplit
	{
			data::Dataset train; // standardized
			data::Dataset test;  // standardized with train statistics
			data::StandardizationStats stats;
	};

	PreparedSplit prepare_split(const data::Dataset &dataset, double train_fraction, bool stratified, RngStream rng);

	nn::TrainOptions train_options(const ExperimentConfig &config);
	nn::MlpArchitecture base_architecture(const ExperimentConfig &config, std::size_t input_dim);
	/// Ensemble spec of the config with base_seed derived from the master seed.
	uq::EnsembleSpec ensemble_spec(const ExperimentConfig &config);
	/// Ensemble architectures; member 0 is replaced by the base architecture when anchor_base_model is set.
	std::vector<nn::MlpArchitecture> ensemble_architectures(const ExperimentConfig &config, std::size_t input_dim);

	struct RunMetrics
	{
			std::size_t run = 0;
			double accuracy = 0.0;
			std::optional<double> sensitivity;
			std::optional<double> specificity;
			std::optional<double> auc;
	};

	struct BaseStudy
	{
			std::vector<RunMetrics> runs;
			metrics::SummaryStats accuracy;
			std::optional<metrics::SummaryStats> sensitivity; // nullopt when no run defines the metric
			std::optional<metrics::SummaryStats> specificity;
			std::optional<metrics::SummaryStats> auc;
	};

	struct MethodReport
	{
			Method method = Method::mcd;
			std::vector<metrics::PredictionRecord> records;
			metrics::EceResult ece;
			metrics::EntropyHistograms histograms;
			std::vector<metrics::SweepRow> sweep;
			metrics::SweepRow spotlight;
			metrics::ClassicalMetrics classical;
			std::optional<double> auc;
	};

	MethodReport evaluate_method(Method method, std::vector<metrics::PredictionRecord> records, const ExperimentConfig &config);

	struct ReportBundle
	{
			ExperimentConfig config;
			nlohmann::json provenance;
			std::optional<BaseStudy> base;
			std::vector<MethodReport> methods;
	};

	/// R independent base models, each on its own split; dropout off at test time.
	ReportBundle run_base_model_study(const ExperimentConfig &config);
	/// One split, one base model, one ensemble; every selected method evaluated on the shared test set.
	ReportBundle run_uq_study(const ExperimentConfig &config);
	/// Both studies in one bundle.
	ReportBundle run_study(const ExperimentConfig &config);
}
