#pragma once

#include <uqlab/data/dataset.hpp>
#include <uqlab/matrix.hpp>
#include <uqlab/metrics/metrics.hpp>
#include <uqlab/nn/mlp.hpp>
#include <uqlab/nn/train.hpp>
#include <uqlab/rng.hpp>

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace uqlab::uq
{
	enum class LogBase
	{
		natural,
		base2
	};

	using ClassProbs = std::array<double, nn::num_classes>;

	struct PredictiveDistribution
	{
			ClassProbs mean_probs { };
			double predictive_entropy = 0.0;
			int predicted_class = 0;
			/// Per-pass (MCD) or per-member (ensemble, EMCD) probability rows; empty unless requested.
			std::vector<ClassProbs> samples;

			double confidence() const noexcept
			{
				return mean_probs[static_cast<std::size_t>(predicted_class)];
			}
	};

	/// -sum p log p with 0 log 0 = 0. Throws DataError for negative entries or a sum off 1 by more than 1e-9.
	double predictive_entropy(std::span<const double> probs, LogBase base = LogBase::natural);
	/// Upper bound of predictive_entropy for two classes in the given base (ln 2 or 1).
	double max_entropy(LogBase base) noexcept;

	PredictiveDistribution make_distribution(const ClassProbs &mean_probs, LogBase base, std::vector<ClassProbs> samples = { });

	struct PredictOptions
	{
			bool keep_samples = false;
			LogBase log_base = LogBase::natural;
			std::size_t threads = 1;
	};

	/// MC-Dropout: T dropout-active passes, softmax rows averaged per sample, entropy of the mean.
	std::vector<PredictiveDistribution> mcd_predict(const nn::Model &model, const Matrix &inputs, std::size_t mc_samples, RngStream rng,
			const PredictOptions &options = { });
	/// MC-Dropout where every pass reuses the same masks.
	std::vector<PredictiveDistribution> mcd_predict_frozen(const nn::Model &model, const Matrix &inputs, std::size_t mc_samples,
			const nn::DropoutMasks &masks, const PredictOptions &options = { });

	/// Per-sample mean of T dropout-active softmax passes (rows x 2).
	Matrix mc_mean_probs(const nn::Model &model, const Matrix &inputs, std::size_t mc_samples, RngStream &rng,
			std::vector<Matrix> *per_pass = nullptr);

	struct EnsembleSpec
	{
			std::size_t member_count = 30;
			std::vector<std::size_t> depth_choices { 2, 3 };
			std::vector<std::pair<std::size_t, std::size_t>> width_ranges { { 512, 1024 }, { 128, 512 }, { 8, 128 } }; // inclusive
			std::uint64_t base_seed = 0;

			void validate() const;
			friend bool operator==(const EnsembleSpec&, const EnsembleSpec&) = default;
	};

	/// Training seed of member i, a pure function of (base_seed, i).
	std::uint64_t member_seed(std::uint64_t base_seed, std::size_t member) noexcept;

	/// Member i: depth drawn uniformly from depth_choices and width j uniformly from width_ranges[j],
	/// all from RngStream(base_seed, i).
	std::vector<nn::MlpArchitecture> build_ensemble(const EnsembleSpec &spec, std::size_t input_dim, double dropout_retain);

	/// Trains each architecture on the full training set with RngStream(arch.seed, 0). Parallel
	/// execution gives the same models as serial execution.
	std::vector<nn::Model> train_ensemble(const std::vector<nn::MlpArchitecture> &architectures, const data::Dataset &train_set,
			const nn::TrainOptions &options, std::size_t threads = 1);

	/// Deep ensemble: one dropout-free pass per member, uniform mean of member softmax rows.
	std::vector<PredictiveDistribution> ensemble_predict(std::span<const nn::Model> models, const Matrix &inputs, const PredictOptions &options = { });

	/// Member-level MC means for EMCD; member i draws from rng.fork(i).
	std::vector<Matrix> emcd_member_means(std::span<const nn::Model> models, const Matrix &inputs, std::size_t mc_samples, const RngStream &rng,
			std::size_t threads = 1);

	/// Ensemble of MC-Dropout: per-member MC means averaged uniformly, entropy of the grand mean.
	std::vector<PredictiveDistribution> emcd_predict(std::span<const nn::Model> models, const Matrix &inputs, std::size_t mc_samples,
			const RngStream &rng, const PredictOptions &options = { });

	/// Pairs distributions with ground truth for the metrics module.
	std::vector<metrics::PredictionRecord> to_records(std::span<const PredictiveDistribution> predictions, std::span<const int> labels);
}
