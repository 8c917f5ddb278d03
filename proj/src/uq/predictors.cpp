#include <uqlab/uq/predictors.hpp>
#include <uqlab/errors.hpp>
#include <uqlab/parallel.hpp>
#include <uqlab/simd/kernels.hpp>

#include <cmath>
#include <numbers>
#include <string>

namespace uqlab::uq
{
	namespace
	{
		void check_mc_samples(std::size_t mc_samples)
		{
			if (mc_samples == 0)
				throw ConfigError("number of MC samples must be at least 1");
		}

		void check_models(std::span<const nn::Model> models, const Matrix &inputs)
		{
			if (models.empty())
				throw ConfigError("ensemble has no members");
			const std::size_t dim = models.front().architecture.input_dim;
			for (const auto &m : models)
				if (m.architecture.input_dim != dim)
					throw ConfigError("ensemble members disagree on input dimension");
			if (inputs.cols() != dim)
				throw DimensionError("inputs have " + std::to_string(inputs.cols()) + " columns, models expect " + std::to_string(dim));
		}

		void divide_inplace(Matrix &m, std::size_t count)
		{
			const double denom = static_cast<double>(count);
			for (double &v : m.values())
				v = v / denom;
		}

		std::vector<PredictiveDistribution> to_distributions(const Matrix &means, LogBase base, const std::vector<Matrix> *sample_rows)
		{
			std::vector<PredictiveDistribution> result;
			result.reserve(means.rows());
			for (std::size_t r = 0; r < means.rows(); r++)
			{
				std::vector<ClassProbs> samples;
				if (sample_rows != nullptr)
				{
					samples.reserve(sample_rows->size());
					for (const auto &s : *sample_rows)
						samples.push_back( { s(r, 0), s(r, 1) });
				}
				result.push_back(make_distribution( { means(r, 0), means(r, 1) }, base, std::move(samples)));
			}
			return result;
		}

		Matrix softmax_of(const nn::Model &model, const Matrix &inputs, const nn::DropoutMasks &masks)
		{
			return nn::softmax(nn::forward(model.params, inputs, masks).logits);
		}
	}

	double predictive_entropy(std::span<const double> probs, LogBase base)
	{
		double sum = 0.0;
		for (double p : probs)
		{
			if (!(p >= 0.0))
				throw DataError("predictive_entropy: probability " + std::to_string(p) + " is negative or NaN");
			sum += p;
		}
		if (std::abs(sum - 1.0) > 1e-9)
			throw DataError("predictive_entropy: probabilities sum to " + std::to_string(sum) + ", not 1");

		double h = 0.0;
		for (double p : probs)
			if (p > 0.0)
				h -= p * std::log(p);
		if (base == LogBase::base2)
			h /= std::numbers::ln2;
		// rounding can push a near-uniform posterior a few ulps past the analytic maximum
		const double upper = std::log(static_cast<double>(probs.size())) / (base == LogBase::base2 ? std::numbers::ln2 : 1.0);
		return std::min(h, upper);
	}

	double max_entropy(LogBase base) noexcept
	{
		return base == LogBase::base2 ? 1.0 : std::numbers::ln2;
	}

	PredictiveDistribution make_distribution(const ClassProbs &mean_probs, LogBase base, std::vector<ClassProbs> samples)
	{
		PredictiveDistribution d;
		d.mean_probs = mean_probs;
		d.predictive_entropy = predictive_entropy(mean_probs, base);
		d.predicted_class = (mean_probs[1] > mean_probs[0]) ? 1 : 0;
		d.samples = std::move(samples);
		return d;
	}

	Matrix mc_mean_probs(const nn::Model &model, const Matrix &inputs, std::size_t mc_samples, RngStream &rng, std::vector<Matrix> *per_pass)
	{
		check_mc_samples(mc_samples);
		const auto &k = simd::active();
		Matrix sum(inputs.rows(), nn::num_classes);
		for (std::size_t t = 0; t < mc_samples; t++)
		{
			const auto masks = nn::sample_dropout_masks(model.params, inputs.rows(), model.architecture.dropout_retain, rng);
			Matrix probs = softmax_of(model, inputs, masks);
			k.add_inplace(sum.data(), probs.data(), sum.size());
			if (per_pass != nullptr)
				per_pass->push_back(std::move(probs));
		}
		divide_inplace(sum, mc_samples);
		return sum;
	}

	std::vector<PredictiveDistribution> mcd_predict(const nn::Model &model, const Matrix &inputs, std::size_t mc_samples, RngStream rng,
			const PredictOptions &options)
	{
		check_mc_samples(mc_samples);
		std::vector<Matrix> passes;
		const Matrix means = mc_mean_probs(model, inputs, mc_samples, rng, options.keep_samples ? &passes : nullptr);
		return to_distributions(means, options.log_base, options.keep_samples ? &passes : nullptr);
	}

	std::vector<PredictiveDistribution> mcd_predict_frozen(const nn::Model &model, const Matrix &inputs, std::size_t mc_samples,
			const nn::DropoutMasks &masks, const PredictOptions &options)
	{
		check_mc_samples(mc_samples);
		const auto &k = simd::active();
		Matrix sum(inputs.rows(), nn::num_classes);
		std::vector<Matrix> passes;
		for (std::size_t t = 0; t < mc_samples; t++)
		{
			Matrix probs = softmax_of(model, inputs, masks);
			k.add_inplace(sum.data(), probs.data(), sum.size());
			if (options.keep_samples)
				passes.push_back(std::move(probs));
		}
		divide_inplace(sum, mc_samples);
		return to_distributions(sum, options.log_base, options.keep_samples ? &passes : nullptr);
	}

	void EnsembleSpec::validate() const
	{
		if (member_count == 0)
			throw ConfigError("ensemble member_count must be at least 1");
		if (depth_choices.empty())
			throw ConfigError("ensemble depth_choices must not be empty");
		for (std::size_t depth : depth_choices)
		{
			if (depth == 0)
				throw ConfigError("ensemble depths must be positive");
			if (depth > width_ranges.size())
				throw ConfigError("ensemble depth " + std::to_string(depth) + " exceeds the " + std::to_string(width_ranges.size())
						+ " configured width ranges");
		}
		for (const auto &[low, high] : width_ranges)
			if (low == 0 || !(low < high))
				throw ConfigError("ensemble width ranges need 0 < low < high");
	}

	std::uint64_t member_seed(std::uint64_t base_seed, std::size_t member) noexcept
	{
		return RngStream(base_seed, member).fork(0x5EED).next_u64();
	}

	std::vector<nn::MlpArchitecture> build_ensemble(const EnsembleSpec &spec, std::size_t input_dim, double dropout_retain)
	{
		spec.validate();
		std::vector<nn::MlpArchitecture> result;
		result.reserve(spec.member_count);
		for (std::size_t i = 0; i < spec.member_count; i++)
		{
			RngStream rng(spec.base_seed, i);
			const std::size_t depth = spec.depth_choices[static_cast<std::size_t>(rng.uniform_index(spec.depth_choices.size()))];
			nn::MlpArchitecture arch;
			arch.input_dim = input_dim;
			arch.dropout_retain = dropout_retain;
			arch.seed = member_seed(spec.base_seed, i);
			for (std::size_t j = 0; j < depth; j++)
			{
				const auto [low, high] = spec.width_ranges[j];
				arch.hidden_sizes.push_back(static_cast<std::size_t>(rng.uniform_int(static_cast<std::int64_t>(low), static_cast<std::int64_t>(high))));
			}
			arch.validate();
			result.push_back(std::move(arch));
		}
		return result;
	}

	std::vector<nn::Model> train_ensemble(const std::vector<nn::MlpArchitecture> &architectures, const data::Dataset &train_set,
			const nn::TrainOptions &options, std::size_t threads)
	{
		std::vector<nn::Model> models(architectures.size());
		nn::TrainOptions member_options = options;
		member_options.on_epoch = nullptr;
		parallel_for(architectures.size(), threads, [&](std::size_t i)
		{
			models[i] = nn::train(architectures[i], train_set, member_options, RngStream(architectures[i].seed, 0));
		});
		return models;
	}

	std::vector<PredictiveDistribution> ensemble_predict(std::span<const nn::Model> models, const Matrix &inputs, const PredictOptions &options)
	{
		check_models(models, inputs);
		const auto &k = simd::active();
		std::vector<Matrix> member_probs(models.size());
		parallel_for(models.size(), options.threads, [&](std::size_t i)
		{
			member_probs[i] = nn::softmax(nn::predict_logits(models[i].params, inputs));
		});
		Matrix sum(inputs.rows(), nn::num_classes);
		for (const auto &p : member_probs)
			k.add_inplace(sum.data(), p.data(), sum.size());
		divide_inplace(sum, models.size());
		return to_distributions(sum, options.log_base, options.keep_samples ? &member_probs : nullptr);
	}

	std::vector<Matrix> emcd_member_means(std::span<const nn::Model> models, const Matrix &inputs, std::size_t mc_samples, const RngStream &rng,
			std::size_t threads)
	{
		check_models(models, inputs);
		check_mc_samples(mc_samples);
		std::vector<Matrix> means(models.size());
		parallel_for(models.size(), threads, [&](std::size_t i)
		{
			RngStream member_rng = rng.fork(i);
			means[i] = mc_mean_probs(models[i], inputs, mc_samples, member_rng);
		});
		return means;
	}

	std::vector<PredictiveDistribution> emcd_predict(std::span<const nn::Model> models, const Matrix &inputs, std::size_t mc_samples,
			const RngStream &rng, const PredictOptions &options)
	{
		const std::vector<Matrix> means = emcd_member_means(models, inputs, mc_samples, rng, options.threads);
		const auto &k = simd::active();
		Matrix sum(inputs.rows(), nn::num_classes);
		for (const auto &m : means)
			k.add_inplace(sum.data(), m.data(), sum.size());
		divide_inplace(sum, models.size());
		return to_distributions(sum, options.log_base, options.keep_samples ? &means : nullptr);
	}

	std::vector<metrics::PredictionRecord> to_records(std::span<const PredictiveDistribution> predictions, std::span<const int> labels)
	{
		if (predictions.size() != labels.size())
			throw DimensionError("prediction count does not match label count");
		std::vector<metrics::PredictionRecord> records;
		records.reserve(predictions.size());
		for (std::size_t i = 0; i < predictions.size(); i++)
			records.push_back(metrics::PredictionRecord { labels[i], predictions[i].predicted_class, predictions[i].confidence(),
					predictions[i].predictive_entropy });
		return records;
	}
}
