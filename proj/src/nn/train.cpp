#include <uqlab/nn/train.hpp>
#include <uqlab/errors.hpp>

#include <algorithm>
#include <numeric>

namespace uqlab::nn
{
	Model train(const MlpArchitecture &arch, const data::Dataset &train_set, const TrainOptions &options, RngStream rng)
	{
		arch.validate();
		train_set.validate();
		if (train_set.size() == 0)
			throw DataError("cannot train on an empty dataset");
		if (train_set.dims() != arch.input_dim)
			throw DimensionError("training data has " + std::to_string(train_set.dims()) + " features, architecture expects "
					+ std::to_string(arch.input_dim));
		if (options.batch_size == 0)
			throw ConfigError("batch size must be positive");
		if (!(options.learning_rate > 0.0))
			throw ConfigError("learning rate must be positive");

		Model model { arch, init_params(arch, rng) };
		AdamState adam = AdamState::for_params(model.params, options.learning_rate);

		std::vector<std::size_t> order(train_set.size());
		std::iota(order.begin(), order.end(), std::size_t { 0 });
		std::vector<int> batch_labels;
		for (std::size_t epoch = 1; epoch <= options.epochs; epoch++)
		{
			rng.shuffle(std::span<std::size_t>(order));
			for (std::size_t start = 0; start < order.size(); start += options.batch_size)
			{
				const std::size_t stop = std::min(order.size(), start + options.batch_size);
				const std::span<const std::size_t> idx(order.data() + start, stop - start);
				const Matrix batch = train_set.features.select_rows(idx);
				batch_labels.clear();
				for (std::size_t i : idx)
					batch_labels.push_back(train_set.labels[i]);

				const ForwardResult fwd = forward(model.params, batch, true, arch.dropout_retain, rng);
				const MlpParams grads = backward(model.params, fwd.cache, batch_labels);
				adam_step(model.params, grads, adam);
			}
			if (!model.params.all_finite())
				throw DataError("training diverged to non-finite parameters at epoch " + std::to_string(epoch));
			if (options.on_epoch)
				options.on_epoch(epoch, model.params);
		}
		return model;
	}
}
