#pragma once

#include <uqlab/data/dataset.hpp>
#include <uqlab/nn/adam.hpp>
#include <uqlab/nn/mlp.hpp>
#include <uqlab/rng.hpp>

#include <cstddef>
#include <functional>

namespace uqlab::nn
{
	struct TrainOptions
	{
			std::size_t epochs = 20;
			std::size_t batch_size = 32;
			double learning_rate = 0.001;
			/// Called after every completed epoch (1-based) with the current parameters.
			std::function<void(std::size_t epoch, const MlpParams &params)> on_epoch;
	};

	/// Mini-batch Adam on cross-entropy with dropout active. The stream first initialises the
	/// parameters, then drives the per-epoch shuffles and dropout masks, so a run is a pure
	/// function of (arch, data, options, rng).
	Model train(const MlpArchitecture &arch, const data::Dataset &train_set, const TrainOptions &options, RngStream rng);
}
