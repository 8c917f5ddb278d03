#pragma once

#include <uqlab/nn/mlp.hpp>

#include <cstdint>

namespace uqlab::nn
{
	struct AdamState
	{
			MlpParams first_moment;
			MlpParams second_moment;
			std::uint64_t step = 0;
			double learning_rate = 0.001;
			double beta1 = 0.9;
			double beta2 = 0.999;
			double epsilon = 1e-8;

			/// Zeroed accumulators shaped like params.
			static AdamState for_params(const MlpParams &params, double learning_rate = 0.001);
	};

	/// One bias-corrected Adam update in place. Throws DimensionError when shapes disagree.
	void adam_step(MlpParams &params, const MlpParams &grads, AdamState &state);
}
