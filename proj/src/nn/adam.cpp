#include <uqlab/nn/adam.hpp>
#include <uqlab/errors.hpp>
#include <uqlab/simd/kernels.hpp>

#include <cmath>

namespace uqlab::nn
{
	AdamState AdamState::for_params(const MlpParams &params, double learning_rate)
	{
		AdamState state;
		state.first_moment = params.zeros_like();
		state.second_moment = params.zeros_like();
		state.learning_rate = learning_rate;
		return state;
	}

	void adam_step(MlpParams &params, const MlpParams &grads, AdamState &state)
	{
		if (!params.same_shape(grads) || !params.same_shape(state.first_moment) || !params.same_shape(state.second_moment))
			throw DimensionError("adam_step: parameter, gradient and moment shapes differ");

		state.step++;
		const double t = static_cast<double>(state.step);
		const simd::AdamCoefficients coefficients { state.learning_rate, state.beta1, state.beta2, state.epsilon,
				1.0 - std::pow(state.beta1, t), 1.0 - std::pow(state.beta2, t) };
		const auto &k = simd::active();
		for (std::size_t l = 0; l < params.layers.size(); l++)
		{
			DenseLayer &p = params.layers[l];
			k.adam_update(p.weights.data(), grads.layers[l].weights.data(), state.first_moment.layers[l].weights.data(),
					state.second_moment.layers[l].weights.data(), p.weights.size(), coefficients);
			k.adam_update(p.bias.data(), grads.layers[l].bias.data(), state.first_moment.layers[l].bias.data(),
					state.second_moment.layers[l].bias.data(), p.bias.size(), coefficients);
		}
	}
}
