#include <uqlab/nn/gradcheck.hpp>
#include <uqlab/errors.hpp>

#include <algorithm>
#include <cmath>

namespace uqlab::nn
{
	double batch_loss(const MlpParams &params, const Matrix &batch, std::span<const int> labels, const DropoutMasks &masks)
	{
		return cross_entropy_loss(softmax(forward(params, batch, masks).logits), labels);
	}

	MlpParams finite_difference_grad(const MlpParams &params, const Matrix &batch, std::span<const int> labels, double h,
			const DropoutMasks &masks)
	{
		if (!(h > 0.0))
			throw ConfigError("finite difference step must be positive");
		MlpParams probe = params;
		MlpParams grads = params.zeros_like();

		auto central = [&](double &slot) -> double
		{
			const double original = slot;
			slot = original + h;
			const double plus = batch_loss(probe, batch, labels, masks);
			slot = original - h;
			const double minus = batch_loss(probe, batch, labels, masks);
			slot = original;
			return (plus - minus) / (2.0 * h);
		};

		for (std::size_t l = 0; l < probe.layers.size(); l++)
		{
			auto weights = probe.layers[l].weights.values();
			auto out_w = grads.layers[l].weights.values();
			for (std::size_t i = 0; i < weights.size(); i++)
				out_w[i] = central(weights[i]);
			auto &bias = probe.layers[l].bias;
			for (std::size_t i = 0; i < bias.size(); i++)
				grads.layers[l].bias[i] = central(bias[i]);
		}
		return grads;
	}

	GradientComparison compare_gradients(const MlpParams &analytic, const MlpParams &numeric, double floor)
	{
		if (!analytic.same_shape(numeric))
			throw DimensionError("gradient shapes differ");
		GradientComparison result;
		auto visit = [&](double a, double b)
		{
			const double abs_err = std::abs(a - b);
			const double scale = std::max( { std::abs(a), std::abs(b), floor });
			result.max_abs_error = std::max(result.max_abs_error, abs_err);
			result.max_relative_error = std::max(result.max_relative_error, abs_err / scale);
		};
		for (std::size_t l = 0; l < analytic.layers.size(); l++)
		{
			const auto a = analytic.layers[l].weights.values();
			const auto b = numeric.layers[l].weights.values();
			for (std::size_t i = 0; i < a.size(); i++)
				visit(a[i], b[i]);
			for (std::size_t i = 0; i < analytic.layers[l].bias.size(); i++)
				visit(analytic.layers[l].bias[i], numeric.layers[l].bias[i]);
		}
		return result;
	}
}
