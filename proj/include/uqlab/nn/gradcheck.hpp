#pragma once

#include <uqlab/nn/mlp.hpp>

#include <span>

namespace uqlab::nn
{
	/// Loss of the network on a batch under fixed dropout masks (empty = no dropout).
	double batch_loss(const MlpParams &params, const Matrix &batch, std::span<const int> labels, const DropoutMasks &masks = { });

	/// Central differences (L(p + h) - L(p - h)) / 2h for every parameter, masks held fixed.
	MlpParams finite_difference_grad(const MlpParams &params, const Matrix &batch, std::span<const int> labels, double h,
			const DropoutMasks &masks = { });

	struct GradientComparison
	{
			double max_abs_error = 0.0;
			double max_relative_error = 0.0;
	};

	/// Element-wise comparison; relative error is |a - b| / max(|a|, |b|, floor).
	GradientComparison compare_gradients(const MlpParams &analytic, const MlpParams &numeric, double floor = 1e-8);
}
