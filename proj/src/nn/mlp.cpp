#include <uqlab/nn/mlp.hpp>
#include <uqlab/errors.hpp>
#include <uqlab/simd/kernels.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace uqlab::nn
{
	void MlpArchitecture::validate() const
	{
		if (input_dim == 0)
			throw ConfigError("architecture input_dim must be positive");
		if (output_dim != num_classes)
			throw ConfigError("architecture output_dim must be 2, got " + std::to_string(output_dim));
		for (std::size_t width : hidden_sizes)
			if (width == 0)
				throw ConfigError("hidden layer sizes must be positive");
		if (!(dropout_retain > 0.0 && dropout_retain <= 1.0))
			throw ConfigError("dropout_retain must lie in (0, 1], got " + std::to_string(dropout_retain));
	}
	std::size_t MlpArchitecture::fan_in(std::size_t layer) const noexcept
	{
		return (layer == 0) ? input_dim : hidden_sizes[layer - 1];
	}
	std::size_t MlpArchitecture::fan_out(std::size_t layer) const noexcept
	{
		return (layer < hidden_sizes.size()) ? hidden_sizes[layer] : output_dim;
	}

	std::size_t MlpParams::parameter_count() const noexcept
	{
		std::size_t result = 0;
		for (const auto &layer : layers)
			result += layer.weights.size() + layer.bias.size();
		return result;
	}
	bool MlpParams::all_finite() const noexcept
	{
		return std::all_of(layers.begin(), layers.end(), [](const DenseLayer &layer)
		{
			return layer.weights.all_finite() && std::all_of(layer.bias.begin(), layer.bias.end(), [](double b)
			{	return std::isfinite(b);});
		});
	}
	bool MlpParams::same_shape(const MlpParams &other) const noexcept
	{
		if (layers.size() != other.layers.size())
			return false;
		for (std::size_t i = 0; i < layers.size(); i++)
			if (layers[i].weights.rows() != other.layers[i].weights.rows() || layers[i].weights.cols() != other.layers[i].weights.cols()
					|| layers[i].bias.size() != other.layers[i].bias.size())
				return false;
		return true;
	}
	MlpParams MlpParams::zeros_like() const
	{
		MlpParams result;
		result.layers.reserve(layers.size());
		for (const auto &layer : layers)
			result.layers.push_back(DenseLayer { Matrix(layer.weights.rows(), layer.weights.cols()), std::vector<double>(layer.bias.size(), 0.0) });
		return result;
	}

	MlpParams init_params(const MlpArchitecture &arch, RngStream &rng)
	{
		arch.validate();
		MlpParams result;
		for (std::size_t l = 0; l < arch.layer_count(); l++)
		{
			const std::size_t rows = arch.fan_in(l);
			const std::size_t cols = arch.fan_out(l);
			const double stddev = std::sqrt(2.0 / static_cast<double>(rows));
			DenseLayer layer { Matrix(rows, cols), std::vector<double>(cols, 0.0) };
			for (double &w : layer.weights.values())
				w = rng.normal(0.0, stddev);
			result.layers.push_back(std::move(layer));
		}
		return result;
	}

	DropoutMasks sample_dropout_masks(const MlpParams &params, std::size_t batch_rows, double retain, RngStream &rng)
	{
		if (!(retain > 0.0 && retain <= 1.0))
			throw ConfigError("dropout retain probability must lie in (0, 1]");
		const double scale = 1.0 / retain;
		DropoutMasks masks;
		for (std::size_t l = 0; l + 1 < params.layers.size(); l++)
		{
			Matrix mask(batch_rows, params.layers[l].weights.cols());
			for (double &m : mask.values())
				m = rng.bernoulli(retain) ? scale : 0.0;
			masks.push_back(std::move(mask));
		}
		return masks;
	}

	ForwardResult forward(const MlpParams &params, const Matrix &batch, bool dropout_active, double retain, RngStream &rng)
	{
		if (!dropout_active)
			return forward(params, batch, DropoutMasks { });
		return forward(params, batch, sample_dropout_masks(params, batch.rows(), retain, rng));
	}

	ForwardResult forward(const MlpParams &params, const Matrix &batch, const DropoutMasks &masks)
	{
		if (params.layers.empty())
			throw DimensionError("network has no layers");
		if (batch.cols() != params.layers.front().weights.rows())
			throw DimensionError("batch has " + std::to_string(batch.cols()) + " columns, network expects "
					+ std::to_string(params.layers.front().weights.rows()));
		const std::size_t hidden_layers = params.layers.size() - 1;
		if (!masks.empty() && masks.size() != hidden_layers)
			throw DimensionError("dropout mask count does not match hidden layer count");

		const auto &k = simd::active();
		const std::size_t rows = batch.rows();
		ForwardCache cache;
		cache.layer_inputs.push_back(batch);
		for (std::size_t l = 0; l < params.layers.size(); l++)
		{
			const DenseLayer &layer = params.layers[l];
			const Matrix &input = cache.layer_inputs.back();
			if (input.cols() != layer.weights.rows() || layer.bias.size() != layer.weights.cols())
				throw DimensionError("layer " + std::to_string(l) + " shape does not chain with its input");
			Matrix z(rows, layer.weights.cols());
			k.matmul(input.data(), layer.weights.data(), layer.bias.data(), z.data(), rows, layer.weights.rows(), layer.weights.cols());
			if (l == hidden_layers)
			{
				cache.logits = std::move(z);
				break;
			}
			Matrix activation(rows, z.cols());
			k.relu(z.data(), activation.data(), z.size());
			if (!masks.empty())
			{
				if (masks[l].rows() != rows || masks[l].cols() != z.cols())
					throw DimensionError("dropout mask " + std::to_string(l) + " has the wrong shape");
				k.multiply_inplace(activation.data(), masks[l].data(), activation.size());
			}
			cache.pre_activations.push_back(std::move(z));
			cache.layer_inputs.push_back(std::move(activation));
		}
		cache.masks = masks;
		Matrix logits = cache.logits;
		return ForwardResult { std::move(logits), std::move(cache) };
	}

	Matrix predict_logits(const MlpParams &params, const Matrix &batch)
	{
		return forward(params, batch, DropoutMasks { }).logits;
	}

	Matrix softmax(const Matrix &logits)
	{
		Matrix probs(logits.rows(), logits.cols());
		for (std::size_t r = 0; r < logits.rows(); r++)
		{
			const auto in = logits.row(r);
			auto out = probs.row(r);
			const double max_logit = *std::max_element(in.begin(), in.end());
			double sum = 0.0;
			for (std::size_t c = 0; c < in.size(); c++)
			{
				out[c] = std::exp(in[c] - max_logit);
				sum += out[c];
			}
			for (double &p : out)
				p /= sum;
		}
		return probs;
	}

	void check_labels(std::span<const int> labels, std::size_t expected_rows)
	{
		if (labels.size() != expected_rows)
			throw DimensionError("expected " + std::to_string(expected_rows) + " labels, got " + std::to_string(labels.size()));
		for (int label : labels)
			if (label < 0 || label >= static_cast<int>(num_classes))
				throw DataError("class label " + std::to_string(label) + " is out of range");
	}

	double cross_entropy_loss(const Matrix &probs, std::span<const int> labels)
	{
		check_labels(labels, probs.rows());
		if (probs.rows() == 0)
			throw DataError("cannot compute a loss over an empty batch");
		double total = 0.0;
		for (std::size_t r = 0; r < probs.rows(); r++)
			total -= std::log(std::max(probs(r, static_cast<std::size_t>(labels[r])), probability_floor));
		return total / static_cast<double>(probs.rows());
	}

	MlpParams backward(const MlpParams &params, const ForwardCache &cache, std::span<const int> labels)
	{
		const std::size_t rows = cache.logits.rows();
		check_labels(labels, rows);
		if (cache.layer_inputs.size() != params.layers.size() || cache.pre_activations.size() + 1 != params.layers.size())
			throw DimensionError("forward cache does not match the network");

		const auto &k = simd::active();
		Matrix delta = softmax(cache.logits);
		const double inv_rows = 1.0 / static_cast<double>(rows);
		for (std::size_t r = 0; r < rows; r++)
		{
			auto row = delta.row(r);
			row[static_cast<std::size_t>(labels[r])] -= 1.0;
			for (double &d : row)
				d *= inv_rows;
		}

		MlpParams grads = params.zeros_like();
		for (std::size_t l = params.layers.size(); l-- > 0;)
		{
			const DenseLayer &layer = params.layers[l];
			const Matrix &input = cache.layer_inputs[l];
			k.matmul_tn_accumulate(input.data(), delta.data(), grads.layers[l].weights.data(), rows, layer.weights.rows(), layer.weights.cols());
			k.column_sum_accumulate(delta.data(), grads.layers[l].bias.data(), rows, layer.weights.cols());
			if (l == 0)
				break;

			const Matrix weights_t = layer.weights.transposed();
			Matrix upstream(rows, layer.weights.rows());
			k.matmul(delta.data(), weights_t.data(), nullptr, upstream.data(), rows, layer.weights.cols(), layer.weights.rows());
			if (!cache.masks.empty())
				k.multiply_inplace(upstream.data(), cache.masks[l - 1].data(), upstream.size());
			k.relu_backward(cache.pre_activations[l - 1].data(), upstream.data(), upstream.size());
			delta = std::move(upstream);
		}
		return grads;
	}
}
