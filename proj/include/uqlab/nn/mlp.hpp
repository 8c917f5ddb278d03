#pragma once

#include <uqlab/matrix.hpp>
#include <uqlab/rng.hpp>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace uqlab::nn
{
	/// Binary classifier output width. The whole library is specialised to two classes.
	inline constexpr std::size_t num_classes = 2;

	struct MlpArchitecture
	{
			std::size_t input_dim = 0;
			std::vector<std::size_t> hidden_sizes;
			std::size_t output_dim = num_classes;
			double dropout_retain = 0.75; // probability of keeping a hidden unit
			std::uint64_t seed = 0;

			/// Throws ConfigError on zero dimensions, output_dim != 2 or retain outside (0, 1].
			void validate() const;
			std::size_t layer_count() const noexcept
			{
				return hidden_sizes.size() + 1;
			}
			std::size_t fan_in(std::size_t layer) const noexcept;
			std::size_t fan_out(std::size_t layer) const noexcept;

			friend bool operator==(const MlpArchitecture&, const MlpArchitecture&) = default;
	};

	/// Weights are stored fan_in x fan_out, so a layer computes x * W + b on row-major batches.
	struct DenseLayer
	{
			Matrix weights;
			std::vector<double> bias;

			friend bool operator==(const DenseLayer&, const DenseLayer&) = default;
	};

	struct MlpParams
	{
			std::vector<DenseLayer> layers;

			std::size_t parameter_count() const noexcept;
			bool all_finite() const noexcept;
			/// Same layer count and every weight/bias shape equal.
			bool same_shape(const MlpParams &other) const noexcept;
			/// Zero-filled parameters with the same shapes.
			MlpParams zeros_like() const;

			friend bool operator==(const MlpParams&, const MlpParams&) = default;
	};

	/// A trained network: its architecture plus parameters. Immutable once training finishes.
	struct Model
	{
			MlpArchitecture architecture;
			MlpParams params;

			friend bool operator==(const Model&, const Model&) = default;
	};

	/// He initialisation: weights ~ N(0, 2 / fan_in), zero biases.
	MlpParams init_params(const MlpArchitecture &arch, RngStream &rng);

	/// One matrix per hidden layer (batch x width) holding 0 or 1/retain.
	using DropoutMasks = std::vector<Matrix>;

	DropoutMasks sample_dropout_masks(const MlpParams &params, std::size_t batch_rows, double retain, RngStream &rng);

	struct ForwardCache
	{
			std::vector<Matrix> layer_inputs;    // layer_inputs[0] is the batch; later entries are dropped-out activations
			std::vector<Matrix> pre_activations; // hidden layers only
			DropoutMasks masks;                  // empty when dropout was inactive
			Matrix logits;
	};

	struct ForwardResult
	{
			Matrix logits;
			ForwardCache cache;
	};

	/// ReLU after every hidden layer, inverted dropout on hidden activations only, linear output.
	ForwardResult forward(const MlpParams &params, const Matrix &batch, bool dropout_active, double retain, RngStream &rng);
	/// Forward pass with caller-supplied masks (empty means no dropout). Used to freeze masks across evaluations.
	ForwardResult forward(const MlpParams &params, const Matrix &batch, const DropoutMasks &masks);
	/// Deterministic pass without dropout, returning only the logits.
	Matrix predict_logits(const MlpParams &params, const Matrix &batch);

	/// Row-wise softmax with max subtraction.
	Matrix softmax(const Matrix &logits);

	/// Mean negative log-probability of the true class; probabilities are floored at 1e-12.
	double cross_entropy_loss(const Matrix &probs, std::span<const int> labels);

	/// Analytic gradient of cross_entropy(softmax(logits)) through the cached pass, masks included.
	MlpParams backward(const MlpParams &params, const ForwardCache &cache, std::span<const int> labels);

	inline constexpr double probability_floor = 1e-12;

	void check_labels(std::span<const int> labels, std::size_t expected_rows);
}
