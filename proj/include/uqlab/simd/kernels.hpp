#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

/*
 * Inner-loop kernels for the dense network. Every variant performs exactly the same sequence of
 * IEEE-754 operations per output element (vectorization runs across independent output columns,
 * never across a reduction, and no fused multiply-add is used), so all variants are bit-identical
 * to the scalar reference. Tests enforce this equivalence.
 */
namespace uqlab::simd
{
	enum class Level
	{
		scalar,
		avx2,
		neon
	};

	struct AdamCoefficients
	{
		double learning_rate;
		double beta1;
		double beta2;
		double epsilon;
		double bias_correction1; // 1 - beta1^t
		double bias_correction2; // 1 - beta2^t
	};

	struct KernelTable
	{
			Level level;

			/// c[m x n] = row_init (broadcast to every row, or zeros if null) + a[m x k] * b[k x n].
			void (*matmul)(const double *a, const double *b, const double *row_init, double *c, std::size_t m, std::size_t k, std::size_t n);
			/// c[k x n] += transpose(a[m x k]) * d[m x n].
			void (*matmul_tn_accumulate)(const double *a, const double *d, double *c, std::size_t m, std::size_t k, std::size_t n);
			/// out[n] += column sums of d[m x n].
			void (*column_sum_accumulate)(const double *d, double *out, std::size_t m, std::size_t n);
			/// out = z > 0 ? z : +0.0
			void (*relu)(const double *z, double *out, std::size_t n);
			/// grad = z > 0 ? grad : +0.0
			void (*relu_backward)(const double *z, double *grad, std::size_t n);
			/// a *= b
			void (*multiply_inplace)(double *a, const double *b, std::size_t n);
			/// a += b
			void (*add_inplace)(double *a, const double *b, std::size_t n);
			void (*adam_update)(double *params, const double *grads, double *first_moment, double *second_moment, std::size_t n,
					const AdamCoefficients &coefficients);
	};

	std::string_view to_string(Level level) noexcept;
	Level level_from_string(std::string_view name);

	bool is_supported(Level level) noexcept;
	std::vector<Level> supported_levels();

	/// Kernel table for a specific level; throws ConfigError if the level is unavailable here.
	const KernelTable& kernels(Level level);

	/// The table used by the library. Chosen on first use: the UQLAB_SIMD environment variable
	/// (scalar|avx2|neon) if set, otherwise the widest level the CPU supports.
	const KernelTable& active();
	void set_active_level(Level level);
}
