#include "kernel_variants.hpp"

#include <cmath>
#include <immintrin.h>

namespace
{
	using uqlab::simd::AdamCoefficients;

	constexpr std::size_t lanes = 4;

	// Row update c_row += scale * b_row; identical per-element arithmetic to the scalar loop.
	inline void axpy_row(double *c_row, const double *b_row, double scale, std::size_t n)
	{
		const __m256d vscale = _mm256_set1_pd(scale);
		std::size_t j = 0;
		for (; j + lanes <= n; j += lanes)
		{
			const __m256d prod = _mm256_mul_pd(vscale, _mm256_loadu_pd(b_row + j));
			_mm256_storeu_pd(c_row + j, _mm256_add_pd(_mm256_loadu_pd(c_row + j), prod));
		}
		for (; j < n; j++)
			c_row[j] = c_row[j] + scale * b_row[j];
	}

	void matmul(const double *a, const double *b, const double *row_init, double *c, std::size_t m, std::size_t k, std::size_t n)
	{
		for (std::size_t i = 0; i < m; i++)
		{
			double *c_row = c + i * n;
			for (std::size_t j = 0; j < n; j++)
				c_row[j] = (row_init != nullptr) ? row_init[j] : 0.0;
			for (std::size_t p = 0; p < k; p++)
				axpy_row(c_row, b + p * n, a[i * k + p], n);
		}
	}
	void matmul_tn_accumulate(const double *a, const double *d, double *c, std::size_t m, std::size_t k, std::size_t n)
	{
		for (std::size_t i = 0; i < m; i++)
			for (std::size_t p = 0; p < k; p++)
				axpy_row(c + p * n, d + i * n, a[i * k + p], n);
	}
	void column_sum_accumulate(const double *d, double *out, std::size_t m, std::size_t n)
	{
		for (std::size_t i = 0; i < m; i++)
		{
			const double *d_row = d + i * n;
			std::size_t j = 0;
			for (; j + lanes <= n; j += lanes)
				_mm256_storeu_pd(out + j, _mm256_add_pd(_mm256_loadu_pd(out + j), _mm256_loadu_pd(d_row + j)));
			for (; j < n; j++)
				out[j] = out[j] + d_row[j];
		}
	}
	void relu(const double *z, double *out, std::size_t n)
	{
		const __m256d zero = _mm256_setzero_pd();
		std::size_t i = 0;
		for (; i + lanes <= n; i += lanes)
		{
			const __m256d x = _mm256_loadu_pd(z + i);
			// and-mask instead of max_pd so that -0.0 and NaN map exactly like the scalar ternary
			_mm256_storeu_pd(out + i, _mm256_and_pd(_mm256_cmp_pd(x, zero, _CMP_GT_OQ), x));
		}
		for (; i < n; i++)
			out[i] = (z[i] > 0.0) ? z[i] : 0.0;
	}
	void relu_backward(const double *z, double *grad, std::size_t n)
	{
		const __m256d zero = _mm256_setzero_pd();
		std::size_t i = 0;
		for (; i + lanes <= n; i += lanes)
		{
			const __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(z + i), zero, _CMP_GT_OQ);
			_mm256_storeu_pd(grad + i, _mm256_and_pd(mask, _mm256_loadu_pd(grad + i)));
		}
		for (; i < n; i++)
			grad[i] = (z[i] > 0.0) ? grad[i] : 0.0;
	}
	void multiply_inplace(double *a, const double *b, std::size_t n)
	{
		std::size_t i = 0;
		for (; i + lanes <= n; i += lanes)
			_mm256_storeu_pd(a + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
		for (; i < n; i++)
			a[i] = a[i] * b[i];
	}
	void add_inplace(double *a, const double *b, std::size_t n)
	{
		std::size_t i = 0;
		for (; i + lanes <= n; i += lanes)
			_mm256_storeu_pd(a + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
		for (; i < n; i++)
			a[i] = a[i] + b[i];
	}
	void adam_update(double *params, const double *grads, double *first_moment, double *second_moment, std::size_t n,
			const AdamCoefficients &c)
	{
		const double one_minus_beta1 = 1.0 - c.beta1;
		const double one_minus_beta2 = 1.0 - c.beta2;
		const __m256d b1 = _mm256_set1_pd(c.beta1);
		const __m256d b2 = _mm256_set1_pd(c.beta2);
		const __m256d omb1 = _mm256_set1_pd(one_minus_beta1);
		const __m256d omb2 = _mm256_set1_pd(one_minus_beta2);
		const __m256d bc1 = _mm256_set1_pd(c.bias_correction1);
		const __m256d bc2 = _mm256_set1_pd(c.bias_correction2);
		const __m256d lr = _mm256_set1_pd(c.learning_rate);
		const __m256d eps = _mm256_set1_pd(c.epsilon);

		std::size_t i = 0;
		for (; i + lanes <= n; i += lanes)
		{
			const __m256d g = _mm256_loadu_pd(grads + i);
			const __m256d m = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(first_moment + i)), _mm256_mul_pd(omb1, g));
			const __m256d v = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(second_moment + i)), _mm256_mul_pd(omb2, _mm256_mul_pd(g, g)));
			_mm256_storeu_pd(first_moment + i, m);
			_mm256_storeu_pd(second_moment + i, v);
			const __m256d m_hat = _mm256_div_pd(m, bc1);
			const __m256d v_hat = _mm256_div_pd(v, bc2);
			const __m256d step = _mm256_div_pd(_mm256_mul_pd(lr, m_hat), _mm256_add_pd(_mm256_sqrt_pd(v_hat), eps));
			_mm256_storeu_pd(params + i, _mm256_sub_pd(_mm256_loadu_pd(params + i), step));
		}
		for (; i < n; i++)
		{
			const double g = grads[i];
			const double m = c.beta1 * first_moment[i] + one_minus_beta1 * g;
			const double v = c.beta2 * second_moment[i] + one_minus_beta2 * (g * g);
			first_moment[i] = m;
			second_moment[i] = v;
			const double m_hat = m / c.bias_correction1;
			const double v_hat = v / c.bias_correction2;
			params[i] = params[i] - (c.learning_rate * m_hat) / (std::sqrt(v_hat) + c.epsilon);
		}
	}
}

namespace uqlab::simd::avx2
{
	const KernelTable& table() noexcept
	{
		static const KernelTable result { Level::avx2, matmul, matmul_tn_accumulate, column_sum_accumulate, relu, relu_backward,
				multiply_inplace, add_inplace, adam_update };
		return result;
	}
}
