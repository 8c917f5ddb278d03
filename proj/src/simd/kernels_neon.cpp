#include "kernel_variants.hpp"

#include <arm_neon.h>
#include <cmath>

namespace
{
	using uqlab::simd::AdamCoefficients;

	constexpr std::size_t lanes = 2;

	inline void axpy_row(double *c_row, const double *b_row, double scale, std::size_t n)
	{
		const float64x2_t vscale = vdupq_n_f64(scale);
		std::size_t j = 0;
		for (; j + lanes <= n; j += lanes)
		{
			// separate mul and add: vfmaq would round once and break equivalence with the scalar path
			const float64x2_t prod = vmulq_f64(vscale, vld1q_f64(b_row + j));
			vst1q_f64(c_row + j, vaddq_f64(vld1q_f64(c_row + j), prod));
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
				vst1q_f64(out + j, vaddq_f64(vld1q_f64(out + j), vld1q_f64(d_row + j)));
			for (; j < n; j++)
				out[j] = out[j] + d_row[j];
		}
	}
	void relu(const double *z, double *out, std::size_t n)
	{
		const float64x2_t zero = vdupq_n_f64(0.0);
		std::size_t i = 0;
		for (; i + lanes <= n; i += lanes)
		{
			const float64x2_t x = vld1q_f64(z + i);
			const uint64x2_t mask = vcgtq_f64(x, zero);
			vst1q_f64(out + i, vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(x))));
		}
		for (; i < n; i++)
			out[i] = (z[i] > 0.0) ? z[i] : 0.0;
	}
	void relu_backward(const double *z, double *grad, std::size_t n)
	{
		const float64x2_t zero = vdupq_n_f64(0.0);
		std::size_t i = 0;
		for (; i + lanes <= n; i += lanes)
		{
			const uint64x2_t mask = vcgtq_f64(vld1q_f64(z + i), zero);
			vst1q_f64(grad + i, vreinterpretq_f64_u64(vandq_u64(mask, vreinterpretq_u64_f64(vld1q_f64(grad + i)))));
		}
		for (; i < n; i++)
			grad[i] = (z[i] > 0.0) ? grad[i] : 0.0;
	}
	void multiply_inplace(double *a, const double *b, std::size_t n)
	{
		std::size_t i = 0;
		for (; i + lanes <= n; i += lanes)
			vst1q_f64(a + i, vmulq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
		for (; i < n; i++)
			a[i] = a[i] * b[i];
	}
	void add_inplace(double *a, const double *b, std::size_t n)
	{
		std::size_t i = 0;
		for (; i + lanes <= n; i += lanes)
			vst1q_f64(a + i, vaddq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
		for (; i < n; i++)
			a[i] = a[i] + b[i];
	}
	void adam_update(double *params, const double *grads, double *first_moment, double *second_moment, std::size_t n,
			const AdamCoefficients &c)
	{
		const double one_minus_beta1 = 1.0 - c.beta1;
		const double one_minus_beta2 = 1.0 - c.beta2;
		const float64x2_t b1 = vdupq_n_f64(c.beta1);
		const float64x2_t b2 = vdupq_n_f64(c.beta2);
		const float64x2_t omb1 = vdupq_n_f64(one_minus_beta1);
		const float64x2_t omb2 = vdupq_n_f64(one_minus_beta2);
		const float64x2_t bc1 = vdupq_n_f64(c.bias_correction1);
		const float64x2_t bc2 = vdupq_n_f64(c.bias_correction2);
		const float64x2_t lr = vdupq_n_f64(c.learning_rate);
		const float64x2_t eps = vdupq_n_f64(c.epsilon);

		std::size_t i = 0;
		for (; i + lanes <= n; i += lanes)
		{
			const float64x2_t g = vld1q_f64(grads + i);
			const float64x2_t m = vaddq_f64(vmulq_f64(b1, vld1q_f64(first_moment + i)), vmulq_f64(omb1, g));
			const float64x2_t v = vaddq_f64(vmulq_f64(b2, vld1q_f64(second_moment + i)), vmulq_f64(omb2, vmulq_f64(g, g)));
			vst1q_f64(first_moment + i, m);
			vst1q_f64(second_moment + i, v);
			const float64x2_t m_hat = vdivq_f64(m, bc1);
			const float64x2_t v_hat = vdivq_f64(v, bc2);
			const float64x2_t step = vdivq_f64(vmulq_f64(lr, m_hat), vaddq_f64(vsqrtq_f64(v_hat), eps));
			vst1q_f64(params + i, vsubq_f64(vld1q_f64(params + i), step));
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

namespace uqlab::simd::neon
{
	const KernelTable& table() noexcept
	{
		static const KernelTable result { Level::neon, matmul, matmul_tn_accumulate, column_sum_accumulate, relu, relu_backward,
				multiply_inplace, add_inplace, adam_update };
		return result;
	}
}
