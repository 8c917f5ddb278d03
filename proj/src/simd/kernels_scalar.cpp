#include "kernel_variants.hpp"

#include <cmath>

namespace
{
	using uqlab::simd::AdamCoefficients;

	void matmul(const double *a, const double *b, const double *row_init, double *c, std::size_t m, std::size_t k, std::size_t n)
	{
		for (std::size_t i = 0; i < m; i++)
		{
			double *c_row = c + i * n;
			for (std::size_t j = 0; j < n; j++)
				c_row[j] = (row_init != nullptr) ? row_init[j] : 0.0;
			for (std::size_t p = 0; p < k; p++)
			{
				const double scale = a[i * k + p];
				const double *b_row = b + p * n;
				for (std::size_t j = 0; j < n; j++)
					c_row[j] = c_row[j] + scale * b_row[j];
			}
		}
	}
	void matmul_tn_accumulate(const double *a, const double *d, double *c, std::size_t m, std::size_t k, std::size_t n)
	{
		for (std::size_t i = 0; i < m; i++)
		{
			const double *d_row = d + i * n;
			for (std::size_t p = 0; p < k; p++)
			{
				const double scale = a[i * k + p];
				double *c_row = c + p * n;
				for (std::size_t j = 0; j < n; j++)
					c_row[j] = c_row[j] + scale * d_row[j];
			}
		}
	}
	void column_sum_accumulate(const double *d, double *out, std::size_t m, std::size_t n)
	{
		for (std::size_t i = 0; i < m; i++)
			for (std::size_t j = 0; j < n; j++)
				out[j] = out[j] + d[i * n + j];
	}
	void relu(const double *z, double *out, std::size_t n)
	{
		for (std::size_t i = 0; i < n; i++)
			out[i] = (z[i] > 0.0) ? z[i] : 0.0;
	}
	void relu_backward(const double *z, double *grad, std::size_t n)
	{
		for (std::size_t i = 0; i < n; i++)
			grad[i] = (z[i] > 0.0) ? grad[i] : 0.0;
	}
	void multiply_inplace(double *a, const double *b, std::size_t n)
	{
		for (std::size_t i = 0; i < n; i++)
			a[i] = a[i] * b[i];
	}
	void add_inplace(double *a, const double *b, std::size_t n)
	{
		for (std::size_t i = 0; i < n; i++)
			a[i] = a[i] + b[i];
	}
	void adam_update(double *params, const double *grads, double *first_moment, double *second_moment, std::size_t n,
			const AdamCoefficients &c)
	{
		const double one_minus_beta1 = 1.0 - c.beta1;
		const double one_minus_beta2 = 1.0 - c.beta2;
		for (std::size_t i = 0; i < n; i++)
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

namespace uqlab::simd::scalar
{
	const KernelTable& table() noexcept
	{
		static const KernelTable result { Level::scalar, matmul, matmul_tn_accumulate, column_sum_accumulate, relu, relu_backward,
				multiply_inplace, add_inplace, adam_update };
		return result;
	}
}
