#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace uqlab
{
	/// Dense row-major matrix of doubles.
	class Matrix
	{
		public:
			Matrix() = default;
			Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
			Matrix(std::size_t rows, std::size_t cols, std::vector<double> values);

			std::size_t rows() const noexcept
			{
				return m_rows;
			}
			std::size_t cols() const noexcept
			{
				return m_cols;
			}
			std::size_t size() const noexcept
			{
				return m_values.size();
			}
			bool empty() const noexcept
			{
				return m_values.empty();
			}

			double* data() noexcept
			{
				return m_values.data();
			}
			const double* data() const noexcept
			{
				return m_values.data();
			}
			std::span<double> values() noexcept
			{
				return m_values;
			}
			std::span<const double> values() const noexcept
			{
				return m_values;
			}

			double& operator()(std::size_t r, std::size_t c) noexcept
			{
				return m_values[r * m_cols + c];
			}
			double operator()(std::size_t r, std::size_t c) const noexcept
			{
				return m_values[r * m_cols + c];
			}

			std::span<double> row(std::size_t r) noexcept
			{
				return std::span<double>(m_values).subspan(r * m_cols, m_cols);
			}
			std::span<const double> row(std::size_t r) const noexcept
			{
				return std::span<const double>(m_values).subspan(r * m_cols, m_cols);
			}

			Matrix transposed() const;
			/// Gathers the given rows into a new matrix, in order.
			Matrix select_rows(std::span<const std::size_t> indices) const;
			bool all_finite() const noexcept;

			friend bool operator==(const Matrix &lhs, const Matrix &rhs) = default;

		private:
			std::size_t m_rows = 0;
			std::size_t m_cols = 0;
			std::vector<double> m_values;
	};
}
