#include <uqlab/matrix.hpp>
#include <uqlab/errors.hpp>

#include <algorithm>
#include <cmath>
#include <string>

namespace uqlab
{
	Matrix::Matrix(std::size_t rows, std::size_t cols, double fill) :
			m_rows(rows),
			m_cols(cols),
			m_values(rows * cols, fill)
	{
	}
	Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> values) :
			m_rows(rows),
			m_cols(cols),
			m_values(std::move(values))
	{
		if (m_values.size() != rows * cols)
			throw DimensionError("matrix of shape " + std::to_string(rows) + "x" + std::to_string(cols) + " cannot hold "
					+ std::to_string(m_values.size()) + " values");
	}

	Matrix Matrix::transposed() const
	{
		Matrix result(m_cols, m_rows);
		for (std::size_t r = 0; r < m_rows; r++)
			for (std::size_t c = 0; c < m_cols; c++)
				result(c, r) = (*this)(r, c);
		return result;
	}
	Matrix Matrix::select_rows(std::span<const std::size_t> indices) const
	{
		Matrix result(indices.size(), m_cols);
		for (std::size_t i = 0; i < indices.size(); i++)
		{
			if (indices[i] >= m_rows)
				throw DimensionError("row index " + std::to_string(indices[i]) + " out of range");
			std::copy_n(m_values.begin() + indices[i] * m_cols, m_cols, result.m_values.begin() + i * m_cols);
		}
		return result;
	}
	bool Matrix::all_finite() const noexcept
	{
		return std::all_of(m_values.begin(), m_values.end(), [](double x)
		{	return std::isfinite(x);});
	}
}
