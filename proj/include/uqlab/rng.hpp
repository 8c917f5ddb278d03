#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>

namespace uqlab
{
	/*
	 * Counter-based random stream. Output i of stream (seed, stream_id) is a pure function of
	 * (seed, stream_id, i), built only from integer arithmetic, so sequences are identical on every
	 * platform and compiler. Distributions are implemented here rather than via <random> because the
	 * standard distributions are implementation-defined.
	 */
	class RngStream
	{
		public:
			RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept;

			std::uint64_t seed() const noexcept
			{
				return m_seed;
			}
			std::uint64_t stream_id() const noexcept
			{
				return m_stream_id;
			}
			std::uint64_t counter() const noexcept
			{
				return m_counter;
			}

			std::uint64_t next_u64() noexcept;
			/// Uniform on [0, 1) with 53 bits of resolution.
			double uniform() noexcept;
			double uniform(double low, double high) noexcept;
			/// Unbiased uniform integer in [0, bound). bound must be positive.
			std::uint64_t uniform_index(std::uint64_t bound) noexcept;
			/// Uniform integer in the closed range [low, high].
			std::int64_t uniform_int(std::int64_t low, std::int64_t high) noexcept;
			double normal(double mean = 0.0, double stddev = 1.0) noexcept;
			bool bernoulli(double p) noexcept;

			/// Child stream that depends only on this stream's identity, not on how far it has advanced.
			RngStream fork(std::uint64_t child_id) const noexcept;

			template<typename T>
			void shuffle(std::span<T> items) noexcept
			{
				for (std::size_t i = items.size(); i > 1; i--)
				{
					const std::size_t j = static_cast<std::size_t>(uniform_index(i));
					std::swap(items[i - 1], items[j]);
				}
			}

			friend bool operator==(const RngStream &lhs, const RngStream &rhs) noexcept = default;

		private:
			std::uint64_t m_seed;
			std::uint64_t m_stream_id;
			std::uint64_t m_key;
			std::uint64_t m_counter = 0;
	};

	std::uint64_t mix64(std::uint64_t x) noexcept;
}
