#include <uqlab/rng.hpp>

#include <cmath>
#include <limits>
#include <numbers>

namespace uqlab
{
	namespace
	{
		constexpr std::uint64_t golden_gamma = 0x9E3779B97F4A7C15ull;
		constexpr std::uint64_t stream_salt = 0xD1B54A32D192ED03ull;
		constexpr std::uint64_t fork_salt = 0x632BE59BD9B4E019ull;
	}

	// SplitMix64 finalizer.
	std::uint64_t mix64(std::uint64_t x) noexcept
	{
		x ^= x >> 30;
		x *= 0xBF58476D1CE4E5B9ull;
		x ^= x >> 27;
		x *= 0x94D049BB133111EBull;
		x ^= x >> 31;
		return x;
	}

	RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id) noexcept :
			m_seed(seed),
			m_stream_id(stream_id),
			m_key(mix64(seed ^ mix64(stream_id * golden_gamma + stream_salt)))
	{
	}

	std::uint64_t RngStream::next_u64() noexcept
	{
		m_counter++;
		return mix64(m_key + m_counter * golden_gamma);
	}
	double RngStream::uniform() noexcept
	{
		return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
	}
	double RngStream::uniform(double low, double high) noexcept
	{
		return low + (high - low) * uniform();
	}
	std::uint64_t RngStream::uniform_index(std::uint64_t bound) noexcept
	{
		// rejection keeps the result unbiased
		const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() - std::numeric_limits<std::uint64_t>::max() % bound;
		std::uint64_t x = next_u64();
		while (x >= limit)
			x = next_u64();
		return x % bound;
	}
	std::int64_t RngStream::uniform_int(std::int64_t low, std::int64_t high) noexcept
	{
		const std::uint64_t span = static_cast<std::uint64_t>(high - low) + 1;
		return low + static_cast<std::int64_t>(uniform_index(span));
	}
	double RngStream::normal(double mean, double stddev) noexcept
	{
		// Box-Muller, one variate per call so the stream position stays simple to reason about
		const double u1 = 1.0 - uniform();
		const double u2 = uniform();
		return mean + stddev * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
	}
	bool RngStream::bernoulli(double p) noexcept
	{
		return uniform() < p;
	}
	RngStream RngStream::fork(std::uint64_t child_id) const noexcept
	{
		return RngStream(mix64(m_key ^ fork_salt), child_id);
	}
}
