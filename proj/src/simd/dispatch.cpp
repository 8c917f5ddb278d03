#include <uqlab/simd/kernels.hpp>
#include <uqlab/errors.hpp>

#include "kernel_variants.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace uqlab::simd
{
	namespace
	{
		bool cpu_has(Level level) noexcept
		{
			switch (level)
			{
				case Level::scalar:
					return true;
				case Level::avx2:
#if defined(UQLAB_BUILD_AVX2)
					return __builtin_cpu_supports("avx2");
#else
					return false;
#endif
				case Level::neon:
#if defined(UQLAB_BUILD_NEON)
					return true; // baseline on aarch64
#else
					return false;
#endif
			}
			return false;
		}

		const KernelTable* pick_default()
		{
			if (const char *env = std::getenv("UQLAB_SIMD"); env != nullptr && *env != '\0')
				return &kernels(level_from_string(env));
			const auto levels = supported_levels();
			return &kernels(levels.back());
		}

		std::atomic<const KernelTable*>& active_slot()
		{
			static std::atomic<const KernelTable*> slot { pick_default() };
			return slot;
		}
	}

	std::string_view to_string(Level level) noexcept
	{
		switch (level)
		{
			case Level::scalar:
				return "scalar";
			case Level::avx2:
				return "avx2";
			case Level::neon:
				return "neon";
		}
		return "unknown";
	}
	Level level_from_string(std::string_view name)
	{
		if (name == "scalar")
			return Level::scalar;
		if (name == "avx2")
			return Level::avx2;
		if (name == "neon")
			return Level::neon;
		throw ConfigError("unknown SIMD level '" + std::string(name) + "' (expected scalar, avx2 or neon)");
	}

	bool is_supported(Level level) noexcept
	{
		return cpu_has(level);
	}
	std::vector<Level> supported_levels()
	{
		std::vector<Level> result;
		for (Level level : { Level::scalar, Level::avx2, Level::neon })
			if (cpu_has(level))
				result.push_back(level);
		return result;
	}

	const KernelTable& kernels(Level level)
	{
		if (!cpu_has(level))
			throw ConfigError("SIMD level '" + std::string(to_string(level)) + "' is not available on this machine or build");
		switch (level)
		{
#if defined(UQLAB_BUILD_AVX2)
			case Level::avx2:
				return avx2::table();
#endif
#if defined(UQLAB_BUILD_NEON)
			case Level::neon:
				return neon::table();
#endif
			default:
				return scalar::table();
		}
	}

	const KernelTable& active()
	{
		return *active_slot().load(std::memory_order_acquire);
	}
	void set_active_level(Level level)
	{
		active_slot().store(&kernels(level), std::memory_order_release);
	}
}
