#pragma once

#include <uqlab/simd/kernels.hpp>

namespace uqlab::simd
{
	namespace scalar
	{
		const KernelTable& table() noexcept;
	}
#if defined(UQLAB_BUILD_AVX2)
	namespace avx2
	{
		const KernelTable& table() noexcept;
	}
#endif
#if defined(UQLAB_BUILD_NEON)
	namespace neon
	{
		const KernelTable& table() noexcept;
	}
#endif
}
