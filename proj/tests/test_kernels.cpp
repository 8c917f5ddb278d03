#include <doctest.h>

#include <uqlab/data/dataset.hpp>
#include <uqlab/errors.hpp>
#include <uqlab/nn/train.hpp>
#include <uqlab/rng.hpp>
#include <uqlab/simd/kernels.hpp>

#include <cmath>
#include <cstring>
#include <vector>

using namespace uqlab;
using simd::Level;

namespace
{
	std::vector<double> random_values(RngStream &rng, std::size_t n)
	{
		std::vector<double> v(n);
		for (auto &x : v)
		{
			const double kind = rng.uniform();
			x = kind < 0.1 ? 0.0 : (kind < 0.15 ? -0.0 : rng.normal(0.0, 2.0));
		}
		return v;
	}

	bool bitwise_equal(const std::vector<double> &a, const std::vector<double> &b)
	{
		return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
	}

	const std::size_t shapes[] = { 1, 2, 3, 4, 5, 7, 8, 9, 13, 16, 17 };
}

TEST_CASE("every supported level matches the scalar kernels bit for bit")
{
	const auto &ref = simd::kernels(Level::scalar);
	RngStream rng(2024, 0);
	for (Level level : simd::supported_levels())
	{
		CAPTURE(simd::to_string(level));
		const auto &k = simd::kernels(level);
		CHECK(k.level == level);
		for (std::size_t m : { 1, 3, 8 })
			for (std::size_t inner : { 1, 5, 16 })
				for (std::size_t n : shapes)
				{
					const auto a = random_values(rng, m * inner), b = random_values(rng, inner * n), init = random_values(rng, n);
					std::vector<double> c_ref(m * n), c(m * n);
					ref.matmul(a.data(), b.data(), init.data(), c_ref.data(), m, inner, n);
					k.matmul(a.data(), b.data(), init.data(), c.data(), m, inner, n);
					CHECK(bitwise_equal(c_ref, c));
					ref.matmul(a.data(), b.data(), nullptr, c_ref.data(), m, inner, n);
					k.matmul(a.data(), b.data(), nullptr, c.data(), m, inner, n);
					CHECK(bitwise_equal(c_ref, c));

					const auto d = random_values(rng, m * n);
					auto acc_ref = random_values(rng, inner * n), acc = acc_ref;
					ref.matmul_tn_accumulate(a.data(), d.data(), acc_ref.data(), m, inner, n);
					k.matmul_tn_accumulate(a.data(), d.data(), acc.data(), m, inner, n);
					CHECK(bitwise_equal(acc_ref, acc));

					auto sums_ref = random_values(rng, n), sums = sums_ref;
					ref.column_sum_accumulate(d.data(), sums_ref.data(), m, n);
					k.column_sum_accumulate(d.data(), sums.data(), m, n);
					CHECK(bitwise_equal(sums_ref, sums));
				}

		for (std::size_t n : shapes)
		{
			const auto z = random_values(rng, n), other = random_values(rng, n);
			std::vector<double> out_ref(n), out(n);
			ref.relu(z.data(), out_ref.data(), n);
			k.relu(z.data(), out.data(), n);
			CHECK(bitwise_equal(out_ref, out));

			auto g_ref = other, g = other;
			ref.relu_backward(z.data(), g_ref.data(), n);
			k.relu_backward(z.data(), g.data(), n);
			CHECK(bitwise_equal(g_ref, g));

			auto p_ref = z, p = z;
			ref.multiply_inplace(p_ref.data(), other.data(), n);
			k.multiply_inplace(p.data(), other.data(), n);
			CHECK(bitwise_equal(p_ref, p));
			p_ref = z;
			p = z;
			ref.add_inplace(p_ref.data(), other.data(), n);
			k.add_inplace(p.data(), other.data(), n);
			CHECK(bitwise_equal(p_ref, p));

			auto params_ref = random_values(rng, n), params = params_ref;
			auto m1_ref = random_values(rng, n), m1 = m1_ref;
			auto m2_ref = random_values(rng, n);
			for (auto &v : m2_ref)
				v = std::abs(v);
			auto m2 = m2_ref;
			const simd::AdamCoefficients coeff { 0.001, 0.9, 0.999, 1e-8, 1.0 - std::pow(0.9, 3), 1.0 - std::pow(0.999, 3) };
			ref.adam_update(params_ref.data(), other.data(), m1_ref.data(), m2_ref.data(), n, coeff);
			k.adam_update(params.data(), other.data(), m1.data(), m2.data(), n, coeff);
			CHECK(bitwise_equal(params_ref, params));
			CHECK(bitwise_equal(m1_ref, m1));
			CHECK(bitwise_equal(m2_ref, m2));
		}
	}
}

TEST_CASE("relu maps negative zero and negatives to positive zero")
{
	for (Level level : simd::supported_levels())
	{
		const std::vector<double> z { -0.0, -1.0, 0.0, 2.5, -3.0 };
		std::vector<double> out(z.size());
		simd::kernels(level).relu(z.data(), out.data(), z.size());
		for (std::size_t i = 0; i < z.size(); i++)
		{
			CHECK_FALSE(std::signbit(out[i]));
			CHECK(out[i] == (z[i] > 0 ? z[i] : 0.0));
		}
	}
}

TEST_CASE("training gives identical parameters under every kernel level")
{
	RngStream data_rng(5, 1);
	const auto ds = data::synthetic_blobs(200, 5, 3.0, 1.0, data_rng);
	nn::MlpArchitecture arch;
	arch.input_dim = 5;
	arch.hidden_sizes = { 13, 7 };
	arch.seed = 11;
	nn::TrainOptions options;
	options.epochs = 3;
	options.batch_size = 17;

	const Level original = simd::active().level;
	simd::set_active_level(Level::scalar);
	const nn::Model reference = nn::train(arch, ds, options, RngStream(arch.seed, 0));
	for (Level level : simd::supported_levels())
	{
		simd::set_active_level(level);
		CHECK(nn::train(arch, ds, options, RngStream(arch.seed, 0)) == reference);
	}
	simd::set_active_level(original);
}

TEST_CASE("level names and availability")
{
	CHECK(simd::level_from_string("scalar") == Level::scalar);
	CHECK(simd::level_from_string("avx2") == Level::avx2);
	CHECK(simd::level_from_string("neon") == Level::neon);
	CHECK_THROWS_AS(simd::level_from_string("sse9"), ConfigError);
	CHECK(simd::is_supported(Level::scalar));
	CHECK(simd::supported_levels().front() == Level::scalar);
	for (Level level : { Level::avx2, Level::neon })
		if (!simd::is_supported(level))
			CHECK_THROWS_AS(simd::kernels(level), ConfigError);
}
