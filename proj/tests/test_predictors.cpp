#include <doctest.h>

#include "oracles.hpp"

#include <uqlab/data/dataset.hpp>
#include <uqlab/errors.hpp>
#include <uqlab/nn/train.hpp>
#include <uqlab/uq/ensemble_io.hpp>
#include <uqlab/uq/predictors.hpp>

#include <cmath>
#include <filesystem>
#include <numbers>

using namespace uqlab;
using uq::LogBase;

namespace
{
	// Network with no hidden layer whose softmax is [p0, 1 - p0] for every input.
	nn::Model constant_model(double p0, std::size_t input_dim = 2)
	{
		nn::Model m;
		m.architecture.input_dim = input_dim;
		m.architecture.hidden_sizes = { };
		RngStream rng(1, 0);
		m.params = nn::init_params(m.architecture, rng).zeros_like();
		m.params.layers[0].bias = { p0 == 0.0 ? -1000.0 : std::log(p0), p0 == 1.0 ? -1000.0 : std::log(1.0 - p0) };
		return m;
	}

	nn::Model random_model(std::uint64_t seed, std::size_t input_dim, std::vector<std::size_t> hidden, double retain)
	{
		nn::Model m;
		m.architecture.input_dim = input_dim;
		m.architecture.hidden_sizes = std::move(hidden);
		m.architecture.dropout_retain = retain;
		m.architecture.seed = seed;
		RngStream rng(seed, 0);
		m.params = nn::init_params(m.architecture, rng);
		return m;
	}

	Matrix random_inputs(RngStream &rng, std::size_t rows, std::size_t cols)
	{
		Matrix x(rows, cols);
		for (double &v : x.values())
			v = rng.normal(0.0, 2.0);
		return x;
	}

	bool same_distributions(const std::vector<uq::PredictiveDistribution> &a, const std::vector<uq::PredictiveDistribution> &b)
	{
		if (a.size() != b.size())
			return false;
		for (std::size_t i = 0; i < a.size(); i++)
			if (a[i].mean_probs != b[i].mean_probs || a[i].predictive_entropy != b[i].predictive_entropy || a[i].predicted_class != b[i].predicted_class)
				return false;
		return true;
	}

	double round4(double v)
	{
		return std::round(v * 1e4) / 1e4;
	}
}

TEST_SUITE("predictive_entropy")
{
	TEST_CASE("coin flip is ln 2, the quoted 0.69")
	{
		const double h = uq::predictive_entropy(std::vector<double> { 0.5, 0.5 });
		CHECK(std::abs(h - std::numbers::ln2) <= 1e-12);
		CHECK(std::round(h * 100) / 100 == 0.69);
		CHECK(uq::predictive_entropy(std::vector<double> { 0.5, 0.5 }, LogBase::base2) == doctest::Approx(1.0).epsilon(1e-15));
	}

	TEST_CASE("one-hot is exactly zero")
	{
		CHECK(uq::predictive_entropy(std::vector<double> { 1.0, 0.0 }) == 0.0);
		CHECK(uq::predictive_entropy(std::vector<double> { 0.0, 1.0 }) == 0.0);
		CHECK_FALSE(std::signbit(uq::predictive_entropy(std::vector<double> { 1.0, 0.0 })));
	}

	TEST_CASE("[0.75, 0.25]")
	{
		const double h = uq::predictive_entropy(std::vector<double> { 0.75, 0.25 });
		CHECK(h == doctest::Approx(oracle::entropy( { 0.75, 0.25 })).epsilon(1e-14));
		CHECK(round4(h) == 0.5623);
	}

	TEST_CASE("invalid inputs")
	{
		CHECK_THROWS_AS(uq::predictive_entropy(std::vector<double> { -0.1, 1.1 }), DataError);
		CHECK_THROWS_AS(uq::predictive_entropy(std::vector<double> { 0.5, 0.6 }), DataError);
		CHECK_THROWS_AS(uq::predictive_entropy(std::vector<double> { NAN, 1.0 }), DataError);
	}

	TEST_CASE("bounded by ln 2 on random distributions")
	{
		RngStream rng(1, 0);
		for (int i = 0; i < 100000; i++)
		{
			const double p = rng.uniform();
			const double h = uq::predictive_entropy(std::vector<double> { p, 1.0 - p });
			REQUIRE(h >= 0.0);
			REQUIRE(h <= std::numbers::ln2 + 1e-12);
		}
	}
}

TEST_SUITE("mcd_predict")
{
	TEST_CASE("retain 1 makes every pass identical")
	{
		const auto model = random_model(3, 4, { 6, 5 }, 1.0);
		RngStream rng(2, 0);
		const auto x = random_inputs(rng, 7, 4);
		uq::PredictOptions opts;
		opts.keep_samples = true;
		const auto dists = uq::mcd_predict(model, x, 9, RngStream(5, 5), opts);
		const auto single = nn::softmax(nn::predict_logits(model.params, x));
		for (std::size_t r = 0; r < dists.size(); r++)
		{
			for (const auto &s : dists[r].samples)
			{
				CHECK(s[0] == single(r, 0));
				CHECK(s[1] == single(r, 1));
			}
			// zero sample variance, so the mean is the single pass
			CHECK(dists[r].mean_probs[0] == doctest::Approx(single(r, 0)).epsilon(1e-15));
			CHECK(dists[r].predictive_entropy == doctest::Approx(uq::predictive_entropy(single.row(r))).epsilon(1e-12));
		}
	}

	TEST_CASE("two passes [0.9, 0.1] and [0.7, 0.3] average to PE 0.5004")
	{
		std::vector<uq::ClassProbs> passes { { 0.9, 0.1 }, { 0.7, 0.3 } };
		const uq::ClassProbs mean { (0.9 + 0.7) / 2, (0.1 + 0.3) / 2 };
		const auto d = uq::make_distribution(mean, LogBase::natural, passes);
		CHECK(d.mean_probs[0] == doctest::Approx(0.8));
		CHECK(d.predicted_class == 0);
		CHECK(d.predictive_entropy == doctest::Approx(oracle::entropy( { 0.8, 0.2 })).epsilon(1e-14));
		CHECK(round4(d.predictive_entropy) == 0.5004);
	}

	TEST_CASE("samples average to the reported mean")
	{
		const auto model = random_model(4, 3, { 8 }, 0.6);
		RngStream rng(3, 0);
		const auto x = random_inputs(rng, 20, 3);
		uq::PredictOptions opts;
		opts.keep_samples = true;
		for (const auto &d : uq::mcd_predict(model, x, 25, RngStream(1, 5), opts))
		{
			REQUIRE(d.samples.size() == 25);
			double s0 = 0.0;
			for (const auto &s : d.samples)
				s0 += s[0];
			CHECK(std::abs(s0 / 25.0 - d.mean_probs[0]) <= 1e-12);
			CHECK(d.predictive_entropy == doctest::Approx(oracle::entropy( { d.mean_probs[0], d.mean_probs[1] })).epsilon(1e-12));
		}
	}

	TEST_CASE("frozen masks reduce to a single pass")
	{
		const auto model = random_model(5, 3, { 8, 4 }, 0.5);
		RngStream rng(4, 0);
		const auto x = random_inputs(rng, 6, 3);
		const auto masks = nn::sample_dropout_masks(model.params, 6, 0.5, rng);
		const auto single = nn::softmax(nn::forward(model.params, x, masks).logits);
		const auto dists = uq::mcd_predict_frozen(model, x, 12, masks);
		for (std::size_t r = 0; r < 6; r++)
		{
			CHECK(dists[r].mean_probs[0] == doctest::Approx(single(r, 0)).epsilon(1e-15));
			CHECK(dists[r].mean_probs[1] == doctest::Approx(single(r, 1)).epsilon(1e-15));
		}
	}

	TEST_CASE("T = 0 is a configuration error")
	{
		const auto model = random_model(6, 2, { 3 }, 0.75);
		CHECK_THROWS_AS(uq::mcd_predict(model, Matrix(1, 2), 0, RngStream(1, 1)), ConfigError);
	}

	TEST_CASE("a confident in-distribution sample has low entropy")
	{
		RngStream data_rng(7, 1);
		const auto ds = data::synthetic_blobs(600, 2, 6.0, 1.0, data_rng);
		nn::MlpArchitecture arch;
		arch.input_dim = 2;
		arch.hidden_sizes = { 16 };
		arch.seed = 3;
		nn::TrainOptions options;
		options.epochs = 30;
		const auto model = nn::train(arch, ds, options, RngStream(3, 0));
		// centre of class 1 sits at +3 on the first axis
		const Matrix centre(1, 2, std::vector<double> { 3.0, 0.0 });
		const auto d = uq::mcd_predict(model, centre, 100, RngStream(9, 5)).front();
		CHECK(d.predicted_class == 1);
		CHECK(d.predictive_entropy < 0.12);
	}
}

TEST_SUITE("build_ensemble")
{
	TEST_CASE("one member, deterministic lists")
	{
		uq::EnsembleSpec spec;
		spec.member_count = 1;
		spec.base_seed = 5;
		CHECK(uq::build_ensemble(spec, 10, 0.75).size() == 1);
		spec.member_count = 12;
		CHECK(uq::build_ensemble(spec, 10, 0.75) == uq::build_ensemble(spec, 10, 0.75));
		spec.base_seed = 6;
		const auto other = uq::build_ensemble(spec, 10, 0.75);
		spec.base_seed = 5;
		CHECK_FALSE(other == uq::build_ensemble(spec, 10, 0.75));
	}

	TEST_CASE("full-scale ensemble spec: depth frequency and width ranges over 10^4 members")
	{
		uq::EnsembleSpec spec; // 30 members by default; widen to 10^4 for the frequency check
		spec.member_count = 10000;
		spec.base_seed = 2024;
		const auto archs = uq::build_ensemble(spec, 2352, 0.75);
		std::size_t depth2 = 0;
		std::vector<std::uint64_t> seeds;
		for (const auto &a : archs)
		{
			REQUIRE((a.hidden_sizes.size() == 2 || a.hidden_sizes.size() == 3));
			depth2 += a.hidden_sizes.size() == 2;
			for (std::size_t j = 0; j < a.hidden_sizes.size(); j++)
			{
				REQUIRE(a.hidden_sizes[j] >= spec.width_ranges[j].first);
				REQUIRE(a.hidden_sizes[j] <= spec.width_ranges[j].second);
			}
			CHECK(a.dropout_retain == 0.75);
			CHECK(a.input_dim == 2352);
			seeds.push_back(a.seed);
		}
		const double fraction = static_cast<double>(depth2) / 10000.0;
		CHECK(fraction >= 0.49);
		CHECK(fraction <= 0.51);
		std::sort(seeds.begin(), seeds.end());
		CHECK(std::adjacent_find(seeds.begin(), seeds.end()) == seeds.end());
	}

	TEST_CASE("invalid specs")
	{
		uq::EnsembleSpec spec;
		spec.depth_choices.clear();
		CHECK_THROWS_AS(uq::build_ensemble(spec, 4, 0.75), ConfigError);
		spec = { };
		spec.member_count = 0;
		CHECK_THROWS_AS(uq::build_ensemble(spec, 4, 0.75), ConfigError);
		spec = { };
		spec.width_ranges[1] = { 10, 10 };
		CHECK_THROWS_AS(uq::build_ensemble(spec, 4, 0.75), ConfigError);
		spec = { };
		spec.depth_choices = { 4 };
		CHECK_THROWS_AS(uq::build_ensemble(spec, 4, 0.75), ConfigError);
	}
}

TEST_SUITE("ensemble_predict")
{
	TEST_CASE("single member equals its plain prediction")
	{
		const auto model = random_model(8, 3, { 5 }, 0.75);
		RngStream rng(5, 0);
		const auto x = random_inputs(rng, 10, 3);
		const auto dists = uq::ensemble_predict(std::vector<nn::Model> { model }, x);
		const auto probs = nn::softmax(nn::predict_logits(model.params, x));
		for (std::size_t r = 0; r < 10; r++)
		{
			CHECK(dists[r].mean_probs[0] == probs(r, 0));
			CHECK(dists[r].mean_probs[1] == probs(r, 1));
		}
	}

	TEST_CASE("total disagreement is maximal entropy")
	{
		const std::vector<nn::Model> members { constant_model(1.0), constant_model(0.0) };
		const auto d = uq::ensemble_predict(members, Matrix(1, 2)).front();
		CHECK(d.mean_probs[0] == 0.5);
		CHECK(d.mean_probs[1] == 0.5);
		CHECK(d.predictive_entropy == doctest::Approx(std::numbers::ln2).epsilon(1e-15));
	}

	TEST_CASE("members [0.9, 0.1], [0.8, 0.2], [0.7, 0.3] give PE 0.5004")
	{
		const std::vector<nn::Model> members { constant_model(0.9), constant_model(0.8), constant_model(0.7) };
		uq::PredictOptions opts;
		opts.keep_samples = true;
		const auto d = uq::ensemble_predict(members, Matrix(1, 2), opts).front();
		CHECK(d.mean_probs[0] == doctest::Approx(0.8).epsilon(1e-14));
		CHECK(round4(d.predictive_entropy) == 0.5004);
		CHECK(d.samples.size() == 3);
	}

	TEST_CASE("heterogeneous input dims are a configuration error")
	{
		const std::vector<nn::Model> members { constant_model(0.9, 2), constant_model(0.8, 3) };
		CHECK_THROWS_AS(uq::ensemble_predict(members, Matrix(1, 2)), ConfigError);
	}
}

TEST_SUITE("emcd_predict")
{
	TEST_CASE("one member reduces to MC-Dropout")
	{
		const auto model = random_model(9, 4, { 7, 5 }, 0.7);
		RngStream rng(6, 0);
		const auto x = random_inputs(rng, 12, 4);
		const RngStream stream(33, 6);
		const auto emcd = uq::emcd_predict(std::vector<nn::Model> { model }, x, 15, stream);
		const auto mcd = uq::mcd_predict(model, x, 15, stream.fork(0));
		CHECK(same_distributions(emcd, mcd));
	}

	TEST_CASE("T = 1 with retain 1 reduces to the ensemble")
	{
		std::vector<nn::Model> members;
		for (std::uint64_t s = 0; s < 4; s++)
			members.push_back(random_model(10 + s, 4, { 6 + s, 3 }, 1.0));
		RngStream rng(7, 0);
		const auto x = random_inputs(rng, 12, 4);
		CHECK(same_distributions(uq::emcd_predict(members, x, 1, RngStream(1, 6)), uq::ensemble_predict(members, x)));
	}

	TEST_CASE("member means [0.9, 0.1] and [0.5, 0.5] give PE 0.6109")
	{
		const std::vector<nn::Model> members { constant_model(0.9), constant_model(0.5) };
		const auto d = uq::emcd_predict(members, Matrix(1, 2), 2, RngStream(1, 6)).front();
		CHECK(d.mean_probs[0] == doctest::Approx(0.7).epsilon(1e-14));
		CHECK(d.predictive_entropy == doctest::Approx(oracle::entropy( { 0.7, 0.3 })).epsilon(1e-12));
		CHECK(round4(d.predictive_entropy) == 0.6109);
	}

	TEST_CASE("member order and thread count do not change the result")
	{
		std::vector<nn::Model> members;
		for (std::uint64_t s = 0; s < 5; s++)
			members.push_back(random_model(20 + s, 3, { 5 + s }, 0.6));
		RngStream rng(8, 0);
		const auto x = random_inputs(rng, 9, 3);
		const RngStream stream(4, 6);
		const auto serial = uq::emcd_member_means(members, x, 7, stream, 1);
		const auto threaded = uq::emcd_member_means(members, x, 7, stream, 4);
		CHECK(serial == threaded);
		for (std::size_t k = members.size(); k-- > 0;)
		{
			RngStream member_rng = stream.fork(k);
			CHECK(uq::mc_mean_probs(members[k], x, 7, member_rng) == serial[k]);
		}
		uq::PredictOptions opts;
		opts.threads = 3;
		CHECK(same_distributions(uq::emcd_predict(members, x, 7, stream), uq::emcd_predict(members, x, 7, stream, opts)));
	}
}

TEST_SUITE("properties")
{
	TEST_CASE("entropy of the mean is at least the mean entropy")
	{
		RngStream rng(9, 0);
		for (int set = 0; set < 1000; set++)
		{
			const std::size_t n = 1 + rng.uniform_index(30);
			double mean0 = 0.0, mean_h = 0.0;
			for (std::size_t i = 0; i < n; i++)
			{
				const double p = rng.uniform();
				mean0 += p;
				mean_h += uq::predictive_entropy(std::vector<double> { p, 1.0 - p });
			}
			mean0 /= static_cast<double>(n);
			mean_h /= static_cast<double>(n);
			REQUIRE(uq::predictive_entropy(std::vector<double> { mean0, 1.0 - mean0 }) >= mean_h - 1e-12);
		}
	}

	TEST_CASE("predicted class does not depend on the log base")
	{
		RngStream rng(10, 0);
		for (int i = 0; i < 1000; i++)
		{
			const double p = rng.uniform();
			const auto a = uq::make_distribution( { p, 1.0 - p }, LogBase::natural);
			const auto b = uq::make_distribution( { p, 1.0 - p }, LogBase::base2);
			REQUIRE(a.predicted_class == b.predicted_class);
			REQUIRE(b.predictive_entropy == doctest::Approx(a.predictive_entropy / std::numbers::ln2).epsilon(1e-12));
		}
	}

	TEST_CASE("all predictors emit normalised means on 10^4 random inputs")
	{
		std::vector<nn::Model> members;
		for (std::uint64_t s = 0; s < 3; s++)
			members.push_back(random_model(40 + s, 5, { 8, 4 }, 0.75));
		RngStream rng(11, 0);
		const auto x = random_inputs(rng, 10000, 5);
		for (const auto &dists : { uq::mcd_predict(members[0], x, 3, RngStream(1, 5)), uq::ensemble_predict(members, x), uq::emcd_predict(members,
				x, 3, RngStream(1, 6)) })
			for (const auto &d : dists)
			{
				REQUIRE(std::abs(d.mean_probs[0] + d.mean_probs[1] - 1.0) <= 1e-9);
				REQUIRE(d.mean_probs[0] >= 0.0);
				REQUIRE(d.mean_probs[1] >= 0.0);
				REQUIRE(d.predictive_entropy >= 0.0);
				REQUIRE(d.predictive_entropy <= std::numbers::ln2 + 1e-12);
				REQUIRE(d.predicted_class == (d.mean_probs[1] > d.mean_probs[0] ? 1 : 0));
			}
	}
}

TEST_CASE("to_records carries label, class, confidence and entropy")
{
	const std::vector<nn::Model> members { constant_model(0.3) };
	const auto dists = uq::ensemble_predict(members, Matrix(2, 2));
	const auto records = uq::to_records(dists, std::vector<int> { 1, 0 });
	REQUIRE(records.size() == 2);
	CHECK(records[0].predicted_label == 1);
	CHECK(records[0].correct());
	CHECK_FALSE(records[1].correct());
	CHECK(records[0].confidence == doctest::Approx(0.7).epsilon(1e-14));
	CHECK(records[0].entropy == dists[0].predictive_entropy);
	CHECK_THROWS_AS(uq::to_records(dists, std::vector<int> { 1 }), DimensionError);
}

TEST_CASE("ensemble directories round-trip")
{
	uq::EnsembleSpec spec;
	spec.member_count = 3;
	spec.width_ranges = { { 4, 8 }, { 3, 6 }, { 2, 4 } };
	spec.base_seed = 11;
	uq::EnsembleBundle bundle { spec, { }, data::StandardizationStats { { 0.5, 1.0 / 3.0 }, { 2.0, 1.0 } } };
	for (const auto &arch : uq::build_ensemble(spec, 2, 0.75))
	{
		RngStream rng(arch.seed, 0);
		bundle.members.push_back( { arch, nn::init_params(arch, rng) });
	}
	const auto dir = std::filesystem::temp_directory_path() / "uqlab_test_ensemble";
	std::filesystem::remove_all(dir);
	uq::save_ensemble(bundle, dir);
	const auto loaded = uq::load_ensemble(dir);
	CHECK(loaded.spec == spec);
	CHECK(loaded.members == bundle.members);
	REQUIRE(loaded.standardization.has_value());
	CHECK(loaded.standardization->mean == bundle.standardization->mean);
	std::filesystem::remove_all(dir);
	CHECK_THROWS_AS(uq::load_ensemble(dir), IoError);
}
