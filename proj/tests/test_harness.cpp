#include <doctest.h>

#include "golden_schema.hpp"

#include <uqlab/errors.hpp>
#include <uqlab/harness/config.hpp>
#include <uqlab/harness/report.hpp>
#include <uqlab/harness/study.hpp>
#include <uqlab/metrics/records_io.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>

using namespace uqlab;
using namespace uqlab::harness;
namespace fs = std::filesystem;
using nlohmann::json;

namespace
{
	// Seconds-scale variant of the desk profile.
	ExperimentConfig tiny_config()
	{
		ExperimentConfig c = desk_profile();
		c.data.synthetic.n = 400;
		c.data.synthetic.dims = 4;
		c.model.hidden_sizes = { 8 };
		c.model.epochs = 5;
		c.mc_samples = 5;
		c.ensemble.member_count = 3;
		c.repetitions = 2;
		return c;
	}

	fs::path fresh_dir(const std::string &name)
	{
		const auto dir = fs::temp_directory_path() / ("uqlab_test_" + name);
		fs::remove_all(dir);
		return dir;
	}

	std::size_t line_count(const fs::path &path)
	{
		std::ifstream in(path);
		std::size_t n = 0;
		std::string line;
		while (std::getline(in, line))
			n++;
		return n;
	}

	struct ScopedEnv
	{
			explicit ScopedEnv(const char *value)
			{
				if (value)
					::setenv("UQLAB_SEED", value, 1);
				else
					::unsetenv("UQLAB_SEED");
			}
			~ScopedEnv()
			{
				::unsetenv("UQLAB_SEED");
			}
	};
}

TEST_SUITE("config")
{
	TEST_CASE("profiles")
	{
		const auto desk = desk_profile();
		CHECK(desk.spotlight_threshold == 0.4);
		CHECK(desk.repetitions == 10);
		CHECK(desk.data.synthetic.separation == 3.0);
		CHECK(desk.log_base == uq::LogBase::natural);
		CHECK(desk.methods.size() == 3);
		desk.validate();

		const auto paper = paper_profile();
		CHECK(paper.model.hidden_sizes == std::vector<std::size_t> { 512, 256, 64 });
		CHECK(paper.mc_samples == 200);
		CHECK(paper.ensemble.member_count == 30);
		CHECK(paper.repetitions == 100);
		CHECK(paper.model.dropout_retain == 0.75);
		paper.validate();
		CHECK_THROWS_AS(profile_by_name("laptop"), ConfigError);
	}

	TEST_CASE("JSON overlays only the keys present")
	{
		const auto c = config_from_json(json::parse(R"({"mc_samples": 7, "model": {"epochs": 3}, "methods": "mcd,emcd,mcd",
			"thresholds": {"spotlight": 0.5}, "log_base": "base2"})"), desk_profile());
		CHECK(c.mc_samples == 7);
		CHECK(c.model.epochs == 3);
		CHECK(c.model.hidden_sizes == desk_profile().model.hidden_sizes);
		CHECK(c.methods == std::vector<Method> { Method::mcd, Method::emcd });
		CHECK(c.spotlight_threshold == 0.5);
		CHECK(c.log_base == uq::LogBase::base2);

		const auto p = config_from_json(json::parse(R"({"profile": "paper", "repetitions": 3})"), desk_profile());
		CHECK(p.mc_samples == 200);
		CHECK(p.repetitions == 3);

		const auto e = config_from_json(json::parse(R"({"ensemble": {"member_count": 2}})"), desk_profile());
		CHECK(e.ensemble.member_count == 2);
		CHECK(e.ensemble.width_ranges == desk_profile().ensemble.width_ranges);
	}

	TEST_CASE("unknown keys, wrong types and bad values are configuration errors")
	{
		CHECK_THROWS_AS(config_from_json(json::parse(R"({"mc_sample": 7})"), desk_profile()), ConfigError);
		CHECK_THROWS_AS(config_from_json(json::parse(R"({"model": {"depth": 2}})"), desk_profile()), ConfigError);
		CHECK_THROWS_AS(config_from_json(json::parse(R"({"mc_samples": "many"})"), desk_profile()), ConfigError);
		CHECK_THROWS_AS(config_from_json(json::parse(R"({"methods": "bayes"})"), desk_profile()), ConfigError);
		CHECK_THROWS_AS(config_from_json(json::parse(R"({"data": {"source": "s3"}})"), desk_profile()), ConfigError);
		auto bad = desk_profile();
		bad.model.dropout_retain = 0.0;
		CHECK_THROWS_AS(bad.validate(), ConfigError);
		bad = desk_profile();
		bad.mc_samples = 0;
		CHECK_THROWS_AS(bad.validate(), ConfigError);
		bad = desk_profile();
		bad.data.synthetic.n = 41;
		CHECK_THROWS_AS(bad.validate(), ConfigError);
		CHECK_THROWS_AS(load_config("/nonexistent/config.json", desk_profile()), std::exception);
	}

	TEST_CASE("config echo round-trips")
	{
		auto c = tiny_config();
		c.log_base = uq::LogBase::base2;
		c.methods = { Method::ensemble };
		const auto echoed = config_to_json(c);
		CHECK(config_to_json(config_from_json(echoed, paper_profile())) == echoed);
	}

	TEST_CASE("seed precedence: config < environment < flag")
	{
		{
			ScopedEnv env(nullptr);
			CHECK(resolve_seed(42, std::nullopt) == 42);
			CHECK(resolve_seed(42, 9) == 9);
		}
		{
			ScopedEnv env("7");
			CHECK(resolve_seed(42, std::nullopt) == 7);
			CHECK(resolve_seed(42, 9) == 9);
		}
		{
			ScopedEnv env("seven");
			CHECK_THROWS_AS(resolve_seed(42, std::nullopt), ConfigError);
		}
	}
}

TEST_SUITE("studies")
{
	TEST_CASE("two repetitions give two reproducible rows per metric")
	{
		const auto c = tiny_config();
		const auto a = run_base_model_study(c);
		const auto b = run_base_model_study(c);
		REQUIRE(a.base.has_value());
		CHECK(a.base->runs.size() == 2);
		CHECK(a.base->accuracy.count == 2);
		CHECK(a.base->auc->count == 2);
		CHECK(a.methods.empty());
		CHECK(bundle_to_json(a) == bundle_to_json(b));
		const auto table = bundle_to_json(a)["table1"];
		CHECK(table["columns"] == json::array( { "metric", "mean", "std" }));
		CHECK(table["rows"].size() == 4);
	}

	TEST_CASE("desk profile: ten accuracies in (0.5, 1] with spread")
	{
		const auto bundle = run_base_model_study(desk_profile());
		REQUIRE(bundle.base->runs.size() == 10);
		for (const auto &run : bundle.base->runs)
		{
			CHECK(run.accuracy > 0.5);
			CHECK(run.accuracy <= 1.0);
		}
		CHECK(*bundle.base->accuracy.stddev > 0.0);
	}

	TEST_CASE("one selected method gives one section")
	{
		auto c = tiny_config();
		c.methods = { Method::mcd };
		const auto bundle = run_uq_study(c);
		REQUIRE(bundle.methods.size() == 1);
		CHECK(bundle.methods[0].method == Method::mcd);
		CHECK(bundle.methods[0].spotlight.threshold == 0.4);
		CHECK(bundle.methods[0].sweep.size() == 17);
	}

	TEST_CASE("N = 1, T = 1, retain = 1 makes the three methods agree")
	{
		auto c = tiny_config();
		c.ensemble.member_count = 1;
		c.mc_samples = 1;
		c.model.dropout_retain = 1.0;
		const auto bundle = run_uq_study(c);
		REQUIRE(bundle.methods.size() == 3);
		const auto reference = bundle_to_json(bundle)["methods"][0];
		for (std::size_t i = 0; i < 3; i++)
		{
			CHECK(bundle.methods[i].records == bundle.methods[0].records);
			auto section = bundle_to_json(bundle)["methods"][i];
			section.erase("method");
			auto ref = reference;
			ref.erase("method");
			CHECK(section == ref);
		}
	}

	TEST_CASE("incorrect predictions carry more entropy than correct ones")
	{
		const auto bundle = run_uq_study(desk_profile());
		for (const auto &m : bundle.methods)
		{
			REQUIRE(m.histograms.incorrect.mean_entropy.has_value());
			CHECK(*m.histograms.incorrect.mean_entropy > *m.histograms.correct.mean_entropy);
		}
	}
}

TEST_SUITE("reports")
{
	TEST_CASE("a bundle without methods writes only metrics.json and runs.csv")
	{
		const auto dir = fresh_dir("empty_methods");
		auto c = tiny_config();
		c.methods.clear();
		const auto files = emit_reports(run_study(c), dir);
		CHECK(files == std::vector<std::string> { "metrics.json", "runs.csv" });
		CHECK(golden::file_list(dir) == "metrics.json\nruns.csv\n");
		CHECK(line_count(dir / "runs.csv") == 3);
		fs::remove_all(dir);
	}

	TEST_CASE("reliability.csv has one row per bin")
	{
		const auto dir = fresh_dir("bins");
		auto c = tiny_config();
		c.ece_bins = 7;
		c.write_svg = false;
		emit_reports(run_uq_study(c), dir);
		CHECK(line_count(dir / "reliability.csv") == 1 + 7);
		CHECK(line_count(dir / "sweep.csv") == 1 + 3 * 17);
		CHECK(line_count(dir / "entropy_hist.csv") == 1 + 3 * 2 * c.entropy_bins);
		CHECK_FALSE(fs::exists(dir / "reliability.svg"));
		fs::remove_all(dir);
	}

	TEST_CASE("desk report matches the golden schema")
	{
		const auto dir = fresh_dir("golden");
		emit_reports(run_study(desk_profile()), dir);
		for (const auto &m : golden::compare_report(dir, UQLAB_GOLDEN_DIR))
			FAIL(m.what);
		fs::remove_all(dir);
	}

	TEST_CASE("metrics recomputed from the records files equal the report")
	{
		const auto dir = fresh_dir("crosscheck");
		const auto config = tiny_config();
		emit_reports(run_uq_study(config), dir);
		const auto report = json::parse(golden::read_text(dir / "metrics.json"));
		std::size_t i = 0;
		for (Method method : config.methods)
		{
			const auto records = metrics::read_records_csv(dir / ("records_" + to_string(method) + ".csv"));
			const auto again = evaluate_method(method, records, config);
			const auto &section = report["methods"][i++];
			CHECK(section["method"] == to_string(method));
			CHECK(sweep_row_to_json(again.spotlight) == section["spotlight"]);
			CHECK(ece_to_json(again.ece) == section["calibration"]);
			CHECK(classical_to_json(again.classical, again.auc) == section["classical"]);
			REQUIRE(section["sweep"].size() == again.sweep.size());
			for (std::size_t k = 0; k < again.sweep.size(); k++)
				CHECK(sweep_row_to_json(again.sweep[k]) == section["sweep"][k]);
		}
		fs::remove_all(dir);
	}

	TEST_CASE("same config and seed give byte-identical files, whatever the thread count")
	{
		const auto a = fresh_dir("det_a"), b = fresh_dir("det_b"), t = fresh_dir("det_threads");
		auto config = tiny_config();
		emit_reports(run_study(config), a);
		emit_reports(run_study(config), b);
		config.threads = 4;
		emit_reports(run_study(config), t);
		for (const auto &entry : fs::directory_iterator(a))
		{
			const auto name = entry.path().filename();
			CAPTURE(name.string());
			CHECK(golden::read_text(a / name) == golden::read_text(b / name));
			if (name != "metrics.json") // the config echo records the thread count
				CHECK(golden::read_text(a / name) == golden::read_text(t / name));
		}
		for (const auto &d : { a, b, t })
			fs::remove_all(d);
	}

	TEST_CASE("unwritable output directory is an I/O error")
	{
		auto c = tiny_config();
		c.methods.clear();
		CHECK_THROWS_AS(emit_reports(run_base_model_study(c), "/proc/uqlab_cannot_write_here"), IoError);
	}
}

TEST_CASE("HMNIST-shaped CSV runs end to end with the default label map")
{
	const auto dir = fresh_dir("hmnist");
	fs::create_directories(dir);
	const auto csv = dir / "hmnist_fake.csv";
	{
		std::ofstream out(csv);
		for (std::size_t i = 0; i < data::hmnist_pixel_count; i++)
		{
			char name[16];
			std::snprintf(name, sizeof(name), "pixel%04zu,", i);
			out << name;
		}
		out << "label\n";
		RngStream rng(3, 0);
		const char *tokens[] = { "0", "1", "2", "3", "4", "5", "6" };
		for (int r = 0; r < 60; r++)
		{
			const std::size_t token = rng.uniform_index(7);
			const bool malignant = token == 0 || token == 1 || token == 6;
			for (std::size_t i = 0; i < data::hmnist_pixel_count; i++)
				out << (malignant ? 120 : 60) + rng.uniform_int(0, 60) << ',';
			out << tokens[token] << '\n';
		}
	}
	auto c = tiny_config();
	c.data.source = DataConfig::Source::csv;
	c.data.csv.path = csv.string();
	c.ensemble.member_count = 2;
	const auto bundle = run_study(c);
	CHECK(bundle.provenance["features"] == data::hmnist_pixel_count);
	CHECK(bundle.provenance["rows"] == 60);
	CHECK(bundle.provenance["label_map"]["source"].get<std::string>().find("HAM10000") != std::string::npos);
	REQUIRE(bundle.methods.size() == 3);
	CHECK(bundle.methods[0].records.size() == 12);
	const auto files = emit_reports(bundle, dir / "report");
	CHECK(fs::exists(dir / "report" / "metrics.json"));
	CHECK(files.size() > 2);
	fs::remove_all(dir);
}

TEST_CASE("shipped profile files match the built-in profiles")
{
	const fs::path dir = fs::path(UQLAB_SOURCE_DIR) / "config";
	CHECK(config_to_json(load_config(dir / "desk.json", paper_profile())) == config_to_json(desk_profile()));
	CHECK(config_to_json(load_config(dir / "paper.json", desk_profile())) == config_to_json(paper_profile()));
}
