// Command-line driver. Exit codes: 0 success, 2 configuration error, 3 data error, 4 I/O error.

#include <uqlab/data/dataset.hpp>
#include <uqlab/errors.hpp>
#include <uqlab/harness/config.hpp>
#include <uqlab/harness/report.hpp>
#include <uqlab/harness/study.hpp>
#include <uqlab/metrics/records_io.hpp>
#include <uqlab/nn/model_io.hpp>
#include <uqlab/nn/train.hpp>
#include <uqlab/uq/ensemble_io.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

namespace fs = std::filesystem;
using namespace uqlab;

namespace
{
	constexpr std::uint64_t split_stream = 2;
	constexpr std::uint64_t mcd_stream = 5;
	constexpr std::uint64_t emcd_stream = 6;

	struct DataArgs
	{
			std::string path;
			std::string label_map;
			std::string label_column = "label";
	};

	void add_data_options(CLI::App *cmd, DataArgs &args, bool required)
	{
		auto *opt = cmd->add_option("--data", args.path, "feature CSV (HMNIST or generic schema)");
		if (required)
			opt->required();
		cmd->add_option("--label-map", args.label_map, "JSON object mapping raw label tokens to 0/1");
		cmd->add_option("--label-column", args.label_column, "name of the label column in generic CSVs");
	}

	harness::LoadedData load_csv_data(const DataArgs &args)
	{
		harness::ExperimentConfig c;
		c.data.source = harness::DataConfig::Source::csv;
		c.data.csv.path = args.path;
		c.data.csv.label_map = args.label_map;
		c.data.csv.label_column = args.label_column;
		return harness::load_dataset(c);
	}

	void ensure_directory(const fs::path &dir)
	{
		std::error_code ec;
		fs::create_directories(dir, ec);
		if (ec || !fs::is_directory(dir))
			throw IoError("cannot create output directory '" + dir.string() + "'");
	}

	// --config and --profile: the flag profile replaces any profile named in the file.
	harness::ExperimentConfig build_config(const std::string &config_path, const std::string &profile)
	{
		harness::ExperimentConfig config = harness::profile_by_name(profile.empty() ? "desk" : profile);
		if (!config_path.empty())
		{
			nlohmann::json j;
			try
			{
				j = nn::read_json_file(config_path);
			} catch (const DataError &e)
			{
				throw ConfigError(e.what());
			}
			if (!profile.empty() && j.is_object())
				j.erase("profile");
			config = harness::config_from_json(j, config);
		}
		return config;
	}

	int run_synth(std::size_t n, std::size_t dims, double separation, double noise, std::optional<std::uint64_t> seed, const std::string &out)
	{
		harness::ExperimentConfig c;
		c.data.synthetic = { n, dims, separation, noise };
		c.seed = harness::resolve_seed(c.seed, seed);
		c.validate();
		const auto loaded = harness::load_dataset(c);
		if (const auto parent = fs::path(out).parent_path(); !parent.empty())
			ensure_directory(parent);
		data::write_csv(loaded.dataset, out);
		std::cout << "wrote " << loaded.dataset.size() << " rows to " << out << '\n';
		return 0;
	}

	int run_train(const std::string &config_path, const DataArgs &data_args, std::optional<std::uint64_t> seed, const std::string &out)
	{
		harness::ExperimentConfig config = build_config(config_path, "");
		if (!data_args.path.empty())
		{
			config.data.source = harness::DataConfig::Source::csv;
			config.data.csv.path = data_args.path;
			config.data.csv.label_map = data_args.label_map;
			config.data.csv.label_column = data_args.label_column;
		}
		config.seed = harness::resolve_seed(config.seed, seed);
		config.validate();

		const auto loaded = harness::load_dataset(config);
		RngStream split_rng(config.seed, split_stream);
		const data::Split parts = data::split(loaded.dataset, config.data.train_fraction, split_rng, config.data.stratified);
		auto [standardized, stats] = data::standardize(parts.train, { });
		const data::Dataset &train_set = standardized.front();

		const fs::path out_dir(out);
		ensure_directory(out_dir);
		data::write_csv(parts.train, out_dir / "train.csv");
		data::write_csv(parts.test, out_dir / "test.csv");

		const auto options = harness::train_options(config);
		const auto arch = harness::base_architecture(config, train_set.dims());
		const nn::Model base = nn::train(arch, train_set, options, RngStream(arch.seed, 0));
		nn::save_model( { base, stats }, out_dir / "base.model.json");
		std::cout << "base model: " << base.params.parameter_count() << " parameters -> " << (out_dir / "base.model.json").string() << '\n';

		bool need_ensemble = false;
		for (auto m : config.methods)
			need_ensemble = need_ensemble || m != harness::Method::mcd;
		if (need_ensemble)
		{
			auto archs = harness::ensemble_architectures(config, train_set.dims());
			std::vector<nn::Model> members;
			const std::size_t first = config.anchor_base_model ? 1 : 0;
			if (config.anchor_base_model)
				members.push_back(base);
			auto trained = uq::train_ensemble( { archs.begin() + static_cast<std::ptrdiff_t>(first), archs.end() }, train_set, options, config.threads);
			for (auto &m : trained)
				members.push_back(std::move(m));
			uq::save_ensemble( { harness::ensemble_spec(config), std::move(members), stats }, out_dir / "ensemble");
			std::cout << "ensemble: " << archs.size() << " members -> " << (out_dir / "ensemble").string() << '\n';
		}
		nn::write_json_file(harness::config_to_json(config), out_dir / "config.json");
		return 0;
	}

	// A model file, an ensemble directory, or a `train` output directory.
	std::vector<nn::ModelFile> load_models(const fs::path &path, harness::Method method)
	{
		if (!fs::exists(path))
			throw IoError("model path '" + path.string() + "' does not exist");
		if (fs::is_regular_file(path))
			return { nn::load_model(path) };
		fs::path dir = path;
		if (!fs::exists(dir / uq::ensemble_manifest_name))
		{
			if (method == harness::Method::mcd && fs::exists(dir / "base.model.json"))
				return { nn::load_model(dir / "base.model.json") };
			dir /= "ensemble";
			if (!fs::exists(dir / uq::ensemble_manifest_name))
				throw IoError("no model file or ensemble manifest found under '" + path.string() + "'");
		}
		auto bundle = uq::load_ensemble(dir);
		std::vector<nn::ModelFile> files;
		for (auto &m : bundle.members)
			files.push_back( { std::move(m), bundle.standardization });
		return files;
	}

	int run_predict(const std::string &model_path, const DataArgs &data_args, const std::string &method_name, std::size_t mc_samples,
			std::optional<std::uint64_t> seed, const std::string &log_base, std::size_t threads, const std::string &out)
	{
		const harness::Method method = harness::method_from_string(method_name);
		if (mc_samples == 0)
			throw ConfigError("--mc-samples must be at least 1");
		uq::PredictOptions options;
		options.log_base = harness::log_base_from_string(log_base);
		options.threads = std::max<std::size_t>(threads, 1);
		const std::uint64_t master = harness::resolve_seed(42, seed);

		const auto files = load_models(model_path, method);
		const auto loaded = load_csv_data(data_args);
		Matrix inputs = loaded.dataset.features;
		if (files.front().standardization)
		{
			if (files.front().standardization->mean.size() != inputs.cols())
				throw DimensionError("data has " + std::to_string(inputs.cols()) + " features, model expects "
						+ std::to_string(files.front().standardization->mean.size()));
			inputs = files.front().standardization->apply(inputs);
		}
		std::vector<nn::Model> models;
		for (const auto &f : files)
			models.push_back(f.model);

		std::vector<uq::PredictiveDistribution> dists;
		switch (method)
		{
			case harness::Method::mcd:
				dists = uq::mcd_predict(models.front(), inputs, mc_samples, RngStream(master, mcd_stream), options);
				break;
			case harness::Method::ensemble:
				dists = uq::ensemble_predict(models, inputs, options);
				break;
			case harness::Method::emcd:
				dists = uq::emcd_predict(models, inputs, mc_samples, RngStream(master, emcd_stream), options);
				break;
		}
		const auto records = uq::to_records(dists, loaded.dataset.labels);
		if (const auto parent = fs::path(out).parent_path(); !parent.empty())
			ensure_directory(parent);
		metrics::write_records_csv(records, out);
		std::cout << "wrote " << records.size() << " records (" << method_name << ", " << models.size() << " model(s)) to " << out << '\n';
		return 0;
	}

	void emit_json(const nlohmann::json &j, const std::string &out)
	{
		if (out.empty() || out == "-")
		{
			std::cout << j.dump(2) << '\n';
			return;
		}
		if (const auto parent = fs::path(out).parent_path(); !parent.empty())
			ensure_directory(parent);
		nn::write_json_file(j, out);
	}

	int run_evaluate(const std::string &records_path, double threshold, std::size_t bins, const std::string &log_base, const std::string &out)
	{
		const auto records = metrics::read_records_csv(records_path);
		const auto base = harness::log_base_from_string(log_base);
		harness::ExperimentConfig c;
		c.spotlight_threshold = threshold;
		c.ece_bins = bins;
		c.log_base = base;
		if (bins == 0)
			throw ConfigError("--bins must be at least 1");
		const auto report = harness::evaluate_method(harness::Method::mcd, records, c);
		nlohmann::json j { { "records", records.size() }, { "threshold", threshold }, { "uncertainty", harness::sweep_row_to_json(report.spotlight) }, {
				"calibration", harness::ece_to_json(report.ece) }, { "classical", harness::classical_to_json(report.classical, report.auc) } };
		emit_json(j, out);
		return 0;
	}

	int run_sweep(const std::string &records_path, double start, double end, double step, const std::string &out)
	{
		const auto records = metrics::read_records_csv(records_path);
		const auto grid = metrics::threshold_grid(start, end, step);
		const auto rows = metrics::threshold_sweep(records, grid);
		const std::string label = fs::path(records_path).stem().string();
		if (out.empty() || out == "-")
		{
			std::cout << harness::sweep_csv_header << '\n';
			for (const auto &row : rows)
			{
				const auto j = harness::sweep_row_to_json(row);
				std::cout << label << ',' << metrics::format_real(row.threshold) << ',' << row.counts.tc << ',' << row.counts.tu << ',' << row.counts.fu
						<< ',' << row.counts.fc;
				for (const char *key : { "usen", "uspe", "upre", "uacc" })
					std::cout << ',' << (j[key].is_null() ? std::string("NA") : metrics::format_real(j[key].get<double>()));
				std::cout << '\n';
			}
			return 0;
		}
		if (const auto parent = fs::path(out).parent_path(); !parent.empty())
			ensure_directory(parent);
		harness::write_sweep_csv(label, rows, out);
		return 0;
	}

	struct StudyArgs
	{
			std::string config;
			std::string profile;
			std::string out = "report";
			std::optional<std::uint64_t> seed;
			std::string methods;
			std::optional<std::size_t> mc_samples;
			std::optional<std::size_t> repetitions;
			std::optional<std::size_t> threads;
			std::optional<double> spotlight;
			std::string data;
			std::string label_map;
			bool no_svg = false;
	};

	int run_study(const StudyArgs &args)
	{
		harness::ExperimentConfig config = build_config(args.config, args.profile);
		if (!args.data.empty())
		{
			config.data.source = harness::DataConfig::Source::csv;
			config.data.csv.path = args.data;
		}
		if (!args.label_map.empty())
			config.data.csv.label_map = args.label_map;
		if (!args.methods.empty())
			config.methods = harness::parse_methods(args.methods);
		if (args.mc_samples)
			config.mc_samples = *args.mc_samples;
		if (args.repetitions)
			config.repetitions = *args.repetitions;
		if (args.threads)
			config.threads = *args.threads;
		if (args.spotlight)
			config.spotlight_threshold = *args.spotlight;
		if (args.no_svg)
			config.write_svg = false;
		config.seed = harness::resolve_seed(config.seed, args.seed);
		config.validate();

		const auto bundle = harness::run_study(config);
		const auto written = harness::emit_reports(bundle, args.out);
		std::cout << "profile " << config.profile << ", seed " << config.seed << ": wrote";
		for (const auto &name : written)
			std::cout << ' ' << name;
		std::cout << " to " << args.out << '\n';
		for (const auto &m : bundle.methods)
		{
			const auto &s = m.spotlight.metrics;
			auto show = [](std::optional<double> v)
			{	return v ? std::to_string(*v) : std::string("NA");};
			std::cout << "  " << harness::to_string(m.method) << ": accuracy " << m.classical.accuracy << ", ECE " << m.ece.percent() << "%, UAcc "
					<< show(s.uacc) << ", USen " << show(s.usen) << ", USpe " << show(s.uspe) << ", UPre " << show(s.upre) << " at threshold "
					<< config.spotlight_threshold << '\n';
		}
		return 0;
	}
}

int main(int argc, char **argv)
{
	CLI::App app { "uqlab: MC-Dropout, deep ensembles and EMCD with uncertainty-aware evaluation" };
	app.require_subcommand(1);

	std::size_t synth_n = 2000, synth_dims = 10;
	double synth_sep = 3.0, synth_noise = 1.0;
	std::optional<std::uint64_t> seed;
	std::string out;
	auto *synth = app.add_subcommand("synth", "write a synthetic two-blob CSV");
	synth->add_option("--n", synth_n, "number of rows (even)");
	synth->add_option("--dims", synth_dims, "feature dimension");
	synth->add_option("--separation", synth_sep, "distance between cluster centres in units of noise std");
	synth->add_option("--noise", synth_noise, "cluster standard deviation");
	synth->add_option("--seed", seed, "master seed (overrides UQLAB_SEED)");
	synth->add_option("--out", out, "output CSV")->required();

	std::string config_path;
	DataArgs data_args;
	auto *train = app.add_subcommand("train", "train and save the base model and the ensemble");
	train->add_option("--config", config_path, "JSON experiment config");
	add_data_options(train, data_args, false);
	train->add_option("--seed", seed, "master seed (overrides UQLAB_SEED and the config)");
	train->add_option("--out", out, "output directory")->required();

	std::string model_path, method = "mcd", log_base = "natural";
	std::size_t mc_samples = 50, threads = 1;
	auto *predict = app.add_subcommand("predict", "write prediction records for a labelled CSV");
	predict->add_option("--model", model_path, "model file, ensemble directory or train output directory")->required();
	add_data_options(predict, data_args, true);
	predict->add_option("--method", method, "mcd | ensemble | emcd");
	predict->add_option("--mc-samples", mc_samples, "MC-Dropout passes per member");
	predict->add_option("--seed", seed, "seed for the dropout passes");
	predict->add_option("--log-base", log_base, "natural | base2");
	predict->add_option("--threads", threads, "worker threads");
	predict->add_option("--out", out, "output records CSV")->required();

	std::string records;
	double threshold = 0.4;
	std::size_t bins = 10;
	auto *evaluate = app.add_subcommand("evaluate", "uncertainty and calibration metrics from a records CSV");
	evaluate->add_option("--records", records, "records CSV")->required();
	evaluate->add_option("--threshold", threshold, "uncertainty threshold on predictive entropy");
	evaluate->add_option("--bins", bins, "ECE bin count");
	evaluate->add_option("--log-base", log_base, "log base of the entropies in the file (natural | base2)");
	evaluate->add_option("--out", out, "output JSON (stdout when omitted)");

	double grid_start = 0.1, grid_end = 0.9, grid_step = 0.05;
	auto *sweep = app.add_subcommand("sweep", "uncertainty metrics over a threshold grid");
	sweep->add_option("--records", records, "records CSV")->required();
	sweep->add_option("--grid-start", grid_start, "first threshold");
	sweep->add_option("--grid-end", grid_end, "last threshold (inclusive)");
	sweep->add_option("--grid-step", grid_step, "threshold step");
	sweep->add_option("--out", out, "output CSV (stdout when omitted)");

	StudyArgs study_args;
	auto *study = app.add_subcommand("study", "full pipeline: base-model study, UQ study and reports");
	study->add_option("--config", study_args.config, "JSON experiment config");
	study->add_option("--profile", study_args.profile, "desk | paper")->check(CLI::IsMember( { "desk", "paper" }));
	study->add_option("--out", study_args.out, "report directory");
	study->add_option("--seed", study_args.seed, "master seed (overrides UQLAB_SEED and the config)");
	study->add_option("--methods", study_args.methods, "mcd,ensemble,emcd or all");
	study->add_option("--mc-samples", study_args.mc_samples, "MC-Dropout passes");
	study->add_option("--repetitions", study_args.repetitions, "base-model runs");
	study->add_option("--threads", study_args.threads, "worker threads (results do not depend on it)");
	study->add_option("--spotlight", study_args.spotlight, "threshold for the spotlight uncertainty row");
	study->add_option("--data", study_args.data, "labelled CSV instead of synthetic data");
	study->add_option("--label-map", study_args.label_map, "JSON label map for --data");
	study->add_flag("--no-svg", study_args.no_svg, "skip SVG renderings");

	try
	{
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e)
	{
		const int code = app.exit(e);
		return code == 0 ? 0 : static_cast<int>(ExitCode::config_error);
	}

	try
	{
		if (*synth)
			return run_synth(synth_n, synth_dims, synth_sep, synth_noise, seed, out);
		if (*train)
			return run_train(config_path, data_args, seed, out);
		if (*predict)
			return run_predict(model_path, data_args, method, mc_samples, seed, log_base, threads, out);
		if (*evaluate)
			return run_evaluate(records, threshold, bins, log_base, out);
		if (*sweep)
			return run_sweep(records, grid_start, grid_end, grid_step, out);
		if (*study)
			return run_study(study_args);
	} catch (const ConfigError &e)
	{
		std::cerr << "configuration error: " << e.what() << '\n';
		return static_cast<int>(ExitCode::config_error);
	} catch (const DataError &e)
	{
		std::cerr << "data error: " << e.what() << '\n';
		return static_cast<int>(ExitCode::data_error);
	} catch (const IoError &e)
	{
		std::cerr << "I/O error: " << e.what() << '\n';
		return static_cast<int>(ExitCode::io_error);
	} catch (const std::exception &e)
	{
		std::cerr << "error: " << e.what() << '\n';
		return 1;
	}
	return 0;
}
