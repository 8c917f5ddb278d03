#include <uqlab/harness/study.hpp>
#include <uqlab/errors.hpp>
#include <uqlab/nn/train.hpp>
#include <uqlab/parallel.hpp>

#include <fstream>

namespace uqlab::harness
{
	namespace
	{
		constexpr std::uint64_t data_stream = 1;
		constexpr std::uint64_t split_stream = 2;
		constexpr std::uint64_t base_seed_stream = 3;
		constexpr std::uint64_t ensemble_seed_stream = 4;
		constexpr std::uint64_t mcd_stream = 5;
		constexpr std::uint64_t emcd_stream = 6;
		constexpr std::uint64_t repetition_stream = 100;

		bool has_hmnist_header(const std::filesystem::path &path)
		{
			std::ifstream in(path);
			if (!in)
				throw IoError("cannot open data file '" + path.string() + "'");
			std::string first;
			std::getline(in, first);
			return first.rfind("pixel0000", 0) == 0;
		}

		std::optional<metrics::SummaryStats> stats_of(const std::vector<RunMetrics> &runs, std::optional<double> RunMetrics::*field)
		{
			std::vector<double> values;
			for (const auto &r : runs)
				if (r.*field)
					values.push_back(*(r.*field));
			if (values.empty())
				return std::nullopt;
			return metrics::summary_stats(values);
		}

		nlohmann::json make_provenance(const ExperimentConfig &config, const LoadedData &loaded)
		{
			nlohmann::json p { { "tool", "uqlab" }, { "version", uqlab_version }, { "seed", config.seed }, { "data", loaded.dataset.provenance }, {
					"rows", loaded.dataset.size() }, { "features", loaded.dataset.dims() }, { "standardization",
					"z-score with training-split statistics, sample (n-1) std, zero-variance features kept with std 1" }, { "entropy_log_base",
					to_string(config.log_base) } };
			if (loaded.label_map)
			{
				nlohmann::json entries = nlohmann::json::object();
				for (const auto &[token, label] : loaded.label_map->entries())
					entries[token] = label;
				p["label_map"] = { { "source", loaded.label_map_source }, { "entries", std::move(entries) } };
			}
			return p;
		}
	}

	LoadedData load_dataset(const ExperimentConfig &config)
	{
		LoadedData loaded;
		if (config.data.source == DataConfig::Source::synthetic)
		{
			const auto &s = config.data.synthetic;
			RngStream rng(config.seed, data_stream);
			loaded.dataset = data::synthetic_blobs(s.n, s.dims, s.separation, s.noise_std, rng);
			return loaded;
		}
		const auto &csv = config.data.csv;
		const bool hmnist = has_hmnist_header(csv.path);
		if (!csv.label_map.empty())
		{
			loaded.label_map = data::LabelMap::load(csv.label_map);
			loaded.label_map_source = csv.label_map;
		}
		else if (hmnist)
		{
			loaded.label_map = data::LabelMap::ham10000_default();
			loaded.label_map_source = "built-in HAM10000 default (mel, bcc, akiec -> 1; nv, bkl, df, vasc -> 0)";
		}
		else
		{
			loaded.label_map = data::LabelMap::identity();
			loaded.label_map_source = "identity (0 -> 0, 1 -> 1)";
		}
		data::CsvOptions options;
		options.label_column = csv.label_column;
		loaded.dataset = data::load_csv(csv.path, options, *loaded.label_map);
		return loaded;
	}

	PreparedSplit prepare_split(const data::Dataset &dataset, double train_fraction, bool stratified, RngStream rng)
	{
		data::Split parts = data::split(dataset, train_fraction, rng, stratified);
		auto [standardized, stats] = data::standardize(parts.train, { parts.test });
		return PreparedSplit { std::move(standardized[0]), std::move(standardized[1]), std::move(stats) };
	}

	nn::TrainOptions train_options(const ExperimentConfig &config)
	{
		nn::TrainOptions options;
		options.epochs = config.model.epochs;
		options.batch_size = config.model.batch_size;
		options.learning_rate = config.model.learning_rate;
		return options;
	}

	nn::MlpArchitecture base_architecture(const ExperimentConfig &config, std::size_t input_dim)
	{
		nn::MlpArchitecture arch;
		arch.input_dim = input_dim;
		arch.hidden_sizes = config.model.hidden_sizes;
		arch.dropout_retain = config.model.dropout_retain;
		arch.seed = RngStream(config.seed, base_seed_stream).next_u64();
		arch.validate();
		return arch;
	}

	uq::EnsembleSpec ensemble_spec(const ExperimentConfig &config)
	{
		uq::EnsembleSpec spec = config.ensemble;
		spec.base_seed = RngStream(config.seed, ensemble_seed_stream).next_u64();
		return spec;
	}

	std::vector<nn::MlpArchitecture> ensemble_architectures(const ExperimentConfig &config, std::size_t input_dim)
	{
		auto archs = uq::build_ensemble(ensemble_spec(config), input_dim, config.model.dropout_retain);
		if (config.anchor_base_model)
			archs.front() = base_architecture(config, input_dim);
		return archs;
	}

	MethodReport evaluate_method(Method method, std::vector<metrics::PredictionRecord> records, const ExperimentConfig &config)
	{
		MethodReport report;
		report.method = method;
		report.records = std::move(records);
		report.ece = metrics::ece(report.records, config.ece_bins);
		report.histograms = metrics::entropy_histogram(report.records, config.entropy_bins, uq::max_entropy(config.log_base));
		const auto grid = metrics::threshold_grid(config.grid_start, config.grid_end, config.grid_step);
		report.sweep = metrics::threshold_sweep(report.records, grid);
		report.spotlight.threshold = config.spotlight_threshold;
		report.spotlight.counts = metrics::classify_outcomes(report.records, config.spotlight_threshold);
		report.spotlight.metrics = metrics::uncertainty_metrics(report.spotlight.counts);
		report.classical = metrics::classical_metrics(report.records);
		std::vector<int> labels;
		labels.reserve(report.records.size());
		for (const auto &r : report.records)
			labels.push_back(r.true_label);
		report.auc = metrics::auc(metrics::positive_scores(report.records), labels);
		return report;
	}

	ReportBundle run_base_model_study(const ExperimentConfig &config)
	{
		config.validate();
		const LoadedData loaded = load_dataset(config);
		const nn::TrainOptions options = train_options(config);

		BaseStudy study;
		study.runs.resize(config.repetitions);
		const RngStream repetitions(config.seed, repetition_stream);
		parallel_for(config.repetitions, config.threads, [&](std::size_t r)
		{
			const RngStream run_stream = repetitions.fork(r);
			const PreparedSplit split = prepare_split(loaded.dataset, config.data.train_fraction, config.data.stratified, run_stream.fork(0));
			nn::MlpArchitecture arch = base_architecture(config, split.train.dims());
			arch.seed = run_stream.fork(1).next_u64();
			const nn::Model model = nn::train(arch, split.train, options, RngStream(arch.seed, 0));

			uq::PredictOptions predict;
			predict.log_base = config.log_base;
			const auto dists = uq::ensemble_predict(std::span<const nn::Model>(&model, 1), split.test.features, predict);
			const auto records = uq::to_records(dists, split.test.labels);
			const auto classical = metrics::classical_metrics(records);

			RunMetrics &row = study.runs[r];
			row.run = r + 1;
			row.accuracy = classical.accuracy;
			row.sensitivity = classical.sensitivity;
			row.specificity = classical.specificity;
			row.auc = metrics::auc(metrics::positive_scores(records), split.test.labels);
		});

		std::vector<double> accuracies;
		for (const auto &r : study.runs)
			accuracies.push_back(r.accuracy);
		study.accuracy = metrics::summary_stats(accuracies);
		study.sensitivity = stats_of(study.runs, &RunMetrics::sensitivity);
		study.specificity = stats_of(study.runs, &RunMetrics::specificity);
		study.auc = stats_of(study.runs, &RunMetrics::auc);

		ReportBundle bundle;
		bundle.config = config;
		bundle.provenance = make_provenance(config, loaded);
		bundle.base = std::move(study);
		return bundle;
	}

	ReportBundle run_uq_study(const ExperimentConfig &config)
	{
		config.validate();
		const LoadedData loaded = load_dataset(config);
		ReportBundle bundle;
		bundle.config = config;
		bundle.provenance = make_provenance(config, loaded);
		if (config.methods.empty())
			return bundle;

		const PreparedSplit split = prepare_split(loaded.dataset, config.data.train_fraction, config.data.stratified, RngStream(config.seed,
				split_stream));
		const nn::TrainOptions options = train_options(config);
		const std::size_t dim = split.train.dims();

		bool need_base = false, need_ensemble = false;
		for (Method m : config.methods)
		{
			need_base = need_base || m == Method::mcd;
			need_ensemble = need_ensemble || m != Method::mcd;
		}

		std::optional<nn::Model> base;
		if (need_base || (need_ensemble && config.anchor_base_model))
		{
			const auto arch = base_architecture(config, dim);
			base = nn::train(arch, split.train, options, RngStream(arch.seed, 0));
		}

		std::vector<nn::Model> members;
		if (need_ensemble)
		{
			auto archs = ensemble_architectures(config, dim);
			const std::size_t first = config.anchor_base_model ? 1 : 0;
			std::vector<nn::MlpArchitecture> to_train(archs.begin() + static_cast<std::ptrdiff_t>(first), archs.end());
			auto trained = uq::train_ensemble(to_train, split.train, options, config.threads);
			if (config.anchor_base_model)
				members.push_back(*base);
			for (auto &m : trained)
				members.push_back(std::move(m));
		}

		uq::PredictOptions predict;
		predict.log_base = config.log_base;
		predict.threads = config.threads;
		for (Method method : config.methods)
		{
			std::vector<uq::PredictiveDistribution> dists;
			switch (method)
			{
				case Method::mcd:
					dists = uq::mcd_predict(*base, split.test.features, config.mc_samples, RngStream(config.seed, mcd_stream), predict);
					break;
				case Method::ensemble:
					dists = uq::ensemble_predict(members, split.test.features, predict);
					break;
				case Method::emcd:
					dists = uq::emcd_predict(members, split.test.features, config.mc_samples, RngStream(config.seed, emcd_stream), predict);
					break;
			}
			bundle.methods.push_back(evaluate_method(method, uq::to_records(dists, split.test.labels), config));
		}
		return bundle;
	}

	ReportBundle run_study(const ExperimentConfig &config)
	{
		ReportBundle bundle = run_uq_study(config);
		bundle.base = std::move(run_base_model_study(config).base);
		return bundle;
	}
}
