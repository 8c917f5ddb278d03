#include <uqlab/harness/report.hpp>
#include <uqlab/harness/svg.hpp>
#include <uqlab/errors.hpp>
#include <uqlab/metrics/records_io.hpp>
#include <uqlab/nn/model_io.hpp>

#include <fstream>
#include <system_error>

namespace uqlab::harness
{
	using nlohmann::json;

	namespace
	{
		json optional_json(std::optional<double> v)
		{
			return v ? json(*v) : json(nullptr);
		}

		std::string optional_csv(std::optional<double> v)
		{
			return v ? metrics::format_real(*v) : std::string("NA");
		}

		json stats_row(const char *name, const std::optional<metrics::SummaryStats> &s)
		{
			if (!s)
				return json { { "metric", name }, { "mean", nullptr }, { "std", nullptr }, { "runs_defined", 0 } };
			return json { { "metric", name }, { "mean", s->mean }, { "std", optional_json(s->stddev) }, { "runs_defined", s->count } };
		}

		json box_json(const std::optional<metrics::SummaryStats> &s)
		{
			if (!s)
				return nullptr;
			return json { { "count", s->count }, { "min", s->min }, { "q1", s->q1 }, { "median", s->median }, { "q3", s->q3 }, { "max", s->max } };
		}

		json histogram_json(const metrics::Histogram &h)
		{
			return json { { "count", h.total }, { "mean_entropy", optional_json(h.mean_entropy) }, { "bins", h.counts } };
		}

		class CsvFile
		{
			public:
				CsvFile(const std::filesystem::path &path, const std::string &header) :
						m_path(path), m_out(path, std::ios::binary)
				{
					if (!m_out)
						throw IoError("cannot write '" + path.string() + "'");
					m_out << header << '\n';
				}
				std::ofstream& out() noexcept
				{
					return m_out;
				}
				void close()
				{
					m_out.close();
					if (!m_out)
						throw IoError("failed while writing '" + m_path.string() + "'");
				}

			private:
				std::filesystem::path m_path;
				std::ofstream m_out;
		};

		void write_text(const std::filesystem::path &path, const std::string &text)
		{
			std::ofstream out(path, std::ios::binary);
			out << text;
			out.close();
			if (!out)
				throw IoError("cannot write '" + path.string() + "'");
		}

		void write_sweep_rows(std::ofstream &out, const std::string &label, std::span<const metrics::SweepRow> rows)
		{
			for (const auto &row : rows)
				out << label << ',' << metrics::format_real(row.threshold) << ',' << row.counts.tc << ',' << row.counts.tu << ',' << row.counts.fu << ','
						<< row.counts.fc << ',' << optional_csv(row.metrics.usen) << ',' << optional_csv(row.metrics.uspe) << ','
						<< optional_csv(row.metrics.upre) << ',' << optional_csv(row.metrics.uacc) << '\n';
		}
	}

	json sweep_row_to_json(const metrics::SweepRow &row)
	{
		const auto &c = row.counts;
		const auto &m = row.metrics;
		return json { { "threshold", row.threshold }, { "tc", c.tc }, { "tu", c.tu }, { "fu", c.fu }, { "fc", c.fc }, { "usen", optional_json(m.usen) }, {
				"uspe", optional_json(m.uspe) }, { "upre", optional_json(m.upre) }, { "uacc", optional_json(m.uacc) } };
	}

	json ece_to_json(const metrics::EceResult &result)
	{
		json bins = json::array();
		for (const auto &b : result.bins.bins)
			bins.push_back(json { { "lower", b.lower }, { "upper", b.upper }, { "count", b.count }, { "accuracy", b.accuracy }, { "confidence",
					b.confidence } });
		return json { { "ece", result.ece }, { "ece_percent", result.percent() }, { "samples", result.bins.total }, { "bins", std::move(bins) } };
	}

	json classical_to_json(const metrics::ClassicalMetrics &classical, std::optional<double> auc)
	{
		return json { { "accuracy", classical.accuracy }, { "sensitivity", optional_json(classical.sensitivity) }, { "specificity", optional_json(
				classical.specificity) }, { "auc", optional_json(auc) } };
	}

	std::string reliability_csv_header(const ReportBundle &bundle)
	{
		std::string header = "bin,lower,upper";
		for (const auto &m : bundle.methods)
		{
			const std::string name = to_string(m.method);
			header += "," + name + "_count," + name + "_accuracy," + name + "_confidence";
		}
		return header;
	}

	json bundle_to_json(const ReportBundle &bundle)
	{
		const auto &config = bundle.config;
		json j { { "format", "uqlab.report" }, { "version", 1 }, { "provenance", bundle.provenance }, { "config", config_to_json(config) } };

		if (bundle.base)
		{
			const auto &base = *bundle.base;
			json runs = json::array();
			for (const auto &r : base.runs)
				runs.push_back(json { { "run", r.run }, { "accuracy", r.accuracy }, { "sensitivity", optional_json(r.sensitivity) }, { "specificity",
						optional_json(r.specificity) }, { "auc", optional_json(r.auc) } });
			j["table1"] = { { "caption", "base model (dropout inactive at test time), mean and std over independent runs" }, { "runs", base.runs.size() }, {
					"columns", { "metric", "mean", "std" } }, { "rows", { stats_row("accuracy", base.accuracy), stats_row("sensitivity", base.sensitivity),
					stats_row("specificity", base.specificity), stats_row("auc", base.auc) } } };
			j["boxplot"] = { { "whiskers", "min to max; quartiles by linear interpolation at p*(n-1); no outlier rule applied" }, { "accuracy", box_json(
					base.accuracy) }, { "sensitivity", box_json(base.sensitivity) }, { "specificity", box_json(base.specificity) }, { "auc", box_json(
					base.auc) } };
			j["runs"] = std::move(runs);
		}

		json table2_rows = json::array();
		json methods = json::array();
		for (const auto &m : bundle.methods)
		{
			const auto &s = m.spotlight.metrics;
			table2_rows.push_back(json { { "method", to_string(m.method) }, { "uacc", optional_json(s.uacc) }, { "uacc_percent", s.uacc ? json(
					100.0 * *s.uacc) : json(nullptr) }, { "usen", optional_json(s.usen) }, { "uspe", optional_json(s.uspe) }, { "upre", optional_json(
					s.upre) } });
			json sweep = json::array();
			for (const auto &row : m.sweep)
				sweep.push_back(sweep_row_to_json(row));
			methods.push_back(json { { "method", to_string(m.method) }, { "test_samples", m.records.size() }, { "classical", classical_to_json(
					m.classical, m.auc) }, { "spotlight", sweep_row_to_json(m.spotlight) }, { "calibration", ece_to_json(m.ece) }, { "entropy", { {
					"log_base", to_string(config.log_base) }, { "range", { m.histograms.lower, m.histograms.upper } }, { "correct", histogram_json(
					m.histograms.correct) }, { "incorrect", histogram_json(m.histograms.incorrect) } } }, { "sweep", std::move(sweep) } });
		}
		j["table2"] = { { "threshold", config.spotlight_threshold }, { "columns", { "method", "uacc", "usen", "uspe", "upre" } }, { "rows", std::move(
				table2_rows) } };
		j["threshold_guidance"] = { { "suitable_range", { 0.3, 0.7 } }, { "spotlight", config.spotlight_threshold }, { "note",
				"the choice of threshold is a user preference; values between 0.3 and 0.7 are the suggested working range" } };
		j["methods"] = std::move(methods);
		return j;
	}

	void write_sweep_csv(const std::string &label, std::span<const metrics::SweepRow> rows, const std::filesystem::path &path)
	{
		CsvFile file(path, sweep_csv_header);
		write_sweep_rows(file.out(), label, rows);
		file.close();
	}

	std::vector<std::string> emit_reports(const ReportBundle &bundle, const std::filesystem::path &out_dir)
	{
		std::error_code ec;
		std::filesystem::create_directories(out_dir, ec);
		if (ec || !std::filesystem::is_directory(out_dir))
			throw IoError("cannot create output directory '" + out_dir.string() + "'");

		std::vector<std::string> written;
		nn::write_json_file(bundle_to_json(bundle), out_dir / "metrics.json");
		written.push_back("metrics.json");

		{
			CsvFile runs(out_dir / "runs.csv", runs_csv_header);
			if (bundle.base)
				for (const auto &r : bundle.base->runs)
					runs.out() << r.run << ',' << metrics::format_real(r.accuracy) << ',' << optional_csv(r.sensitivity) << ','
							<< optional_csv(r.specificity) << ',' << optional_csv(r.auc) << '\n';
			runs.close();
			written.push_back("runs.csv");
		}

		if (bundle.methods.empty())
			return written;

		{
			CsvFile sweep(out_dir / "sweep.csv", sweep_csv_header);
			for (const auto &m : bundle.methods)
				write_sweep_rows(sweep.out(), to_string(m.method), m.sweep);
			sweep.close();
			written.push_back("sweep.csv");
		}

		{
			CsvFile reliability(out_dir / "reliability.csv", reliability_csv_header(bundle));
			const std::size_t bins = bundle.methods.front().ece.bins.bins.size();
			for (std::size_t b = 0; b < bins; b++)
			{
				const auto &first = bundle.methods.front().ece.bins.bins[b];
				reliability.out() << (b + 1) << ',' << metrics::format_real(first.lower) << ',' << metrics::format_real(first.upper);
				for (const auto &m : bundle.methods)
				{
					const auto &bin = m.ece.bins.bins[b];
					reliability.out() << ',' << bin.count << ',' << metrics::format_real(bin.accuracy) << ',' << metrics::format_real(bin.confidence);
				}
				reliability.out() << '\n';
			}
			reliability.close();
			written.push_back("reliability.csv");
		}

		{
			CsvFile hist(out_dir / "entropy_hist.csv", entropy_hist_csv_header);
			for (const auto &m : bundle.methods)
			{
				const auto &h = m.histograms;
				const std::size_t bins = h.correct.counts.size();
				const double width = (h.upper - h.lower) / static_cast<double>(bins);
				for (const auto &[outcome, group] : { std::pair<const char*, const metrics::Histogram*> { "correct", &h.correct }, { "incorrect",
						&h.incorrect } })
					for (std::size_t b = 0; b < bins; b++)
						hist.out() << to_string(m.method) << ',' << outcome << ',' << (b + 1) << ',' << metrics::format_real(
								h.lower + width * static_cast<double>(b)) << ',' << metrics::format_real(
								b + 1 == bins ? h.upper : h.lower + width * static_cast<double>(b + 1)) << ',' << group->counts[b] << '\n';
			}
			hist.close();
			written.push_back("entropy_hist.csv");
		}

		for (const auto &m : bundle.methods)
		{
			const std::string name = "records_" + to_string(m.method) + ".csv";
			metrics::write_records_csv(m.records, out_dir / name);
			written.push_back(name);
		}

		if (bundle.config.write_svg)
		{
			write_text(out_dir / "reliability.svg", svg::reliability_diagram(bundle.methods));
			written.push_back("reliability.svg");
			write_text(out_dir / "entropy_hist.svg", svg::entropy_histograms(bundle.methods));
			written.push_back("entropy_hist.svg");
			write_text(out_dir / "sweep.svg", svg::threshold_sweep(bundle.methods));
			written.push_back("sweep.svg");
			if (bundle.base)
			{
				write_text(out_dir / "boxplot.svg", svg::base_model_boxplot(*bundle.base));
				written.push_back("boxplot.svg");
			}
		}
		return written;
	}
}
