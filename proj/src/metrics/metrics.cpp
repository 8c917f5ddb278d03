#include <uqlab/metrics/metrics.hpp>
#include <uqlab/errors.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace uqlab::metrics
{
	namespace
	{
		std::optional<double> ratio(std::size_t numerator, std::size_t denominator) noexcept
		{
			if (denominator == 0)
				return std::nullopt;
			return static_cast<double>(numerator) / static_cast<double>(denominator);
		}

		void require_non_empty(std::span<const PredictionRecord> records, const char *what)
		{
			if (records.empty())
				throw DataError(std::string(what) + ": no prediction records");
		}

		void require_binary_labels(const PredictionRecord &r, const char *what)
		{
			if ((r.true_label != 0 && r.true_label != 1) || (r.predicted_label != 0 && r.predicted_label != 1))
				throw DataError(std::string(what) + ": labels must be 0 or 1");
		}
	}

	void validate_records(std::span<const PredictionRecord> records)
	{
		for (std::size_t i = 0; i < records.size(); i++)
		{
			const auto &r = records[i];
			const std::string where = "record " + std::to_string(i + 1);
			if ((r.true_label != 0 && r.true_label != 1) || (r.predicted_label != 0 && r.predicted_label != 1))
				throw DataError(where + ": labels must be 0 or 1");
			if (!(r.confidence >= 0.5 - 1e-12 && r.confidence <= 1.0))
				throw DataError(where + ": confidence must lie in [0.5, 1] for a binary classifier");
			if (!(r.entropy >= 0.0) || !std::isfinite(r.entropy))
				throw DataError(where + ": entropy must be finite and non-negative");
		}
	}

	UncertaintyConfusionMatrix classify_outcomes(std::span<const PredictionRecord> records, double threshold)
	{
		require_non_empty(records, "classify_outcomes");
		if (!std::isfinite(threshold))
			throw ConfigError("uncertainty threshold must be finite");
		UncertaintyConfusionMatrix ucm;
		ucm.threshold = threshold;
		for (const auto &r : records)
		{
			require_binary_labels(r, "classify_outcomes");
			if (!(r.entropy >= 0.0) || !std::isfinite(r.entropy))
				throw DataError("classify_outcomes: entropy must be finite and non-negative");
			const bool uncertain = r.entropy > threshold;
			if (r.correct())
				(uncertain ? ucm.fu : ucm.tc)++;
			else
				(uncertain ? ucm.tu : ucm.fc)++;
		}
		return ucm;
	}

	UncertaintyMetrics uncertainty_metrics(const UncertaintyConfusionMatrix &ucm)
	{
		if (ucm.total() == 0)
			throw DataError("uncertainty_metrics: confusion matrix is empty");
		return UncertaintyMetrics { ratio(ucm.tu, ucm.tu + ucm.fc), ratio(ucm.tc, ucm.tc + ucm.fu), ratio(ucm.tu, ucm.tu + ucm.fu), ratio(ucm.tu + ucm.tc,
				ucm.total()) };
	}

	std::size_t calibration_bin_index(double confidence, std::size_t bin_count)
	{
		if (bin_count == 0)
			throw ConfigError("ECE needs at least one bin");
		if (!(confidence >= 0.0 && confidence <= 1.0))
			throw DataError("confidence " + std::to_string(confidence) + " outside [0, 1]");
		const double m = static_cast<double>(bin_count);
		auto lower = [m](std::size_t b)
		{	return static_cast<double>(b) / m;};
		std::size_t index = static_cast<std::size_t>(std::max(0.0, std::ceil(confidence * m) - 1.0));
		index = std::min(index, bin_count - 1);
		// settle rounding at the boundaries against the exact interval definition
		while (index > 0 && confidence <= lower(index))
			index--;
		while (index + 1 < bin_count && confidence > lower(index + 1))
			index++;
		return index;
	}

	EceResult ece(std::span<const PredictionRecord> records, std::size_t bin_count)
	{
		require_non_empty(records, "ece");
		if (bin_count == 0)
			throw ConfigError("ECE needs at least one bin");
		std::vector<std::size_t> counts(bin_count, 0);
		std::vector<std::size_t> correct(bin_count, 0);
		std::vector<double> confidence_sum(bin_count, 0.0);
		for (const auto &r : records)
		{
			require_binary_labels(r, "ece");
			const std::size_t b = calibration_bin_index(r.confidence, bin_count);
			counts[b]++;
			correct[b] += r.correct() ? 1 : 0;
			confidence_sum[b] += r.confidence;
		}

		EceResult result;
		result.bins.total = records.size();
		const double n = static_cast<double>(records.size());
		for (std::size_t b = 0; b < bin_count; b++)
		{
			CalibrationBin bin;
			bin.lower = static_cast<double>(b) / static_cast<double>(bin_count);
			bin.upper = static_cast<double>(b + 1) / static_cast<double>(bin_count);
			bin.count = counts[b];
			if (counts[b] > 0)
			{
				bin.accuracy = static_cast<double>(correct[b]) / static_cast<double>(counts[b]);
				bin.confidence = confidence_sum[b] / static_cast<double>(counts[b]);
				result.ece += (static_cast<double>(counts[b]) / n) * std::abs(bin.accuracy - bin.confidence);
			}
			result.bins.bins.push_back(bin);
		}
		return result;
	}

	ClassicalMetrics classical_metrics(std::span<const PredictionRecord> records)
	{
		require_non_empty(records, "classical_metrics");
		std::size_t tp = 0, tn = 0, fp = 0, fn = 0;
		for (const auto &r : records)
		{
			require_binary_labels(r, "classical_metrics");
			if (r.true_label == 1)
				(r.predicted_label == 1 ? tp : fn)++;
			else
				(r.predicted_label == 0 ? tn : fp)++;
		}
		return ClassicalMetrics { static_cast<double>(tp + tn) / static_cast<double>(records.size()), ratio(tp, tp + fn), ratio(tn, tn + fp) };
	}

	std::vector<double> positive_scores(std::span<const PredictionRecord> records)
	{
		std::vector<double> scores;
		scores.reserve(records.size());
		for (const auto &r : records)
			scores.push_back(r.predicted_label == 1 ? r.confidence : 1.0 - r.confidence);
		return scores;
	}

	std::optional<double> auc(std::span<const double> scores, std::span<const int> labels)
	{
		if (scores.size() != labels.size())
			throw DimensionError("auc: score and label counts differ");
		std::vector<std::size_t> order(scores.size());
		std::iota(order.begin(), order.end(), std::size_t { 0 });
		std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b)
		{	return scores[a] < scores[b];});

		// midranks (1-based); every value is a multiple of 0.5 and therefore exact
		double positive_rank_sum = 0.0;
		std::size_t positives = 0;
		for (std::size_t i = 0; i < order.size();)
		{
			std::size_t j = i;
			while (j < order.size() && scores[order[j]] == scores[order[i]])
				j++;
			const double midrank = 0.5 * static_cast<double>(i + 1 + j);
			for (std::size_t t = i; t < j; t++)
				if (labels[order[t]] == 1)
				{
					positive_rank_sum += midrank;
					positives++;
				}
			i = j;
		}
		const std::size_t negatives = scores.size() - positives;
		if (positives == 0 || negatives == 0)
			return std::nullopt;
		const double p = static_cast<double>(positives);
		const double u = positive_rank_sum - p * (p + 1.0) / 2.0;
		return u / (p * static_cast<double>(negatives));
	}

	std::vector<double> threshold_grid(double start, double end, double step)
	{
		if (!(step > 0.0) || !std::isfinite(start) || !std::isfinite(end) || end < start)
			throw ConfigError("threshold grid needs finite start <= end and a positive step");
		const auto count = static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
		std::vector<double> grid;
		grid.reserve(count);
		for (std::size_t i = 0; i < count; i++)
			grid.push_back(std::round((start + static_cast<double>(i) * step) * 1e12) / 1e12);
		return grid;
	}

	std::vector<SweepRow> threshold_sweep(std::span<const PredictionRecord> records, std::span<const double> thresholds)
	{
		if (thresholds.empty())
			throw ConfigError("threshold sweep needs at least one threshold");
		if (!std::is_sorted(thresholds.begin(), thresholds.end()))
			throw ConfigError("threshold sweep thresholds must be ascending");
		std::vector<SweepRow> rows;
		rows.reserve(thresholds.size());
		for (double t : thresholds)
		{
			SweepRow row;
			row.threshold = t;
			row.counts = classify_outcomes(records, t);
			row.metrics = uncertainty_metrics(row.counts);
			rows.push_back(row);
		}
		return rows;
	}

	EntropyHistograms entropy_histogram(std::span<const PredictionRecord> records, std::size_t bin_count, double max_entropy)
	{
		if (bin_count == 0)
			throw ConfigError("entropy histogram needs at least one bin");
		if (!(max_entropy > 0.0))
			throw ConfigError("entropy histogram range must be positive");
		EntropyHistograms result;
		result.upper = max_entropy;
		result.correct.counts.assign(bin_count, 0);
		result.incorrect.counts.assign(bin_count, 0);
		const double width = max_entropy / static_cast<double>(bin_count);
		double correct_sum = 0.0, incorrect_sum = 0.0;
		for (const auto &r : records)
		{
			if (!(r.entropy >= 0.0))
				throw DataError("entropy histogram: negative entropy");
			const auto b = std::min(static_cast<std::size_t>(std::floor(r.entropy / width)), bin_count - 1);
			Histogram &h = r.correct() ? result.correct : result.incorrect;
			h.counts[b]++;
			h.total++;
			(r.correct() ? correct_sum : incorrect_sum) += r.entropy;
		}
		if (result.correct.total > 0)
			result.correct.mean_entropy = correct_sum / static_cast<double>(result.correct.total);
		if (result.incorrect.total > 0)
			result.incorrect.mean_entropy = incorrect_sum / static_cast<double>(result.incorrect.total);
		return result;
	}

	double quantile_sorted(std::span<const double> sorted, double p)
	{
		if (sorted.empty())
			throw DataError("quantile of an empty list");
		const double pos = p * static_cast<double>(sorted.size() - 1);
		const auto lo = static_cast<std::size_t>(std::floor(pos));
		const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
		const double frac = pos - static_cast<double>(lo);
		return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
	}

	SummaryStats summary_stats(std::span<const double> values)
	{
		if (values.empty())
			throw DataError("summary_stats: no values");
		std::vector<double> sorted(values.begin(), values.end());
		std::sort(sorted.begin(), sorted.end());

		SummaryStats s;
		s.count = values.size();
		double sum = 0.0;
		for (double v : values)
			sum += v;
		s.mean = sum / static_cast<double>(s.count);
		if (sorted.front() == sorted.back())
		{
			s.mean = sorted.front();
			if (s.count >= 2)
				s.stddev = 0.0;
		}
		else if (s.count >= 2)
		{
			double ss = 0.0;
			for (double v : values)
				ss += (v - s.mean) * (v - s.mean);
			s.stddev = std::sqrt(ss / static_cast<double>(s.count - 1));
		}
		s.min = sorted.front();
		s.max = sorted.back();
		s.q1 = quantile_sorted(sorted, 0.25);
		s.median = quantile_sorted(sorted, 0.5);
		s.q3 = quantile_sorted(sorted, 0.75);
		return s;
	}
}
