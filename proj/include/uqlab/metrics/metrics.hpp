#pragma once

#include <cstddef>
#include <numbers>
#include <optional>
#include <span>
#include <vector>

/*
 * Evaluation of predictive uncertainty. Every function here is pure.
 *
 * A prediction is "correct" when predicted_label == true_label and "uncertain" when its entropy is
 * strictly greater than the threshold. The four cells are
 *   TC  correct and certain       TU  incorrect and uncertain
 *   FU  correct and uncertain     FC  incorrect and certain
 * Ratios whose denominator is zero are reported as std::nullopt rather than 0.
 */
namespace uqlab::metrics
{
	struct PredictionRecord
	{
			int true_label = 0;
			int predicted_label = 0;
			double confidence = 0.5; // max of the mean class probabilities
			double entropy = 0.0;

			bool correct() const noexcept
			{
				return true_label == predicted_label;
			}
			friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
	};

	/// Throws DataError for labels outside {0, 1}, confidence outside [0.5, 1] or negative/non-finite entropy.
	void validate_records(std::span<const PredictionRecord> records);

	struct UncertaintyConfusionMatrix
	{
			std::size_t tc = 0;
			std::size_t tu = 0;
			std::size_t fu = 0;
			std::size_t fc = 0;
			double threshold = 0.0;

			std::size_t total() const noexcept
			{
				return tc + tu + fu + fc;
			}
			friend bool operator==(const UncertaintyConfusionMatrix&, const UncertaintyConfusionMatrix&) = default;
	};

	UncertaintyConfusionMatrix classify_outcomes(std::span<const PredictionRecord> records, double threshold);

	struct UncertaintyMetrics
	{
			std::optional<double> usen; // TU / (TU + FC)
			std::optional<double> uspe; // TC / (TC + FU)
			std::optional<double> upre; // TU / (TU + FU)
			std::optional<double> uacc; // (TU + TC) / total
	};

	UncertaintyMetrics uncertainty_metrics(const UncertaintyConfusionMatrix &ucm);

	struct CalibrationBin
	{
			double lower = 0.0; // exclusive, except the first bin which also takes confidence 0
			double upper = 0.0; // inclusive
			std::size_t count = 0;
			double accuracy = 0.0;   // 0 for empty bins
			double confidence = 0.0; // 0 for empty bins
	};

	struct CalibrationBins
	{
			std::vector<CalibrationBin> bins;
			std::size_t total = 0;
	};

	struct EceResult
	{
			double ece = 0.0; // fraction in [0, 1]
			CalibrationBins bins;

			double percent() const noexcept
			{
				return 100.0 * ece;
			}
	};

	/// Bin m (0-based) covers (m/M, (m+1)/M]; confidence 0 goes to bin 0.
	std::size_t calibration_bin_index(double confidence, std::size_t bin_count);
	EceResult ece(std::span<const PredictionRecord> records, std::size_t bin_count = 10);

	struct ClassicalMetrics
	{
			double accuracy = 0.0;
			std::optional<double> sensitivity; // TP / (TP + FN), positive class 1
			std::optional<double> specificity; // TN / (TN + FP)
	};

	ClassicalMetrics classical_metrics(std::span<const PredictionRecord> records);

	/// Probability assigned to the positive class, recovered from label and confidence.
	std::vector<double> positive_scores(std::span<const PredictionRecord> records);
	/// Mann-Whitney AUC with ties counted 1/2; nullopt unless both classes are present.
	std::optional<double> auc(std::span<const double> scores, std::span<const int> labels);

	/// start, start + step, ... up to end inclusive (values rounded to 12 decimals).
	std::vector<double> threshold_grid(double start = 0.1, double end = 0.9, double step = 0.05);

	struct SweepRow
	{
			double threshold = 0.0;
			UncertaintyConfusionMatrix counts;
			UncertaintyMetrics metrics;
	};

	std::vector<SweepRow> threshold_sweep(std::span<const PredictionRecord> records, std::span<const double> thresholds);

	struct Histogram
	{
			std::vector<std::size_t> counts;
			std::size_t total = 0;
			std::optional<double> mean_entropy; // nullopt for an empty group

			bool empty() const noexcept
			{
				return total == 0;
			}
	};

	struct EntropyHistograms
	{
			double lower = 0.0;
			double upper = std::numbers::ln2;
			Histogram correct;
			Histogram incorrect;
	};

	/// Equal-width bins over [0, max_entropy]; values above the range land in the last bin.
	EntropyHistograms entropy_histogram(std::span<const PredictionRecord> records, std::size_t bin_count, double max_entropy = std::numbers::ln2);

	struct SummaryStats
	{
			std::size_t count = 0;
			double mean = 0.0;
			std::optional<double> stddev; // sample (n - 1); nullopt for a single value
			double min = 0.0;
			double q1 = 0.0;
			double median = 0.0;
			double q3 = 0.0;
			double max = 0.0;
	};

	/// Quantile of sorted data, linear interpolation between order statistics at p * (n - 1).
	double quantile_sorted(std::span<const double> sorted, double p);
	SummaryStats summary_stats(std::span<const double> values);
}
