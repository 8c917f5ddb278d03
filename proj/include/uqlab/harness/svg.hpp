#pragma once

#include <uqlab/harness/study.hpp>

#include <span>
#include <string>

/*
 * Minimal SVG renderings of the report tables. Pure string builders; coordinates are printed with
 * two decimals so output is byte-stable.
 */
namespace uqlab::harness::svg
{
	/// Per-bin accuracy bars against the identity line, one panel per method.
	std::string reliability_diagram(std::span<const MethodReport> methods);
	/// Entropy histograms of correct and misclassified samples, one panel per method.
	std::string entropy_histograms(std::span<const MethodReport> methods);
	/// USen, USpe, UPre and UAcc against the threshold, one panel per method.
	std::string threshold_sweep(std::span<const MethodReport> methods);
	/// Box plots of the per-run base-model metrics. Whiskers span min to max; no outlier rule is applied.
	std::string base_model_boxplot(const BaseStudy &study);
}
