#pragma once

#include <uqlab/matrix.hpp>
#include <uqlab/rng.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace uqlab::data
{
	/// Feature matrix with binary labels (0 = negative / non-cancer, 1 = positive / cancer).
	struct Dataset
	{
			Matrix features;
			std::vector<int> labels;
			std::vector<std::string> feature_names;
			std::string provenance;

			std::size_t size() const noexcept
			{
				return labels.size();
			}
			std::size_t dims() const noexcept
			{
				return features.cols();
			}
			/// Throws DataError if row count and label count disagree or a label is not 0/1.
			void validate() const;
			Dataset subset(std::span<const std::size_t> indices) const;
	};

	/// Raw label token -> binary class.
	class LabelMap
	{
		public:
			LabelMap() = default;
			explicit LabelMap(std::map<std::string, int> mapping);

			/// Tokens "0" and "1" map to themselves.
			static LabelMap identity();
			/// HAM10000 codes and their HMNIST integer labels: akiec(0), bcc(1), mel(6) -> 1; bkl(2), df(3), nv(4), vasc(5) -> 0.
			static LabelMap ham10000_default();
			/// JSON object {"token": 0|1, ...}.
			static LabelMap load(const std::filesystem::path &path);

			int map(const std::string &token) const;
			const std::map<std::string, int>& entries() const noexcept
			{
				return m_mapping;
			}

		private:
			std::map<std::string, int> m_mapping;
	};

	enum class CsvSchema
	{
		automatic, // hmnist when the header starts with pixel0000, generic otherwise
		hmnist,
		generic
	};

	struct CsvOptions
	{
			CsvSchema schema = CsvSchema::automatic;
			std::string label_column = "label";
	};

	inline constexpr std::size_t hmnist_pixel_count = 28 * 28 * 3;

	/// Loads a feature CSV. HMNIST pixels (0-255) are scaled to [0, 1].
	Dataset load_csv(const std::filesystem::path &path, const CsvOptions &options, const LabelMap &label_map);
	/// Writes a generic CSV (feature columns then `label`), values in shortest round-trip form.
	void write_csv(const Dataset &dataset, const std::filesystem::path &path);

	struct StandardizationStats
	{
			std::vector<double> mean;
			std::vector<double> stddev; // sample (n-1) deviation; 1 for zero-variance features

			Matrix apply(const Matrix &features) const;
	};

	StandardizationStats fit_standardization(const Dataset &train);
	/// Z-scores train and every dataset in apply_to using statistics of train only.
	std::pair<std::vector<Dataset>, StandardizationStats> standardize(const Dataset &train, const std::vector<Dataset> &apply_to);

	struct Split
	{
			Dataset train;
			Dataset test;
			std::vector<std::size_t> train_indices;
			std::vector<std::size_t> test_indices;
	};

	/// Shuffle then cut at floor(n * fraction); stratified mode cuts each class separately.
	Split split(const Dataset &dataset, double train_fraction, RngStream &rng, bool stratified = false);

	/// Two isotropic Gaussian clusters at +/- separation * noise_std / 2 on the first axis, n/2 rows each.
	Dataset synthetic_blobs(std::size_t n, std::size_t dims, double separation, double noise_std, RngStream &rng);
}
