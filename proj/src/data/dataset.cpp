#include <uqlab/data/dataset.hpp>
#include <uqlab/errors.hpp>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace uqlab::data
{
	namespace
	{
		std::string_view trim(std::string_view s) noexcept
		{
			while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
				s.remove_prefix(1);
			while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
				s.remove_suffix(1);
			return s;
		}

		std::vector<std::string_view> split_fields(std::string_view line)
		{
			std::vector<std::string_view> fields;
			std::size_t start = 0;
			while (true)
			{
				const std::size_t comma = line.find(',', start);
				fields.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
				if (comma == std::string_view::npos)
					break;
				start = comma + 1;
			}
			// strip a quoted header token such as "label"
			for (auto &f : fields)
				if (f.size() >= 2 && f.front() == '"' && f.back() == '"')
					f = f.substr(1, f.size() - 2);
			return fields;
		}

		bool parse_double(std::string_view text, double &value) noexcept
		{
			if (text.empty())
				return false;
			if (text.front() == '+')
				text.remove_prefix(1);
			const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
			return ec == std::errc() && ptr == text.data() + text.size() && std::isfinite(value);
		}

		std::string format_double(double x)
		{
			char buffer[32];
			const auto result = std::to_chars(buffer, buffer + sizeof(buffer), x);
			return std::string(buffer, result.ptr);
		}
	}

	void Dataset::validate() const
	{
		if (features.rows() != labels.size())
			throw DataError("dataset has " + std::to_string(features.rows()) + " feature rows but " + std::to_string(labels.size()) + " labels");
		for (int label : labels)
			if (label != 0 && label != 1)
				throw DataError("dataset label " + std::to_string(label) + " is not binary");
		if (!feature_names.empty() && feature_names.size() != features.cols())
			throw DataError("feature name count does not match feature columns");
	}
	Dataset Dataset::subset(std::span<const std::size_t> indices) const
	{
		Dataset result;
		result.features = features.select_rows(indices);
		result.labels.reserve(indices.size());
		for (std::size_t i : indices)
			result.labels.push_back(labels[i]);
		result.feature_names = feature_names;
		result.provenance = provenance;
		return result;
	}

	LabelMap::LabelMap(std::map<std::string, int> mapping) :
			m_mapping(std::move(mapping))
	{
		for (const auto &[token, cls] : m_mapping)
			if (cls != 0 && cls != 1)
				throw ConfigError("label map entry '" + token + "' must map to 0 or 1");
	}
	LabelMap LabelMap::identity()
	{
		return LabelMap( { { "0", 0 }, { "1", 1 } });
	}
	LabelMap LabelMap::ham10000_default()
	{
		return LabelMap( { { "0", 1 }, { "1", 1 }, { "2", 0 }, { "3", 0 }, { "4", 0 }, { "5", 0 }, { "6", 1 }, { "akiec", 1 }, { "bcc", 1 }, {
				"mel", 1 }, { "bkl", 0 }, { "df", 0 }, { "nv", 0 }, { "vasc", 0 } });
	}
	LabelMap LabelMap::load(const std::filesystem::path &path)
	{
		std::ifstream file(path);
		if (!file)
			throw IoError("cannot open label map '" + path.string() + "'");
		nlohmann::json doc;
		try
		{
			doc = nlohmann::json::parse(file);
		} catch (const nlohmann::json::exception &e)
		{
			throw ConfigError("label map '" + path.string() + "' is not valid JSON: " + e.what());
		}
		if (!doc.is_object())
			throw ConfigError("label map must be a JSON object of token -> 0|1");
		std::map<std::string, int> mapping;
		for (const auto &[token, value] : doc.items())
		{
			if (!value.is_number_integer())
				throw ConfigError("label map entry '" + token + "' must be the integer 0 or 1");
			mapping[token] = value.get<int>();
		}
		return LabelMap(std::move(mapping));
	}
	int LabelMap::map(const std::string &token) const
	{
		const auto it = m_mapping.find(token);
		if (it == m_mapping.end())
			throw DataError("label token '" + token + "' is not present in the label map");
		return it->second;
	}

	Dataset load_csv(const std::filesystem::path &path, const CsvOptions &options, const LabelMap &label_map)
	{
		std::ifstream file(path);
		if (!file)
			throw IoError("cannot open data file '" + path.string() + "'");

		std::string line;
		if (!std::getline(file, line) || trim(line).empty())
			throw DataError("schema error: '" + path.string() + "' has no header row");
		std::vector<std::string> header;
		for (auto f : split_fields(line))
			header.emplace_back(f);

		CsvSchema schema = options.schema;
		if (schema == CsvSchema::automatic)
			schema = (!header.empty() && header.front() == "pixel0000") ? CsvSchema::hmnist : CsvSchema::generic;

		const auto label_it = std::find(header.begin(), header.end(), options.label_column);
		if (label_it == header.end())
			throw DataError("schema error: missing label column '" + options.label_column + "'");
		const std::size_t label_index = static_cast<std::size_t>(label_it - header.begin());

		std::vector<std::size_t> feature_columns;
		for (std::size_t c = 0; c < header.size(); c++)
			if (c != label_index)
				feature_columns.push_back(c);

		if (schema == CsvSchema::hmnist)
		{
			if (feature_columns.size() != hmnist_pixel_count)
				throw DataError("schema error: HMNIST data needs " + std::to_string(hmnist_pixel_count) + " pixel columns, found "
						+ std::to_string(feature_columns.size()));
			for (std::size_t i = 0; i < hmnist_pixel_count; i++)
			{
				char expected[16];
				std::snprintf(expected, sizeof(expected), "pixel%04zu", i);
				if (header[feature_columns[i]] != expected)
					throw DataError(std::string("schema error: missing column '") + expected + "'");
			}
		}
		if (feature_columns.empty())
			throw DataError("schema error: no feature columns");

		Dataset result;
		for (std::size_t c : feature_columns)
			result.feature_names.push_back(header[c]);
		result.provenance = path.string();

		std::vector<double> values;
		std::size_t row = 0;
		while (std::getline(file, line))
		{
			if (trim(line).empty())
				continue;
			row++;
			const auto fields = split_fields(line);
			if (fields.size() != header.size())
				throw DataError("row " + std::to_string(row) + " has " + std::to_string(fields.size()) + " fields, header has "
						+ std::to_string(header.size()));
			for (std::size_t c : feature_columns)
			{
				double x = 0.0;
				if (!parse_double(fields[c], x))
					throw DataError("row " + std::to_string(row) + ", column '" + header[c] + "': non-numeric value '" + std::string(fields[c]) + "'");
				if (schema == CsvSchema::hmnist)
				{
					if (x < 0.0 || x > 255.0)
						throw DataError("row " + std::to_string(row) + ", column '" + header[c] + "': pixel value outside 0-255");
					x /= 255.0;
				}
				values.push_back(x);
			}
			result.labels.push_back(label_map.map(std::string(fields[label_index])));
		}
		result.features = Matrix(row, feature_columns.size(), std::move(values));
		return result;
	}

	void write_csv(const Dataset &dataset, const std::filesystem::path &path)
	{
		dataset.validate();
		std::ofstream file(path, std::ios::binary);
		if (!file)
			throw IoError("cannot write '" + path.string() + "'");
		for (std::size_t c = 0; c < dataset.dims(); c++)
			file << (dataset.feature_names.empty() ? "x" + std::to_string(c) : dataset.feature_names[c]) << ',';
		file << "label\n";
		for (std::size_t r = 0; r < dataset.size(); r++)
		{
			for (double x : dataset.features.row(r))
				file << format_double(x) << ',';
			file << dataset.labels[r] << '\n';
		}
		if (!file)
			throw IoError("failed while writing '" + path.string() + "'");
	}

	Matrix StandardizationStats::apply(const Matrix &features) const
	{
		if (features.cols() != mean.size())
			throw DimensionError("standardization expects " + std::to_string(mean.size()) + " features, got " + std::to_string(features.cols()));
		Matrix result = features;
		for (std::size_t r = 0; r < result.rows(); r++)
		{
			auto row = result.row(r);
			for (std::size_t c = 0; c < row.size(); c++)
				row[c] = (row[c] - mean[c]) / stddev[c];
		}
		return result;
	}

	StandardizationStats fit_standardization(const Dataset &train)
	{
		if (train.size() == 0)
			throw DataError("cannot standardize with an empty training set");
		const std::size_t n = train.size();
		const std::size_t d = train.dims();
		StandardizationStats stats { std::vector<double>(d, 0.0), std::vector<double>(d, 1.0) };
		for (std::size_t c = 0; c < d; c++)
		{
			const double first = train.features(0, c);
			bool constant = true;
			double sum = 0.0;
			for (std::size_t r = 0; r < n; r++)
			{
				sum += train.features(r, c);
				constant = constant && (train.features(r, c) == first);
			}
			if (constant || n < 2)
				continue; // identity transform: mean 0, std 1
			const double mean = sum / static_cast<double>(n);
			double ss = 0.0;
			for (std::size_t r = 0; r < n; r++)
			{
				const double dev = train.features(r, c) - mean;
				ss += dev * dev;
			}
			stats.mean[c] = mean;
			stats.stddev[c] = std::sqrt(ss / static_cast<double>(n - 1));
		}
		return stats;
	}

	std::pair<std::vector<Dataset>, StandardizationStats> standardize(const Dataset &train, const std::vector<Dataset> &apply_to)
	{
		StandardizationStats stats = fit_standardization(train);
		std::vector<Dataset> result;
		Dataset t = train;
		t.features = stats.apply(train.features);
		result.push_back(std::move(t));
		for (const auto &ds : apply_to)
		{
			Dataset s = ds;
			s.features = stats.apply(ds.features);
			result.push_back(std::move(s));
		}
		return { std::move(result), std::move(stats) };
	}

	Split split(const Dataset &dataset, double train_fraction, RngStream &rng, bool stratified)
	{
		if (!(train_fraction > 0.0 && train_fraction < 1.0))
			throw ConfigError("train fraction must lie strictly between 0 and 1");
		dataset.validate();

		Split result;
		auto cut_group = [&](std::vector<std::size_t> group)
		{
			rng.shuffle(std::span<std::size_t>(group));
			const auto cut = static_cast<std::size_t>(std::floor(static_cast<double>(group.size()) * train_fraction));
			result.train_indices.insert(result.train_indices.end(), group.begin(), group.begin() + static_cast<std::ptrdiff_t>(cut));
			result.test_indices.insert(result.test_indices.end(), group.begin() + static_cast<std::ptrdiff_t>(cut), group.end());
		};

		if (stratified)
		{
			for (int cls : { 0, 1 })
			{
				std::vector<std::size_t> group;
				for (std::size_t i = 0; i < dataset.size(); i++)
					if (dataset.labels[i] == cls)
						group.push_back(i);
				cut_group(std::move(group));
			}
		}
		else
		{
			std::vector<std::size_t> all(dataset.size());
			for (std::size_t i = 0; i < all.size(); i++)
				all[i] = i;
			cut_group(std::move(all));
		}

		if (result.train_indices.empty() || result.test_indices.empty())
			throw DataError("split of " + std::to_string(dataset.size()) + " rows at fraction " + std::to_string(train_fraction)
					+ " leaves one side empty");
		result.train = dataset.subset(result.train_indices);
		result.test = dataset.subset(result.test_indices);
		return result;
	}

	Dataset synthetic_blobs(std::size_t n, std::size_t dims, double separation, double noise_std, RngStream &rng)
	{
		if (n < 2 || n % 2 != 0)
			throw ConfigError("synthetic_blobs needs an even n >= 2, got " + std::to_string(n));
		if (dims == 0)
			throw ConfigError("synthetic_blobs needs dims >= 1");
		if (!(noise_std >= 0.0) || !std::isfinite(separation))
			throw ConfigError("synthetic_blobs needs finite separation and non-negative noise");

		Dataset result;
		result.features = Matrix(n, dims);
		result.labels.resize(n);
		const double offset = 0.5 * separation * noise_std;
		for (std::size_t r = 0; r < n; r++)
		{
			const int label = (r < n / 2) ? 0 : 1;
			result.labels[r] = label;
			for (std::size_t c = 0; c < dims; c++)
			{
				const double centre = (c == 0) ? (label == 0 ? -offset : offset) : 0.0;
				result.features(r, c) = rng.normal(centre, noise_std);
			}
		}
		for (std::size_t c = 0; c < dims; c++)
			result.feature_names.push_back("x" + std::to_string(c));
		std::ostringstream desc;
		desc << "synthetic_blobs(n=" << n << ", dims=" << dims << ", separation=" << separation << ", noise_std=" << noise_std << ", seed=" << rng.seed()
				<< ", stream=" << rng.stream_id() << ")";
		result.provenance = desc.str();
		return result;
	}
}
