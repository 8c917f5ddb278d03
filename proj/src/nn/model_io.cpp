#include <uqlab/nn/model_io.hpp>
#include <uqlab/errors.hpp>

#include <fstream>

namespace uqlab::nn
{
	using nlohmann::json;

	namespace
	{
		template<typename T>
		T require(const json &j, const char *key)
		{
			if (!j.contains(key))
				throw DataError(std::string("model file is missing field '") + key + "'");
			try
			{
				return j.at(key).get<T>();
			} catch (const json::exception &e)
			{
				throw DataError(std::string("model file field '") + key + "' has the wrong type: " + e.what());
			}
		}
	}

	json architecture_to_json(const MlpArchitecture &arch)
	{
		return json { { "input_dim", arch.input_dim }, { "hidden_sizes", arch.hidden_sizes }, { "output_dim", arch.output_dim }, { "dropout_retain",
				arch.dropout_retain }, { "seed", arch.seed } };
	}
	MlpArchitecture architecture_from_json(const json &j)
	{
		MlpArchitecture arch;
		arch.input_dim = require<std::size_t>(j, "input_dim");
		arch.hidden_sizes = require<std::vector<std::size_t>>(j, "hidden_sizes");
		arch.output_dim = require<std::size_t>(j, "output_dim");
		arch.dropout_retain = require<double>(j, "dropout_retain");
		arch.seed = require<std::uint64_t>(j, "seed");
		try
		{
			arch.validate();
		} catch (const ConfigError &e)
		{
			throw DataError(std::string("model file architecture is invalid: ") + e.what());
		}
		return arch;
	}

	json model_to_json(const ModelFile &file)
	{
		json layers = json::array();
		for (const auto &layer : file.model.params.layers)
		{
			json rows = json::array();
			for (std::size_t r = 0; r < layer.weights.rows(); r++)
			{
				const auto row = layer.weights.row(r);
				rows.push_back(std::vector<double>(row.begin(), row.end()));
			}
			layers.push_back(json { { "fan_in", layer.weights.rows() }, { "fan_out", layer.weights.cols() }, { "weights", std::move(rows) }, { "bias",
					layer.bias } });
		}
		json result { { "format", "uqlab.model" }, { "version", 1 }, { "architecture", architecture_to_json(file.model.architecture) }, { "layers",
				std::move(layers) } };
		if (file.standardization)
			result["standardization"] = json { { "mean", file.standardization->mean }, { "stddev", file.standardization->stddev } };
		return result;
	}

	ModelFile model_from_json(const json &j)
	{
		if (!j.is_object() || j.value("format", std::string()) != "uqlab.model")
			throw DataError("not a uqlab model file");
		ModelFile file;
		file.model.architecture = architecture_from_json(require<json>(j, "architecture"));
		const auto &arch = file.model.architecture;
		const json layers = require<json>(j, "layers");
		if (!layers.is_array() || layers.size() != arch.layer_count())
			throw DataError("model file layer count does not match its architecture");
		for (std::size_t l = 0; l < layers.size(); l++)
		{
			const std::size_t rows = arch.fan_in(l);
			const std::size_t cols = arch.fan_out(l);
			const auto weight_rows = require<std::vector<std::vector<double>>>(layers[l], "weights");
			auto bias = require<std::vector<double>>(layers[l], "bias");
			if (weight_rows.size() != rows || bias.size() != cols)
				throw DataError("model file layer " + std::to_string(l) + " has the wrong shape");
			std::vector<double> flat;
			flat.reserve(rows * cols);
			for (const auto &row : weight_rows)
			{
				if (row.size() != cols)
					throw DataError("model file layer " + std::to_string(l) + " has a ragged weight row");
				flat.insert(flat.end(), row.begin(), row.end());
			}
			file.model.params.layers.push_back(DenseLayer { Matrix(rows, cols, std::move(flat)), std::move(bias) });
		}
		if (j.contains("standardization"))
		{
			const json &s = j.at("standardization");
			data::StandardizationStats stats { require<std::vector<double>>(s, "mean"), require<std::vector<double>>(s, "stddev") };
			if (stats.mean.size() != arch.input_dim || stats.stddev.size() != arch.input_dim)
				throw DataError("model file standardization block does not match input_dim");
			file.standardization = std::move(stats);
		}
		if (!file.model.params.all_finite())
			throw DataError("model file contains non-finite parameters");
		return file;
	}

	json read_json_file(const std::filesystem::path &path)
	{
		std::ifstream in(path);
		if (!in)
			throw IoError("cannot open '" + path.string() + "'");
		try
		{
			return json::parse(in);
		} catch (const json::exception &e)
		{
			throw DataError("'" + path.string() + "' is not valid JSON: " + e.what());
		}
	}
	void write_json_file(const json &j, const std::filesystem::path &path)
	{
		std::ofstream out(path, std::ios::binary);
		if (!out)
			throw IoError("cannot write '" + path.string() + "'");
		out << j.dump(2) << '\n';
		if (!out)
			throw IoError("failed while writing '" + path.string() + "'");
	}

	void save_model(const ModelFile &file, const std::filesystem::path &path)
	{
		write_json_file(model_to_json(file), path);
	}
	ModelFile load_model(const std::filesystem::path &path)
	{
		return model_from_json(read_json_file(path));
	}
}
