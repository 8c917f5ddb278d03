#include <uqlab/harness/config.hpp>
#include <uqlab/errors.hpp>
#include <uqlab/nn/model_io.hpp>
#include <uqlab/uq/ensemble_io.hpp>

#include <charconv>
#include <cstdlib>
#include <initializer_list>
#include <sstream>

namespace uqlab::harness
{
	using nlohmann::json;

	namespace
	{
		void check_keys(const json &j, const char *where, std::initializer_list<const char*> allowed)
		{
			if (!j.is_object())
				throw ConfigError(std::string("config section '") + where + "' must be a JSON object");
			for (const auto &[key, value] : j.items())
			{
				bool known = false;
				for (const char *a : allowed)
					known = known || key == a;
				if (!known)
					throw ConfigError(std::string("unknown config key '") + key + "' in section '" + where + "'");
			}
		}

		template<typename T>
		void read(const json &j, const char *key, T &target)
		{
			if (!j.contains(key))
				return;
			try
			{
				target = j.at(key).get<T>();
			} catch (const json::exception &e)
			{
				throw ConfigError(std::string("config key '") + key + "' has the wrong type: " + e.what());
			}
		}
	}

	std::string to_string(Method method)
	{
		switch (method)
		{
			case Method::mcd:
				return "mcd";
			case Method::ensemble:
				return "ensemble";
			case Method::emcd:
				return "emcd";
		}
		return "unknown";
	}
	Method method_from_string(const std::string &name)
	{
		if (name == "mcd")
			return Method::mcd;
		if (name == "ensemble")
			return Method::ensemble;
		if (name == "emcd")
			return Method::emcd;
		throw ConfigError("unknown method '" + name + "' (expected mcd, ensemble, emcd or all)");
	}
	std::vector<Method> parse_methods(const std::string &text)
	{
		std::vector<Method> result;
		std::stringstream ss(text);
		std::string item;
		while (std::getline(ss, item, ','))
		{
			if (item.empty())
				continue;
			if (item == "all")
				return { Method::mcd, Method::ensemble, Method::emcd };
			const Method m = method_from_string(item);
			bool seen = false;
			for (Method existing : result)
				seen = seen || existing == m;
			if (!seen)
				result.push_back(m);
		}
		return result;
	}

	std::string to_string(uq::LogBase base)
	{
		return base == uq::LogBase::base2 ? "base2" : "natural";
	}
	uq::LogBase log_base_from_string(const std::string &name)
	{
		if (name == "natural" || name == "e")
			return uq::LogBase::natural;
		if (name == "base2" || name == "2")
			return uq::LogBase::base2;
		throw ConfigError("unknown log base '" + name + "' (expected natural or base2)");
	}

	void ExperimentConfig::validate() const
	{
		if (data.source == DataConfig::Source::synthetic)
		{
			if (data.synthetic.n < 2 || data.synthetic.n % 2 != 0)
				throw ConfigError("synthetic n must be even and at least 2");
			if (data.synthetic.dims == 0)
				throw ConfigError("synthetic dims must be positive");
			if (!(data.synthetic.noise_std >= 0.0))
				throw ConfigError("synthetic noise_std must be non-negative");
		}
		else if (data.csv.path.empty())
			throw ConfigError("csv data source needs data.csv.path");
		if (!(data.train_fraction > 0.0 && data.train_fraction < 1.0))
			throw ConfigError("train_fraction must lie strictly between 0 and 1");
		for (std::size_t h : model.hidden_sizes)
			if (h == 0)
				throw ConfigError("hidden sizes must be positive");
		if (!(model.dropout_retain > 0.0 && model.dropout_retain <= 1.0))
			throw ConfigError("dropout_retain must lie in (0, 1]");
		if (model.batch_size == 0)
			throw ConfigError("batch_size must be positive");
		if (!(model.learning_rate > 0.0))
			throw ConfigError("learning_rate must be positive");
		if (mc_samples == 0)
			throw ConfigError("mc_samples must be at least 1");
		ensemble.validate();
		if (!(grid_step > 0.0) || grid_end < grid_start)
			throw ConfigError("threshold grid needs start <= end and a positive step");
		if (ece_bins == 0 || entropy_bins == 0)
			throw ConfigError("bin counts must be positive");
		if (repetitions == 0)
			throw ConfigError("repetitions must be at least 1");
		if (threads == 0)
			throw ConfigError("threads must be at least 1");
	}

	ExperimentConfig desk_profile()
	{
		ExperimentConfig c;
		c.profile = "desk";
		c.ensemble.member_count = 5;
		c.ensemble.depth_choices = { 2, 3 };
		c.ensemble.width_ranges = { { 32, 64 }, { 16, 32 }, { 8, 16 } };
		return c;
	}

	ExperimentConfig paper_profile()
	{
		ExperimentConfig c;
		c.profile = "paper";
		c.model.hidden_sizes = { 512, 256, 64 };
		c.model.dropout_retain = 0.75;
		c.model.learning_rate = 0.001;
		c.mc_samples = 200;
		c.ensemble.member_count = 30;
		c.ensemble.depth_choices = { 2, 3 };
		c.ensemble.width_ranges = { { 512, 1024 }, { 128, 512 }, { 8, 128 } };
		c.repetitions = 100;
		return c;
	}

	ExperimentConfig profile_by_name(const std::string &name)
	{
		if (name == "desk")
			return desk_profile();
		if (name == "paper")
			return paper_profile();
		throw ConfigError("unknown profile '" + name + "' (expected desk or paper)");
	}

	ExperimentConfig config_from_json(const json &j, ExperimentConfig c)
	{
		check_keys(j, "root", { "profile", "data", "model", "methods", "mc_samples", "ensemble", "anchor_base_model", "thresholds", "ece_bins",
				"entropy_bins", "repetitions", "log_base", "seed", "threads", "write_svg" });
		if (j.contains("profile"))
		{
			std::string name;
			read(j, "profile", name);
			c = profile_by_name(name);
		}
		if (j.contains("data"))
		{
			const json &d = j.at("data");
			check_keys(d, "data", { "source", "synthetic", "csv", "train_fraction", "stratified" });
			if (d.contains("source"))
			{
				std::string source;
				read(d, "source", source);
				if (source == "synthetic")
					c.data.source = DataConfig::Source::synthetic;
				else if (source == "csv")
					c.data.source = DataConfig::Source::csv;
				else
					throw ConfigError("data.source must be 'synthetic' or 'csv'");
			}
			if (d.contains("synthetic"))
			{
				const json &s = d.at("synthetic");
				check_keys(s, "data.synthetic", { "n", "dims", "separation", "noise_std" });
				read(s, "n", c.data.synthetic.n);
				read(s, "dims", c.data.synthetic.dims);
				read(s, "separation", c.data.synthetic.separation);
				read(s, "noise_std", c.data.synthetic.noise_std);
			}
			if (d.contains("csv"))
			{
				const json &s = d.at("csv");
				check_keys(s, "data.csv", { "path", "label_column", "label_map" });
				read(s, "path", c.data.csv.path);
				read(s, "label_column", c.data.csv.label_column);
				read(s, "label_map", c.data.csv.label_map);
			}
			read(d, "train_fraction", c.data.train_fraction);
			read(d, "stratified", c.data.stratified);
		}
		if (j.contains("model"))
		{
			const json &m = j.at("model");
			check_keys(m, "model", { "hidden_sizes", "dropout_retain", "epochs", "batch_size", "learning_rate" });
			read(m, "hidden_sizes", c.model.hidden_sizes);
			read(m, "dropout_retain", c.model.dropout_retain);
			read(m, "epochs", c.model.epochs);
			read(m, "batch_size", c.model.batch_size);
			read(m, "learning_rate", c.model.learning_rate);
		}
		if (j.contains("methods"))
		{
			const json &m = j.at("methods");
			if (m.is_string())
				c.methods = parse_methods(m.get<std::string>());
			else if (m.is_array())
			{
				c.methods.clear();
				for (const auto &item : m)
				{
					if (!item.is_string())
						throw ConfigError("methods must be strings");
					for (Method parsed : parse_methods(item.get<std::string>()))
					{
						bool seen = false;
						for (Method existing : c.methods)
							seen = seen || existing == parsed;
						if (!seen)
							c.methods.push_back(parsed);
					}
				}
			}
			else
				throw ConfigError("methods must be a string or a list of strings");
		}
		read(j, "mc_samples", c.mc_samples);
		if (j.contains("ensemble"))
		{
			const json &e = j.at("ensemble");
			check_keys(e, "ensemble", { "member_count", "depth_choices", "width_ranges" });
			json merged = uq::ensemble_spec_to_json(c.ensemble);
			for (const auto &[key, value] : e.items())
				merged[key] = value;
			c.ensemble = uq::ensemble_spec_from_json(merged);
		}
		read(j, "anchor_base_model", c.anchor_base_model);
		if (j.contains("thresholds"))
		{
			const json &t = j.at("thresholds");
			check_keys(t, "thresholds", { "start", "end", "step", "spotlight" });
			read(t, "start", c.grid_start);
			read(t, "end", c.grid_end);
			read(t, "step", c.grid_step);
			read(t, "spotlight", c.spotlight_threshold);
		}
		read(j, "ece_bins", c.ece_bins);
		read(j, "entropy_bins", c.entropy_bins);
		read(j, "repetitions", c.repetitions);
		if (j.contains("log_base"))
		{
			std::string base;
			read(j, "log_base", base);
			c.log_base = log_base_from_string(base);
		}
		read(j, "seed", c.seed);
		read(j, "threads", c.threads);
		read(j, "write_svg", c.write_svg);
		return c;
	}

	ExperimentConfig load_config(const std::filesystem::path &path, ExperimentConfig base)
	{
		json j;
		try
		{
			j = nn::read_json_file(path);
		} catch (const DataError &e)
		{
			throw ConfigError(e.what());
		}
		return config_from_json(j, std::move(base));
	}

	json config_to_json(const ExperimentConfig &c)
	{
		json methods = json::array();
		for (Method m : c.methods)
			methods.push_back(to_string(m));
		json ensemble = uq::ensemble_spec_to_json(c.ensemble);
		ensemble.erase("base_seed");
		return json { { "profile", c.profile }, { "data", { { "source", c.data.source == DataConfig::Source::csv ? "csv" : "synthetic" }, { "synthetic",
				{ { "n", c.data.synthetic.n }, { "dims", c.data.synthetic.dims }, { "separation", c.data.synthetic.separation }, { "noise_std",
						c.data.synthetic.noise_std } } }, { "csv", { { "path", c.data.csv.path }, { "label_column", c.data.csv.label_column }, {
				"label_map", c.data.csv.label_map } } }, { "train_fraction", c.data.train_fraction }, { "stratified", c.data.stratified } } }, {
				"model", { { "hidden_sizes", c.model.hidden_sizes }, { "dropout_retain", c.model.dropout_retain }, { "epochs", c.model.epochs }, {
						"batch_size", c.model.batch_size }, { "learning_rate", c.model.learning_rate } } }, { "methods", std::move(methods) }, {
				"mc_samples", c.mc_samples }, { "ensemble", std::move(ensemble) }, { "anchor_base_model", c.anchor_base_model }, { "thresholds", { {
				"start", c.grid_start }, { "end", c.grid_end }, { "step", c.grid_step }, { "spotlight", c.spotlight_threshold } } }, { "ece_bins",
				c.ece_bins }, { "entropy_bins", c.entropy_bins }, { "repetitions", c.repetitions }, { "log_base", to_string(c.log_base) }, { "seed",
				c.seed }, { "threads", c.threads }, { "write_svg", c.write_svg } };
	}

	std::uint64_t resolve_seed(std::uint64_t config_seed, std::optional<std::uint64_t> flag_seed)
	{
		if (flag_seed)
			return *flag_seed;
		if (const char *env = std::getenv("UQLAB_SEED"); env != nullptr && *env != '\0')
		{
			std::uint64_t value = 0;
			const std::string_view text(env);
			const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
			if (ec != std::errc() || ptr != text.data() + text.size())
				throw ConfigError("UQLAB_SEED must be an unsigned integer, got '" + std::string(text) + "'");
			return value;
		}
		return config_seed;
	}
}
