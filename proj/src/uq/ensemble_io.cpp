#include <uqlab/uq/ensemble_io.hpp>
#include <uqlab/errors.hpp>
#include <uqlab/nn/model_io.hpp>

#include <cstdio>

namespace uqlab::uq
{
	using nlohmann::json;

	json ensemble_spec_to_json(const EnsembleSpec &spec)
	{
		json ranges = json::array();
		for (const auto &[low, high] : spec.width_ranges)
			ranges.push_back(json::array( { low, high }));
		return json { { "member_count", spec.member_count }, { "depth_choices", spec.depth_choices }, { "width_ranges", std::move(ranges) }, {
				"base_seed", spec.base_seed } };
	}

	EnsembleSpec ensemble_spec_from_json(const json &j)
	{
		EnsembleSpec spec;
		try
		{
			spec.member_count = j.at("member_count").get<std::size_t>();
			spec.depth_choices = j.at("depth_choices").get<std::vector<std::size_t>>();
			spec.width_ranges.clear();
			for (const auto &r : j.at("width_ranges"))
			{
				if (!r.is_array() || r.size() != 2)
					throw ConfigError("ensemble width ranges must be [low, high] pairs");
				spec.width_ranges.emplace_back(r[0].get<std::size_t>(), r[1].get<std::size_t>());
			}
			spec.base_seed = j.value("base_seed", std::uint64_t { 0 });
		} catch (const json::exception &e)
		{
			throw ConfigError(std::string("invalid ensemble spec: ") + e.what());
		}
		spec.validate();
		return spec;
	}

	void save_ensemble(const EnsembleBundle &bundle, const std::filesystem::path &directory)
	{
		std::error_code ec;
		std::filesystem::create_directories(directory, ec);
		if (ec)
			throw IoError("cannot create ensemble directory '" + directory.string() + "': " + ec.message());
		json members = json::array();
		for (std::size_t i = 0; i < bundle.members.size(); i++)
		{
			char name[64];
			std::snprintf(name, sizeof(name), "member_%03zu.model.json", i);
			nn::save_model(nn::ModelFile { bundle.members[i], bundle.standardization }, directory / name);
			members.push_back(json { { "file", name }, { "seed", bundle.members[i].architecture.seed } });
		}
		json manifest { { "format", "uqlab.ensemble" }, { "version", 1 }, { "spec", ensemble_spec_to_json(bundle.spec) }, { "members", std::move(
				members) } };
		nn::write_json_file(manifest, directory / ensemble_manifest_name);
	}

	EnsembleBundle load_ensemble(const std::filesystem::path &directory)
	{
		const json manifest = nn::read_json_file(directory / ensemble_manifest_name);
		if (manifest.value("format", std::string()) != "uqlab.ensemble")
			throw DataError("'" + (directory / ensemble_manifest_name).string() + "' is not an ensemble manifest");
		EnsembleBundle bundle;
		try
		{
			bundle.spec = ensemble_spec_from_json(manifest.at("spec"));
		} catch (const ConfigError &e)
		{
			throw DataError(e.what());
		}
		if (!manifest.contains("members") || !manifest.at("members").is_array() || manifest.at("members").empty())
			throw DataError("ensemble manifest lists no members");
		for (const auto &entry : manifest.at("members"))
		{
			const auto file = entry.value("file", std::string());
			if (file.empty())
				throw DataError("ensemble manifest member has no file");
			nn::ModelFile model = nn::load_model(directory / file);
			if (entry.contains("seed") && entry.at("seed").get<std::uint64_t>() != model.model.architecture.seed)
				throw DataError("ensemble member '" + file + "' seed disagrees with the manifest");
			if (!bundle.members.empty() && model.model.architecture.input_dim != bundle.members.front().architecture.input_dim)
				throw DataError("ensemble members disagree on input dimension");
			if (bundle.members.empty())
				bundle.standardization = model.standardization;
			bundle.members.push_back(std::move(model.model));
		}
		return bundle;
	}
}
