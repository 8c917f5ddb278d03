#include <uqlab/metrics/records_io.hpp>
#include <uqlab/errors.hpp>

#include <charconv>
#include <fstream>
#include <sstream>

namespace uqlab::metrics
{
	namespace
	{
		std::string_view strip_cr(std::string_view s) noexcept
		{
			while (!s.empty() && (s.back() == '\r' || s.back() == ' '))
				s.remove_suffix(1);
			return s;
		}

		template<typename T>
		T parse_field(std::string_view text, std::size_t row, const char *column)
		{
			T value { };
			const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
			if (ec != std::errc() || ptr != text.data() + text.size())
				throw DataError("records row " + std::to_string(row) + ", column '" + column + "': cannot parse '" + std::string(text) + "'");
			return value;
		}
	}

	std::string format_real(double value)
	{
		char buffer[32];
		const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
		return std::string(buffer, result.ptr);
	}

	void write_records_csv(std::span<const PredictionRecord> records, const std::filesystem::path &path)
	{
		std::ofstream out(path, std::ios::binary);
		if (!out)
			throw IoError("cannot write '" + path.string() + "'");
		out << records_csv_header << '\n';
		for (const auto &r : records)
			out << r.true_label << ',' << r.predicted_label << ',' << format_real(r.confidence) << ',' << format_real(r.entropy) << '\n';
		if (!out)
			throw IoError("failed while writing '" + path.string() + "'");
	}

	std::vector<PredictionRecord> read_records_csv(const std::filesystem::path &path)
	{
		std::ifstream in(path);
		if (!in)
			throw IoError("cannot open records file '" + path.string() + "'");
		std::string line;
		if (!std::getline(in, line) || strip_cr(line) != records_csv_header)
			throw DataError("records file '" + path.string() + "' must start with the header '" + records_csv_header + "'");

		std::vector<PredictionRecord> records;
		std::size_t row = 0;
		while (std::getline(in, line))
		{
			const std::string_view view = strip_cr(line);
			if (view.empty())
				continue;
			row++;
			std::string_view fields[4];
			std::size_t start = 0;
			for (int f = 0; f < 4; f++)
			{
				const std::size_t comma = view.find(',', start);
				if ((f < 3) != (comma != std::string_view::npos))
					throw DataError("records row " + std::to_string(row) + " must have exactly 4 fields");
				fields[f] = view.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
				start = comma + 1;
			}
			PredictionRecord r;
			r.true_label = parse_field<int>(fields[0], row, "true_label");
			r.predicted_label = parse_field<int>(fields[1], row, "predicted_label");
			r.confidence = parse_field<double>(fields[2], row, "confidence");
			r.entropy = parse_field<double>(fields[3], row, "entropy");
			records.push_back(r);
		}
		validate_records(records);
		return records;
	}
}
