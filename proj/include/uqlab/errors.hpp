#pragma once

#include <stdexcept>
#include <string>

namespace uqlab
{
	// Error taxonomy shared by the library and the CLI. Each category maps to one exit code.
	class ConfigError : public std::runtime_error
	{
		public:
			using std::runtime_error::runtime_error;
	};

	class DataError : public std::runtime_error
	{
		public:
			using std::runtime_error::runtime_error;
	};

	class DimensionError : public DataError
	{
		public:
			using DataError::DataError;
	};

	class IoError : public std::runtime_error
	{
		public:
			using std::runtime_error::runtime_error;
	};

	enum class ExitCode : int
	{
		success = 0,
		config_error = 2,
		data_error = 3,
		io_error = 4
	};
}
