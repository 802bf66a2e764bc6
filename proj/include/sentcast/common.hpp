#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

namespace sentcast {

/// Base class for every fatal error raised by the library.
class Error : public std::runtime_error {
public:
	using std::runtime_error::runtime_error;
};

/// A file could not be opened, read or written.
class IoError : public Error {
public:
	using Error::Error;
};

/// Input data is unusable as a whole (empty lexicon, too few price rows, ...).
class InputError : public Error {
public:
	using Error::Error;
};

/// Configuration or argument is inconsistent.
class ConfigError : public Error {
public:
	using Error::Error;
};

/// Collects non-fatal warnings from loaders. Loaders take a nullable pointer;
/// passing nullptr discards the warnings.
struct Diagnostics {
	std::vector<std::string> warnings;

	void warn(std::string message) {
		warnings.push_back(std::move(message));
	}
};

inline void warn(Diagnostics *diag, std::string message) {
	if (diag != nullptr) {
		diag->warn(std::move(message));
	}
}

using Date = std::chrono::year_month_day;

inline std::optional<int> parse_fixed_int(std::string_view s) {
	int value = 0;
	if (s.empty()) {
		return std::nullopt;
	}
	auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
	if (ec != std::errc{} || ptr != s.data() + s.size()) {
		return std::nullopt;
	}
	return value;
}

/// Parses "YYYY-MM-DD". Returns nullopt for anything else, including
/// impossible calendar dates.
inline std::optional<Date> parse_date(std::string_view s) {
	if (s.size() != 10 || s[4] != '-' || s[7] != '-') {
		return std::nullopt;
	}
	auto y = parse_fixed_int(s.substr(0, 4));
	auto m = parse_fixed_int(s.substr(5, 2));
	auto d = parse_fixed_int(s.substr(8, 2));
	if (!y || !m || !d) {
		return std::nullopt;
	}
	Date date{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
	          std::chrono::day{static_cast<unsigned>(*d)}};
	if (!date.ok()) {
		return std::nullopt;
	}
	return date;
}

inline std::string format_date(const Date &date) {
	char buf[32];
	std::snprintf(buf, sizeof(buf), "%04d-%02u-%02u", static_cast<int>(date.year()),
	              static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
	return buf;
}

inline Date add_days(const Date &date, int days) {
	return Date{std::chrono::sys_days{date} + std::chrono::days{days}};
}

inline bool is_ascii_alnum(char c) {
	return std::isalnum(static_cast<unsigned char>(c)) != 0;
}

inline bool is_ascii_space(char c) {
	return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

inline std::string to_lower(std::string_view s) {
	std::string out(s);
	std::transform(out.begin(), out.end(), out.begin(),
	               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
	return out;
}

inline std::string_view trim(std::string_view s) {
	while (!s.empty() && is_ascii_space(s.front())) {
		s.remove_prefix(1);
	}
	while (!s.empty() && is_ascii_space(s.back())) {
		s.remove_suffix(1);
	}
	return s;
}

inline std::vector<std::string> split(std::string_view s, char delim) {
	std::vector<std::string> out;
	std::size_t start = 0;
	while (true) {
		auto pos = s.find(delim, start);
		if (pos == std::string_view::npos) {
			out.emplace_back(s.substr(start));
			break;
		}
		out.emplace_back(s.substr(start, pos - start));
		start = pos + 1;
	}
	return out;
}

inline std::optional<double> parse_double(std::string_view s) {
	s = trim(s);
	if (s.empty()) {
		return std::nullopt;
	}
	if (s.front() == '+') {
		s.remove_prefix(1);
	}
	double value = 0.0;
	auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
	if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(value)) {
		return std::nullopt;
	}
	return value;
}

inline std::string read_file(const std::filesystem::path &path) {
	std::ifstream in(path, std::ios::binary);
	if (!in) {
		throw IoError("cannot open " + path.string());
	}
	std::ostringstream ss;
	ss << in.rdbuf();
	if (in.bad()) {
		throw IoError("error reading " + path.string());
	}
	return ss.str();
}

/// Writes via a sibling temp file and rename so readers never observe a
/// partially written file.
inline void write_file_atomic(const std::filesystem::path &path, std::string_view content) {
	if (path.has_parent_path()) {
		std::filesystem::create_directories(path.parent_path());
	}
	auto tmp = path;
	tmp += ".tmp";
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if (!out) {
			throw IoError("cannot write " + tmp.string());
		}
		out.write(content.data(), static_cast<std::streamsize>(content.size()));
		if (!out) {
			throw IoError("error writing " + tmp.string());
		}
	}
	std::error_code ec;
	std::filesystem::rename(tmp, path, ec);
	if (ec) {
		throw IoError("cannot rename " + tmp.string() + ": " + ec.message());
	}
}

/// 64-bit FNV-1a. Stable across platforms, used for seed derivation.
inline std::uint64_t fnv1a64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
	for (unsigned char c : s) {
		h ^= c;
		h *= 0x100000001b3ULL;
	}
	return h;
}

/// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t z) {
	z += 0x9e3779b97f4a7c15ULL;
	z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
	z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
	return z ^ (z >> 31);
}

inline std::string format_fixed(double value, int decimals) {
	char buf[64];
	std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
	return buf;
}

} // namespace sentcast
