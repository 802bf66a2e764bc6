#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "sentcast/common.hpp"

namespace sentcast::csv {

struct Record {
	std::size_t line = 0; // 1-based line where the record starts
	std::vector<std::string> fields;
};

/// RFC 4180 reader: quoted fields may contain the delimiter, doubled quotes
/// and newlines. Blank lines are skipped. A trailing '\r' is dropped.
inline std::vector<Record> parse(std::string_view text, char delim = ',') {
	std::vector<Record> records;
	Record current;
	std::string field;
	bool in_quotes = false;
	bool field_started = false;
	std::size_t line = 1;
	current.line = 1;

	auto end_field = [&] {
		current.fields.push_back(std::move(field));
		field.clear();
		field_started = false;
	};
	auto end_record = [&] {
		end_field();
		bool blank = current.fields.size() == 1 && trim(current.fields[0]).empty();
		if (!blank) {
			records.push_back(std::move(current));
		}
		current = Record{};
		current.line = line;
	};

	for (std::size_t i = 0; i < text.size(); ++i) {
		char c = text[i];
		if (in_quotes) {
			if (c == '"') {
				if (i + 1 < text.size() && text[i + 1] == '"') {
					field.push_back('"');
					++i;
				} else {
					in_quotes = false;
				}
			} else {
				if (c == '\n') {
					++line;
				}
				field.push_back(c);
			}
			continue;
		}
		if (c == '"' && !field_started) {
			in_quotes = true;
			field_started = true;
		} else if (c == delim) {
			end_field();
		} else if (c == '\n') {
			++line;
			end_record();
		} else if (c == '\r') {
			// swallowed; CRLF line endings
		} else {
			field.push_back(c);
			field_started = true;
		}
	}
	if (field_started || !field.empty() || !current.fields.empty()) {
		end_record();
	}
	return records;
}

inline std::string escape(std::string_view value, char delim = ',') {
	bool needs_quotes = value.find_first_of(std::string{delim} + "\"\n\r") != std::string_view::npos;
	if (!needs_quotes) {
		return std::string(value);
	}
	std::string out = "\"";
	for (char c : value) {
		if (c == '"') {
			out += "\"\"";
		} else {
			out.push_back(c);
		}
	}
	out.push_back('"');
	return out;
}

} // namespace sentcast::csv
