#pragma once

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>

#include "sentcast/common.hpp"

namespace sentcast {

enum class Library { vader, hiv4, lm };

inline constexpr Library kAllLibraries[] = {Library::vader, Library::hiv4, Library::lm};

inline std::string_view to_string(Library l) {
	switch (l) {
	case Library::vader:
		return "vader";
	case Library::hiv4:
		return "hiv4";
	case Library::lm:
		return "lm";
	}
	return "?";
}

inline std::optional<Library> parse_library(std::string_view s) {
	for (Library l : kAllLibraries) {
		if (to_string(l) == s) {
			return l;
		}
	}
	return std::nullopt;
}

/// word -> signed valence.
struct ValenceLexicon {
	std::map<std::string, double, std::less<>> entries;

	std::size_t size() const {
		return entries.size();
	}

	const double *find(std::string_view word) const {
		auto it = entries.find(word);
		return it == entries.end() ? nullptr : &it->second;
	}

	bool operator==(const ValenceLexicon &) const = default;
};

enum class CategoricalKind { hiv4, lm };

struct CategoricalLexicon {
	std::set<std::string, std::less<>> positive;
	std::set<std::string, std::less<>> negative;
	CategoricalKind kind = CategoricalKind::hiv4;

	bool operator==(const CategoricalLexicon &) const = default;
};

namespace detail {

inline std::string_view strip_comment(std::string_view line) {
	auto hash = line.find('#');
	return trim(hash == std::string_view::npos ? line : line.substr(0, hash));
}

inline bool is_plain_token(std::string_view w) {
	return !w.empty() && std::all_of(w.begin(), w.end(), is_ascii_alnum);
}

} // namespace detail

/// Two-column word/valence file, tab- or comma-separated; the delimiter is
/// taken from the first data line. Extra columns are ignored, so VADER's
/// four-column release file loads as is. '#' starts a comment.
inline ValenceLexicon load_valence_lexicon(const std::filesystem::path &path, Diagnostics *diag = nullptr) {
	auto text = read_file(path);
	ValenceLexicon lex;
	std::optional<char> delim;
	std::size_t line_no = 0;
	std::istringstream in(text);
	std::string raw;
	auto where = [&] { return path.filename().string() + ":" + std::to_string(line_no) + ": "; };
	while (std::getline(in, raw)) {
		++line_no;
		auto line = detail::strip_comment(raw);
		if (line.empty()) {
			continue;
		}
		if (!delim) {
			if (line.find('\t') != std::string_view::npos) {
				delim = '\t';
			} else if (line.find(',') != std::string_view::npos) {
				delim = ',';
			} else {
				warn(diag, where() + "no tab or comma delimiter, line skipped");
				continue;
			}
		}
		auto fields = split(line, *delim);
		if (fields.size() < 2) {
			warn(diag, where() + "no tab or comma delimiter, line skipped");
			continue;
		}
		auto word = to_lower(trim(fields[0]));
		auto valence = parse_double(fields[1]);
		if (!valence) {
			if (line_no == 1 && word == "word") {
				continue; // header
			}
			warn(diag, where() + "unparseable valence '" + fields[1] + "', line skipped");
			continue;
		}
		if (word.empty()) {
			warn(diag, where() + "empty word, line skipped");
			continue;
		}
		auto [it, inserted] = lex.entries.insert_or_assign(word, *valence);
		if (!inserted) {
			warn(diag, where() + "duplicate word '" + word + "', last entry wins");
		}
	}
	if (lex.entries.empty()) {
		throw InputError("valence lexicon " + path.string() + " is empty");
	}
	return lex;
}

namespace detail {

inline std::set<std::string, std::less<>> load_word_set(const std::filesystem::path &path, Diagnostics *diag) {
	auto text = read_file(path);
	std::set<std::string, std::less<>> words;
	std::istringstream in(text);
	std::string raw;
	std::size_t line_no = 0;
	while (std::getline(in, raw)) {
		++line_no;
		auto line = strip_comment(raw);
		if (line.empty()) {
			continue;
		}
		auto word = to_lower(line);
		if (!is_plain_token(word)) {
			warn(diag, path.filename().string() + ":" + std::to_string(line_no) + ": '" + word +
			               "' is not a single alphanumeric token, skipped");
			continue;
		}
		words.insert(std::move(word));
	}
	return words;
}

} // namespace detail

/// One word per line in each file. Words listed in both files are dropped
/// from both.
inline CategoricalLexicon load_categorical_lexicon(const std::filesystem::path &path_pos,
                                                   const std::filesystem::path &path_neg, CategoricalKind kind,
                                                   Diagnostics *diag = nullptr) {
	CategoricalLexicon lex;
	lex.kind = kind;
	lex.positive = detail::load_word_set(path_pos, diag);
	lex.negative = detail::load_word_set(path_neg, diag);
	std::vector<std::string> conflicts;
	std::set_intersection(lex.positive.begin(), lex.positive.end(), lex.negative.begin(), lex.negative.end(),
	                      std::back_inserter(conflicts));
	for (const auto &w : conflicts) {
		warn(diag, "'" + w + "' listed as both positive and negative, dropped from both");
		lex.positive.erase(w);
		lex.negative.erase(w);
	}
	if (lex.positive.empty() && lex.negative.empty()) {
		throw InputError("categorical lexicon " + path_pos.string() + " / " + path_neg.string() + " is empty");
	}
	return lex;
}

} // namespace sentcast
