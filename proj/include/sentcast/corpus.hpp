#pragma once

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include <json.hpp>

#include "sentcast/common.hpp"
#include "sentcast/csv.hpp"

namespace sentcast {

enum class Section { heading, synopsis, full_text };

inline constexpr Section kAllSections[] = {Section::heading, Section::synopsis, Section::full_text};

inline std::string_view to_string(Section s) {
	switch (s) {
	case Section::heading:
		return "heading";
	case Section::synopsis:
		return "synopsis";
	case Section::full_text:
		return "full_text";
	}
	return "?";
}

inline std::optional<Section> parse_section(std::string_view s) {
	for (Section sec : kAllSections) {
		if (to_string(sec) == s) {
			return sec;
		}
	}
	return std::nullopt;
}

struct Timestamp {
	Date date;
	int seconds_of_day = 0;

	auto operator<=>(const Timestamp &) const = default;
	bool operator==(const Timestamp &) const = default;

	int hour() const {
		return seconds_of_day / 3600;
	}
};

/// Parses an ISO-8601 date or date-time: "YYYY-MM-DD", optionally followed by
/// 'T' or ' ' and "HH:MM[:SS[.fraction]]" and an optional "Z" or "+HH:MM"
/// offset. The offset is accepted but not applied; the wall-clock date as
/// written is the publication date.
inline std::optional<Timestamp> parse_timestamp(std::string_view s) {
	s = trim(s);
	if (s.size() < 10) {
		return std::nullopt;
	}
	auto date = parse_date(s.substr(0, 10));
	if (!date) {
		return std::nullopt;
	}
	Timestamp ts{*date, 0};
	s.remove_prefix(10);
	if (s.empty()) {
		return ts;
	}
	if (s.front() != 'T' && s.front() != ' ') {
		return std::nullopt;
	}
	s.remove_prefix(1);
	if (s.size() < 5 || s[2] != ':') {
		return std::nullopt;
	}
	auto hh = parse_fixed_int(s.substr(0, 2));
	auto mm = parse_fixed_int(s.substr(3, 2));
	if (!hh || !mm || *hh > 23 || *mm > 59) {
		return std::nullopt;
	}
	int secs = 0;
	s.remove_prefix(5);
	if (!s.empty() && s.front() == ':') {
		if (s.size() < 3) {
			return std::nullopt;
		}
		auto ss = parse_fixed_int(s.substr(1, 2));
		if (!ss || *ss > 60) {
			return std::nullopt;
		}
		secs = std::min(*ss, 59);
		s.remove_prefix(3);
		if (!s.empty() && s.front() == '.') {
			s.remove_prefix(1);
			while (!s.empty() && std::isdigit(static_cast<unsigned char>(s.front()))) {
				s.remove_prefix(1);
			}
		}
	}
	if (!s.empty()) {
		if (s == "Z") {
			s.remove_prefix(1);
		} else if ((s.front() == '+' || s.front() == '-') &&
		           (s.size() == 6 || s.size() == 5 || s.size() == 3)) {
			auto digits = std::string(s.substr(1));
			digits.erase(std::remove(digits.begin(), digits.end(), ':'), digits.end());
			if ((digits.size() != 4 && digits.size() != 2) ||
			    !std::all_of(digits.begin(), digits.end(),
			                 [](char c) { return std::isdigit(static_cast<unsigned char>(c)); })) {
				return std::nullopt;
			}
			s = {};
		}
		if (!s.empty()) {
			return std::nullopt;
		}
	}
	ts.seconds_of_day = *hh * 3600 + *mm * 60 + secs;
	return ts;
}

inline std::string format_timestamp(const Timestamp &ts) {
	char buf[32];
	std::snprintf(buf, sizeof(buf), "T%02d:%02d:%02d", ts.seconds_of_day / 3600,
	              (ts.seconds_of_day / 60) % 60, ts.seconds_of_day % 60);
	return format_date(ts.date) + buf;
}

struct Article {
	std::string id;
	Timestamp published_at;
	std::string sector;
	std::string heading;
	std::string synopsis;
	std::string full_text;

	bool operator==(const Article &) const = default;
};

inline const std::string &section_text(const Article &a, Section s) {
	switch (s) {
	case Section::heading:
		return a.heading;
	case Section::synopsis:
		return a.synopsis;
	case Section::full_text:
		return a.full_text;
	}
	return a.heading;
}

namespace detail {

inline void append_utf8(std::string &out, std::uint32_t cp) {
	if (cp < 0x80) {
		out.push_back(static_cast<char>(cp));
	} else if (cp < 0x800) {
		out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
		out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
	} else if (cp < 0x10000) {
		out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
		out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
		out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
	} else {
		out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
		out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
		out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
		out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
	}
}

inline bool is_tag_start(std::string_view s, std::size_t i) {
	if (s[i] != '<' || i + 1 >= s.size()) {
		return false;
	}
	char n = s[i + 1];
	return std::isalpha(static_cast<unsigned char>(n)) || n == '/' || n == '!' || n == '?';
}

/// Replaces every tag with a single space so adjacent block text does not fuse.
inline std::string strip_tags(std::string_view s) {
	std::string out;
	out.reserve(s.size());
	std::size_t i = 0;
	while (i < s.size()) {
		if (is_tag_start(s, i)) {
			auto close = s.find('>', i + 1);
			if (close != std::string_view::npos) {
				out.push_back(' ');
				i = close + 1;
				continue;
			}
		}
		out.push_back(s[i]);
		++i;
	}
	return out;
}

inline std::optional<std::uint32_t> named_entity(std::string_view name) {
	static const std::pair<std::string_view, std::uint32_t> table[] = {
	    {"amp", '&'},      {"lt", '<'},       {"gt", '>'},       {"quot", '"'},
	    {"apos", '\''},    {"nbsp", ' '},     {"ndash", 0x2013}, {"mdash", 0x2014},
	    {"lsquo", 0x2018}, {"rsquo", 0x2019}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
	    {"hellip", 0x2026}, {"copy", 0x00A9}, {"reg", 0x00AE},   {"trade", 0x2122},
	    {"euro", 0x20AC},  {"pound", 0x00A3}, {"rupee", 0x20B9}, {"bull", 0x2022},
	};
	for (const auto &[key, cp] : table) {
		if (key == name) {
			return cp;
		}
	}
	return std::nullopt;
}

inline std::string decode_entities(std::string_view s) {
	std::string out;
	out.reserve(s.size());
	std::size_t i = 0;
	while (i < s.size()) {
		if (s[i] == '&') {
			auto semi = s.find(';', i + 1);
			if (semi != std::string_view::npos && semi - i <= 12) {
				auto body = s.substr(i + 1, semi - i - 1);
				std::optional<std::uint32_t> cp;
				if (body.size() > 1 && body[0] == '#') {
					std::uint32_t value = 0;
					bool hex = body[1] == 'x' || body[1] == 'X';
					auto digits = body.substr(hex ? 2 : 1);
					auto [ptr, ec] =
					    std::from_chars(digits.data(), digits.data() + digits.size(), value, hex ? 16 : 10);
					if (!digits.empty() && ec == std::errc{} && ptr == digits.data() + digits.size() &&
					    value > 0 && value <= 0x10FFFF && (value < 0xD800 || value > 0xDFFF)) {
						cp = value == 0xA0 ? std::uint32_t{' '} : value;
					}
				} else {
					cp = named_entity(body);
				}
				if (cp) {
					append_utf8(out, *cp);
					i = semi + 1;
					continue;
				}
			}
		}
		out.push_back(s[i]);
		++i;
	}
	return out;
}

inline std::string collapse_whitespace(std::string_view s) {
	std::string out;
	out.reserve(s.size());
	bool pending_space = false;
	for (char c : s) {
		if (is_ascii_space(c)) {
			pending_space = !out.empty();
			continue;
		}
		if (pending_space) {
			out.push_back(' ');
			pending_space = false;
		}
		out.push_back(c);
	}
	return out;
}

} // namespace detail

/// Strips tags, decodes entities and normalizes whitespace. Decoding can
/// expose new markup ("&lt;p&gt;"), so the passes repeat until a fixed point,
/// which makes the function idempotent. Every pass that changes the text
/// shortens it, so the loop terminates.
inline std::string clean_text(std::string_view raw) {
	std::string current(raw);
	while (true) {
		auto next = detail::collapse_whitespace(detail::decode_entities(detail::strip_tags(current)));
		if (next == current) {
			return next;
		}
		current = std::move(next);
	}
}

/// Keeps the first article per (lowercased heading, publication date).
inline std::vector<Article> deduplicate(const std::vector<Article> &articles) {
	std::set<std::pair<std::string, Date>> seen;
	std::vector<Article> out;
	out.reserve(articles.size());
	for (const auto &a : articles) {
		if (seen.emplace(to_lower(a.heading), a.published_at.date).second) {
			out.push_back(a);
		}
	}
	return out;
}

enum class ArticleFormat { jsonl, csv };

inline std::optional<ArticleFormat> parse_article_format(std::string_view s) {
	if (s == "jsonl") {
		return ArticleFormat::jsonl;
	}
	if (s == "csv") {
		return ArticleFormat::csv;
	}
	return std::nullopt;
}

inline ArticleFormat guess_article_format(const std::filesystem::path &path) {
	return to_lower(path.extension().string()) == ".csv" ? ArticleFormat::csv : ArticleFormat::jsonl;
}

struct IngestResult {
	std::vector<Article> articles; // cleaned, deduplicated, publication order
	std::size_t read = 0;          // records encountered
	std::size_t skipped = 0;       // unparseable date, missing heading, malformed record
	std::size_t duplicates = 0;    // removed by deduplicate

	std::size_t cleaned() const {
		return read - skipped;
	}
};

namespace detail {

struct RawRecord {
	std::size_t line = 0;
	std::string id, published_at, sector, heading, synopsis, full_text;
};

inline std::vector<RawRecord> read_jsonl(std::string_view text, std::size_t &malformed, Diagnostics *diag) {
	std::vector<RawRecord> out;
	std::size_t line_no = 0;
	std::size_t start = 0;
	while (start <= text.size()) {
		auto end = text.find('\n', start);
		if (end == std::string_view::npos) {
			end = text.size();
		}
		++line_no;
		auto line = trim(text.substr(start, end - start));
		start = end + 1;
		if (line.empty()) {
			if (end == text.size()) {
				break;
			}
			continue;
		}
		auto doc = nlohmann::json::parse(line, nullptr, false);
		if (doc.is_discarded() || !doc.is_object()) {
			++malformed;
			warn(diag, "line " + std::to_string(line_no) + ": malformed JSON record skipped");
			continue;
		}
		auto field = [&](const char *key) -> std::string {
			auto it = doc.find(key);
			if (it == doc.end() || it->is_null()) {
				return {};
			}
			if (it->is_string()) {
				return it->get<std::string>();
			}
			if (it->is_number()) {
				return it->dump();
			}
			return {};
		};
		RawRecord r;
		r.line = line_no;
		r.id = field("id");
		r.published_at = field("published_at");
		r.sector = field("sector");
		r.heading = field("heading");
		r.synopsis = field("synopsis");
		r.full_text = field("full_text");
		out.push_back(std::move(r));
		if (end == text.size()) {
			break;
		}
	}
	return out;
}

inline std::vector<RawRecord> read_article_csv(std::string_view text, std::size_t &malformed,
                                               Diagnostics *diag) {
	auto records = csv::parse(text);
	std::vector<RawRecord> out;
	if (records.empty()) {
		return out;
	}
	std::unordered_map<std::string, std::size_t> col;
	for (std::size_t i = 0; i < records[0].fields.size(); ++i) {
		col[to_lower(trim(records[0].fields[i]))] = i;
	}
	for (const char *required : {"heading", "published_at"}) {
		if (!col.contains(required)) {
			throw InputError(std::string("article CSV header lacks column '") + required + "'");
		}
	}
	for (std::size_t r = 1; r < records.size(); ++r) {
		const auto &rec = records[r];
		if (rec.fields.size() != records[0].fields.size()) {
			++malformed;
			warn(diag, "line " + std::to_string(rec.line) + ": expected " +
			               std::to_string(records[0].fields.size()) + " fields, got " +
			               std::to_string(rec.fields.size()));
			continue;
		}
		auto field = [&](const char *key) -> std::string {
			auto it = col.find(key);
			return it == col.end() ? std::string{} : rec.fields[it->second];
		};
		RawRecord raw;
		raw.line = rec.line;
		raw.id = field("id");
		raw.published_at = field("published_at");
		raw.sector = field("sector");
		raw.heading = field("heading");
		raw.synopsis = field("synopsis");
		raw.full_text = field("full_text");
		out.push_back(std::move(raw));
	}
	return out;
}

} // namespace detail

/// Reads an article dump, cleans every section, drops records without a
/// parseable date or a heading, then sorts by publication time (stable) and
/// deduplicates. Missing synopsis/full_text become empty strings.
inline IngestResult ingest_articles(const std::filesystem::path &path, ArticleFormat format,
                                    Diagnostics *diag = nullptr) {
	auto text = read_file(path);
	IngestResult result;
	std::size_t malformed = 0;
	auto raw = format == ArticleFormat::jsonl ? detail::read_jsonl(text, malformed, diag)
	                                          : detail::read_article_csv(text, malformed, diag);
	result.read = raw.size() + malformed;
	result.skipped = malformed;

	std::vector<Article> articles;
	std::unordered_set<std::string> ids;
	for (auto &r : raw) {
		auto where = "line " + std::to_string(r.line) + ": ";
		auto ts = parse_timestamp(r.published_at);
		if (!ts) {
			++result.skipped;
			warn(diag, where + "unparseable published_at '" + r.published_at + "', record skipped");
			continue;
		}
		Article a;
		a.published_at = *ts;
		a.heading = clean_text(r.heading);
		if (a.heading.empty()) {
			++result.skipped;
			warn(diag, where + "empty heading, record skipped");
			continue;
		}
		a.synopsis = clean_text(r.synopsis);
		a.full_text = clean_text(r.full_text);
		a.sector = clean_text(r.sector);
		a.id = std::string(trim(r.id));
		if (a.id.empty()) {
			a.id = "L" + std::to_string(r.line);
		}
		if (!ids.insert(a.id).second) {
			auto base = a.id;
			for (int n = 2; !ids.insert(a.id = base + "#" + std::to_string(n)).second; ++n) {
			}
			warn(diag, where + "duplicate id '" + base + "' renamed to '" + a.id + "'");
		}
		articles.push_back(std::move(a));
	}
	std::stable_sort(articles.begin(), articles.end(),
	                 [](const Article &x, const Article &y) { return x.published_at < y.published_at; });
	result.articles = deduplicate(articles);
	result.duplicates = articles.size() - result.articles.size();
	return result;
}

inline nlohmann::json to_json(const Article &a) {
	return {{"id", a.id},
	        {"published_at", format_timestamp(a.published_at)},
	        {"sector", a.sector},
	        {"heading", a.heading},
	        {"synopsis", a.synopsis},
	        {"full_text", a.full_text}};
}

inline std::string to_jsonl(const std::vector<Article> &articles) {
	std::string out;
	for (const auto &a : articles) {
		out += to_json(a).dump();
		out.push_back('\n');
	}
	return out;
}

// ---------------------------------------------------------------------------
// Ticker matching

struct TickerAliases {
	std::string ticker;             // display form, used for file names
	std::vector<std::string> names; // lowercased company names
};

inline TickerAliases make_aliases(std::string_view ticker, const std::vector<std::string> &names) {
	TickerAliases out;
	out.ticker = std::string(trim(ticker));
	if (out.ticker.empty()) {
		throw InputError("ticker symbol is empty");
	}
	for (const auto &n : names) {
		auto clean = to_lower(trim(n));
		if (!clean.empty() && std::find(out.names.begin(), out.names.end(), clean) == out.names.end()) {
			out.names.push_back(std::move(clean));
		}
	}
	if (out.names.empty()) {
		throw InputError("ticker '" + out.ticker + "' has no company names");
	}
	return out;
}

/// Alias file: CSV rows "ticker,name1,...,nameK". An optional header row whose
/// first cell is "ticker" is skipped.
inline std::vector<TickerAliases> load_aliases(const std::filesystem::path &path, Diagnostics *diag = nullptr) {
	auto records = csv::parse(read_file(path));
	std::vector<TickerAliases> out;
	std::unordered_set<std::string> seen;
	for (std::size_t i = 0; i < records.size(); ++i) {
		const auto &rec = records[i];
		if (i == 0 && to_lower(trim(rec.fields[0])) == "ticker") {
			continue;
		}
		if (trim(rec.fields[0]).starts_with("#")) {
			continue;
		}
		std::vector<std::string> names(rec.fields.begin() + 1, rec.fields.end());
		try {
			auto aliases = make_aliases(rec.fields[0], names);
			if (!seen.insert(to_lower(aliases.ticker)).second) {
				warn(diag, "line " + std::to_string(rec.line) + ": duplicate ticker '" + aliases.ticker +
				               "' ignored");
				continue;
			}
			out.push_back(std::move(aliases));
		} catch (const InputError &e) {
			warn(diag, "line " + std::to_string(rec.line) + ": " + e.what());
		}
	}
	return out;
}

/// True iff needle occurs in haystack bounded on both sides by a
/// non-alphanumeric character or the string edge. Both must already be
/// lowercase.
inline bool contains_whole_word(std::string_view haystack, std::string_view needle) {
	if (needle.empty()) {
		return false;
	}
	std::size_t pos = haystack.find(needle);
	while (pos != std::string_view::npos) {
		bool left_ok = pos == 0 || !is_ascii_alnum(haystack[pos - 1]) || !is_ascii_alnum(needle.front());
		std::size_t after = pos + needle.size();
		bool right_ok =
		    after == haystack.size() || !is_ascii_alnum(haystack[after]) || !is_ascii_alnum(needle.back());
		if (left_ok && right_ok) {
			return true;
		}
		pos = haystack.find(needle, pos + 1);
	}
	return false;
}

inline bool match_ticker(const Article &article, Section section, const TickerAliases &aliases) {
	auto text = to_lower(section_text(article, section));
	if (contains_whole_word(text, to_lower(aliases.ticker))) {
		return true;
	}
	return std::any_of(aliases.names.begin(), aliases.names.end(),
	                   [&](const std::string &name) { return contains_whole_word(text, to_lower(name)); });
}

} // namespace sentcast
