#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "sentcast/common.hpp"
#include "sentcast/corpus.hpp"
#include "sentcast/lexicon.hpp"

namespace sentcast {

/// VADER normalization constant.
inline constexpr double kVaderAlpha = 15.0;
/// Keeps the polarity ratio defined when no word matches.
inline constexpr double kPolarityEpsilon = 1e-6;

/// Lowercase alphanumeric runs; everything else separates tokens.
inline std::vector<std::string> tokenize(std::string_view text) {
	std::vector<std::string> tokens;
	std::string current;
	for (char c : text) {
		if (is_ascii_alnum(c)) {
			current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
		} else if (!current.empty()) {
			tokens.push_back(std::move(current));
			current.clear();
		}
	}
	if (!current.empty()) {
		tokens.push_back(std::move(current));
	}
	return tokens;
}

inline double vader_normalize(double valence_sum, double alpha = kVaderAlpha) {
	return valence_sum / std::sqrt(valence_sum * valence_sum + alpha);
}

/// Sum of token valences, normalized into (-1, 1). Only the compound
/// normalization is applied; no negation, booster or capitalization rules.
inline double vader_compound(std::string_view text, const ValenceLexicon &lex) {
	double v = 0.0;
	for (const auto &tok : tokenize(text)) {
		if (const double *valence = lex.find(tok)) {
			v += *valence;
		}
	}
	return vader_normalize(v);
}

struct PolarityCounts {
	std::size_t positive = 0;
	std::size_t negative = 0;
};

inline PolarityCounts count_polarity(std::string_view text, const CategoricalLexicon &lex) {
	PolarityCounts counts;
	for (const auto &tok : tokenize(text)) {
		if (lex.positive.contains(tok)) {
			++counts.positive;
		} else if (lex.negative.contains(tok)) {
			++counts.negative;
		}
	}
	return counts;
}

inline double polarity_ratio(PolarityCounts c) {
	auto pos = static_cast<double>(c.positive);
	auto neg = static_cast<double>(c.negative);
	return (pos - neg) / (pos + neg + kPolarityEpsilon);
}

inline double polarity_score(std::string_view text, const CategoricalLexicon &lex) {
	return polarity_ratio(count_polarity(text, lex));
}

struct Lexicons {
	ValenceLexicon vader;
	CategoricalLexicon hiv4;
	CategoricalLexicon lm;
};

inline double score_text(std::string_view text, Library library, const Lexicons &lex) {
	double s = 0.0;
	switch (library) {
	case Library::vader:
		s = vader_compound(text, lex.vader);
		break;
	case Library::hiv4:
		s = polarity_score(text, lex.hiv4);
		break;
	case Library::lm:
		s = polarity_score(text, lex.lm);
		break;
	}
	return std::clamp(s, -1.0, 1.0);
}

struct SectionScore {
	std::string article_id;
	Section section = Section::heading;
	Library library = Library::vader;
	double score = 0.0;

	bool operator==(const SectionScore &) const = default;
};

/// One score per (article, section, library), article-major in input order.
inline std::vector<SectionScore> score_corpus(const std::vector<Article> &articles, const Lexicons &lexicons,
                                              const std::vector<Section> &sections,
                                              const std::vector<Library> &libraries) {
	std::vector<SectionScore> scores;
	scores.reserve(articles.size() * sections.size() * libraries.size());
	for (const auto &a : articles) {
		for (Section s : sections) {
			const auto &text = section_text(a, s);
			for (Library l : libraries) {
				scores.push_back({a.id, s, l, score_text(text, l, lexicons)});
			}
		}
	}
	return scores;
}

inline std::string scores_to_csv(const std::vector<SectionScore> &scores) {
	std::string out = "article_id,section,library,score\n";
	for (const auto &s : scores) {
		out += csv::escape(s.article_id);
		out += ',';
		out += to_string(s.section);
		out += ',';
		out += to_string(s.library);
		out += ',';
		out += format_fixed(s.score, 6);
		out += '\n';
	}
	return out;
}

/// Trading dates, strictly increasing.
class BusinessCalendar {
public:
	BusinessCalendar() = default;

	explicit BusinessCalendar(std::vector<Date> dates) : dates_(std::move(dates)) {
		std::sort(dates_.begin(), dates_.end());
		dates_.erase(std::unique(dates_.begin(), dates_.end()), dates_.end());
	}

	const std::vector<Date> &dates() const {
		return dates_;
	}

	bool contains(const Date &d) const {
		return std::binary_search(dates_.begin(), dates_.end(), d);
	}

	std::optional<Date> next_after(const Date &d) const {
		auto it = std::upper_bound(dates_.begin(), dates_.end(), d);
		if (it == dates_.end()) {
			return std::nullopt;
		}
		return *it;
	}

private:
	std::vector<Date> dates_;
};

struct SentimentSeries {
	std::string ticker;
	Section section = Section::heading;
	Library library = Library::vader;
	std::map<Date, double> values;      // every calendar date; 0 where no article matched
	std::map<Date, std::size_t> counts; // matching articles per date

	double at(const Date &d) const {
		auto it = values.find(d);
		return it == values.end() ? 0.0 : it->second;
	}

	bool operator==(const SentimentSeries &) const = default;
};

struct AggregateOptions {
	/// Articles published at or after this hour count toward the next
	/// business date. Unset: the calendar date of publication is used.
	std::optional<int> cutoff_hour;
};

/// Mean score of the articles matching the ticker in the chosen section, per
/// business date. Dates without a matching article carry 0; articles falling
/// on non-business dates are dropped.
inline SentimentSeries aggregate_daily(const std::vector<SectionScore> &scores, const std::vector<Article> &articles,
                                       const TickerAliases &ticker, Section section, Library library,
                                       const BusinessCalendar &calendar, const AggregateOptions &options = {}) {
	std::unordered_map<std::string_view, double> by_id;
	for (const auto &s : scores) {
		if (s.section == section && s.library == library) {
			by_id.emplace(s.article_id, s.score);
		}
	}

	// Per-day scores are summed in sorted order so the result does not depend
	// on article order.
	std::map<Date, std::vector<double>> matched;
	SentimentSeries series;
	series.ticker = ticker.ticker;
	series.section = section;
	series.library = library;

	for (const auto &a : articles) {
		auto it = by_id.find(a.id);
		if (it == by_id.end() || !match_ticker(a, section, ticker)) {
			continue;
		}
		std::optional<Date> day = a.published_at.date;
		if (options.cutoff_hour && a.published_at.hour() >= *options.cutoff_hour) {
			day = calendar.next_after(a.published_at.date);
		}
		if (!day || !calendar.contains(*day)) {
			continue;
		}
		matched[*day].push_back(it->second);
	}
	for (const auto &d : calendar.dates()) {
		auto m = matched.find(d);
		if (m == matched.end()) {
			series.values[d] = 0.0;
			continue;
		}
		auto &day_scores = m->second;
		std::sort(day_scores.begin(), day_scores.end());
		double sum = 0.0;
		for (double s : day_scores) {
			sum += s;
		}
		series.counts[d] = day_scores.size();
		series.values[d] = sum / static_cast<double>(day_scores.size());
	}
	return series;
}

inline std::string series_to_csv(const SentimentSeries &series) {
	std::string out = "date,value\n";
	for (const auto &[d, v] : series.values) {
		out += format_date(d);
		out += ',';
		out += format_fixed(v, 6);
		out += '\n';
	}
	return out;
}

} // namespace sentcast
