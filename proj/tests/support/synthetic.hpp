#pragma once

// Synthetic markets and corpora with a known sentiment -> return link.

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "sentcast/sentcast.hpp"

namespace sentcast::testing {

inline Date ymd(int y, unsigned m, unsigned d) {
	return Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

/// n consecutive Monday-Friday dates starting at or after `start`.
inline std::vector<Date> weekdays(Date start, std::size_t n) {
	std::vector<Date> out;
	Date d = start;
	while (out.size() < n) {
		std::chrono::weekday wd{std::chrono::sys_days{d}};
		if (wd != std::chrono::Saturday && wd != std::chrono::Sunday) {
			out.push_back(d);
		}
		d = add_days(d, 1);
	}
	return out;
}

struct MarketParams {
	double phi = 0.6;        // AR(1) persistence of the latent sentiment
	double beta = 0.02;      // next-day return per unit of sentiment
	double noise = 0.002;    // daily return noise (std dev)
	double reversion = 0.02; // pull of log price toward the start level
	double start_price = 100.0;
};

struct SyntheticMarket {
	PriceSeries prices;
	std::vector<double> signal; // sentiment observed on each row's date, in [-1, 1]
};

/// The sentiment on day t drives the close-to-close return into day t+1.
inline SyntheticMarket synthetic_market(const std::string &ticker, std::uint64_t seed, std::size_t rows,
                                        const MarketParams &p = {}) {
	lstm::Rng rng(seed);
	SyntheticMarket m;
	m.prices.ticker = ticker;
	auto dates = weekdays(ymd(2019, 1, 1), rows);
	double price = p.start_price;
	double latent = 0.0;
	double s = 0.0;
	for (std::size_t i = 0; i < rows; ++i) {
		double r = p.beta * s + p.noise * rng.normal() - p.reversion * std::log(price / p.start_price);
		double open = price;
		price *= 1.0 + r;
		double high = std::max(open, price) * (1.0 + 0.003 * rng.uniform01());
		double low = std::min(open, price) * (1.0 - 0.003 * rng.uniform01());
		m.prices.rows.push_back({dates[i], open, high, low, price, 1e6 * (1.0 + 0.2 * rng.uniform01())});
		latent = p.phi * latent + std::sqrt(1.0 - p.phi * p.phi) * 0.5 * rng.normal();
		s = std::clamp(latent, -1.0, 1.0);
		m.signal.push_back(s);
	}
	return m;
}

/// Ticker inputs whose every (section, library) series is the planted signal.
inline TickerInputs planted_inputs(const SyntheticMarket &m) {
	TickerInputs in;
	in.aliases = make_aliases(m.prices.ticker, {m.prices.ticker + " corp"});
	in.prices = m.prices;
	SentimentSeries base;
	base.ticker = m.prices.ticker;
	for (std::size_t i = 0; i < m.prices.rows.size(); ++i) {
		base.values[m.prices.rows[i].date] = m.signal[i];
	}
	for (Section s : kAllSections) {
		for (Library l : kAllLibraries) {
			auto series = base;
			series.section = s;
			series.library = l;
			in.sentiment.emplace(std::pair(s, l), std::move(series));
		}
	}
	return in;
}

/// Articles about `company` whose wording follows the market's signal: words
/// that every bundled lexicon scores ("gain"/"loss", "strong"/"weak"), repeated
/// in proportion to the signal magnitude. Roughly half the days carry an
/// article, some on weekends.
inline std::vector<Article> synthetic_articles(const SyntheticMarket &m, const std::string &company,
                                               std::uint64_t seed, std::size_t &next_id) {
	lstm::Rng rng(seed);
	std::vector<Article> out;
	auto words = [&](double s, const char *pos, const char *neg) {
		int n = 1 + static_cast<int>(std::round(std::abs(s) * 3.0));
		std::string text;
		for (int k = 0; k < n; ++k) {
			text += (s >= 0 ? pos : neg);
			text += ' ';
		}
		return text;
	};
	for (std::size_t i = 0; i < m.prices.rows.size(); ++i) {
		if (rng.uniform01() < 0.5) {
			continue;
		}
		double s = m.signal[i];
		Article a;
		a.id = "a" + std::to_string(next_id++);
		a.published_at = {m.prices.rows[i].date, 9 * 3600 + static_cast<int>(rng.below(8 * 3600))};
		a.sector = "synthetic";
		a.heading = company + " reports " + words(s, "gain", "loss") + "in quarter " + std::to_string(i);
		a.synopsis = "Analysts see " + words(s, "strong", "weak") + "demand for " + company;
		a.full_text = company + " shares moved. " + words(s, "gain strong", "loss weak") + "said the desk.";
		out.push_back(std::move(a));
		if (rng.uniform01() < 0.05) {
			Article weekend = out.back();
			weekend.id = "a" + std::to_string(next_id++);
			weekend.published_at.date = add_days(weekend.published_at.date, 5);
			weekend.heading += " weekend";
			out.push_back(std::move(weekend));
		}
	}
	return out;
}

inline std::string data_dir() {
	return SENTCAST_DATA_DIR;
}

inline Lexicons bundled_lexicons() {
	auto dir = std::filesystem::path(data_dir()) / "lexicons";
	return {load_valence_lexicon(dir / "vader_sample.tsv"),
	        load_categorical_lexicon(dir / "hiv4_positive.txt", dir / "hiv4_negative.txt", CategoricalKind::hiv4),
	        load_categorical_lexicon(dir / "lm_positive.txt", dir / "lm_negative.txt", CategoricalKind::lm)};
}

/// Fresh empty directory under the system temp dir.
inline std::filesystem::path temp_dir(const std::string &name) {
	auto dir = std::filesystem::temp_directory_path() / ("sentcast_test_" + name);
	std::filesystem::remove_all(dir);
	std::filesystem::create_directories(dir);
	return dir;
}

inline void write_text(const std::filesystem::path &path, const std::string &text) {
	std::filesystem::create_directories(path.parent_path());
	std::ofstream out(path, std::ios::binary);
	out << text;
}

inline std::string prices_csv(const PriceSeries &p) {
	std::string out = "Date,Open,High,Low,Close,Adj Close,Volume\n";
	for (const auto &r : p.rows) {
		out += format_date(r.date) + ',' + format_fixed(r.open, 6) + ',' + format_fixed(r.high, 6) + ',' +
		       format_fixed(r.low, 6) + ',' + format_fixed(r.close, 6) + ',' + format_fixed(r.close, 6) + ',' +
		       format_fixed(r.volume, 0) + '\n';
	}
	return out;
}

} // namespace sentcast::testing
