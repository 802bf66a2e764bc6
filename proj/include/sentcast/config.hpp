#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "sentcast/common.hpp"
#include "sentcast/corpus.hpp"
#include "sentcast/experiment.hpp"

namespace sentcast {

struct LexiconPaths {
	std::filesystem::path vader;
	std::filesystem::path hiv4_positive;
	std::filesystem::path hiv4_negative;
	std::filesystem::path lm_positive;
	std::filesystem::path lm_negative;
};

/// Everything one pipeline invocation needs. Relative paths in the file are
/// resolved against the directory holding the config file.
struct PipelineConfig {
	std::filesystem::path articles;
	std::optional<ArticleFormat> articles_format; // default: from the file extension
	LexiconPaths lexicons;
	std::filesystem::path prices_dir; // one <TICKER>.csv per ticker
	std::filesystem::path aliases;
	std::filesystem::path work_dir = "work";
	std::filesystem::path results_dir = "results";
	Date start{std::chrono::year{2019}, std::chrono::January, std::chrono::day{1}};
	Date end{std::chrono::year{2022}, std::chrono::August, std::chrono::day{31}};
	RunConfig run;
	std::vector<std::string> tickers; // empty: every ticker in the alias file
	std::optional<int> cutoff_hour;
	bool save_checkpoints = true;

	ArticleFormat article_format() const {
		return articles_format.value_or(guess_article_format(articles));
	}

	std::filesystem::path price_file(std::string_view ticker) const {
		return prices_dir / (std::string(ticker) + ".csv");
	}

	/// Rows required per ticker before anything is trained.
	std::size_t min_price_rows() const {
		return run.lookback + run.horizon + run.holdout;
	}
};

namespace detail {

inline std::filesystem::path resolve(const std::filesystem::path &base, const std::string &p) {
	std::filesystem::path path(p);
	return path.is_absolute() || base.empty() ? path : base / path;
}

inline Date config_date(const nlohmann::json &j, const char *key, Date fallback) {
	if (!j.contains(key)) {
		return fallback;
	}
	auto s = j.at(key).get<std::string>();
	auto d = parse_date(s);
	if (!d) {
		throw ConfigError(std::string("config: '") + key + "' is not a YYYY-MM-DD date: " + s);
	}
	return *d;
}

} // namespace detail

inline PipelineConfig parse_config(const nlohmann::json &j, const std::filesystem::path &base_dir = {}) {
	PipelineConfig c;
	try {
		auto path = [&](const nlohmann::json &obj, const char *key) -> std::filesystem::path {
			if (!obj.contains(key)) {
				return {};
			}
			return detail::resolve(base_dir, obj.at(key).get<std::string>());
		};
		c.articles = path(j, "articles");
		if (j.contains("articles_format")) {
			auto f = parse_article_format(j.at("articles_format").get<std::string>());
			if (!f) {
				throw ConfigError("config: articles_format must be 'jsonl' or 'csv'");
			}
			c.articles_format = f;
		}
		if (j.contains("lexicons")) {
			const auto &lx = j.at("lexicons");
			c.lexicons = {path(lx, "vader"), path(lx, "hiv4_positive"), path(lx, "hiv4_negative"),
			              path(lx, "lm_positive"), path(lx, "lm_negative")};
		}
		c.prices_dir = path(j, "prices_dir");
		c.aliases = path(j, "aliases");
		c.work_dir = detail::resolve(base_dir, j.value("work_dir", std::string("work")));
		c.results_dir = detail::resolve(base_dir, j.value("results_dir", std::string("results")));
		c.start = detail::config_date(j, "start", c.start);
		c.end = detail::config_date(j, "end", c.end);
		c.run.lookback = j.value("lookback", c.run.lookback);
		c.run.horizon = j.value("horizon", c.run.horizon);
		c.run.holdout = j.value("holdout", c.run.holdout);
		c.run.units = j.value("units", c.run.units);
		if (j.contains("train")) {
			c.run.train = lstm::TrainConfig::from_json(j.at("train"));
		}
		c.run.train.seed = j.value("seed", c.run.train.seed);
		c.tickers = j.value("tickers", std::vector<std::string>{});
		if (j.contains("cutoff_hour") && !j.at("cutoff_hour").is_null()) {
			c.cutoff_hour = j.at("cutoff_hour").get<int>();
		}
		c.save_checkpoints = j.value("save_checkpoints", c.save_checkpoints);
	} catch (const nlohmann::json::exception &e) {
		throw ConfigError(std::string("config: ") + e.what());
	}
	return c;
}

inline PipelineConfig load_config(const std::filesystem::path &path) {
	auto text = read_file(path);
	auto j = nlohmann::json::parse(text, nullptr, false);
	if (j.is_discarded() || !j.is_object()) {
		throw ConfigError("config: " + path.string() + " is not a JSON object");
	}
	return parse_config(j, path.parent_path());
}

/// What a command is about to read; validation checks only these.
struct ConfigNeeds {
	bool articles = false;
	bool lexicons = false;
	bool prices = false;
	bool aliases = false;
};

/// Rejects inconsistent settings and missing inputs before any work starts.
inline void validate_config(const PipelineConfig &c, const ConfigNeeds &needs) {
	if (!(c.start < c.end)) {
		throw ConfigError("config: start " + format_date(c.start) + " is not before end " + format_date(c.end));
	}
	c.run.validate();
	if (c.run.units.empty() || std::find(c.run.units.begin(), c.run.units.end(), 0u) != c.run.units.end()) {
		throw ConfigError("config: units must list positive layer sizes");
	}
	if (c.cutoff_hour && (*c.cutoff_hour < 0 || *c.cutoff_hour > 23)) {
		throw ConfigError("config: cutoff_hour must be in [0, 23]");
	}
	auto require = [](const std::filesystem::path &p, const char *what, bool dir) {
		std::error_code ec;
		if (p.empty()) {
			throw ConfigError(std::string("config: ") + what + " path is not set");
		}
		bool ok = dir ? std::filesystem::is_directory(p, ec) : std::filesystem::is_regular_file(p, ec);
		if (!ok) {
			throw ConfigError(std::string("config: ") + what + " not found: " + p.string());
		}
	};
	if (needs.articles) {
		require(c.articles, "articles", false);
	}
	if (needs.lexicons) {
		require(c.lexicons.vader, "lexicons.vader", false);
		require(c.lexicons.hiv4_positive, "lexicons.hiv4_positive", false);
		require(c.lexicons.hiv4_negative, "lexicons.hiv4_negative", false);
		require(c.lexicons.lm_positive, "lexicons.lm_positive", false);
		require(c.lexicons.lm_negative, "lexicons.lm_negative", false);
	}
	if (needs.prices) {
		require(c.prices_dir, "prices_dir", true);
	}
	if (needs.aliases) {
		require(c.aliases, "aliases", false);
	}
}

inline Lexicons load_lexicons(const LexiconPaths &paths, Diagnostics *diag = nullptr) {
	return {load_valence_lexicon(paths.vader, diag),
	        load_categorical_lexicon(paths.hiv4_positive, paths.hiv4_negative, CategoricalKind::hiv4, diag),
	        load_categorical_lexicon(paths.lm_positive, paths.lm_negative, CategoricalKind::lm, diag)};
}

} // namespace sentcast
