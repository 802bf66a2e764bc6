#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "sentcast/common.hpp"
#include "sentcast/dataset.hpp"
#include "sentcast/lstm.hpp"
#include "sentcast/sentiment.hpp"

namespace sentcast {

// ---------------------------------------------------------------------------
// MAPE

/// Mean absolute percentage error, in percent.
inline double mape(std::span<const double> actuals, std::span<const double> forecasts) {
	if (actuals.empty() || actuals.size() != forecasts.size()) {
		throw InputError("mape: need equal non-zero lengths, got " + std::to_string(actuals.size()) + " and " +
		                 std::to_string(forecasts.size()));
	}
	double sum = 0.0;
	for (std::size_t t = 0; t < actuals.size(); ++t) {
		if (actuals[t] == 0.0) {
			throw InputError("mape: actual value at index " + std::to_string(t) + " is zero");
		}
		sum += std::abs(actuals[t] - forecasts[t]) / std::abs(actuals[t]);
	}
	return 100.0 / static_cast<double>(actuals.size()) * sum;
}

// ---------------------------------------------------------------------------
// Variants

struct VariantSpec {
	FeatureVariant features = FeatureVariant::one_feature;
	std::optional<Library> library;

	std::string name() const {
		std::string n(to_string(features));
		if (library) {
			n += '_';
			n += to_string(*library);
		}
		return n;
	}

	bool uses_sentiment() const {
		return library.has_value();
	}

	bool operator==(const VariantSpec &) const = default;
};

/// The 14 valid combinations: two price-only variants, then each sentiment
/// variant with each library.
inline std::vector<VariantSpec> all_variant_specs() {
	std::vector<VariantSpec> out{{FeatureVariant::one_feature, std::nullopt},
	                             {FeatureVariant::five_feature, std::nullopt}};
	for (auto fv : kAllFeatureVariants) {
		if (sentiment_sections(fv).empty()) {
			continue;
		}
		for (Library l : kAllLibraries) {
			out.push_back({fv, l});
		}
	}
	return out;
}

inline VariantSpec parse_variant_spec(std::string_view name) {
	for (const auto &v : all_variant_specs()) {
		if (v.name() == name) {
			return v;
		}
	}
	throw ConfigError("unknown variant '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Single run

struct RunConfig {
	std::size_t lookback = kDefaultLookback;
	std::size_t horizon = kDefaultHorizon;
	std::size_t holdout = kDefaultHoldout;
	std::vector<std::size_t> units = lstm::kDefaultUnits;
	lstm::TrainConfig train; // train.seed is the global seed

	void validate() const {
		if (lookback == 0 || horizon == 0 || holdout == 0) {
			throw ConfigError("lookback, horizon and holdout must be positive");
		}
		train.validate();
	}

	/// Everything that influences a run's outcome apart from the data.
	std::string fingerprint() const {
		nlohmann::json j = {{"lookback", lookback}, {"horizon", horizon}, {"holdout", holdout},
		                    {"units", units},       {"train", train.to_json()}};
		return j.dump();
	}
};

inline std::uint64_t run_seed(std::string_view ticker, std::string_view variant, std::uint64_t global_seed) {
	auto h = fnv1a64(ticker);
	h = fnv1a64("/", h);
	h = fnv1a64(variant, h);
	return mix64(h ^ mix64(global_seed));
}

struct RunResult {
	std::string ticker;
	VariantSpec variant;
	std::uint64_t seed = 0;
	double mape = 0.0;
	std::vector<double> predictions;
	std::vector<double> actuals;
	std::vector<Date> dates;
	std::vector<double> loss_history;
	double wall_time = 0.0; // seconds
	std::string fingerprint;

	nlohmann::json to_json() const {
		std::vector<std::string> ds;
		for (const auto &d : dates) {
			ds.push_back(format_date(d));
		}
		nlohmann::json j = {{"ticker", ticker},
		                    {"variant", variant.name()},
		                    {"seed", seed},
		                    {"mape", mape},
		                    {"predictions", predictions},
		                    {"actuals", actuals},
		                    {"dates", ds},
		                    {"loss_history", loss_history},
		                    {"wall_time", wall_time},
		                    {"fingerprint", fingerprint}};
		return j;
	}

	static RunResult from_json(const nlohmann::json &j) {
		RunResult r;
		r.ticker = j.at("ticker").get<std::string>();
		r.variant = parse_variant_spec(j.at("variant").get<std::string>());
		r.seed = j.at("seed").get<std::uint64_t>();
		r.mape = j.at("mape").get<double>();
		r.predictions = j.at("predictions").get<std::vector<double>>();
		r.actuals = j.at("actuals").get<std::vector<double>>();
		for (const auto &s : j.value("dates", std::vector<std::string>{})) {
			auto d = parse_date(s);
			if (!d) {
				throw InputError("result file has bad date '" + s + "'");
			}
			r.dates.push_back(*d);
		}
		r.loss_history = j.value("loss_history", std::vector<double>{});
		r.wall_time = j.value("wall_time", 0.0);
		r.fingerprint = j.value("fingerprint", std::string{});
		if (r.predictions.size() != r.actuals.size() || !std::isfinite(r.mape) || r.mape < 0.0) {
			throw InputError("result file for " + r.ticker + "/" + r.variant.name() + " is inconsistent");
		}
		return r;
	}
};

/// Per-ticker inputs: prices plus the daily sentiment series by
/// (section, library). Series are only needed for sentiment variants.
struct TickerInputs {
	TickerAliases aliases;
	PriceSeries prices;
	std::map<std::pair<Section, Library>, SentimentSeries> sentiment;

	const SentimentSeries *series(Section s, Library l) const {
		auto it = sentiment.find({s, l});
		return it == sentiment.end() ? nullptr : &it->second;
	}
};

/// Model, scaler and windows of a finished run; kept for checkpointing.
struct TrainedRun {
	RunResult result;
	lstm::LstmModel model;
	ScalerParams scaler;
};

/// Build features, fit the scaler on the training rows, window, train, and
/// forecast the holdout in consecutive blocks of `horizon` days, each block
/// iterated from the actual window preceding it.
inline TrainedRun run_variant(const TickerInputs &in, const VariantSpec &variant, const RunConfig &config) {
	config.validate();
	auto started = std::chrono::steady_clock::now();
	SentimentInputs senti;
	if (variant.library) {
		senti.heading = in.series(Section::heading, *variant.library);
		senti.synopsis = in.series(Section::synopsis, *variant.library);
		senti.full_text = in.series(Section::full_text, *variant.library);
	}
	auto raw = build_features(in.prices, senti, variant.features);
	const auto rows = static_cast<std::size_t>(raw.values.rows());
	if (rows <= config.lookback + config.holdout) {
		throw InputError("insufficient data: " + std::to_string(rows) + " rows for lookback " +
		                 std::to_string(config.lookback) + " + holdout " + std::to_string(config.holdout));
	}
	auto scaler = fit_scaler(raw, training_rows(rows, config.holdout));
	auto scaled = apply_scaler(raw, scaler);
	auto data = window(scaled, config.lookback, config.holdout);

	TrainedRun run;
	run.result.ticker = in.prices.ticker;
	run.result.variant = variant;
	run.result.seed = run_seed(in.prices.ticker, variant.name(), config.train.seed);
	run.result.fingerprint = config.fingerprint();

	auto train_cfg = config.train;
	train_cfg.seed = run.result.seed;
	auto model = lstm::init_model(data.features, run.result.seed, config.units);
	auto trained = lstm::train(std::move(model), data, train_cfg);

	for (std::size_t k = data.train_count; k < data.samples(); k += config.horizon) {
		std::size_t steps = std::min(config.horizon, data.samples() - k);
		auto preds = lstm::predict_horizon(trained.model, data.sample(k), scaler, steps);
		for (std::size_t s = 0; s < steps; ++s) {
			auto row = static_cast<Eigen::Index>(k + s + config.lookback);
			run.result.predictions.push_back(preds[s]);
			run.result.actuals.push_back(raw.values(row, 0));
			run.result.dates.push_back(raw.dates[static_cast<std::size_t>(row)]);
		}
	}
	run.result.mape = mape(run.result.actuals, run.result.predictions);
	if (!std::isfinite(run.result.mape)) {
		throw lstm::TrainingError("non-finite MAPE for " + run.result.ticker + "/" + variant.name());
	}
	run.result.loss_history = std::move(trained.loss_history);
	run.result.wall_time =
	    std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
	run.model = std::move(trained.model);
	run.scaler = std::move(scaler);
	return run;
}

// ---------------------------------------------------------------------------
// Results store: <dir>/<ticker>/<variant>.json

inline std::filesystem::path result_path(const std::filesystem::path &dir, std::string_view ticker,
                                         std::string_view variant) {
	return dir / std::string(ticker) / (std::string(variant) + ".json");
}

inline void save_result(const std::filesystem::path &dir, const RunResult &r) {
	write_file_atomic(result_path(dir, r.ticker, r.variant.name()), r.to_json().dump(1) + "\n");
}

inline std::optional<RunResult> load_result(const std::filesystem::path &path) {
	std::error_code ec;
	if (!std::filesystem::is_regular_file(path, ec)) {
		return std::nullopt;
	}
	try {
		return RunResult::from_json(nlohmann::json::parse(read_file(path)));
	} catch (const std::exception &) {
		return std::nullopt;
	}
}

/// Every readable result under dir, sorted by (ticker, variant name).
inline std::vector<RunResult> load_results(const std::filesystem::path &dir, Diagnostics *diag = nullptr) {
	std::vector<RunResult> out;
	std::error_code ec;
	if (!std::filesystem::is_directory(dir, ec)) {
		return out;
	}
	for (const auto &ticker_dir : std::filesystem::directory_iterator(dir)) {
		if (!ticker_dir.is_directory()) {
			continue;
		}
		for (const auto &f : std::filesystem::directory_iterator(ticker_dir.path())) {
			auto name = f.path().filename().string();
			if (!f.is_regular_file() || !name.ends_with(".json") || name.ends_with(".model.json")) {
				continue;
			}
			if (auto r = load_result(f.path())) {
				out.push_back(std::move(*r));
			} else {
				warn(diag, "unreadable result file " + f.path().string());
			}
		}
	}
	std::sort(out.begin(), out.end(), [](const RunResult &a, const RunResult &b) {
		return std::pair(a.ticker, a.variant.name()) < std::pair(b.ticker, b.variant.name());
	});
	return out;
}

// ---------------------------------------------------------------------------
// Sweep

struct RunFailure {
	std::string ticker;
	std::string variant;
	std::string message;
};

struct SweepConfig {
	RunConfig run;
	std::filesystem::path results_dir; // empty: keep results in memory only
	bool resume = false;               // reuse persisted runs with matching seed and fingerprint
	bool save_checkpoints = false;     // write <variant>.model.json next to each result
	std::size_t jobs = 1;
	std::function<void(std::string_view)> progress; // optional, called from worker threads
};

struct SweepOutcome {
	std::vector<RunResult> results; // sorted by (ticker, variant name)
	std::vector<RunFailure> failures;
	std::size_t reused = 0;
};

/// Runs every (ticker, variant) pair on a bounded worker pool. Each finished
/// run is committed to disk atomically before the next is taken, so an
/// interrupted sweep resumes where it stopped. Failures are collected, not
/// thrown.
inline SweepOutcome run_all(const std::vector<TickerInputs> &tickers, const std::vector<VariantSpec> &variants,
                            const SweepConfig &config) {
	config.run.validate();
	struct Job {
		const TickerInputs *in;
		VariantSpec variant;
	};
	std::vector<Job> jobs;
	for (const auto &t : tickers) {
		for (const auto &v : variants) {
			jobs.push_back({&t, v});
		}
	}
	std::vector<std::optional<RunResult>> slots(jobs.size());
	std::vector<std::optional<RunFailure>> failed(jobs.size());
	std::vector<char> reused(jobs.size(), 0);
	std::atomic<std::size_t> next{0};
	std::mutex progress_mutex;
	const auto fingerprint = config.run.fingerprint();

	auto report = [&](const std::string &msg) {
		if (config.progress) {
			std::lock_guard lock(progress_mutex);
			config.progress(msg);
		}
	};

	auto worker = [&] {
		for (std::size_t i = next++; i < jobs.size(); i = next++) {
			const auto &job = jobs[i];
			const auto &ticker = job.in->prices.ticker;
			auto vname = job.variant.name();
			auto seed = run_seed(ticker, vname, config.run.train.seed);
			if (config.resume && !config.results_dir.empty()) {
				auto prior = load_result(result_path(config.results_dir, ticker, vname));
				if (prior && prior->seed == seed && prior->fingerprint == fingerprint) {
					slots[i] = std::move(prior);
					reused[i] = 1;
					report("reused " + ticker + "/" + vname);
					continue;
				}
			}
			try {
				auto run = run_variant(*job.in, job.variant, config.run);
				if (!config.results_dir.empty()) {
					if (config.save_checkpoints) {
						auto ckpt = lstm::checkpoint_json(run.model, &config.run.train);
						ckpt["scaler"] = run.scaler.to_json();
						auto path = config.results_dir / ticker / (vname + ".model.json");
						write_file_atomic(path, ckpt.dump() + "\n");
					}
					save_result(config.results_dir, run.result);
				}
				report("done " + ticker + "/" + vname + " mape=" + format_fixed(run.result.mape, 4));
				slots[i] = std::move(run.result);
			} catch (const std::exception &e) {
				failed[i] = RunFailure{ticker, vname, e.what()};
				report("FAILED " + ticker + "/" + vname + ": " + e.what());
			}
		}
	};

	std::size_t n_threads = std::max<std::size_t>(1, std::min(config.jobs, jobs.size()));
	if (n_threads == 1) {
		worker();
	} else {
		std::vector<std::jthread> pool;
		for (std::size_t t = 0; t < n_threads; ++t) {
			pool.emplace_back(worker);
		}
	}

	SweepOutcome out;
	for (std::size_t i = 0; i < jobs.size(); ++i) {
		if (slots[i]) {
			out.results.push_back(std::move(*slots[i]));
			out.reused += static_cast<std::size_t>(reused[i]);
		}
		if (failed[i]) {
			out.failures.push_back(std::move(*failed[i]));
		}
	}
	std::sort(out.results.begin(), out.results.end(), [](const RunResult &a, const RunResult &b) {
		return std::pair(a.ticker, a.variant.name()) < std::pair(b.ticker, b.variant.name());
	});
	return out;
}

/// Scores the corpus once and aggregates one daily series per
/// (ticker, section, library) on the ticker's price calendar.
inline std::vector<TickerInputs> prepare_tickers(const std::vector<TickerAliases> &aliases,
                                                 const std::map<std::string, PriceSeries> &prices,
                                                 const std::vector<Article> &articles, const Lexicons *lexicons,
                                                 const std::vector<Library> &libraries,
                                                 const AggregateOptions &options = {}) {
	std::vector<TickerInputs> out;
	std::vector<SectionScore> scores;
	if (lexicons != nullptr && !libraries.empty()) {
		scores = score_corpus(articles, *lexicons,
		                      std::vector<Section>(std::begin(kAllSections), std::end(kAllSections)), libraries);
	}
	for (const auto &a : aliases) {
		auto it = prices.find(a.ticker);
		if (it == prices.end()) {
			throw InputError("no price series for ticker " + a.ticker);
		}
		TickerInputs in{a, it->second, {}};
		auto calendar = in.prices.calendar();
		if (lexicons != nullptr) {
			for (Section s : kAllSections) {
				for (Library l : libraries) {
					in.sentiment.emplace(std::pair(s, l), aggregate_daily(scores, articles, a, s, l, calendar, options));
				}
			}
		}
		out.push_back(std::move(in));
	}
	return out;
}

// ---------------------------------------------------------------------------
// Tables

struct BestVariantRow {
	std::string ticker;
	std::string variant;
	double mape = 0.0;
	bool uses_sentiment = false;
	std::optional<Library> library;
	std::vector<Section> sections;
};

/// Argmin MAPE per ticker; ties go to the lexicographically smaller variant
/// name. Rows sorted by ticker.
inline std::vector<BestVariantRow> table_best_variant(const std::vector<RunResult> &results) {
	std::map<std::string, const RunResult *> best;
	for (const auto &r : results) {
		auto [it, inserted] = best.emplace(r.ticker, &r);
		if (!inserted) {
			const RunResult *cur = it->second;
			if (r.mape < cur->mape || (r.mape == cur->mape && r.variant.name() < cur->variant.name())) {
				it->second = &r;
			}
		}
	}
	std::vector<BestVariantRow> rows;
	for (const auto &[ticker, r] : best) {
		rows.push_back({ticker, r->variant.name(), r->mape, r->variant.uses_sentiment(), r->variant.library,
		                sentiment_sections(r->variant.features)});
	}
	return rows;
}

struct GroupRow {
	std::string group;             // machine key
	std::string label;             // display label
	std::size_t winner_count = 0;  // tickers whose overall best run falls in the group
	double winner_avg_mape = 0.0;  // mean MAPE of those winning runs (NaN if none)
	std::size_t run_count = 0;     // all sentiment runs in the group
	double all_runs_avg_mape = 0.0; // mean MAPE of every run in the group (NaN if none)
};

namespace detail {

struct GroupDef {
	std::string key;
	std::string label;
	std::function<bool(const VariantSpec &)> member;
};

inline std::vector<GroupRow> group_table(const std::vector<RunResult> &results, const std::vector<GroupDef> &groups) {
	auto best = table_best_variant(results);
	std::vector<GroupRow> rows;
	for (const auto &g : groups) {
		GroupRow row{g.key, g.label};
		double win_sum = 0.0;
		for (const auto &b : best) {
			if (b.uses_sentiment && g.member(parse_variant_spec(b.variant))) {
				++row.winner_count;
				win_sum += b.mape;
			}
		}
		double all_sum = 0.0;
		for (const auto &r : results) {
			if (r.variant.uses_sentiment() && g.member(r.variant)) {
				++row.run_count;
				all_sum += r.mape;
			}
		}
		const double nan = std::numeric_limits<double>::quiet_NaN();
		row.winner_avg_mape = row.winner_count ? win_sum / static_cast<double>(row.winner_count) : nan;
		row.all_runs_avg_mape = row.run_count ? all_sum / static_cast<double>(row.run_count) : nan;
		rows.push_back(std::move(row));
	}
	std::stable_sort(rows.begin(), rows.end(), [](const GroupRow &a, const GroupRow &b) {
		if (a.winner_count != b.winner_count) {
			return a.winner_count > b.winner_count;
		}
		bool a_nan = std::isnan(a.winner_avg_mape);
		bool b_nan = std::isnan(b.winner_avg_mape);
		if (a_nan != b_nan || a_nan) {
			return !a_nan && b_nan;
		}
		return a.winner_avg_mape < b.winner_avg_mape;
	});
	return rows;
}

} // namespace detail

/// Tickers whose overall best run uses sentiment, tallied by the article
/// section(s) of that run.
inline std::vector<GroupRow> table_section_winners(const std::vector<RunResult> &results) {
	auto is = [](FeatureVariant f) { return [f](const VariantSpec &v) { return v.features == f; }; };
	return detail::group_table(results, {
	                                        {"full_text", "Full text", is(FeatureVariant::five_feature_senti_art)},
	                                        {"heading_synopsis", "Heading & Synopsis",
	                                         is(FeatureVariant::five_feature_senti_head_syn)},
	                                        {"heading", "Heading", is(FeatureVariant::five_feature_senti_head)},
	                                        {"synopsis", "Synopsis", is(FeatureVariant::five_feature_senti_syn)},
	                                    });
}

/// Same population as the section table, tallied by sentiment library.
inline std::vector<GroupRow> table_library_winners(const std::vector<RunResult> &results) {
	auto is = [](Library l) { return [l](const VariantSpec &v) { return v.library == l; }; };
	return detail::group_table(results, {
	                                        {"hiv4", "HIV4", is(Library::hiv4)},
	                                        {"vader", "VADER", is(Library::vader)},
	                                        {"lm", "L&M", is(Library::lm)},
	                                    });
}

// ---------------------------------------------------------------------------
// Report emitters

namespace detail {

inline std::string fmt_or_dash(double v, int decimals) {
	return std::isnan(v) ? std::string("-") : format_fixed(v, decimals);
}

inline std::string aligned(const std::vector<std::vector<std::string>> &cells) {
	std::vector<std::size_t> width;
	for (const auto &row : cells) {
		width.resize(std::max(width.size(), row.size()), 0);
		for (std::size_t c = 0; c < row.size(); ++c) {
			width[c] = std::max(width[c], row[c].size());
		}
	}
	std::string out;
	for (const auto &row : cells) {
		std::string line;
		for (std::size_t c = 0; c < row.size(); ++c) {
			line += row[c];
			if (c + 1 < row.size()) {
				line.append(width[c] - row[c].size() + 2, ' ');
			}
		}
		out += line + '\n';
	}
	return out;
}

inline std::string group_csv(const std::vector<GroupRow> &rows, const char *key_name) {
	std::string out = std::string(key_name) + ",winner_count,winner_avg_mape,run_count,all_runs_avg_mape\n";
	for (const auto &r : rows) {
		out += r.group + ',' + std::to_string(r.winner_count) + ',' + fmt_or_dash(r.winner_avg_mape, 6) + ',' +
		       std::to_string(r.run_count) + ',' + fmt_or_dash(r.all_runs_avg_mape, 6) + '\n';
	}
	return out;
}

inline std::string group_text(const std::vector<GroupRow> &rows, const char *title, const char *key_label) {
	std::vector<std::vector<std::string>> cells{{key_label, "Stocks winner count", "Average MAPE", "All-runs MAPE"}};
	for (const auto &r : rows) {
		cells.push_back({r.label, std::to_string(r.winner_count), fmt_or_dash(r.winner_avg_mape, 6),
		                 fmt_or_dash(r.all_runs_avg_mape, 6)});
	}
	return std::string(title) + "\n\n" + aligned(cells) +
	       "\nAverage MAPE: mean over the winning runs counted in the row (primary).\n"
	       "All-runs MAPE: mean over every sentiment run in the group, all tickers.\n"
	       "Population: tickers whose best run overall uses a sentiment feature.\n";
}

} // namespace detail

inline std::string best_variant_csv(const std::vector<BestVariantRow> &rows) {
	std::string out = "ticker,best_variant,mape\n";
	for (const auto &r : rows) {
		out += csv::escape(r.ticker) + ',' + r.variant + ',' + format_fixed(r.mape, 4) + '\n';
	}
	return out;
}

inline std::string best_variant_text(const std::vector<BestVariantRow> &rows) {
	std::vector<std::vector<std::string>> cells{{"Stock", "Best Variant", "MAPE"}};
	std::size_t senti = 0;
	for (const auto &r : rows) {
		cells.push_back({r.ticker, r.variant, format_fixed(r.mape, 4)});
		senti += r.uses_sentiment ? 1 : 0;
	}
	return "Best variant per stock\n\n" + detail::aligned(cells) + "\n" + std::to_string(senti) + " of " +
	       std::to_string(rows.size()) + " stocks won by a sentiment variant.\n"
	       "Ties are broken by variant name, lexicographically.\n";
}

struct ReportFiles {
	std::vector<std::filesystem::path> written;
};

/// Writes the three tables as CSV and aligned text into `dir`.
inline ReportFiles write_reports(const std::vector<RunResult> &results, const std::filesystem::path &dir) {
	auto sorted = results;
	std::sort(sorted.begin(), sorted.end(), [](const RunResult &a, const RunResult &b) {
		return std::pair(a.ticker, a.variant.name()) < std::pair(b.ticker, b.variant.name());
	});
	ReportFiles files;
	auto put = [&](const char *name, const std::string &content) {
		auto p = dir / name;
		write_file_atomic(p, content);
		files.written.push_back(p);
	};
	auto best = table_best_variant(sorted);
	auto sections = table_section_winners(sorted);
	auto libraries = table_library_winners(sorted);
	put("table1_best_variant.csv", best_variant_csv(best));
	put("table1_best_variant.txt", best_variant_text(best));
	put("table2_section_winners.csv", detail::group_csv(sections, "section"));
	put("table2_section_winners.txt", detail::group_text(sections, "Winners by article section", "Article section"));
	put("table3_library_winners.csv", detail::group_csv(libraries, "library"));
	put("table3_library_winners.txt", detail::group_text(libraries, "Winners by sentiment library", "Library"));
	return files;
}

} // namespace sentcast
