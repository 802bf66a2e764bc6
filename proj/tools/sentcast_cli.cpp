// sentcast: news sentiment + LSTM price forecasting pipeline.
//
//   sentcast --config cfg.json ingest
//   sentcast --config cfg.json score
//   sentcast --config cfg.json run [--tickers A,B] [--variants v1,v2] [--resume]
//   sentcast --config cfg.json report
//
// Exit codes: 0 success, 1 some runs failed, 2 fatal input or config error.

#include <iostream>
#include <map>
#include <set>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sentcast/sentcast.hpp"
#include "sentcast/config.hpp"

namespace {

using namespace sentcast;

constexpr int kExitOk = 0;
constexpr int kExitPartial = 1;
constexpr int kExitFatal = 2;

struct GlobalOptions {
	std::string config;
	std::optional<std::uint64_t> seed;
	std::size_t jobs = std::max(1u, std::thread::hardware_concurrency());
	bool resume = false;
};

void flush_warnings(Diagnostics &diag) {
	for (const auto &w : diag.warnings) {
		std::cerr << "warning: " << w << '\n';
	}
	diag.warnings.clear();
}

PipelineConfig load(const GlobalOptions &opts) {
	auto cfg = load_config(opts.config);
	if (opts.seed) {
		cfg.run.train.seed = *opts.seed;
	}
	return cfg;
}

std::vector<std::string> split_list(const std::string &s) {
	std::vector<std::string> out;
	for (auto &part : split(s, ',')) {
		auto t = std::string(trim(part));
		if (!t.empty()) {
			out.push_back(std::move(t));
		}
	}
	return out;
}

/// Alias entries for the configured ticker universe, in config order.
std::vector<TickerAliases> select_tickers(const PipelineConfig &cfg, const std::vector<std::string> &wanted,
                                          Diagnostics &diag) {
	auto all = load_aliases(cfg.aliases, &diag);
	if (wanted.empty()) {
		return all;
	}
	std::vector<TickerAliases> out;
	for (const auto &t : wanted) {
		auto it = std::find_if(all.begin(), all.end(), [&](const TickerAliases &a) { return a.ticker == t; });
		if (it == all.end()) {
			throw ConfigError("ticker " + t + " is not in the alias file " + cfg.aliases.string());
		}
		out.push_back(*it);
	}
	return out;
}

std::map<std::string, PriceSeries> load_price_map(const PipelineConfig &cfg, const std::vector<std::string> &tickers,
                                                  Diagnostics &diag) {
	std::map<std::string, PriceSeries> prices;
	for (const auto &t : tickers) {
		auto path = cfg.price_file(t);
		if (!std::filesystem::is_regular_file(path)) {
			throw ConfigError("price file not found: " + path.string());
		}
		auto series = load_prices(path, 0, &diag, t).between(cfg.start, cfg.end);
		if (series.rows.size() < cfg.min_price_rows()) {
			throw InputError("insufficient data: " + path.string() + " has " + std::to_string(series.rows.size()) +
			                 " rows in [" + format_date(cfg.start) + ", " + format_date(cfg.end) + "], need " +
			                 std::to_string(cfg.min_price_rows()));
		}
		prices.emplace(t, std::move(series));
	}
	return prices;
}

IngestResult ingest(const PipelineConfig &cfg, Diagnostics &diag) {
	auto res = ingest_articles(cfg.articles, cfg.article_format(), &diag);
	std::cerr << "ingested " << res.articles.size() << " articles from " << cfg.articles.string() << '\n';
	return res;
}

int cmd_ingest(const GlobalOptions &opts) {
	auto cfg = load(opts);
	validate_config(cfg, {.articles = true});
	Diagnostics diag;
	auto res = ingest(cfg, diag);
	flush_warnings(diag);
	write_file_atomic(cfg.work_dir / "corpus.jsonl", to_jsonl(res.articles));
	nlohmann::json summary = {{"read", res.read},
	                          {"cleaned", res.cleaned()},
	                          {"deduped", res.articles.size()},
	                          {"skipped", res.skipped},
	                          {"duplicates", res.duplicates}};
	std::cout << summary.dump() << '\n';
	return kExitOk;
}

int cmd_score(const GlobalOptions &opts) {
	auto cfg = load(opts);
	validate_config(cfg, {.articles = true, .lexicons = true, .prices = true, .aliases = true});
	Diagnostics diag;
	auto aliases = select_tickers(cfg, cfg.tickers, diag);
	std::vector<std::string> names;
	for (const auto &a : aliases) {
		names.push_back(a.ticker);
	}
	auto prices = load_price_map(cfg, names, diag);
	auto lexicons = load_lexicons(cfg.lexicons, &diag);
	auto corpus = ingest(cfg, diag);
	flush_warnings(diag);

	std::vector<Section> sections(std::begin(kAllSections), std::end(kAllSections));
	std::vector<Library> libraries(std::begin(kAllLibraries), std::end(kAllLibraries));
	auto scores = score_corpus(corpus.articles, lexicons, sections, libraries);
	write_file_atomic(cfg.work_dir / "scores.csv", scores_to_csv(scores));

	AggregateOptions agg{cfg.cutoff_hour};
	std::size_t files = 0;
	for (const auto &a : aliases) {
		auto calendar = prices.at(a.ticker).calendar();
		for (Section s : sections) {
			for (Library l : libraries) {
				auto series = aggregate_daily(scores, corpus.articles, a, s, l, calendar, agg);
				auto name = std::string(to_string(s)) + "_" + std::string(to_string(l)) + ".csv";
				write_file_atomic(cfg.work_dir / "series" / a.ticker / name, series_to_csv(series));
				++files;
			}
		}
	}
	nlohmann::json summary = {{"articles", corpus.articles.size()},
	                          {"scores", scores.size()},
	                          {"tickers", aliases.size()},
	                          {"series_files", files}};
	std::cout << summary.dump() << '\n';
	return kExitOk;
}

int cmd_run(const GlobalOptions &opts, const std::string &tickers_arg, const std::string &variants_arg) {
	auto cfg = load(opts);
	std::vector<VariantSpec> variants;
	if (variants_arg.empty()) {
		variants = all_variant_specs();
	} else {
		for (const auto &v : split_list(variants_arg)) {
			variants.push_back(parse_variant_spec(v));
		}
	}
	std::set<Library> libs;
	for (const auto &v : variants) {
		if (v.library) {
			libs.insert(*v.library);
		}
	}
	const bool sentiment = !libs.empty();
	auto wanted = tickers_arg.empty() ? cfg.tickers : split_list(tickers_arg);
	const bool need_aliases = sentiment || wanted.empty();
	validate_config(cfg, {.articles = sentiment, .lexicons = sentiment, .prices = true, .aliases = need_aliases});

	Diagnostics diag;
	std::vector<TickerAliases> aliases;
	if (need_aliases) {
		aliases = select_tickers(cfg, wanted, diag);
	} else {
		for (const auto &t : wanted) {
			aliases.push_back(make_aliases(t, {t}));
		}
	}
	std::vector<std::string> names;
	for (const auto &a : aliases) {
		names.push_back(a.ticker);
	}
	auto prices = load_price_map(cfg, names, diag);

	std::vector<TickerInputs> inputs;
	if (sentiment) {
		auto lexicons = load_lexicons(cfg.lexicons, &diag);
		auto corpus = ingest(cfg, diag);
		inputs = prepare_tickers(aliases, prices, corpus.articles, &lexicons,
		                         std::vector<Library>(libs.begin(), libs.end()), AggregateOptions{cfg.cutoff_hour});
	} else {
		inputs = prepare_tickers(aliases, prices, {}, nullptr, {});
	}
	flush_warnings(diag);

	SweepConfig sweep;
	sweep.run = cfg.run;
	sweep.results_dir = cfg.results_dir;
	sweep.resume = opts.resume;
	sweep.save_checkpoints = cfg.save_checkpoints;
	sweep.jobs = opts.jobs;
	sweep.progress = [](std::string_view msg) { std::cerr << msg << '\n'; };
	std::cerr << "running " << inputs.size() * variants.size() << " configurations on " << opts.jobs
	          << " worker(s)\n";
	auto outcome = run_all(inputs, variants, sweep);

	auto report_dir = cfg.results_dir / "report";
	if (!outcome.results.empty()) {
		write_reports(outcome.results, report_dir);
	}
	for (const auto &f : outcome.failures) {
		std::cerr << "failed: " << f.ticker << "/" << f.variant << ": " << f.message << '\n';
	}
	nlohmann::json summary = {{"runs", outcome.results.size()},
	                          {"reused", outcome.reused},
	                          {"failures", outcome.failures.size()},
	                          {"report_dir", report_dir.string()}};
	std::cout << summary.dump() << '\n';
	return outcome.failures.empty() ? kExitOk : kExitPartial;
}

int cmd_report(const GlobalOptions &opts) {
	auto cfg = load(opts);
	Diagnostics diag;
	auto results = load_results(cfg.results_dir, &diag);
	flush_warnings(diag);
	if (results.empty()) {
		throw InputError("no run results under " + cfg.results_dir.string());
	}
	auto files = write_reports(results, cfg.results_dir / "report");
	nlohmann::json summary = {{"results", results.size()}, {"files", files.written.size()}};
	std::cout << summary.dump() << '\n';
	return kExitOk;
}

} // namespace

int main(int argc, char **argv) {
	CLI::App app{"News sentiment features for LSTM stock price forecasting"};
	app.require_subcommand(1);
	app.fallthrough();
	GlobalOptions opts;
	app.add_option("-c,--config", opts.config, "Pipeline config file (JSON)")->required()->check(CLI::ExistingFile);
	app.add_option("--seed", opts.seed, "Override the global seed");
	app.add_option("-j,--jobs", opts.jobs, "Parallel training jobs")->check(CLI::PositiveNumber);
	app.add_flag("--resume", opts.resume, "Reuse persisted run results");

	auto *ingest_cmd = app.add_subcommand("ingest", "Clean and deduplicate the article dump");
	auto *score_cmd = app.add_subcommand("score", "Score articles and write daily sentiment series");
	auto *run_cmd = app.add_subcommand("run", "Train and evaluate variants, then write the tables");
	auto *report_cmd = app.add_subcommand("report", "Rebuild the tables from persisted results");
	std::string tickers, variants;
	run_cmd->add_option("--tickers", tickers, "Comma-separated tickers (default: config)");
	run_cmd->add_option("--variants", variants, "Comma-separated variant names (default: all 14)");

	try {
		app.parse(argc, argv);
	} catch (const CLI::ParseError &e) {
		int rc = app.exit(e);
		return rc == 0 ? kExitOk : kExitFatal;
	}

	try {
		if (ingest_cmd->parsed()) {
			return cmd_ingest(opts);
		}
		if (score_cmd->parsed()) {
			return cmd_score(opts);
		}
		if (run_cmd->parsed()) {
			return cmd_run(opts, tickers, variants);
		}
		if (report_cmd->parsed()) {
			return cmd_report(opts);
		}
	} catch (const sentcast::Error &e) {
		std::cerr << "error: " << e.what() << '\n';
		return kExitFatal;
	} catch (const std::exception &e) {
		std::cerr << "error: " << e.what() << '\n';
		return kExitFatal;
	}
	return kExitFatal;
}
