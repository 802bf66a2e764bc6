#include <catch2/catch_amalgamated.hpp>

#include "sentcast/dataset.hpp"
#include "support/synthetic.hpp"

using namespace sentcast;
using Catch::Matchers::WithinAbs;
using sentcast::testing::temp_dir;
using sentcast::testing::write_text;
using sentcast::testing::ymd;

namespace {

FeatureMatrix matrix_of(std::vector<std::vector<double>> rows) {
	FeatureMatrix m;
	m.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows[0].size()));
	for (std::size_t r = 0; r < rows.size(); ++r) {
		for (std::size_t c = 0; c < rows[r].size(); ++c) {
			m.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
		}
	}
	for (std::size_t c = 0; c < rows[0].size(); ++c) {
		m.columns.push_back(c == 0 ? "close" : "f" + std::to_string(c));
	}
	return m;
}

} // namespace

TEST_CASE("load_prices reads a Yahoo-style file", "[dataset][prices]") {
	auto market = testing::synthetic_market("INFY", 1, 904);
	auto dir = temp_dir("prices");
	write_text(dir / "INFY.csv", testing::prices_csv(market.prices));
	Diagnostics diag;
	auto p = load_prices(dir / "INFY.csv", 45, &diag);
	CHECK(diag.warnings.empty());
	REQUIRE(p.rows.size() == 904);
	CHECK(p.ticker == "INFY");
	CHECK(p.rows[0].date == market.prices.rows[0].date);
	CHECK_THAT(p.rows[903].close, WithinAbs(market.prices.rows[903].close, 1e-6));
	CHECK(std::is_sorted(p.rows.begin(), p.rows.end(),
	                     [](const PriceRow &a, const PriceRow &b) { return a.date < b.date; }));
}

TEST_CASE("load_prices rejects bad rows and keeps the first of duplicate dates", "[dataset][prices]") {
	auto dir = temp_dir("prices_bad");
	write_text(dir / "X.csv",
	           "volume,DATE,Close,open,High,low\n"
	           "100,2021-01-05,10,10,11,9\n"
	           "100,2021-01-04,10,10,11,9\n"
	           "200,2021-01-05,99,99,99,99\n"
	           "100,2021-01-06,10,10,9,11\n"
	           "100,2021-01-07,abc,10,11,9\n"
	           "100,2021-01-08,-1,10,11,9\n");
	Diagnostics diag;
	auto p = load_prices(dir / "X.csv", 1, &diag);
	REQUIRE(p.rows.size() == 2);
	CHECK(p.rows[0].date == ymd(2021, 1, 4));
	CHECK(p.rows[1].close == 10.0);
	CHECK(diag.warnings.size() == 4);

	CHECK_THROWS_WITH(load_prices(dir / "X.csv", 3), Catch::Matchers::ContainsSubstring("insufficient data"));

	write_text(dir / "Y.csv", "date,open,high,low,close\n2021-01-04,1,1,1,1\n");
	CHECK_THROWS_AS(load_prices(dir / "Y.csv", 1), InputError);
	CHECK_THROWS_AS(load_prices(dir / "Z.csv", 1), IoError);
}

TEST_CASE("feature variants have the expected columns", "[dataset][features]") {
	auto market = testing::synthetic_market("T", 3, 60);
	auto inputs = testing::planted_inputs(market);
	const auto &h = inputs.sentiment.at({Section::heading, Library::vader});
	const auto &s = inputs.sentiment.at({Section::synopsis, Library::vader});
	const auto &a = inputs.sentiment.at({Section::full_text, Library::vader});
	SentimentInputs si{&h, &s, &a};

	std::vector<std::size_t> counts;
	for (auto v : kAllFeatureVariants) {
		auto m = build_features(market.prices, si, v);
		counts.push_back(m.columns.size());
		CHECK(static_cast<std::size_t>(m.values.cols()) == feature_count(v));
		CHECK(m.values.rows() == 60);
		CHECK(m.columns[0] == "close");
		CHECK(parse_feature_variant(to_string(v)) == v);
	}
	CHECK(counts == std::vector<std::size_t>{1, 5, 6, 6, 6, 7});

	auto hs = build_features(market.prices, si, FeatureVariant::five_feature_senti_head_syn);
	CHECK(hs.columns == std::vector<std::string>{"close", "open", "high", "low", "volume", "senti_heading",
	                                             "senti_synopsis"});
	CHECK(hs.values(7, 5) == market.signal[7]);
	CHECK(hs.values(7, 0) == market.prices.rows[7].close);

	CHECK_THROWS_AS(build_features(market.prices, {}, FeatureVariant::five_feature_senti_art), InputError);
	CHECK_THROWS_AS(parse_feature_variant("seven_feature"), ConfigError);
}

TEST_CASE("min-max scaler", "[dataset][scaler]") {
	auto m = matrix_of({{10}, {20}, {30}});
	auto p = fit_scaler(m, 3);
	auto scaled = apply_scaler(m, p);
	CHECK(scaled.values(0, 0) == 0.0);
	CHECK(scaled.values(1, 0) == 0.5);
	CHECK(scaled.values(2, 0) == 1.0);
	CHECK(p.invert(0, 0.5) == 20.0);

	SECTION("values above the fitted max scale past 1") {
		auto train_only = fit_scaler(m, 2);
		CHECK(train_only.scale(0, 30.0) == 2.0);
		CHECK(apply_scaler(m, train_only).values(2, 0) > 1.0);
	}

	SECTION("constant column scales to 0") {
		auto c = matrix_of({{5, 1}, {5, 2}});
		auto cp = fit_scaler(c, 2);
		CHECK(apply_scaler(c, cp).values(1, 0) == 0.0);
	}

	SECTION("params serialize") {
		auto back = ScalerParams::from_json(p.to_json());
		CHECK(back == p);
		CHECK(p.to_json().dump() == R"({"close":{"min":10.0,"max":30.0}})");
	}

	CHECK_THROWS_AS(fit_scaler(m, 0), InputError);
	CHECK_THROWS_AS(fit_scaler(m, 4), InputError);
}

TEST_CASE("scaler round-trips and fits on training rows only", "[dataset][scaler][property]") {
	lstm::Rng rng(17);
	for (int trial = 0; trial < 100; ++trial) {
		std::size_t rows = 5 + rng.below(40);
		std::size_t cols = 1 + rng.below(6);
		std::vector<std::vector<double>> data(rows, std::vector<double>(cols));
		for (auto &r : data) {
			for (auto &x : r) {
				x = rng.uniform(-1e4, 1e4);
			}
		}
		auto m = matrix_of(data);
		std::size_t train = 2 + rng.below(rows - 1); // one row gives a degenerate range
		auto p = fit_scaler(m, train);
		auto back = invert_scaler(apply_scaler(m, p), p);
		REQUIRE((back.values - m.values).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + m.values.cwiseAbs().maxCoeff()));

		// Changing rows past the training range leaves the fit untouched.
		auto perturbed = m;
		perturbed.values.bottomRows(static_cast<Eigen::Index>(rows - train)).array() *= 7.0;
		REQUIRE(fit_scaler(perturbed, train) == p);

		auto scaled = apply_scaler(m, p);
		auto head = scaled.values.topRows(static_cast<Eigen::Index>(train));
		REQUIRE(head.minCoeff() >= 0.0);
		REQUIRE(head.maxCoeff() <= 1.0);
	}
}

TEST_CASE("windowing", "[dataset][window]") {
	SECTION("904 rows give 894 samples with the final 30 as test") {
		auto market = testing::synthetic_market("T", 4, 904);
		auto m = build_features(market.prices, {}, FeatureVariant::five_feature);
		auto ds = window(m, 10, 30);
		REQUIRE(ds.samples() == 894);
		CHECK(ds.train_count == 864);
		CHECK(ds.test_count() == 30);
		CHECK(ds.is_test(864));
		CHECK_FALSE(ds.is_test(863));
		CHECK(ds.target_dates.back() == market.prices.rows.back().date);
		CHECK(training_rows(904, 30) == 874);
	}

	SECTION("inputs and targets reconstruct the matrix") {
		std::vector<std::vector<double>> data;
		for (int r = 0; r < 25; ++r) {
			data.push_back({r * 1.0, r * 10.0 + 1, r * 100.0 + 2});
		}
		auto m = matrix_of(data);
		auto ds = window(m, 4, 3);
		REQUIRE(ds.samples() == 21);
		for (std::size_t i = 0; i < ds.samples(); ++i) {
			REQUIRE(ds.sample(i) == m.values.middleRows(static_cast<Eigen::Index>(i), 4));
			REQUIRE(ds.targets(static_cast<Eigen::Index>(i)) == m.values(static_cast<Eigen::Index>(i + 4), 0));
		}
	}

	SECTION("eleven rows with lookback 10 give one sample") {
		std::vector<std::vector<double>> data;
		for (int r = 0; r < 11; ++r) {
			data.push_back({r + 1.0});
		}
		auto ds = window(matrix_of(data), 10, 0);
		REQUIRE(ds.samples() == 1);
		CHECK(ds.targets(0) == 11.0);
		CHECK_THROWS_WITH(window(matrix_of(data), 10, 1), Catch::Matchers::ContainsSubstring("insufficient data"));
		CHECK_THROWS_AS(window(matrix_of(data), 0, 0), InputError);
	}
}

TEST_CASE("PriceSeries::between keeps an inclusive range", "[dataset]") {
	auto market = testing::synthetic_market("T", 5, 20);
	auto sub = market.prices.between(market.prices.rows[3].date, market.prices.rows[7].date);
	CHECK(sub.rows.size() == 5);
	CHECK(sub.ticker == "T");
}
