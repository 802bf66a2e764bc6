#pragma once

#include <algorithm>
#include <array>
#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "sentcast/common.hpp"
#include "sentcast/csv.hpp"
#include "sentcast/sentiment.hpp"

namespace sentcast {

inline constexpr std::size_t kDefaultLookback = 10;
inline constexpr std::size_t kDefaultHorizon = 5;
inline constexpr std::size_t kDefaultHoldout = 30;

struct PriceRow {
	Date date;
	double open = 0.0;
	double high = 0.0;
	double low = 0.0;
	double close = 0.0;
	double volume = 0.0;

	bool operator==(const PriceRow &) const = default;
};

struct PriceSeries {
	std::string ticker;
	std::vector<PriceRow> rows; // strictly increasing dates

	std::vector<Date> dates() const {
		std::vector<Date> out;
		out.reserve(rows.size());
		for (const auto &r : rows) {
			out.push_back(r.date);
		}
		return out;
	}

	BusinessCalendar calendar() const {
		return BusinessCalendar(dates());
	}

	/// Rows with start <= date <= end.
	PriceSeries between(const Date &start, const Date &end) const {
		PriceSeries out{ticker, {}};
		for (const auto &r : rows) {
			if (!(r.date < start) && !(end < r.date)) {
				out.rows.push_back(r);
			}
		}
		return out;
	}
};

inline bool valid_ohlc(const PriceRow &r) {
	return r.open > 0 && r.high > 0 && r.low > 0 && r.close > 0 && r.volume >= 0 &&
	       r.low <= std::min(r.open, r.close) && std::max(r.open, r.close) <= r.high;
}

/// Price CSV with a header naming at least date, open, high, low, close and
/// volume (any order, case-insensitive; other columns such as "adj close"
/// are ignored). Invalid rows and repeated dates are dropped with a warning.
inline PriceSeries load_prices(const std::filesystem::path &path, std::size_t min_rows, Diagnostics *diag = nullptr,
                               std::string ticker = {}) {
	auto records = csv::parse(read_file(path));
	if (ticker.empty()) {
		ticker = path.stem().string();
	}
	PriceSeries series{ticker, {}};
	if (records.empty()) {
		throw InputError("insufficient data: " + path.string() + " is empty");
	}
	std::unordered_map<std::string, std::size_t> col;
	for (std::size_t i = 0; i < records[0].fields.size(); ++i) {
		col[to_lower(trim(records[0].fields[i]))] = i;
	}
	const std::array<const char *, 6> names{"date", "open", "high", "low", "close", "volume"};
	std::array<std::size_t, 6> idx{};
	for (std::size_t k = 0; k < names.size(); ++k) {
		auto it = col.find(names[k]);
		if (it == col.end()) {
			throw InputError(path.string() + ": header lacks column '" + names[k] + "'");
		}
		idx[k] = it->second;
	}

	auto where = [&](const csv::Record &rec) { return path.filename().string() + ":" + std::to_string(rec.line) + ": "; };
	for (std::size_t r = 1; r < records.size(); ++r) {
		const auto &rec = records[r];
		auto field = [&](std::size_t k) -> std::string_view {
			return idx[k] < rec.fields.size() ? std::string_view(rec.fields[idx[k]]) : std::string_view{};
		};
		auto date = parse_date(trim(field(0)));
		std::array<std::optional<double>, 5> nums;
		for (std::size_t k = 1; k < 6; ++k) {
			nums[k - 1] = parse_double(field(k));
		}
		if (!date || std::any_of(nums.begin(), nums.end(), [](const auto &n) { return !n.has_value(); })) {
			warn(diag, where(rec) + "unparseable row rejected");
			continue;
		}
		PriceRow row{*date, *nums[0], *nums[1], *nums[2], *nums[3], *nums[4]};
		if (!valid_ohlc(row)) {
			warn(diag, where(rec) + "row violates low <= open,close <= high or has non-positive price, rejected");
			continue;
		}
		series.rows.push_back(row);
	}
	std::stable_sort(series.rows.begin(), series.rows.end(),
	                 [](const PriceRow &a, const PriceRow &b) { return a.date < b.date; });
	std::vector<PriceRow> unique_rows;
	unique_rows.reserve(series.rows.size());
	for (const auto &row : series.rows) {
		if (!unique_rows.empty() && unique_rows.back().date == row.date) {
			warn(diag, path.filename().string() + ": duplicate date " + format_date(row.date) + ", first row kept");
			continue;
		}
		unique_rows.push_back(row);
	}
	series.rows = std::move(unique_rows);
	if (series.rows.size() < min_rows) {
		throw InputError("insufficient data: " + path.string() + " has " + std::to_string(series.rows.size()) +
		                 " valid rows, need " + std::to_string(min_rows));
	}
	return series;
}

// ---------------------------------------------------------------------------
// Feature variants

enum class FeatureVariant {
	one_feature,
	five_feature,
	five_feature_senti_head,
	five_feature_senti_syn,
	five_feature_senti_art,
	five_feature_senti_head_syn,
};

inline constexpr FeatureVariant kAllFeatureVariants[] = {
    FeatureVariant::one_feature,           FeatureVariant::five_feature,
    FeatureVariant::five_feature_senti_head, FeatureVariant::five_feature_senti_syn,
    FeatureVariant::five_feature_senti_art, FeatureVariant::five_feature_senti_head_syn,
};

inline std::string_view to_string(FeatureVariant v) {
	switch (v) {
	case FeatureVariant::one_feature:
		return "one_feature";
	case FeatureVariant::five_feature:
		return "five_feature";
	case FeatureVariant::five_feature_senti_head:
		return "five_feature_senti_head";
	case FeatureVariant::five_feature_senti_syn:
		return "five_feature_senti_syn";
	case FeatureVariant::five_feature_senti_art:
		return "five_feature_senti_art";
	case FeatureVariant::five_feature_senti_head_syn:
		return "five_feature_senti_head_syn";
	}
	return "?";
}

inline FeatureVariant parse_feature_variant(std::string_view s) {
	for (auto v : kAllFeatureVariants) {
		if (to_string(v) == s) {
			return v;
		}
	}
	throw ConfigError("unknown feature variant '" + std::string(s) + "'");
}

/// Sections whose sentiment the variant appends, in column order.
inline std::vector<Section> sentiment_sections(FeatureVariant v) {
	switch (v) {
	case FeatureVariant::one_feature:
	case FeatureVariant::five_feature:
		return {};
	case FeatureVariant::five_feature_senti_head:
		return {Section::heading};
	case FeatureVariant::five_feature_senti_syn:
		return {Section::synopsis};
	case FeatureVariant::five_feature_senti_art:
		return {Section::full_text};
	case FeatureVariant::five_feature_senti_head_syn:
		return {Section::heading, Section::synopsis};
	}
	return {};
}

inline std::size_t feature_count(FeatureVariant v) {
	return v == FeatureVariant::one_feature ? 1 : 5 + sentiment_sections(v).size();
}

struct FeatureMatrix {
	std::string ticker;
	std::vector<Date> dates;
	std::vector<std::string> columns; // "close" is always column 0
	Eigen::MatrixXd values;           // dates x columns

	std::string to_csv() const {
		std::string out = "date";
		for (const auto &c : columns) {
			out += ',' + c;
		}
		out += '\n';
		for (Eigen::Index r = 0; r < values.rows(); ++r) {
			out += format_date(dates[static_cast<std::size_t>(r)]);
			for (Eigen::Index c = 0; c < values.cols(); ++c) {
				out += ',' + format_fixed(values(r, c), 6);
			}
			out += '\n';
		}
		return out;
	}
};

/// Sentiment series by section; only the sections a variant needs must be set.
struct SentimentInputs {
	const SentimentSeries *heading = nullptr;
	const SentimentSeries *synopsis = nullptr;
	const SentimentSeries *full_text = nullptr;

	const SentimentSeries *get(Section s) const {
		switch (s) {
		case Section::heading:
			return heading;
		case Section::synopsis:
			return synopsis;
		case Section::full_text:
			return full_text;
		}
		return nullptr;
	}
};

inline FeatureMatrix build_features(const PriceSeries &prices, const SentimentInputs &sentiment,
                                    FeatureVariant variant) {
	FeatureMatrix m;
	m.ticker = prices.ticker;
	m.dates = prices.dates();
	m.columns = {"close"};
	if (variant != FeatureVariant::one_feature) {
		m.columns.insert(m.columns.end(), {"open", "high", "low", "volume"});
	}
	auto sections = sentiment_sections(variant);
	std::vector<const SentimentSeries *> series;
	for (Section s : sections) {
		const auto *ss = sentiment.get(s);
		if (ss == nullptr) {
			throw InputError("variant " + std::string(to_string(variant)) + " needs a " + std::string(to_string(s)) +
			                 " sentiment series");
		}
		if (!ss->ticker.empty() && !prices.ticker.empty() && ss->ticker != prices.ticker) {
			throw InputError("sentiment series for " + ss->ticker + " joined with prices of " + prices.ticker);
		}
		series.push_back(ss);
		m.columns.push_back("senti_" + std::string(to_string(s)));
	}

	const auto rows = static_cast<Eigen::Index>(prices.rows.size());
	m.values.resize(rows, static_cast<Eigen::Index>(m.columns.size()));
	for (Eigen::Index r = 0; r < rows; ++r) {
		const auto &p = prices.rows[static_cast<std::size_t>(r)];
		m.values(r, 0) = p.close;
		Eigen::Index c = 1;
		if (variant != FeatureVariant::one_feature) {
			m.values(r, c++) = p.open;
			m.values(r, c++) = p.high;
			m.values(r, c++) = p.low;
			m.values(r, c++) = p.volume;
		}
		for (const auto *ss : series) {
			m.values(r, c++) = ss->at(p.date);
		}
	}
	return m;
}

// ---------------------------------------------------------------------------
// Min-max scaling

struct ColumnRange {
	std::string name;
	double min = 0.0;
	double max = 0.0;

	bool operator==(const ColumnRange &) const = default;
};

struct ScalerParams {
	std::vector<ColumnRange> columns;

	bool operator==(const ScalerParams &) const = default;

	double scale(std::size_t column, double x) const {
		const auto &c = columns.at(column);
		double range = c.max - c.min;
		return range > 0.0 ? (x - c.min) / range : 0.0;
	}

	double invert(std::size_t column, double scaled) const {
		const auto &c = columns.at(column);
		return scaled * (c.max - c.min) + c.min;
	}

	nlohmann::ordered_json to_json() const {
		nlohmann::ordered_json j = nlohmann::ordered_json::object();
		for (const auto &c : columns) {
			j[c.name] = {{"min", c.min}, {"max", c.max}};
		}
		return j;
	}

	static ScalerParams from_json(const nlohmann::ordered_json &j) {
		ScalerParams p;
		for (const auto &[name, range] : j.items()) {
			p.columns.push_back({name, range.at("min").get<double>(), range.at("max").get<double>()});
			if (p.columns.back().max < p.columns.back().min) {
				throw InputError("scaler column '" + name + "' has max < min");
			}
		}
		return p;
	}
};

/// Per-column min/max over the first train_rows rows only.
inline ScalerParams fit_scaler(const FeatureMatrix &m, std::size_t train_rows) {
	if (train_rows == 0 || train_rows > static_cast<std::size_t>(m.values.rows())) {
		throw InputError("fit_scaler: train_rows must be in [1, " + std::to_string(m.values.rows()) + "]");
	}
	ScalerParams p;
	auto train = m.values.topRows(static_cast<Eigen::Index>(train_rows));
	for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
		p.columns.push_back({m.columns[static_cast<std::size_t>(c)], train.col(c).minCoeff(), train.col(c).maxCoeff()});
	}
	return p;
}

/// No clamping: values outside the fitted range map outside [0, 1].
inline FeatureMatrix apply_scaler(const FeatureMatrix &m, const ScalerParams &p) {
	if (p.columns.size() != m.columns.size()) {
		throw InputError("scaler has " + std::to_string(p.columns.size()) + " columns, matrix has " +
		                 std::to_string(m.columns.size()));
	}
	FeatureMatrix out = m;
	for (Eigen::Index c = 0; c < m.values.cols(); ++c) {
		for (Eigen::Index r = 0; r < m.values.rows(); ++r) {
			out.values(r, c) = p.scale(static_cast<std::size_t>(c), m.values(r, c));
		}
	}
	return out;
}

inline FeatureMatrix invert_scaler(const FeatureMatrix &scaled, const ScalerParams &p) {
	FeatureMatrix out = scaled;
	for (Eigen::Index c = 0; c < scaled.values.cols(); ++c) {
		for (Eigen::Index r = 0; r < scaled.values.rows(); ++r) {
			out.values(r, c) = p.invert(static_cast<std::size_t>(c), scaled.values(r, c));
		}
	}
	return out;
}

// ---------------------------------------------------------------------------
// Windowing

using WindowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Supervised samples: input i covers rows [i, i + lookback), target i is the
/// close (column 0) at row i + lookback. The final `holdout` samples are test.
struct WindowedDataset {
	std::size_t lookback = 0;
	std::size_t features = 0;
	std::vector<double> inputs; // samples x lookback x features, row-major
	Eigen::VectorXd targets;
	std::vector<Date> target_dates;
	std::size_t train_count = 0;

	std::size_t samples() const {
		return static_cast<std::size_t>(targets.size());
	}

	std::size_t test_count() const {
		return samples() - train_count;
	}

	bool is_test(std::size_t i) const {
		return i >= train_count;
	}

	Eigen::Map<const WindowMatrix> sample(std::size_t i) const {
		return {inputs.data() + i * lookback * features, static_cast<Eigen::Index>(lookback),
		        static_cast<Eigen::Index>(features)};
	}
};

/// Rows of the matrix that feed training: everything before the holdout
/// targets. The scaler is fitted on exactly these.
inline std::size_t training_rows(std::size_t total_rows, std::size_t holdout) {
	return total_rows - holdout;
}

inline WindowedDataset window(const FeatureMatrix &m, std::size_t lookback = kDefaultLookback,
                              std::size_t holdout = kDefaultHoldout) {
	const auto rows = static_cast<std::size_t>(m.values.rows());
	if (lookback == 0) {
		throw InputError("lookback must be positive");
	}
	if (rows <= lookback + holdout) {
		throw InputError("insufficient data: " + std::to_string(rows) + " rows cannot fill lookback " +
		                 std::to_string(lookback) + " plus holdout " + std::to_string(holdout));
	}
	WindowedDataset ds;
	ds.lookback = lookback;
	ds.features = static_cast<std::size_t>(m.values.cols());
	const std::size_t n = rows - lookback;
	ds.inputs.resize(n * lookback * ds.features);
	ds.targets.resize(static_cast<Eigen::Index>(n));
	for (std::size_t i = 0; i < n; ++i) {
		for (std::size_t t = 0; t < lookback; ++t) {
			for (std::size_t f = 0; f < ds.features; ++f) {
				ds.inputs[(i * lookback + t) * ds.features + f] =
				    m.values(static_cast<Eigen::Index>(i + t), static_cast<Eigen::Index>(f));
			}
		}
		ds.targets(static_cast<Eigen::Index>(i)) = m.values(static_cast<Eigen::Index>(i + lookback), 0);
		if (!m.dates.empty()) {
			ds.target_dates.push_back(m.dates[i + lookback]);
		}
	}
	ds.train_count = n - holdout;
	return ds;
}

} // namespace sentcast
