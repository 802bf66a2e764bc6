#include <catch2/catch_amalgamated.hpp>

#include <string>
#include <vector>

#include "sentcast/corpus.hpp"
#include "support/oracles.hpp"
#include "support/synthetic.hpp"

using namespace sentcast;
using sentcast::testing::temp_dir;
using sentcast::testing::write_text;
using sentcast::testing::ymd;

TEST_CASE("clean_text strips tags, decodes entities, collapses whitespace", "[corpus][clean]") {
	CHECK(clean_text("<p>Profit  rose</p>") == "Profit rose");
	CHECK(clean_text("") == "");
	CHECK(clean_text("A&amp;B\n\nC") == "A&B C");
	CHECK(clean_text("  \t lead and trail \r\n") == "lead and trail");
	CHECK(clean_text("a<br/>b") == "a b");
	CHECK(clean_text("x &lt; y") == "x < y");
	CHECK(clean_text("a < b and c > d") == "a < b and c > d");
	CHECK(clean_text("&#65;&#x42;&nbsp;C") == "AB C");
	CHECK(clean_text("&unknown; &") == "&unknown; &");
	CHECK(clean_text("<!-- note -->Shares<script>x</script>") == "Shares x");
	CHECK(clean_text("&#8377;100 crore") == "\xE2\x82\xB9" "100 crore");
}

TEST_CASE("clean_text decodes escaped markup down to a fixed point", "[corpus][clean]") {
	CHECK(clean_text("&lt;b&gt;bold&lt;/b&gt;") == "bold");
	CHECK(clean_text("&amp;lt;p&amp;gt;x") == "x");
}

TEST_CASE("clean_text is idempotent on random markup-heavy strings", "[corpus][clean][property]") {
	const std::string alphabet = "ab <>/&;#x1 \n\tamplt";
	const std::vector<std::string> fragments = {"&amp;", "&lt;", "&gt;", "<p>", "</p>", "&#60;", "&#x3e;", "&nbsp;",
	                                            "<", ">", "&", ";", "  ", "\n"};
	lstm::Rng rng(20240601);
	for (int trial = 0; trial < 2000; ++trial) {
		std::string s;
		auto len = rng.below(30);
		for (std::size_t k = 0; k < len; ++k) {
			if (rng.uniform01() < 0.4) {
				s += fragments[rng.below(fragments.size())];
			} else {
				s.push_back(alphabet[rng.below(alphabet.size())]);
			}
		}
		auto once = clean_text(s);
		INFO("input: " << s);
		REQUIRE(clean_text(once) == once);
		REQUIRE(once.find("  ") == std::string::npos);
	}
}

namespace {

Article art(std::string id, std::string heading, Date d, int secs = 0) {
	Article a;
	a.id = std::move(id);
	a.heading = std::move(heading);
	a.published_at = {d, secs};
	return a;
}

} // namespace

TEST_CASE("deduplicate keeps the first article per heading and date", "[corpus][dedup]") {
	auto d1 = ymd(2021, 3, 1);
	auto d2 = ymd(2021, 3, 2);
	auto a = art("1", "Profit rose", d1);

	CHECK(deduplicate({a, a}) == std::vector<Article>{a});
	CHECK(deduplicate({}).empty());

	SECTION("five articles with two duplicate pairs leave three") {
		std::vector<Article> in{art("1", "Profit rose", d1), art("2", "PROFIT ROSE", d1, 600),
		                        art("3", "Profit rose", d2), art("4", "Loss widened", d2),
		                        art("5", "loss widened", d2, 7200)};
		auto out = deduplicate(in);
		// brute-force key grouping
		std::vector<std::pair<std::string, Date>> keys;
		for (const auto &x : in) {
			auto k = std::pair(oracle::lower(x.heading), x.published_at.date);
			if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
				keys.push_back(k);
			}
		}
		REQUIRE(out.size() == keys.size());
		REQUIRE(out.size() == 3);
		CHECK(out[0].id == "1");
		CHECK(out[1].id == "3");
		CHECK(out[2].id == "4");
	}
}

TEST_CASE("deduplicate is idempotent and never grows", "[corpus][dedup][property]") {
	lstm::Rng rng(7);
	const std::vector<std::string> heads{"alpha", "Alpha", "beta", "gamma", "BETA"};
	for (int trial = 0; trial < 200; ++trial) {
		std::vector<Article> in;
		auto n = rng.below(12);
		for (std::size_t i = 0; i < n; ++i) {
			in.push_back(art(std::to_string(i), heads[rng.below(heads.size())], ymd(2020, 1, 1 + rng.below(3))));
		}
		auto once = deduplicate(in);
		REQUIRE(once.size() <= in.size());
		REQUIRE(deduplicate(once) == once);
	}
}

TEST_CASE("parse_timestamp accepts ISO-8601 forms", "[corpus][dates]") {
	auto ts = parse_timestamp("2021-03-04T10:15:30+05:30");
	REQUIRE(ts);
	CHECK(ts->date == ymd(2021, 3, 4));
	CHECK(ts->seconds_of_day == 10 * 3600 + 15 * 60 + 30);
	CHECK(parse_timestamp("2021-03-04")->seconds_of_day == 0);
	CHECK(parse_timestamp("2021-03-04 23:59")->hour() == 23);
	CHECK(parse_timestamp("2021-03-04T01:02:03.456Z")->seconds_of_day == 3723);
	CHECK_FALSE(parse_timestamp("2021-02-30"));
	CHECK_FALSE(parse_timestamp("04/03/2021"));
	CHECK_FALSE(parse_timestamp("2021-03-04T25:00"));
	CHECK_FALSE(parse_timestamp(""));
}

TEST_CASE("ingest_articles reads JSON Lines", "[corpus][ingest]") {
	auto dir = temp_dir("ingest_jsonl");

	SECTION("one record without a date is skipped and counted") {
		write_text(dir / "a.jsonl",
		           R"({"id":"1","published_at":"2021-01-04T09:00:00","sector":"IT","heading":"<b>Infosys</b> up","synopsis":"s","full_text":"f"})"
		           "\n"
		           R"({"id":"2","sector":"IT","heading":"No date here"})"
		           "\n"
		           R"({"id":"3","published_at":"2021-01-05","heading":"TCS &amp; Wipro"})"
		           "\n");
		Diagnostics diag;
		auto res = ingest_articles(dir / "a.jsonl", ArticleFormat::jsonl, &diag);
		REQUIRE(res.articles.size() == 2);
		CHECK(res.read == 3);
		CHECK(res.skipped == 1);
		CHECK(res.articles[0].heading == "Infosys up");
		CHECK(res.articles[1].heading == "TCS & Wipro");
		CHECK(res.articles[1].synopsis.empty());
		CHECK(res.articles[1].full_text.empty());
		REQUIRE(diag.warnings.size() == 1);
		CHECK(diag.warnings[0].find("line 2") != std::string::npos);
	}

	SECTION("empty file") {
		write_text(dir / "empty.jsonl", "");
		auto res = ingest_articles(dir / "empty.jsonl", ArticleFormat::jsonl);
		CHECK(res.articles.empty());
		CHECK(res.skipped == 0);
		CHECK(res.read == 0);
	}

	SECTION("identical heading and date collapse to one article") {
		write_text(dir / "dup.jsonl",
		           R"({"id":"1","published_at":"2021-01-04T09:00:00","heading":"Same story"})"
		           "\n"
		           R"({"id":"2","published_at":"2021-01-04T17:00:00","heading":"same   story"})"
		           "\n");
		auto res = ingest_articles(dir / "dup.jsonl", ArticleFormat::jsonl);
		REQUIRE(res.articles.size() == 1);
		CHECK(res.articles[0].id == "1");
		CHECK(res.duplicates == 1);
	}

	SECTION("malformed lines warn and continue; output is in publication order") {
		write_text(dir / "mixed.jsonl",
		           R"({"id":"late","published_at":"2021-02-01","heading":"Later"})"
		           "\n{not json\n"
		           R"({"id":"early","published_at":"2021-01-01","heading":"Earlier"})"
		           "\n"
		           R"({"id":"x","published_at":"2021-01-01","heading":"  <p> </p> "})"
		           "\n");
		Diagnostics diag;
		auto res = ingest_articles(dir / "mixed.jsonl", ArticleFormat::jsonl, &diag);
		REQUIRE(res.articles.size() == 2);
		CHECK(res.articles[0].id == "early");
		CHECK(res.articles[1].id == "late");
		CHECK(res.skipped == 2);
		CHECK(res.read == 4);
		CHECK(diag.warnings.size() == 2);
	}

	SECTION("unreadable file is fatal") {
		CHECK_THROWS_AS(ingest_articles(dir / "missing.jsonl", ArticleFormat::jsonl), IoError);
	}
}

TEST_CASE("ingest_articles reads CSV with quoted multi-line fields", "[corpus][ingest]") {
	auto dir = temp_dir("ingest_csv");
	write_text(dir / "a.csv",
	           "id,published_at,sector,heading,synopsis,full_text\n"
	           "1,2021-01-04T09:00:00,Banking,\"HDFC Bank, Q3\",\"syn\",\"line one\nline two\"\n"
	           "2,bad-date,Banking,Other,,\n"
	           "3,2021-01-05,Auto,\"Quote \"\"here\"\"\",,\n");
	auto res = ingest_articles(dir / "a.csv", ArticleFormat::csv);
	REQUIRE(res.articles.size() == 2);
	CHECK(res.skipped == 1);
	CHECK(res.articles[0].heading == "HDFC Bank, Q3");
	CHECK(res.articles[0].full_text == "line one line two");
	CHECK(res.articles[1].heading == "Quote \"here\"");

	write_text(dir / "nohead.csv", "id,date\n1,2021-01-01\n");
	CHECK_THROWS_AS(ingest_articles(dir / "nohead.csv", ArticleFormat::csv), InputError);
}

TEST_CASE("match_ticker uses whole-word, case-insensitive matching", "[corpus][match]") {
	auto infy = make_aliases("INFY", {"Infosys"});
	Article a;
	a.heading = "Infosys beats estimates";
	CHECK(match_ticker(a, Section::heading, infy));
	a.heading = "Information overload";
	CHECK_FALSE(match_ticker(a, Section::heading, infy));
	a.full_text = "Shares of INFY closed higher.";
	CHECK(match_ticker(a, Section::full_text, infy));
	CHECK(oracle::whole_word(a.full_text, "INFY"));
	CHECK_FALSE(match_ticker(a, Section::synopsis, infy));

	auto it = make_aliases("IT", {"it services co"});
	a.heading = "ITEM of the day";
	CHECK_FALSE(match_ticker(a, Section::heading, it));

	auto mm = make_aliases("M&M", {"Mahindra & Mahindra", "mahindra"});
	a.heading = "M&M launches SUV";
	CHECK(match_ticker(a, Section::heading, mm));
	a.heading = "Mahindra-backed startup";
	CHECK(match_ticker(a, Section::heading, mm));
}

TEST_CASE("match_ticker agrees with a regex oracle and ignores case", "[corpus][match][property]") {
	const std::vector<std::string> words{"infy", "Infosys", "INFOSYS", "info", "sys", "tcs", "x", "9", "infy9"};
	const std::vector<std::string> seps{" ", ", ", "-", ".", "", "(", ")"};
	auto aliases = make_aliases("INFY", {"infosys"});
	lstm::Rng rng(99);
	for (int trial = 0; trial < 1000; ++trial) {
		std::string text;
		auto n = 1 + rng.below(6);
		for (std::size_t k = 0; k < n; ++k) {
			text += words[rng.below(words.size())] + seps[rng.below(seps.size())];
		}
		Article a;
		a.heading = text;
		bool expected = oracle::whole_word(text, "infy") || oracle::whole_word(text, "infosys");
		INFO("text: " << text);
		REQUIRE(match_ticker(a, Section::heading, aliases) == expected);

		Article upper = a;
		std::transform(upper.heading.begin(), upper.heading.end(), upper.heading.begin(), ::toupper);
		auto upper_aliases = make_aliases("infy", {"INFOSYS"});
		REQUIRE(match_ticker(upper, Section::heading, upper_aliases) == expected);
	}
}

TEST_CASE("load_aliases normalizes names and skips bad rows", "[corpus][aliases]") {
	auto dir = temp_dir("aliases");
	write_text(dir / "aliases.csv",
	           "ticker,name1,name2\n"
	           "INFY,Infosys,Infosys Ltd\n"
	           "TCS,Tata Consultancy Services\n"
	           "LONE\n"
	           "INFY,Duplicate\n");
	Diagnostics diag;
	auto aliases = load_aliases(dir / "aliases.csv", &diag);
	REQUIRE(aliases.size() == 2);
	CHECK(aliases[0].ticker == "INFY");
	CHECK(aliases[0].names == std::vector<std::string>{"infosys", "infosys ltd"});
	CHECK(aliases[1].names == std::vector<std::string>{"tata consultancy services"});
	CHECK(diag.warnings.size() == 2);
	CHECK_THROWS_AS(make_aliases("", {"x"}), InputError);
}
