#include <catch_amalgamated.hpp>

#include <fstream>
#include <random>
#include <sstream>

#include "tempus/tempus.hpp"

using namespace tempus;

namespace {

IngestConfig tb_config() {
    IngestConfig cfg;
    cfg.path = TEMPUS_TEST_DATA "/tb.csv";
    cfg.index = "year";
    cfg.key = {"country", "gender"};
    return cfg;
}

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    for (std::string l; std::getline(in, l);)
        out.push_back(l);
    return out;
}

} // namespace

TEST_CASE("CSV records with quotes, embedded breaks and CRLF", "[io][csv]") {
    const auto recs = parse_csv("a,b\r\n\"x, y\",\"say \"\"hi\"\"\"\n\"two\nlines\",\n");
    REQUIRE(recs.size() == 3);
    CHECK(recs[1][0].text == "x, y");
    CHECK(recs[1][1].text == "say \"hi\"");
    CHECK(recs[2][0].text == "two\nlines");
    CHECK(recs[2][1].text.empty());
    CHECK_FALSE(recs[2][1].quoted);
    CHECK(parse_csv("a;b\n1;2", ';')[1][1].text == "2");
    CHECK_THROWS_AS(parse_csv("\"open"), parse_error);
    CHECK_THROWS_AS(parse_csv("\"a\"b\n"), parse_error);
}

TEST_CASE("CSV writing round-trips arbitrary text", "[io][csv][property]") {
    std::mt19937_64 rng(4);
    const std::string alphabet = "ab ,\"\n\r;x";
    for (int trial = 0; trial < 300; ++trial) {
        Column c("c");
        for (int r = 0; r < 5; ++r) {
            std::string s;
            const auto len = 1 + rng() % 6;
            for (std::size_t i = 0; i < len; ++i)
                s.push_back(alphabet[rng() % alphabet.size()]);
            c.push_back(Cell(s));
        }
        const Table t({c});
        const auto recs = parse_csv(to_csv(t));
        REQUIRE(recs.size() == 6);
        for (std::size_t r = 0; r < 5; ++r)
            REQUIRE(recs[r + 1][0].text == c[r].as<std::string>());
    }
}

TEST_CASE("column types are inferred in a fixed order", "[io][ingest]") {
    IngestConfig cfg;
    cfg.index = "t";
    const Table t = read_table("t,i,r,b,d,s,m,q\n"
                               "1,1,1.5,TRUE,2020-01-01,x,NA,\"\"\n"
                               "2,-2,2,false,2020-01-02,2,,y\n",
                               cfg);
    CHECK(t.column("t").kind() == CellKind::time);
    CHECK(t.column("i").kind() == CellKind::integer);
    CHECK(t.column("r").kind() == CellKind::real);
    CHECK(t.column("b").kind() == CellKind::boolean);
    CHECK(t.column("d").kind() == CellKind::time);
    CHECK(t.column("s").kind() == CellKind::text);
    CHECK(t.column("m").kind() == CellKind::missing);
    CHECK(t.column("q")[0] == Cell(""));
    CHECK(t.column("t")[0].as<TimePoint>().granularity == Granularity::ordinal);
}

TEST_CASE("year-like integers become time values only in the index or by declaration", "[io][ingest]") {
    IngestConfig cfg;
    cfg.index = "year";
    const Table t = read_table("year,born\n2011,1990\n2012,1991\n", cfg);
    CHECK(t.column("year")[0].as<TimePoint>().granularity == Granularity::year);
    CHECK(t.column("born").kind() == CellKind::integer);
    cfg.time_format["born"] = "year";
    CHECK(read_table("year,born\n2011,1990\n", cfg).column("born").kind() == CellKind::time);

    const Table mixed = read_table("year,x\n2011,1\n12,2\n", cfg);
    CHECK(mixed.column("year")[1].as<TimePoint>() == make_time(Granularity::ordinal, 12));
    CHECK(mixed.column("year")[0].as<TimePoint>() == make_time(Granularity::ordinal, 2011));
}

TEST_CASE("declared formats and zones", "[io][ingest]") {
    IngestConfig cfg;
    cfg.index = "when";
    cfg.time_format["when"] = "%d/%m/%Y %H:%M";
    cfg.zone = "+10:00";
    cfg.regular = false;
    const auto t = ingest_text("when,x\n03/08/2017 17:45,1\n04/08/2017 09:00,2\n", cfg);
    CHECK(t.index_zone() == "+10:00");
    CHECK(format_time(t.index_column()[0].as<TimePoint>()) == "2017-08-03 17:45");

    cfg.time_format["when"] = "hour";
    CHECK_THROWS_AS(ingest_text("when,x\n2017-08-03 17:45,1\n", cfg), parse_error);
    cfg.time_format["when"] = "fortnightly";
    CHECK_THROWS_AS(ingest_text("when,x\n2017-08-03,1\n", cfg), schema_error);
}

TEST_CASE("ingest errors", "[io][ingest]") {
    IngestConfig cfg;
    cfg.index = "t";
    try {
        (void)ingest_text("t,x\n2011-01-01,1\nlater,2\n", cfg);
        FAIL("expected parse_error");
    } catch (const parse_error& e) {
        CHECK(std::string(e.what()).find("row 2") != std::string::npos);
    }
    CHECK_THROWS_AS(ingest_text("t,x\n1,2,3\n", cfg), parse_error);
    CHECK_THROWS_AS(ingest_text("", cfg), parse_error);
    CHECK_THROWS_AS(ingest_text("t,x\n1,2\n", IngestConfig{}), precondition_error);

    cfg.key = {"t"};
    CHECK_THROWS_AS(ingest_text("t,x\n1,2\n", cfg), precondition_error);

    IngestConfig missing;
    missing.path = TEMPUS_TEST_DATA "/does-not-exist.csv";
    missing.index = "t";
    CHECK_THROWS_AS(ingest(missing), io_error);
}

TEST_CASE("header-only input is an empty table", "[io][ingest]") {
    IngestConfig cfg;
    cfg.path = TEMPUS_TEST_DATA "/header_only.csv";
    cfg.index = "t";
    cfg.key = {"id"};
    const auto t = ingest(cfg);
    CHECK(t.rows() == 0);
    CHECK(t.cols() == 3);
    CHECK(to_string(t.interval()) == "[?]");
}

TEST_CASE("summary header and preview", "[io][print]") {
    const auto t = ingest(tb_config());
    const auto text = render_summary(t);
    std::ifstream golden(TEMPUS_TEST_DATA "/tb_print.golden");
    std::stringstream expected;
    expected << golden.rdbuf();
    CHECK(text == expected.str());
    const auto ls = lines(text);
    REQUIRE(ls.size() == 10);
    CHECK(ls[0] == "# A tsibble: 12 x 5 [1Y]");
    CHECK(ls[1] == "# Key:       country, gender [6]");
    CHECK(ls[9] == "# ... with 7 more rows");

    const auto five = filter(t, where("count", CompareOp::lt, Cell(125))).table;
    REQUIRE(five.rows() == 5);
    const auto five_lines = lines(render_summary(five));
    CHECK(five_lines.size() == 9);
    CHECK(five_lines.back().starts_with("5 "));

    const auto unkeyed = render_summary(summarize(t, {{"total", "count", parse_aggregator("sum")}}));
    CHECK(lines(unkeyed)[0] == "# A tsibble: 2 x 2 [1Y]");
    CHECK_FALSE(lines(unkeyed)[1].starts_with("# Key"));
}

TEST_CASE("date-time summaries show the zone", "[io][print]") {
    IngestConfig cfg;
    cfg.path = TEMPUS_TEST_DATA "/flights10.csv";
    cfg.index = "sched_dep_datetime";
    cfg.key = {"flight_num"};
    cfg.regular = false;
    CHECK_THROWS_AS(ingest(cfg), construction_error);
    std::string csv = read_file(cfg.path);
    const auto cut = csv.find("NK630,2017-08-03 17:45:00,2017-08-03 21:00:00,140,194,NK,N601NK");
    csv.erase(cut, csv.find('\n', cut) + 1 - cut);
    const auto t = ingest_text(csv, cfg);
    const auto ls = lines(render_summary(t));
    CHECK(ls[0] == "# A tsibble: 9 x 22 [!] <UTC>");
    CHECK(ls[1] == "# Key:       flight_num [6]");
}

TEST_CASE("thousands separators", "[io][print]") {
    CHECK(with_commas(0) == "0");
    CHECK(with_commas(999) == "999");
    CHECK(with_commas(1000) == "1,000");
    CHECK(with_commas(22562) == "22,562");
    CHECK(with_commas(5548444) == "5,548,444");
}

TEST_CASE("duplicate report rendering", "[io][print]") {
    auto cfg = tb_config();
    cfg.key = {"country"};
    try {
        (void)ingest(cfg);
        FAIL("expected construction_error");
    } catch (const construction_error& e) {
        const Table rep = duplicate_report_table(e.report());
        CHECK(rep.column(0).name() == "row");
        CHECK(rep.rows() == 12);
        CHECK(rep.column("row")[0] == Cell(1));
    }
}
