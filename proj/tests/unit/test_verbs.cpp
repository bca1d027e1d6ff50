#include <catch_amalgamated.hpp>

#include <map>
#include <random>
#include <set>

#include "tempus/tempus.hpp"

using namespace tempus;
using namespace tempus::expr;

namespace {

TemporalTable tb() {
    IngestConfig cfg;
    cfg.path = TEMPUS_TEST_DATA "/tb.csv";
    cfg.index = "year";
    cfg.key = {"country", "gender"};
    return ingest(cfg);
}

std::int64_t count_at(const Table& t, std::size_t r) { return t.column("count")[r].as<std::int64_t>(); }

} // namespace

TEST_CASE("filter keeps matching rows in order", "[verbs][filter]") {
    const auto t = tb();
    const auto female = filter(t, where("gender", CompareOp::eq, Cell("Female"))).table;
    CHECK(female.rows() == 6);
    CHECK(count_keys(female) == 3);
    CHECK_FALSE(check_invariants(female).has_value());

    const auto all = filter(t, Predicate([](const RowView&) { return true; })).table;
    CHECK(all.data() == t.data());
    const auto none = filter(t, Predicate([](const RowView&) { return false; })).table;
    CHECK(none.rows() == 0);
    CHECK(to_string(none.interval()) == "[?]");

    CHECK_THROWS_AS(filter(t, where("nope", CompareOp::eq, Cell(1))), schema_error);
}

TEST_CASE("filter composes as conjunction", "[verbs][filter][property]") {
    const auto t = tb();
    std::mt19937_64 rng(2);
    for (int i = 0; i < 100; ++i) {
        const auto a = Cell(std::int64_t(rng() % 2500));
        const auto b = Cell(std::int64_t(rng() % 2500));
        const auto p = where("count", CompareOp::ge, a);
        const auto q = where("count", CompareOp::lt, b);
        const auto twice = filter(filter(t, p).table, q).table;
        const auto once = filter(t, p && q).table;
        REQUIRE(twice.data() == once.data());
        REQUIRE(twice.interval() == once.interval());
    }
}

TEST_CASE("filtering can coarsen the interval", "[verbs][filter]") {
    IngestConfig cfg;
    cfg.index = "m";
    std::string csv = "m,x\n";
    for (int y = 2010; y <= 2012; ++y)
        for (int m = 1; m <= 12; ++m)
            csv += std::to_string(y) + "-" + (m < 10 ? "0" : "") + std::to_string(m) + ",1\n";
    const auto t = ingest_text(csv, cfg);
    CHECK(to_string(t.interval()) == "[1M]");
    const auto january = filter(t, Predicate([](const RowView& r) {
                                    return format_time(r["m"].as<TimePoint>()).ends_with("-01");
                                }, {"m"}))
                             .table;
    CHECK(january.rows() == 3);
    CHECK(to_string(january.interval()) == "[12M]");
}

TEST_CASE("time-window shorthand", "[verbs][filter_index]") {
    const auto t = tb();
    CHECK(filter_index(t, "2011").table.rows() == 6);
    CHECK(filter_index(t, "~ 2012").table.rows() == 12);
    CHECK(filter_index(t, "2013 ~").table.rows() == 0);
    CHECK(filter_index(t, "2012 ~ 2012").table.rows() == 6);
    CHECK_THROWS_AS(filter_index(t, "2011-06"), precondition_error);
    CHECK_THROWS_AS(filter_index(t, "~"), parse_error);

    IngestConfig cfg;
    cfg.index = "d";
    std::string csv = "d,x\n";
    for (int m = 1; m <= 4; ++m)
        for (int d = 1; d <= 28; d += 9)
            csv += "2013-0" + std::to_string(m) + "-" + (d < 10 ? "0" : "") + std::to_string(d) + ",1\n";
    const auto daily = ingest_text(csv, cfg);
    CHECK(filter_index(daily, "2013-01 ~ 2013-03").table.rows() == 12);
    CHECK(filter_index(daily, "2013 Q2").table.rows() == 4);
    CHECK(filter_index(daily, "2013-02-10 ~ 2013-02-27").table.rows() == 2);
}

TEST_CASE("arrange warns when leaving canonical order", "[verbs][arrange]") {
    const auto t = tb();
    const auto by_count = arrange(t, {{"count", true}});
    CHECK(by_count.warnings.size() == 1);
    CHECK(by_count.table.order_dirty());
    CHECK(count_at(by_count.table.data(), 0) == 2489);

    const auto canonical = arrange(t, {{"country"}, {"gender"}, {"year"}});
    CHECK(canonical.warnings.empty());
    CHECK_FALSE(canonical.table.order_dirty());

    const auto empty = filter(t, Predicate([](const RowView&) { return false; })).table;
    CHECK(arrange(empty, {{"count", true}}).warnings.empty());

    // Order-sensitive verbs re-sort first.
    CHECK(count_gaps(by_count.table).empty());
}

TEST_CASE("select keeps the index and the key identity", "[verbs][select]") {
    const auto t = tb();
    const auto four = select(t, {"country", "gender", "year", "count"});
    CHECK(four.table.cols() == 4);
    CHECK(four.table.rows() == 12);
    CHECK(four.warnings.empty());

    const auto implicit = select(t, {"country", "gender", "count"});
    CHECK(implicit.table.cols() == 4);
    CHECK(implicit.warnings.size() == 1);

    try {
        (void)select(t, {"year", "count"});
        FAIL("expected validity_error");
    } catch (const validity_error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("rows 1 and 2") != std::string::npos);
    }
    try {
        (void)select(t, {"count"});
        FAIL("expected validity_error");
    } catch (const validity_error& e) {
        CHECK(std::string(e.what()).find("removes the index") != std::string::npos);
    }

    const auto reduced = select(filter(t, where("gender", CompareOp::eq, Cell("Male"))).table,
                                {"country", "year", "count"});
    CHECK(reduced.table.key() == std::vector<std::string>{"country"});
}

TEST_CASE("mutate and transmute", "[verbs][mutate]") {
    const auto t = tb();
    const auto big = mutate(t, "big", cmp(col("count"), CompareOp::gt, lit(Cell(150)))).table;
    CHECK(big.column("big").kind() == CellKind::boolean);
    CHECK(big.column("big")[0] == Cell(false));
    CHECK(big.column("big")[2] == Cell(true));

    const auto same = mutate(t, "count", col("count")).table;
    CHECK(same.data() == t.data());

    const auto doubled = mutate(t, "count", arith(col("count"), '*', lit(Cell(2)))).table;
    CHECK(count_at(doubled.data(), 0) == 240);

    CHECK_THROWS_AS(mutate(t, "year", lit(Cell(make_time(Granularity::year, 41)))), construction_error);

    const auto shifted = mutate(t, "year", Expression([](const RowView& r) {
                                    auto tp = r["year"].as<TimePoint>();
                                    tp.ticks += 10;
                                    return Cell(tp);
                                }, {"year"}))
                             .table;
    CHECK(format_time(shifted.index_column()[0].as<TimePoint>()) == "2021");

    const auto only = transmute(t, {{"half", arith(col("count"), '/', lit(Cell(2)))}}).table;
    CHECK(only.data().names() == std::vector<std::string>{"country", "gender", "year", "half"});
    CHECK(only.column("half")[0] == Cell(60.0));
}

TEST_CASE("summarize over groups and derived indexes", "[verbs][summarize]") {
    const auto t = tb();
    const auto by_country = summarize(group_by(t, {"country"}), {{"total", "count", parse_aggregator("sum")}});
    CHECK(by_country.rows() == 6);
    CHECK(by_country.key() == std::vector<std::string>{"country"});
    CHECK(by_country.column("country")[0] == Cell("Australia"));
    CHECK(by_country.column("total")[0] == Cell(std::int64_t(296)));

    const auto overall = summarize(t, {{"total", "count", parse_aggregator("sum")}});
    CHECK(overall.rows() == 2);
    CHECK(overall.key().empty());
    CHECK(overall.column("total")[0] == Cell(std::int64_t(4038)));
    CHECK(to_string(overall.interval()) == "[1Y]");

    CHECK_THROWS_AS(summarize(t, {{"x", "nope", parse_aggregator("sum")}}), schema_error);
    CHECK(count_keys(group_by_key(t)) == 6);

    const auto annual = summarize(index_by(t, Granularity::year), {{"m", "count", parse_aggregator("mean")}});
    CHECK(annual.rows() == 2);
}

TEST_CASE("index_by collapses to coarser periods", "[verbs][index_by]") {
    IngestConfig cfg;
    cfg.index = "d";
    const auto daily = ingest_text("d,x\n2011-12-30,1\n2011-12-31,2\n2012-01-01,3\n2012-02-10,4\n", cfg);
    const auto yearly = summarize(index_by(daily, Granularity::year, "y"), {{"x", "x", parse_aggregator("sum")}});
    CHECK(to_csv(yearly.data()) == "y,x\n2011,3\n2012,7\n");
    const auto monthly = summarize(index_by(daily, Granularity::month), {{"n", "x", parse_aggregator("count")}});
    CHECK(to_csv(monthly.data()) == "d,n\n2011-12,2\n2012-01,1\n2012-02,1\n");
    const auto same = summarize(index_by(daily, Granularity::day), {{"x", "x", parse_aggregator("sum")}});
    CHECK(same.rows() == daily.rows());

    CHECK_THROWS_AS(index_by(daily, Granularity::hour), precondition_error);

    const auto reversed = [](const TimePoint& tp) { return make_time(Granularity::day, -tp.ticks); };
    CHECK_THROWS_AS(index_by(daily, "r", reversed), precondition_error);
    const auto fortnight = [](const TimePoint& tp) {
        return make_time(Granularity::ordinal, detail::floor_div(tp.ticks, 14));
    };
    const auto two_weeks = summarize(index_by(daily, "fortnight", fortnight), {{"x", "x", parse_aggregator("sum")}});
    CHECK(two_weeks.index() == "fortnight");
}

TEST_CASE("summarize row count equals distinct group count", "[verbs][summarize][property]") {
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 100; ++trial) {
        Column k("k"), g("g"), d("d"), v("v");
        std::set<std::tuple<std::string, std::int64_t>> distinct;
        for (int i = 0; i < 40; ++i) {
            const std::string key(1, char('a' + i % 4));
            const std::int64_t day = i / 4 * 3 + std::int64_t(rng() % 3);
            k.push_back(Cell(key));
            g.push_back(Cell(std::string(1, char('x' + rng() % 2))));
            d.push_back(Cell(make_time(Granularity::day, day)));
            v.push_back(Cell(std::int64_t(rng() % 100)));
        }
        const auto t = build(Table({k, g, d, v}), "d", {"k"});
        const auto s = summarize(index_by(group_by(t, {"g"}), Granularity::month), {{"s", "v", parse_aggregator("sum")}});
        for (std::size_t r = 0; r < t.rows(); ++r)
            distinct.insert({t.column("g")[r].as<std::string>(),
                             floor_to(t.column("d")[r].as<TimePoint>(), Granularity::month).ticks});
        REQUIRE(s.rows() == distinct.size());
        REQUIRE_FALSE(check_invariants(s).has_value());
    }
}

TEST_CASE("spread and gather", "[verbs][reshape]") {
    const auto t = tb();
    const auto wide = spread(t, "gender", "count").table;
    CHECK(wide.rows() == 6);
    CHECK(wide.data().names() == std::vector<std::string>{"country", "continent", "year", "Female", "Male"});
    CHECK(wide.column("Female")[0] == Cell(120));
    CHECK(wide.column("Male")[0] == Cell(176));
    CHECK(wide.key() == std::vector<std::string>{"country"});

    const auto back = gather(wide, {"Female", "Male"}, "gender", "count").table;
    const auto reordered = select(back, t.data().names()).table;
    CHECK(reordered.data() == t.data());

    const auto one = gather(t, {"continent"}, "what", "value").table;
    CHECK(one.rows() == 12);
    CHECK(one.key().back() == "what");

    CHECK_THROWS_AS(select(t, {"continent", "gender", "year", "count"}), validity_error);
    // Spreading continent leaves count in the row identity, so the reduced
    // key (country) repeats within a year.
    CHECK_THROWS_AS(spread(t, "gender", "continent"), validity_error);
    CHECK_THROWS_AS(spread(t, "gender", "year"), schema_error);
    CHECK_THROWS_AS(spread(t, "gender", "country"), schema_error);
}

TEST_CASE("joins", "[verbs][join]") {
    IngestConfig cfg;
    cfg.index = "date";
    const auto demand = ingest_text("date,kwh\n2020-01-01,10\n2020-01-02,12\n2020-01-03,9\n", cfg);
    const Table weather = read_table("date,temp\n2020-01-01,31.5\n2020-01-02,29\n", cfg);

    const auto left = join(demand, weather, JoinKind::left, {{"date", "date"}}).table;
    CHECK(left.data().names() == std::vector<std::string>{"date", "kwh", "temp"});
    CHECK(left.column("temp")[0] == Cell(31.5));
    CHECK(left.column("temp")[2].is_missing());

    CHECK(join(demand, weather, JoinKind::inner, {{"date", "date"}}).table.rows() == 2);
    CHECK(join(demand, weather, JoinKind::anti, {{"date", "date"}}).table.rows() == 1);
    CHECK(join(demand, demand.data(), JoinKind::semi, {{"date", "date"}}).table.data() == demand.data());

    const Table fan = read_table("date,temp\n2020-01-01,31.5\n2020-01-01,30\n", cfg);
    CHECK_THROWS_AS(join(demand, fan, JoinKind::left, {{"date", "date"}}), validity_error);

    const Table clash = read_table("date,kwh\n2020-01-01,1\n", cfg);
    CHECK(join(demand, clash, JoinKind::left, {{"date", "date"}}).table.data().has("kwh.y"));
}
