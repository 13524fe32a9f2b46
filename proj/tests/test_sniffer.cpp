#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <random>
#include <string>
#include <vector>

#include "lucie/sniffer.hpp"

using lucie::CandidateScore;
using lucie::Delimiter;
using lucie::RaggedTable;

namespace {

RaggedTable rt(std::vector<std::vector<std::string>> rows) {
    RaggedTable t;
    t.rows = std::move(rows);
    return t;
}

// Independent scorer: same contract, different mechanics (ordered map for
// the modal scan, per-cell recount for missing values).
CandidateScore ref_score(const RaggedTable& t) {
    std::size_t max_width = 0;
    for (const auto& row : t.rows)
        if (row.size() > max_width) max_width = row.size();

    std::size_t missing = 0;
    for (const auto& row : t.rows) {
        missing += max_width - row.size();
        for (const auto& cell : row) {
            std::string trimmed;
            for (char c : cell)
                trimmed += c;
            while (!trimmed.empty() && (trimmed.front() == ' ' || trimmed.front() == '\t'))
                trimmed.erase(trimmed.begin());
            while (!trimmed.empty() && (trimmed.back() == ' ' || trimmed.back() == '\t'))
                trimmed.pop_back();
            std::string lower;
            for (char c : trimmed)
                lower += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
            if (lower.empty() || lower == "?" || lower == "na" || lower == "nan" ||
                lower == "null")
                ++missing;
        }
    }

    std::map<std::size_t, std::size_t> counts;
    for (const auto& row : t.rows) ++counts[row.size()];
    std::size_t modal_width = 0, modal_count = 0;
    for (const auto& [w, c] : counts)
        if (c >= modal_count) { // ascending keys: larger width survives ties
            modal_width = w;
            modal_count = c;
        }

    CandidateScore s;
    s.n_rows = t.rows.size();
    s.n_cols = modal_width;
    s.regularity = double(modal_count) / double(t.rows.size());
    s.nan_fraction = max_width == 0 ? 0.0 : double(missing) / double(t.rows.size() * max_width);
    return s;
}

} // namespace

TEST_CASE("binary detection") {
    CHECK_FALSE(lucie::is_binary(""));
    CHECK_FALSE(lucie::is_binary("a,b\n1,2\n"));
    CHECK_FALSE(lucie::is_binary("caf\xC3\xA9")); // valid UTF-8 multibyte
    CHECK(lucie::is_binary(std::string("has a \x00 byte", 13)));
    CHECK(lucie::is_binary("\x01\x02\x03\x04"));
    // 1 suspicious byte in 5 = 20%, not strictly above the threshold
    CHECK_FALSE(lucie::is_binary("abcd\x01"));
    CHECK(lucie::is_binary("abc\x01\x02"));

    std::mt19937 rng(12345);
    std::string noise;
    for (int i = 0; i < 8192; ++i) noise += static_cast<char>(rng() % 256);
    CHECK(lucie::is_binary(noise)); // uniform bytes are ~36% suspicious
}

TEST_CASE("text decoding") {
    REQUIRE(lucie::decode_text("plain ascii"));
    CHECK(*lucie::decode_text("plain ascii") == "plain ascii");
    REQUIRE(lucie::decode_text("caf\xC3\xA9"));
    CHECK(*lucie::decode_text("caf\xC3\xA9") == "caf\xC3\xA9");

    auto lossy = lucie::decode_text("ok \xFF mostly fine text here");
    REQUIRE(lossy);
    CHECK(lossy->find("\xEF\xBF\xBD") != std::string::npos); // replacement char

    CHECK_FALSE(lucie::decode_text("\xFF\xFE\xFD\xFC" "ab")); // >20% replacements
}

TEST_CASE("ragged parsing") {
    auto t = lucie::read_ragged_delimited("a,b\n1,2\n3,4", Delimiter::comma);
    CHECK(t.rows == std::vector<std::vector<std::string>>{{"a", "b"}, {"1", "2"}, {"3", "4"}});

    SECTION("raggedness is preserved") {
        auto r = lucie::read_ragged_delimited("1,2,3\n4,5\n6", Delimiter::comma);
        REQUIRE(r.rows.size() == 3);
        CHECK(r.rows[0].size() == 3);
        CHECK(r.rows[1].size() == 2);
        CHECK(r.rows[2].size() == 1);
    }

    SECTION("quoted cells swallow the delimiter") {
        auto q = lucie::read_ragged_delimited("x,\"y,z\"\n1,2", Delimiter::comma);
        CHECK(q.rows == std::vector<std::vector<std::string>>{{"x", "y,z"}, {"1", "2"}});
    }

    SECTION("cells are trimmed") {
        auto s = lucie::read_ragged_delimited(" a , b \n", Delimiter::comma);
        CHECK(s.rows == std::vector<std::vector<std::string>>{{"a", "b"}});
    }

    SECTION("CRLF and trailing newline") {
        auto c = lucie::read_ragged_delimited("a,b\r\n1,2\r\n", Delimiter::comma);
        CHECK(c.rows == std::vector<std::vector<std::string>>{{"a", "b"}, {"1", "2"}});
    }

    SECTION("other delimiters") {
        CHECK(lucie::read_ragged_delimited("a;b", Delimiter::semicolon).rows ==
              std::vector<std::vector<std::string>>{{"a", "b"}});
        CHECK(lucie::read_ragged_delimited("a\tb", Delimiter::tab).rows ==
              std::vector<std::vector<std::string>>{{"a", "b"}});
        // a comma parse of semicolon text is a single wide cell per row
        CHECK(lucie::read_ragged_delimited("a;b", Delimiter::comma).rows ==
              std::vector<std::vector<std::string>>{{"a;b"}});
    }

    SECTION("empty input has no rows") {
        CHECK(lucie::read_ragged_delimited("", Delimiter::comma).rows.empty());
    }
}

TEST_CASE("score examples") {
    auto clean = lucie::score_table(rt({{"1", "2"}, {"3", "4"}}));
    CHECK(clean.nan_fraction == 0.0);
    CHECK(clean.regularity == 1.0);
    CHECK(clean.n_cols == 2);
    CHECK(clean.n_rows == 2);

    // one absent cell out of four
    auto ragged = lucie::score_table(rt({{"a", "b"}, {"1"}}));
    CHECK(ragged.nan_fraction == 0.25);
    CHECK(ragged.regularity == 0.5);
    CHECK(ragged.n_cols == 2);
    CHECK(ragged.n_rows == 2);

    // "?", "na" and the empty cell all count as missing
    auto holes = lucie::score_table(rt({{"a", "?"}, {"na", ""}}));
    CHECK(holes.nan_fraction == 0.75);
    CHECK(holes.regularity == 1.0);

    // widths 1 and 2 appear once each: the larger width wins the tie
    auto tie = lucie::score_table(rt({{"a"}, {"b", "c"}}));
    CHECK(tie.n_cols == 2);
    CHECK(tie.regularity == 0.5);

    CHECK_THROWS_AS(lucie::score_table(rt({})), lucie::EmptyInput);

    // all-empty rows: max width 0 defines nan_fraction as 0
    auto degenerate = lucie::score_table(rt({{}, {}}));
    CHECK(degenerate.nan_fraction == 0.0);
    CHECK(degenerate.n_cols == 0);
}

TEST_CASE("score matches an independent recount") {
    const std::vector<std::string> alphabet = {"a", "", "?", "1"};
    std::mt19937 rng(777);
    for (int trial = 0; trial < 3000; ++trial) {
        RaggedTable t;
        std::size_t rows = 1 + rng() % 4;
        for (std::size_t r = 0; r < rows; ++r) {
            std::vector<std::string> row;
            std::size_t width = 1 + rng() % 4;
            for (std::size_t c = 0; c < width; ++c) row.push_back(alphabet[rng() % 4]);
            t.rows.push_back(std::move(row));
        }
        auto got = lucie::score_table(t);
        auto want = ref_score(t);
        INFO("trial " << trial);
        CHECK(got == want);
    }
}

TEST_CASE("score comparison order") {
    CandidateScore base{0.0, 1.0, 3, 10};

    CandidateScore worse_nan = base;
    worse_nan.nan_fraction = 0.1;
    CHECK(lucie::compare_scores(base, worse_nan) == std::strong_ordering::less);

    CandidateScore worse_reg = base;
    worse_reg.regularity = 0.9;
    CHECK(lucie::compare_scores(base, worse_reg) == std::strong_ordering::less);

    CandidateScore fewer_cols = base;
    fewer_cols.n_cols = 2;
    CHECK(lucie::compare_scores(base, fewer_cols) == std::strong_ordering::less);

    CandidateScore fewer_rows = base;
    fewer_rows.n_rows = 5;
    CHECK(lucie::compare_scores(base, fewer_rows) == std::strong_ordering::less);

    CHECK(lucie::compare_scores(base, base) == std::strong_ordering::equal);

    // nan_fraction dominates everything else
    CandidateScore big_but_holey{0.01, 1.0, 50, 5000};
    CandidateScore tiny_but_clean{0.0, 0.5, 2, 2};
    CHECK(lucie::compare_scores(tiny_but_clean, big_but_holey) == std::strong_ordering::less);

    SECTION("the order is total and transitive") {
        std::mt19937 rng(4242);
        auto random_score = [&] {
            static const double nans[] = {0.0, 0.25, 0.5};
            static const double regs[] = {0.5, 1.0};
            return CandidateScore{nans[rng() % 3], regs[rng() % 2], 2 + rng() % 2,
                                  2 + rng() % 2};
        };
        for (int i = 0; i < 1000; ++i) {
            auto a = random_score(), b = random_score(), c = random_score();
            auto ab = lucie::compare_scores(a, b);
            auto ba = lucie::compare_scores(b, a);
            if (ab == std::strong_ordering::less) CHECK(ba == std::strong_ordering::greater);
            if (ab == std::strong_ordering::equal) {
                CHECK(ba == std::strong_ordering::equal);
                CHECK(a == b);
            }
            if (ab != std::strong_ordering::greater &&
                lucie::compare_scores(b, c) != std::strong_ordering::greater)
                CHECK(lucie::compare_scores(a, c) != std::strong_ordering::greater);
        }
    }
}

TEST_CASE("perfection") {
    CHECK(lucie::is_perfect(CandidateScore{0.0, 1.0, 2, 2}));
    CHECK_FALSE(lucie::is_perfect(CandidateScore{0.0, 1.0, 1, 2}));  // single column
    CHECK_FALSE(lucie::is_perfect(CandidateScore{0.0, 1.0, 2, 1}));  // lone row
    CHECK_FALSE(lucie::is_perfect(CandidateScore{0.0, 0.99, 2, 2})); // irregular
    CHECK_FALSE(lucie::is_perfect(CandidateScore{0.01, 1.0, 2, 2})); // holes
}

TEST_CASE("sniffing picks the best delimiter") {
    auto comma = lucie::sniff_text("a,b\n1,2\n", "f.txt");
    REQUIRE(comma);
    CHECK(comma->table.delimiter == Delimiter::comma);
    CHECK(comma->table.source_path == "f.txt");
    CHECK(comma->score.n_cols == 2);

    auto semi = lucie::sniff_text("x;y;z\n1;2;3\n4;5;6\n", "f");
    REQUIRE(semi);
    CHECK(semi->table.delimiter == Delimiter::semicolon);
    CHECK(semi->score.n_cols == 3);

    auto tab = lucie::sniff_text("p\tq\n7\t8\n", "f");
    REQUIRE(tab);
    CHECK(tab->table.delimiter == Delimiter::tab);

    SECTION("prose yields nothing") {
        CHECK_FALSE(lucie::sniff_text("once upon a time\nthere was a dataset\n", "f"));
        CHECK_FALSE(lucie::sniff_text("", "f"));
        CHECK_FALSE(lucie::sniff_text("single\nwords\nper\nline\n", "f"));
    }

    SECTION("exact ties resolve comma first") {
        // both delimiters produce 2x2 with identical scores
        auto tied = lucie::sniff_text("a,b;c\nd,e;f\n", "f");
        REQUIRE(tied);
        CHECK(tied->table.delimiter == Delimiter::comma);
    }

    SECTION("mixed content goes to the more regular parse") {
        // commas appear once, semicolons consistently
        auto r = lucie::sniff_text("a;b\nc;d\ne,f;g\n", "f");
        REQUIRE(r);
        CHECK(r->table.delimiter == Delimiter::semicolon);
    }
}

TEST_CASE("header detection") {
    CHECK(lucie::detect_header(rt({{"name", "age"}, {"bob", "3"}})));
    CHECK_FALSE(lucie::detect_header(rt({{"1", "2"}, {"3", "4"}})));
    CHECK_FALSE(lucie::detect_header(rt({{"a", "b"}, {"c", "d"}}))); // nothing numeric below
    CHECK_FALSE(lucie::detect_header(rt({{"name", "age"}})));        // single row
    CHECK_FALSE(lucie::detect_header(rt({{"name", "3"}, {"bob", "4"}}))); // numeric in row 0
    CHECK(lucie::detect_header(rt({{"sepal", "petal"}, {"x", "y"}, {"1.5", "2"}})));
}

TEST_CASE("finalization") {
    SECTION("header row is lifted") {
        auto t = lucie::finalize_table(lucie::read_ragged_delimited("name,age\nbob,3\n", Delimiter::comma));
        REQUIRE(t.header);
        CHECK(*t.header == std::vector<std::string>{"name", "age"});
        REQUIRE(t.rows.size() == 1);
        CHECK(t.rows[0] == std::vector<std::string>{"bob", "3"});
        CHECK(t.n_rows() == 1);
        CHECK(t.n_cols() == 2);
    }

    SECTION("synthetic header otherwise") {
        auto t = lucie::finalize_table(rt({{"1", "2"}, {"3", "4"}}));
        REQUIRE(t.header);
        CHECK(*t.header == std::vector<std::string>{"col_0", "col_1"});
        CHECK(t.rows.size() == 2);
    }

    SECTION("short rows are padded with empty cells") {
        auto t = lucie::finalize_table(rt({{"5", "6"}, {"1"}}));
        REQUIRE(t.rows.size() == 2);
        CHECK(t.rows[1] == std::vector<std::string>{"1", ""});
    }

    SECTION("a detected header leaves only the body rows") {
        auto t = lucie::finalize_table(rt({{"a", "b"}, {"1"}}));
        REQUIRE(t.header);
        CHECK(*t.header == std::vector<std::string>{"a", "b"});
        REQUIRE(t.rows.size() == 1);
        CHECK(t.rows[0] == std::vector<std::string>{"1", ""});
    }

    SECTION("header shorter than the widest row is padded too") {
        auto t = lucie::finalize_table(rt({{"name", "age"}, {"bob", "3", "extra"}}));
        REQUIRE(t.header);
        CHECK(t.header->size() == 3);
        CHECK((*t.header)[2] == "");
    }

    CHECK_THROWS_AS(lucie::finalize_table(rt({})), lucie::EmptyInput);
}

TEST_CASE("serialization round trip") {
    const std::vector<std::string> pool = {"alpha", "bravo", "42", "3.5", "x9", "delta",
                                           "7",     "oak",   "fern"};
    std::mt19937 rng(20260817);
    const Delimiter delims[] = {Delimiter::comma, Delimiter::semicolon, Delimiter::tab};

    int recovered = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::size_t cols = 2 + rng() % 7;  // 2..8
        std::size_t rows = 5 + rng() % 96; // 5..100
        Delimiter d = delims[rng() % 3];
        char dc = lucie::delimiter_char(d);

        std::string text;
        for (std::size_t r = 0; r < rows; ++r) {
            for (std::size_t c = 0; c < cols; ++c) {
                if (c) text += dc;
                text += pool[rng() % pool.size()];
            }
            text += '\n';
        }

        auto sniffed = lucie::sniff_text(text, "t");
        REQUIRE(sniffed);
        if (sniffed->table.delimiter == d) ++recovered;
        CHECK(sniffed->score.nan_fraction == 0.0);
        CHECK(sniffed->score.regularity == 1.0);
        CHECK(sniffed->score.n_cols == cols);
        CHECK(sniffed->score.n_rows == rows);
    }
    CHECK(recovered == 200);
}

TEST_CASE("raggedness robustness") {
    const std::vector<std::string> pool = {"alpha", "bravo", "42", "oak", "fern", "7"};
    std::mt19937 rng(31337);
    const Delimiter delims[] = {Delimiter::comma, Delimiter::semicolon, Delimiter::tab};

    int recovered = 0;
    const int trials = 200;
    for (int trial = 0; trial < trials; ++trial) {
        std::size_t cols = 3 + rng() % 6;   // 3..8
        std::size_t rows = 10 + rng() % 91; // 10..100
        Delimiter d = delims[rng() % 3];
        char dc = lucie::delimiter_char(d);

        std::size_t to_truncate = (rows * (rng() % 11)) / 100; // up to 10% of rows
        std::string text;
        for (std::size_t r = 0; r < rows; ++r) {
            std::size_t width = cols;
            if (r > 0 && to_truncate > 0 && rng() % rows < to_truncate)
                width = 1 + rng() % (cols - 1); // truncated row keeps >= 1 cell
            for (std::size_t c = 0; c < width; ++c) {
                if (c) text += dc;
                text += pool[rng() % pool.size()];
            }
            text += '\n';
        }

        auto sniffed = lucie::sniff_text(text, "t");
        if (sniffed && sniffed->table.delimiter == d) ++recovered;
    }
    CHECK(recovered >= trials * 95 / 100);
}
