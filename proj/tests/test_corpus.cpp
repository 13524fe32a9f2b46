#include <catch2/catch_amalgamated.hpp>

#include <filesystem>
#include <string>

#include "lucie/archive.hpp"
#include "lucie/corpus.hpp"
#include "lucie/pipeline.hpp"
#include "support/test_util.hpp"

using lucie::CorpusKind;

TEST_CASE("kind names round-trip") {
    for (auto kind : lucie::all_corpus_kinds()) {
        auto back = lucie::corpus_kind_from_name(lucie::corpus_kind_name(kind));
        REQUIRE(back.has_value());
        CHECK(*back == kind);
    }
    CHECK_FALSE(lucie::corpus_kind_from_name("no_such_kind"));
}

TEST_CASE("generation is byte-deterministic") {
    for (auto kind : lucie::all_corpus_kinds()) {
        for (std::uint32_t seed : {1u, 7u}) {
            auto [gt1, bytes1] = lucie::generate_corpus_bytes(kind, seed);
            auto [gt2, bytes2] = lucie::generate_corpus_bytes(kind, seed);
            INFO(lucie::corpus_kind_name(kind) << " seed " << seed);
            CHECK(bytes1 == bytes2);
            CHECK(gt1.zip_name == gt2.zip_name);
            CHECK(gt1.expected_tables == gt2.expected_tables);
        }
    }
}

TEST_CASE("different seeds differ") {
    auto [gt1, bytes1] = lucie::generate_corpus_bytes(CorpusKind::plain_tabular, 1);
    auto [gt2, bytes2] = lucie::generate_corpus_bytes(CorpusKind::plain_tabular, 2);
    CHECK(bytes1 != bytes2);
    CHECK(gt1.zip_name != gt2.zip_name);
}

TEST_CASE("ground truth shapes per kind") {
    auto [plain, pb] = lucie::generate_corpus_bytes(CorpusKind::plain_tabular, 3);
    CHECK(plain.expected_tables.size() == 2);
    CHECK(plain.expected_delimiter == lucie::Delimiter::comma);
    CHECK_FALSE(plain.expect_fallback);

    auto [txt, tb] = lucie::generate_corpus_bytes(CorpusKind::txt_tables, 3);
    REQUIRE(txt.expected_tables.size() == 1);
    CHECK(txt.expected_tables.begin()->first.ends_with(".txt"));

    auto [nested, nb] = lucie::generate_corpus_bytes(CorpusKind::nested_archive, 3);
    REQUIRE_FALSE(nested.expected_tables.empty());
    for (const auto& [key, shape] : nested.expected_tables)
        CHECK(key.find("!/") != std::string::npos);

    auto [folder, fb] = lucie::generate_corpus_bytes(CorpusKind::folder_columns, 3);
    REQUIRE(folder.expected_tables.count("directory"));
    REQUIRE(folder.expected_header);
    CHECK(folder.expected_header->front() == "entry");
    CHECK(folder.expected_header->size() == folder.expected_tables["directory"].second);

    auto [loose, lb] = lucie::generate_corpus_bytes(CorpusKind::extensionless, 3);
    REQUIRE(loose.expected_tables.size() == 1);
    CHECK(loose.expected_tables.begin()->first.find('.') == std::string::npos);

    auto [bin, bb] = lucie::generate_corpus_bytes(CorpusKind::binary_only, 3);
    CHECK(bin.expect_fallback);
    CHECK(bin.expected_tables.empty());
    CHECK_FALSE(bin.expected_paths.empty());

    auto [prose, qb] = lucie::generate_corpus_bytes(CorpusKind::prose_decoy, 3);
    CHECK(prose.expect_fallback);
}

TEST_CASE("every fixture imports to its ground truth") {
    for (auto kind : lucie::all_corpus_kinds()) {
        for (std::uint32_t seed = 1; seed <= 10; ++seed) {
            auto [gt, bytes] = lucie::generate_corpus_bytes(kind, seed);
            auto tree = lucie::extract_archive(bytes, lucie::ArchiveBudget{}, gt.zip_name);
            auto result = lucie::import_tree(tree, lucie::PipelineConfig{});
            auto mismatches = lucie::verify_against_ground_truth(gt, result);
            INFO(lucie::corpus_kind_name(kind) << " seed " << seed);
            for (const auto& m : mismatches) INFO("  mismatch: " << m);
            CHECK(mismatches.empty());
        }
    }
}

TEST_CASE("verification notices tampering") {
    auto [gt, bytes] = lucie::generate_corpus_bytes(CorpusKind::plain_tabular, 5);
    auto tree = lucie::extract_archive(bytes, lucie::ArchiveBudget{}, gt.zip_name);
    auto result = lucie::import_tree(tree, lucie::PipelineConfig{});
    REQUIRE(lucie::verify_against_ground_truth(gt, result).empty());

    SECTION("a dropped table is reported") {
        auto broken = result;
        broken.tables.erase(broken.tables.begin());
        CHECK_FALSE(lucie::verify_against_ground_truth(gt, broken).empty());
    }

    SECTION("a wrong shape is reported") {
        auto broken = result;
        broken.tables.begin()->second.rows.pop_back();
        CHECK_FALSE(lucie::verify_against_ground_truth(gt, broken).empty());
    }

    SECTION("an unexpected fallback is reported") {
        auto broken = result;
        broken.fallback = lucie::StructureDoc::object();
        CHECK_FALSE(lucie::verify_against_ground_truth(gt, broken).empty());
    }
}

TEST_CASE("fixtures are written to disk") {
    testutil::TempDir tmp;
    auto gt = lucie::generate_corpus(CorpusKind::txt_tables, 4, tmp.path());
    auto target = tmp.path() / gt.zip_name;
    REQUIRE(std::filesystem::exists(target));
    CHECK(gt.zip_name == "txt_tables_4.zip");

    auto bytes = testutil::read_file(target);
    auto [gt2, expected] = lucie::generate_corpus_bytes(CorpusKind::txt_tables, 4);
    CHECK(bytes == expected);
}
