#pragma once

#include <cctype>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "lucie/corpus.hpp"
#include "lucie/fetch.hpp"
#include "lucie/model.hpp"
#include "lucie/pipeline.hpp"
#include "lucie/sniffer.hpp"

namespace lucie {

inline double table_nan_fraction(const Table& t) {
    if (t.score) return t.score->nan_fraction;
    std::size_t cells = t.n_rows() * t.n_cols();
    if (cells == 0) return 0.0;
    std::size_t missing = 0;
    for (const auto& row : t.rows)
        for (const auto& cell : row)
            if (is_missing_cell(cell)) ++missing;
    return static_cast<double>(missing) / static_cast<double>(cells);
}

/// File name for a table's output: path separators become "__", anything
/// exotic becomes "_", and the output format's extension is appended.
inline std::string sanitize_table_filename(std::string_view origin, const std::string& format) {
    std::string out;
    for (std::size_t i = 0; i < origin.size(); ++i) {
        char c = origin[i];
        if (c == '/' || c == '\\') {
            out += "__";
        } else if (std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '-' ||
                   c == '_' || c == '!') {
            out += c;
        } else {
            out += '_';
        }
    }
    if (out.empty()) out = "table";
    return out + "." + format;
}

namespace detail {

inline std::string csv_quote(const std::string& cell) {
    bool needs_quotes = cell.find_first_of(",\"\n\r") != std::string::npos;
    if (!needs_quotes) return cell;
    std::string out = "\"";
    for (char c : cell) {
        if (c == '"') out += "\"\"";
        else out += c;
    }
    out += '"';
    return out;
}

inline std::vector<std::string> effective_header(const Table& t) {
    if (t.header) return *t.header;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < t.n_cols(); ++i) names.push_back("col_" + std::to_string(i));
    return names;
}

inline std::string fmt_fraction(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", x);
    return buf;
}

} // namespace detail

inline std::string table_to_csv(const Table& t) {
    std::string out;
    auto header = detail::effective_header(t);
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (c) out += ',';
        out += detail::csv_quote(header[c]);
    }
    out += '\n';
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out += ',';
            out += detail::csv_quote(row[c]);
        }
        out += '\n';
    }
    return out;
}

inline nlohmann::json table_to_json(const Table& t) {
    auto header = detail::effective_header(t);
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : t.rows) {
        nlohmann::json obj = nlohmann::json::object();
        for (std::size_t c = 0; c < row.size() && c < header.size(); ++c) obj[header[c]] = row[c];
        rows.push_back(std::move(obj));
    }
    return rows;
}

inline nlohmann::json make_manifest(int dataset_id, const ImportResult& result) {
    nlohmann::json tables = nlohmann::json::array();
    for (const auto& [name, table] : result.tables) {
        tables.push_back({
            {"name", name},
            {"rows", table.n_rows()},
            {"cols", table.n_cols()},
            {"nan_fraction", table_nan_fraction(table)},
            {"delimiter", table.delimiter ? nlohmann::json(delimiter_name(*table.delimiter))
                                          : nlohmann::json(nullptr)},
            {"origin_path", table.origin_path},
        });
    }
    return nlohmann::json{
        {"dataset_id", dataset_id},     {"source", source_name(result.source)},
        {"fallback", result.fallback.has_value()}, {"tables", std::move(tables)},
        {"warnings", result.warnings},
    };
}

namespace detail {

inline void write_text_file(const std::filesystem::path& path, std::string_view bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw std::runtime_error("short write on " + path.string());
}

} // namespace detail

/// Writes one file per table plus manifest.json (and fallback.json when the
/// fallback fired) into out_dir, and prints a summary.
inline void write_outputs(const ImportResult& result, const std::filesystem::path& out_dir,
                          const std::string& format, int dataset_id, std::ostream& out) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);

    out << "source: " << source_name(result.source) << "\n";
    std::set<std::string> used_names;
    for (const auto& [name, table] : result.tables) {
        std::string file_name = sanitize_table_filename(
            table.origin_path.empty() ? name : table.origin_path, format);
        int suffix = 2;
        while (!used_names.insert(file_name).second)
            file_name = std::to_string(suffix++) + "__" + file_name;

        if (format == "json")
            detail::write_text_file(out_dir / file_name, table_to_json(table).dump(2) + "\n");
        else
            detail::write_text_file(out_dir / file_name, table_to_csv(table));
        out << "table " << name << ": " << table.n_rows() << " rows x " << table.n_cols()
            << " cols";
        if (table.delimiter) out << " (" << delimiter_name(*table.delimiter) << ")";
        out << " -> " << file_name << "\n";
    }
    if (result.fallback) {
        detail::write_text_file(out_dir / "fallback.json", result.fallback->dump(2) + "\n");
        out << "fallback: structure document -> fallback.json\n";
    }
    detail::write_text_file(out_dir / "manifest.json",
                            make_manifest(dataset_id, result).dump(2) + "\n");
    for (const auto& w : result.warnings) out << "warning: " << w << "\n";
}

namespace detail {

inline int finish_command(const ImportResult& result, const std::filesystem::path& out_dir,
                          const std::string& format, int dataset_id, int min_rows, int min_cols,
                          std::ostream& out) {
    write_outputs(result, out_dir, format, dataset_id, out);
    ValidationReport report = validate_result(result, min_rows, min_cols);
    for (const auto& w : report.warnings) out << "validation: " << w << "\n";
    out << (report.pass ? "validation: pass" : "validation: fail") << "\n";
    return report.pass ? 0 : 2;
}

inline int run_sniff(const std::filesystem::path& file, std::ostream& out, std::ostream& err) {
    std::string bytes;
    try {
        bytes = ContentHandle::from_file(file).read();
    } catch (const std::exception& e) {
        err << "cannot read " << file.string() << ": " << e.what() << "\n";
        return 1;
    }
    if (is_binary(std::string_view(bytes).substr(0, 8192))) {
        err << "binary input\n";
        return 1;
    }
    auto text = decode_text(bytes);
    if (!text) {
        err << "binary input\n";
        return 1;
    }

    auto winner = sniff_text(*text, file.string());
    for (Delimiter d : {Delimiter::comma, Delimiter::semicolon, Delimiter::tab}) {
        RaggedTable parsed = read_ragged_delimited(*text, d);
        out << delimiter_name(d) << ":";
        if (parsed.rows.empty()) {
            out << " no rows\n";
            continue;
        }
        CandidateScore s = score_table(parsed);
        out << " nan_fraction=" << fmt_fraction(s.nan_fraction)
            << " regularity=" << fmt_fraction(s.regularity) << " n_cols=" << s.n_cols
            << " n_rows=" << s.n_rows << " perfect=" << (is_perfect(s) ? "yes" : "no");
        if (winner && winner->table.delimiter == d) out << "  <- winner";
        out << "\n";
    }
    if (!winner) out << "no delimiter produced multiple columns\n";
    return 0;
}

} // namespace detail

/// Entry point used by the binary and by tests. Streams are injectable so
/// tests can capture output.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    CLI::App app{"imports datasets from archives in nonstandard layouts"};
    app.require_subcommand(1);
    int exit_code = 0;

    // fetch
    auto* fetch_cmd = app.add_subcommand("fetch", "resolve a dataset id and import it");
    int fetch_id = 0;
    std::string fetch_out;
    std::string fetch_format = "csv";
    std::uint64_t fetch_max_bytes = FetchConfig{}.max_download_bytes;
    bool fetch_offline = false;
    int fetch_min_rows = 10, fetch_min_cols = 2;
    fetch_cmd->add_option("id", fetch_id, "dataset id")->required();
    fetch_cmd->add_option("--out", fetch_out, "output directory (default ./out/<id>)");
    fetch_cmd->add_option("--format", fetch_format, "table output format")
        ->check(CLI::IsMember({"csv", "json"}));
    fetch_cmd->add_option("--max-bytes", fetch_max_bytes, "download size limit");
    fetch_cmd->add_flag("--offline", fetch_offline, "use only the local cache");
    fetch_cmd->add_option("--min-rows", fetch_min_rows, "validation row threshold");
    fetch_cmd->add_option("--min-cols", fetch_min_cols, "validation column threshold");
    fetch_cmd->callback([&] {
        FetchConfig cfg = fetch_config_from_env();
        cfg.max_download_bytes = fetch_max_bytes;
        cfg.offline = fetch_offline;
        PipelineConfig pcfg;
        pcfg.min_rows = fetch_min_rows;
        pcfg.min_cols = fetch_min_cols;
        OverrideRegistry registry = OverrideRegistry::with_default_stubs();
        ImportResult result = fetch_dataset(fetch_id, cfg, registry, pcfg);
        std::filesystem::path out_dir =
            fetch_out.empty() ? std::filesystem::path("out") / std::to_string(fetch_id)
                              : std::filesystem::path(fetch_out);
        exit_code = detail::finish_command(result, out_dir, fetch_format, fetch_id,
                                           fetch_min_rows, fetch_min_cols, out);
    });

    // import
    auto* import_cmd = app.add_subcommand("import", "import a local archive or directory");
    std::string import_path;
    std::string import_out;
    std::string import_format = "csv";
    import_cmd->add_option("path", import_path, "archive file or directory")->required();
    import_cmd->add_option("--out", import_out, "output directory (default ./out/<name>)");
    import_cmd->add_option("--format", import_format, "table output format")
        ->check(CLI::IsMember({"csv", "json"}));
    import_cmd->callback([&] {
        namespace fs = std::filesystem;
        PipelineConfig pcfg;
        fs::path source(import_path);
        FileTree tree = fs::is_directory(source) ? scan_directory(source, pcfg.budget)
                                                 : extract_archive(source, pcfg.budget);
        ImportResult result = import_tree(tree, pcfg);
        std::string stem = source.stem().string();
        fs::path out_dir = import_out.empty()
                               ? fs::path("out") / (stem.empty() ? "import" : stem)
                               : fs::path(import_out);
        exit_code = detail::finish_command(result, out_dir, import_format, 0, pcfg.min_rows,
                                           pcfg.min_cols, out);
    });

    // sniff
    auto* sniff_cmd = app.add_subcommand("sniff", "score one file under each delimiter");
    std::string sniff_file;
    sniff_cmd->add_option("file", sniff_file, "file to inspect")->required();
    sniff_cmd->callback([&] { exit_code = detail::run_sniff(sniff_file, out, err); });

    // corpus generate
    auto* corpus_cmd = app.add_subcommand("corpus", "fixture archive generator");
    corpus_cmd->require_subcommand(1);
    auto* gen_cmd = corpus_cmd->add_subcommand("generate", "write one fixture archive");
    std::string gen_kind;
    std::uint32_t gen_seed = 0;
    std::string gen_dir;
    std::vector<std::string> kind_names;
    for (CorpusKind k : all_corpus_kinds()) kind_names.push_back(corpus_kind_name(k));
    gen_cmd->add_option("kind", gen_kind, "fixture pattern")
        ->required()
        ->check(CLI::IsMember(kind_names));
    gen_cmd->add_option("seed", gen_seed, "generation seed")->required();
    gen_cmd->add_option("dir", gen_dir, "output directory")->required();
    gen_cmd->callback([&] {
        auto kind = corpus_kind_from_name(gen_kind);
        GroundTruth gt = generate_corpus(*kind, gen_seed, gen_dir);
        out << "wrote " << (std::filesystem::path(gen_dir) / gt.zip_name).string() << "\n";
        for (const auto& [name, shape] : gt.expected_tables)
            out << "expect table " << name << ": " << shape.first << " rows x " << shape.second
                << " cols\n";
        if (gt.expect_fallback) out << "expect fallback structure\n";
    });

    std::vector<const char*> argv;
    argv.push_back("lucie");
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 1;
    } catch (const Error& e) {
        err << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return exit_code;
}

inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run_cli(std::move(args), out, err);
}

} // namespace lucie
