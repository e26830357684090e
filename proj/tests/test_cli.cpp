// End-to-end tests driving the installed binary through a shell, the way a
// user would. Fixtures live in per-test temp directories.

#include <catch2/catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <string>
#include <sys/wait.h>
#include <vector>

#include "epirt/epirt.hpp"

namespace fs = std::filesystem;
using namespace epirt;

namespace {

fs::path fresh_dir(const std::string& name) {
    auto dir = fs::temp_directory_path() / "epirt_cli_tests" / name;
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

int run(const std::string& command) {
    int status = std::system(command.c_str());
    if (WIFEXITED(status)) return WEXITSTATUS(status);
    return -1;
}

std::string bin() { return std::string("\"") + EPIRT_BIN_PATH + "\""; }

std::string quoted(const fs::path& p) { return "\"" + p.string() + "\""; }

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in), {});
}

std::size_t file_count(const fs::path& dir) {
    std::size_t n = 0;
    for ([[maybe_unused]] const auto& entry : fs::directory_iterator(dir)) ++n;
    return n;
}

// Writes date,state,newCases rows for the given states over `days` days,
// counts supplied by `count(state_index, day_index)`.
template <class CountFn>
fs::path write_fixture(const fs::path& dir, const std::vector<std::string>& states, int days,
                       CountFn count, Date start = make_date(2020, 5, 20)) {
    auto path = dir / "cases.csv";
    std::ofstream out(path);
    out << "date,state,newCases\n";
    for (int d = 0; d < days; ++d) {
        for (std::size_t s = 0; s < states.size(); ++s) {
            out << format_date(start + Days{d}) << ',' << states[s] << ','
                << count(s, static_cast<std::size_t>(d)) << '\n';
        }
    }
    return path;
}

std::map<std::string, std::vector<std::string>> read_csv_by_first_field(const fs::path& path) {
    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    REQUIRE(std::getline(in, line));
    std::map<std::string, std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto fields = split_csv_line(line);
        rows[fields[0]] = fields;
    }
    return rows;
}

}  // namespace

TEST_CASE("estimate writes a table and a chart per requested unit") {
    auto dir = fresh_dir("estimate_br");
    auto out_dir = dir / "out";
    auto input = write_fixture(dir, {"SP", "MG", "RJ"}, 60,
                               [](std::size_t s, std::size_t d) { return 50 + (s * 13 + d * 7) % 40; });

    auto cmd = bin() + " estimate --input " + quoted(input) + " --to 2020-07-18 --units BR" +
               " --out-dir " + quoted(out_dir) + " --seed 1 2>" + quoted(dir / "stderr.txt");
    REQUIRE(run(cmd) == 0);

    REQUIRE(fs::exists(out_dir / "rt_BR.csv"));
    REQUIRE(fs::exists(out_dir / "rt_BR.svg"));
    CHECK(file_count(out_dir) == 2);

    // The table must match the library pipeline byte for byte.
    IngestConfig cfg;
    cfg.path = input.string();
    cfg.end_date = make_date(2020, 7, 18);
    auto parsed = parse_csv(cfg);
    auto country = aggregate(parsed.states, brazil_region_map()).country;
    auto rt = estimate_series(country, discretize_generation_interval(6.5, 0.62, 1e-4),
                              EstimationConfig{});
    auto expected_path = dir / "expected.csv";
    emit_rt_table(rt, expected_path.string());
    CHECK(slurp(out_dir / "rt_BR.csv") == slurp(expected_path));

    auto rows = read_rt_table((out_dir / "rt_BR.csv").string());
    CHECK(rows.size() == 54);
}

TEST_CASE("estimate default unit list covers country, regions and states") {
    auto dir = fresh_dir("estimate_default_units");
    auto out_dir = dir / "out";
    std::vector<std::string> all_states;
    for (auto code : state_codes()) all_states.emplace_back(code);
    auto input = write_fixture(dir, all_states, 40,
                               [](std::size_t s, std::size_t d) { return 20 + (s * 5 + d * 3) % 30; });

    auto cmd = bin() + " estimate --input " + quoted(input) + " --to 2020-06-28" +
               " --out-dir " + quoted(out_dir) + " --seed 1 2>" + quoted(dir / "stderr.txt");
    REQUIRE(run(cmd) == 0);

    CHECK(file_count(out_dir) == 66);
    CHECK(fs::exists(out_dir / "rt_BR.csv"));
    CHECK(fs::exists(out_dir / "rt_region_N.svg"));
    CHECK(fs::exists(out_dir / "rt_region_SE.csv"));
    CHECK(fs::exists(out_dir / "rt_SE.csv"));
    CHECK(fs::exists(out_dir / "rt_TO.svg"));
}

TEST_CASE("correlate is byte-identical across reruns with the same seed") {
    auto dir = fresh_dir("correlate_rerun");
    auto input = write_fixture(dir, {"SP", "MG", "RJ"}, 100, [](std::size_t s, std::size_t d) {
        return 100 + (d * d * 7 + s * 31) % 60;
    });

    auto run_once = [&](const std::string& tag) {
        auto out_dir = dir / tag;
        auto cmd = bin() + " correlate --input " + quoted(input) + " --to 2020-08-27" +
                   " --units SP,MG,RJ --samples 200 --seed 77 --out-dir " + quoted(out_dir) +
                   " 2>" + quoted(dir / (tag + ".stderr"));
        REQUIRE(run(cmd) == 0);
        return slurp(out_dir / "correlations.csv");
    };

    auto first = run_once("a");
    auto second = run_once("b");
    CHECK(first == second);

    // Three data rows plus the header, every indicator defined.
    auto rows = read_csv_by_first_field(dir / "a" / "correlations.csv");
    REQUIRE(rows.size() == 3);
    for (const auto& [unit, fields] : rows) {
        INFO(unit);
        REQUIRE(fields.size() == 6);
        CHECK(!fields[1].empty());
        CHECK(!fields[2].empty());
        CHECK(!fields[3].empty());
        CHECK(!fields[4].empty());
        CHECK(fields[5].empty());
        CHECK(parse_double(fields[3]) <= parse_double(fields[4]));
    }
}

TEST_CASE("correlate reports a constant unit as undefined with a reason") {
    auto dir = fresh_dir("correlate_constant");
    auto out_dir = dir / "out";
    auto input = write_fixture(dir, {"SP", "MG"}, 80, [](std::size_t s, std::size_t d) {
        return s == 1 ? 10 : 100 + (d * 11) % 70;
    });

    auto cmd = bin() + " correlate --input " + quoted(input) + " --to 2020-08-07" +
               " --units SP,MG --samples 100 --seed 5 --out-dir " + quoted(out_dir) + " 2>" +
               quoted(dir / "stderr.txt");
    REQUIRE(run(cmd) == 0);

    auto rows = read_csv_by_first_field(out_dir / "correlations.csv");
    REQUIRE(rows.size() == 2);

    const auto& mg = rows.at("MG");
    CHECK(mg[1].empty());
    CHECK(mg[2].empty());
    CHECK(mg[3].empty());
    CHECK(mg[4].empty());
    CHECK(mg[5].find("zero-variance") != std::string::npos);

    const auto& sp = rows.at("SP");
    CHECK(!sp[1].empty());
    CHECK(!sp[2].empty());
    CHECK(sp[5].empty());
    // The national series is SP plus a constant, so the moving averages are
    // perfectly correlated.
    CHECK(parse_double(sp[1]) == 1.0);
}

TEST_CASE("simulate keeps an all-zero tail for a zero profile") {
    auto dir = fresh_dir("simulate_zero");
    auto out_dir = dir / "out";
    auto cmd = bin() + " simulate --profile 0x30 --seeds 5x3 --seed 9 --out-dir " +
               quoted(out_dir) + " 2>" + quoted(dir / "stderr.txt");
    REQUIRE(run(cmd) == 0);
    CHECK(file_count(out_dir) == 1);

    std::ifstream in(out_dir / "sim_incidence.csv");
    std::string line;
    REQUIRE(std::getline(in, line));
    CHECK(line == "date,cases,r_true");
    std::size_t day = 0;
    while (std::getline(in, line)) {
        auto fields = split_csv_line(line);
        REQUIRE(fields.size() == 3);
        CHECK(parse_int64(fields[1]) == (day < 3 ? 5 : 0));
        CHECK(fields[2] == "0");
        ++day;
    }
    CHECK(day == 30);
}

TEST_CASE("simulate with --estimate recovers a flat profile") {
    auto dir = fresh_dir("simulate_estimate");
    auto out_dir = dir / "out";
    auto cmd = bin() + " simulate --profile 1.3x120 --seeds 200x10 --estimate --seed 2024" +
               " --out-dir " + quoted(out_dir) + " 2>" + quoted(dir / "stderr.txt");
    REQUIRE(run(cmd) == 0);
    REQUIRE(fs::exists(out_dir / "sim_incidence.csv"));
    REQUIRE(fs::exists(out_dir / "sim_rt.csv"));

    auto rows = read_rt_table((out_dir / "sim_rt.csv").string());
    double abs_err = 0.0;
    std::size_t settled = 0;
    for (const auto& row : rows) {
        if (row.burn_in) continue;
        abs_err += std::abs(row.mean - 1.3);
        ++settled;
    }
    REQUIRE(settled == 81);
    CHECK(abs_err / static_cast<double>(settled) < 0.1);

    // Seed prefix is copied verbatim.
    std::ifstream in(out_dir / "sim_incidence.csv");
    std::string line;
    std::getline(in, line);
    for (int d = 0; d < 10; ++d) {
        REQUIRE(std::getline(in, line));
        CHECK(split_csv_line(line)[1] == "200");
    }
}

TEST_CASE("failed runs exit nonzero and leave no outputs") {
    auto dir = fresh_dir("failures");
    auto input = write_fixture(dir, {"SP"}, 10,
                               [](std::size_t, std::size_t d) { return 10 + d; });

    SECTION("missing input file") {
        auto cmd = bin() + " estimate --input " + quoted(dir / "absent.csv") + " --out-dir " +
                   quoted(dir / "out1") + " --seed 1 2>" + quoted(dir / "e1.txt");
        CHECK(run(cmd) != 0);
    }
    SECTION("unknown unit") {
        auto cmd = bin() + " estimate --input " + quoted(input) + " --to 2020-05-29" +
                   " --units XX --out-dir " + quoted(dir / "out2") + " --seed 1 2>" +
                   quoted(dir / "e2.txt");
        CHECK(run(cmd) != 0);
        CHECK(!fs::exists(dir / "out2" / "rt_XX.csv"));
    }
    SECTION("unit without data") {
        auto cmd = bin() + " estimate --input " + quoted(input) + " --to 2020-05-29" +
                   " --units MG --out-dir " + quoted(dir / "out3") + " --seed 1 2>" +
                   quoted(dir / "e3.txt");
        CHECK(run(cmd) != 0);
        CHECK(!fs::exists(dir / "out3" / "rt_MG.csv"));
    }
    SECTION("malformed profile") {
        auto cmd = bin() + " simulate --profile 2.0y60 --out-dir " + quoted(dir / "out4") +
                   " --seed 1 2>" + quoted(dir / "e4.txt");
        CHECK(run(cmd) != 0);
        CHECK(!fs::exists(dir / "out4" / "sim_incidence.csv"));
    }
    SECTION("zero samples") {
        auto cmd = bin() + " correlate --input " + quoted(input) + " --to 2020-05-29" +
                   " --samples 0 --out-dir " + quoted(dir / "out5") + " --seed 1 2>" +
                   quoted(dir / "e5.txt");
        CHECK(run(cmd) != 0);
        CHECK(!fs::exists(dir / "out5" / "correlations.csv"));
    }
}

TEST_CASE("out dir falls back to the environment variable") {
    auto dir = fresh_dir("env_out_dir");
    auto out_dir = dir / "from_env";
    auto input = write_fixture(dir, {"SP"}, 20,
                               [](std::size_t, std::size_t d) { return 30 + (d * 7) % 20; });

    auto cmd = "EPIRT_OUT_DIR=" + quoted(out_dir) + " " + bin() + " estimate --input " +
               quoted(input) + " --to 2020-06-08 --units SP --seed 1 2>" +
               quoted(dir / "stderr.txt");
    REQUIRE(run(cmd) == 0);
    CHECK(fs::exists(out_dir / "rt_SP.csv"));
    CHECK(fs::exists(out_dir / "rt_SP.svg"));
}

TEST_CASE("report writes case and population shares") {
    auto dir = fresh_dir("report_shares");
    auto out_dir = dir / "out";
    auto input = dir / "cases.csv";
    {
        std::ofstream out(input);
        out << "date,state,newCases\n";
        const std::vector<int> sp = {100, 100, 50, 50};
        const std::vector<int> mg = {25, 25, 25, 25};
        for (int d = 0; d < 4; ++d) {
            out << format_date(make_date(2020, 5, 20) + Days{d}) << ",SP," << sp[d] << '\n';
            out << format_date(make_date(2020, 5, 20) + Days{d}) << ",MG," << mg[d] << '\n';
        }
    }
    auto population = dir / "population.csv";
    {
        std::ofstream out(population);
        out << "state_code,population\n";
        for (auto code : state_codes()) out << code << ",100\n";
    }

    auto cmd = bin() + " report --input " + quoted(input) + " --to 2020-05-23 --population " +
               quoted(population) + " --out-dir " + quoted(out_dir) + " 2>" +
               quoted(dir / "stderr.txt");
    REQUIRE(run(cmd) == 0);
    CHECK(file_count(out_dir) == 1);

    auto rows = read_csv_by_first_field(out_dir / "shares.csv");
    REQUIRE(rows.size() == 2);
    CHECK(rows.at("SP")[1] == "75");
    CHECK(rows.at("MG")[1] == "25");
    const auto equal_share = format_double(100.0 * 100.0 / 2700.0);
    CHECK(rows.at("SP")[2] == equal_share);
    CHECK(rows.at("MG")[2] == equal_share);
}

TEST_CASE("ingest repairs surface as a sanitation report") {
    auto dir = fresh_dir("cli_sanitation");
    auto out_dir = dir / "out";
    auto input = dir / "cases.csv";
    {
        std::ofstream out(input);
        out << "date,state,newCases\n";
        out << "2020-05-20,SP,10\n";
        out << "2020-05-22,SP,12\n";  // 05-21 missing
        out << "2020-05-23,SP,-3\n";  // negative
    }

    auto cmd = bin() + " report --input " + quoted(input) + " --to 2020-05-23 --out-dir " +
               quoted(out_dir) + " 2>" + quoted(dir / "stderr.txt");
    REQUIRE(run(cmd) == 0);
    REQUIRE(fs::exists(out_dir / "sanitation.csv"));
    auto text = slurp(out_dir / "sanitation.csv");
    CHECK(text.find("missing date zero-filled") != std::string::npos);
    CHECK(text.find("negative count clamped") != std::string::npos);
    CHECK(fs::exists(out_dir / "shares.csv"));
    CHECK(file_count(out_dir) == 2);
}
