#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <unistd.h>

#include "test_util.hpp"
#include "vclean/ar.hpp"
#include "vclean/format.hpp"
#include "vclean/metrics.hpp"
#include "vclean/serialize.hpp"

using namespace vclean;
namespace fs = std::filesystem;

namespace {

const std::string kCli = VCLEAN_CLI_PATH;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() /
               ("vclean_cli_test_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter()++));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
    static int& counter() {
        static int value = 0;
        return value;
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

int run(const std::string& args) {
    const std::string command = kCli + " " + args + " > /dev/null 2> /dev/null";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

int run_capture(const std::string& args, const std::string& stdout_path) {
    const std::string command = kCli + " " + args + " > " + stdout_path + " 2> /dev/null";
    const int status = std::system(command.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    out << text;
}

std::string small_experiment_config() {
    return R"(label = cli-test
sample_rate = 1000
duration = 2.048
variance = 0.1
seed = 5
window_len = 32
hop = 32
seq_len = 32
d_model = 8
n_heads = 2
d_ff = 8
epochs = 2
batch_size = 16
val_fraction = 0.2
train_seed = 3
)";
}

}  // namespace

TEST_CASE("synth writes duration*rate rows and is seed-deterministic") {
    TempDir dir;
    write_text(dir.file("exp.cfg"), "duration = 0.5\nsample_rate = 2000\nseed = 9\n");
    REQUIRE(run("synth --config " + dir.file("exp.cfg") + " --out " + dir.file("a.csv")) == 0);
    const CsvTable table = table_from_csv(read_file(dir.file("a.csv")));
    CHECK(table.row_count() == 1000);
    CHECK(table.header == std::vector<std::string>{"t", "clean", "noisy"});

    REQUIRE(run("synth --config " + dir.file("exp.cfg") + " --out " + dir.file("b.csv")) == 0);
    CHECK(read_file(dir.file("a.csv")) == read_file(dir.file("b.csv")));
}

TEST_CASE("synth --variance override controls the noisy column variance") {
    TempDir dir;
    write_text(dir.file("exp.cfg"), "duration = 100\nsample_rate = 1000\nseed = 2\n");
    REQUIRE(run("synth --config " + dir.file("exp.cfg") + " --variance 0.1 --out " +
                dir.file("sig.csv")) == 0);
    const CsvTable table = table_from_csv(read_file(dir.file("sig.csv")));
    const auto& clean = table.columns[table.column_index("clean")];
    const auto& noisy = table.columns[table.column_index("noisy")];
    double mean = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) mean += noisy[i] - clean[i];
    mean /= static_cast<double>(clean.size());
    double var = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        const double d = noisy[i] - clean[i] - mean;
        var += d * d;
    }
    var /= static_cast<double>(clean.size());
    CHECK(var >= 0.095);
    CHECK(var <= 0.105);
}

TEST_CASE("ar-denoise with zero iterations copies the input column") {
    TempDir dir;
    write_text(dir.file("exp.cfg"), "duration = 1\nseed = 3\n");
    REQUIRE(run("synth --config " + dir.file("exp.cfg") + " --out " + dir.file("sig.csv")) ==
            0);
    REQUIRE(run("ar-denoise --in " + dir.file("sig.csv") + " --iterations 0 --out " +
                dir.file("out.csv")) == 0);
    const CsvTable table = table_from_csv(read_file(dir.file("out.csv")));
    CHECK(table.columns[table.column_index("denoised")] ==
          table.columns[table.column_index("noisy")]);
}

TEST_CASE("ar-denoise recovers order 2 on AR(2) input for most seeds") {
    TempDir dir;
    int hits = 0;
    const int trials = 11;
    for (int trial = 0; trial < trials; ++trial) {
        const auto x =
            testutil::simulate_ar({0.6, -0.3}, 1.0, 4000, 900 + static_cast<std::uint64_t>(trial));
        CsvTable table;
        table.header = {"t", "clean"};
        table.columns.resize(2);
        for (std::size_t i = 0; i < x.size(); ++i) {
            table.columns[0].push_back(static_cast<double>(i));
            table.columns[1].push_back(x[i]);
        }
        write_text(dir.file("ar.csv"), table_to_csv(table));
        REQUIRE(run("ar-denoise --in " + dir.file("ar.csv") +
                    " --p-max 10 --iterations 1 --model-out " + dir.file("model.txt")) == 0);
        const ARModel model = ar_model_from_record(read_file(dir.file("model.txt")));
        if (model.order == 2) ++hits;
    }
    CHECK(hits > trials / 2);
}

TEST_CASE("BIC never selects a larger order than AIC on white noise") {
    TempDir dir;
    int bic_le_aic = 0;
    const int trials = 12;
    for (int trial = 0; trial < trials; ++trial) {
        const auto x = testutil::simulate_ar({}, 1.0, 3000, 700 + static_cast<std::uint64_t>(trial));
        CsvTable table;
        table.header = {"t", "clean"};
        table.columns.resize(2);
        for (std::size_t i = 0; i < x.size(); ++i) {
            table.columns[0].push_back(static_cast<double>(i));
            table.columns[1].push_back(x[i]);
        }
        write_text(dir.file("wn.csv"), table_to_csv(table));
        REQUIRE(run("ar-denoise --in " + dir.file("wn.csv") +
                    " --p-max 6 --iterations 1 --criterion aic --model-out " +
                    dir.file("aic.txt")) == 0);
        REQUIRE(run("ar-denoise --in " + dir.file("wn.csv") +
                    " --p-max 6 --iterations 1 --criterion bic --model-out " +
                    dir.file("bic.txt")) == 0);
        const int aic_order = ar_model_from_record(read_file(dir.file("aic.txt"))).order;
        const int bic_order = ar_model_from_record(read_file(dir.file("bic.txt"))).order;
        if (bic_order <= aic_order) ++bic_le_aic;
    }
    CHECK(bic_le_aic >= (trials * 9) / 10);
}

TEST_CASE("train/denoise/eval pipeline is byte-deterministic") {
    TempDir dir;
    write_text(dir.file("exp.cfg"), small_experiment_config());

    const auto stage = [&](const std::string& tag) {
        REQUIRE(run("synth --config " + dir.file("exp.cfg") + " --out " +
                    dir.file(tag + "_sig.csv")) == 0);
        REQUIRE(run("make-dataset --config " + dir.file("exp.cfg") + " --out " +
                    dir.file(tag + "_ds.bin")) == 0);
        REQUIRE(run("train --config " + dir.file("exp.cfg") + " --data " +
                    dir.file(tag + "_ds.bin") + " --checkpoint-out " +
                    dir.file(tag + "_ckpt.bin") + " --history-out " +
                    dir.file(tag + "_hist.csv")) == 0);
        REQUIRE(run("denoise --checkpoint " + dir.file(tag + "_ckpt.bin") + " --in " +
                    dir.file(tag + "_sig.csv") + " --out " + dir.file(tag + "_den.csv")) ==
                0);
        REQUIRE(run("eval --checkpoint " + dir.file(tag + "_ckpt.bin") + " --data " +
                    dir.file(tag + "_ds.bin") + " --out " + dir.file(tag + "_rep.csv")) == 0);
    };
    stage("a");
    stage("b");
    for (const std::string name :
         {"_sig.csv", "_ds.bin", "_ckpt.bin", "_hist.csv", "_den.csv", "_rep.csv"}) {
        CHECK(read_file(dir.file("a" + name)) == read_file(dir.file("b" + name)));
    }

    const CsvTable hist = table_from_csv(read_file(dir.file("a_hist.csv")));
    CHECK(hist.row_count() == 2);

    const CsvTable sig = table_from_csv(read_file(dir.file("a_sig.csv")));
    const CsvTable den = table_from_csv(read_file(dir.file("a_den.csv")));
    CHECK(den.row_count() == sig.row_count());
    CHECK(den.has_column("denoised"));
}

TEST_CASE("eval aggregates match a metrics-module recomputation") {
    TempDir dir;
    write_text(dir.file("exp.cfg"), small_experiment_config());
    REQUIRE(run("make-dataset --config " + dir.file("exp.cfg") + " --out " +
                dir.file("ds.bin")) == 0);
    REQUIRE(run("train --config " + dir.file("exp.cfg") + " --data " + dir.file("ds.bin") +
                " --checkpoint-out " + dir.file("ckpt.bin")) == 0);
    REQUIRE(run("eval --checkpoint " + dir.file("ckpt.bin") + " --data " +
                dir.file("ds.bin") + " --out " + dir.file("rep.csv")) == 0);

    const DenoiseReport report = report_from_csv(read_file(dir.file("rep.csv")));
    std::vector<double> improvements;
    for (const auto& row : report.rows) improvements.push_back(row.improvement_db);
    CHECK(report.improvement.mean == mean_of(improvements));
    CHECK(report.improvement.median == median_of(improvements));
    CHECK(report.method == "Transformer");
}

TEST_CASE("gradcheck passes, is stable across reruns, and fails when corrupted") {
    TempDir dir;
    REQUIRE(run_capture("gradcheck --seed 1 --seeds 2", dir.file("g1.txt")) == 0);
    REQUIRE(run_capture("gradcheck --seed 1 --seeds 2", dir.file("g2.txt")) == 0);
    CHECK(read_file(dir.file("g1.txt")) == read_file(dir.file("g2.txt")));
    CHECK(read_file(dir.file("g1.txt")).find("PASS") != std::string::npos);
    CHECK(run("gradcheck --seed 1 --corrupt") == 4);
}

TEST_CASE("export-plot emits identical SVG bytes with one legend entry per column") {
    TempDir dir;
    write_text(dir.file("exp.cfg"), "duration = 0.25\nseed = 8\n");
    REQUIRE(run("synth --config " + dir.file("exp.cfg") + " --out " + dir.file("sig.csv")) ==
            0);
    REQUIRE(run("export-plot --in " + dir.file("sig.csv") + " --out " + dir.file("a.svg")) ==
            0);
    REQUIRE(run("export-plot --in " + dir.file("sig.csv") + " --out " + dir.file("b.svg")) ==
            0);
    const std::string svg = read_file(dir.file("a.svg"));
    CHECK(svg == read_file(dir.file("b.svg")));

    std::size_t legend_count = 0, pos = 0;
    while ((pos = svg.find("legend-label", pos)) != std::string::npos) {
        ++legend_count;
        pos += 12;
    }
    CHECK(legend_count == 2);  // clean, noisy
}

TEST_CASE("exit codes distinguish usage, data and numeric failures") {
    TempDir dir;
    CHECK(run("definitely-not-a-command") == 2);
    CHECK(run("synth") == 2);  // missing --out
    CHECK(run("ar-denoise --in " + dir.file("missing.csv")) == 3);
    write_text(dir.file("bad.cfg"), "not_a_key = 1\n");
    CHECK(run("synth --config " + dir.file("bad.cfg") + " --out " + dir.file("x.csv")) == 2);
    write_text(dir.file("trunc.bin"), "VCLN");
    CHECK(run("denoise --checkpoint " + dir.file("trunc.bin") + " --in x --out y") == 3);
}

TEST_CASE("checkpoint checksum corruption is rejected with a data error") {
    TempDir dir;
    write_text(dir.file("exp.cfg"), small_experiment_config());
    REQUIRE(run("make-dataset --config " + dir.file("exp.cfg") + " --out " +
                dir.file("ds.bin")) == 0);
    REQUIRE(run("train --config " + dir.file("exp.cfg") + " --data " + dir.file("ds.bin") +
                " --checkpoint-out " + dir.file("ckpt.bin")) == 0);
    std::string bytes = read_file(dir.file("ckpt.bin"));
    bytes[bytes.size() / 2] = static_cast<char>(bytes[bytes.size() / 2] ^ 0x10);
    write_text(dir.file("ckpt_bad.bin"), bytes);
    CHECK(run("eval --checkpoint " + dir.file("ckpt_bad.bin") + " --data " +
              dir.file("ds.bin")) == 3);
}

TEST_CASE("VCLN_SEED provides the fallback seed") {
    TempDir dir;
    write_text(dir.file("exp.cfg"), "duration = 0.1\n");  // no seed line
    const std::string base = "synth --config " + dir.file("exp.cfg") + " --out ";
    const std::string env_a = "VCLN_SEED=123 " + kCli + " " + base + dir.file("a.csv") +
                              " > /dev/null 2>&1";
    const std::string env_b = "VCLN_SEED=123 " + kCli + " " + base + dir.file("b.csv") +
                              " > /dev/null 2>&1";
    const std::string env_c = "VCLN_SEED=124 " + kCli + " " + base + dir.file("c.csv") +
                              " > /dev/null 2>&1";
    REQUIRE(std::system(env_a.c_str()) == 0);
    REQUIRE(std::system(env_b.c_str()) == 0);
    REQUIRE(std::system(env_c.c_str()) == 0);
    CHECK(read_file(dir.file("a.csv")) == read_file(dir.file("b.csv")));
    CHECK(read_file(dir.file("a.csv")) != read_file(dir.file("c.csv")));
}
