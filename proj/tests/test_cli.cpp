#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "eval/evaluate.hpp"
#include "phantom/phantom.hpp"

using namespace medivista;
namespace fs = std::filesystem;

namespace {

int run(const std::string& args) {
    const std::string cmd = std::string(MEDIVISTA_BIN) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream out;
    out << in.rdbuf();
    return out.str();
}

fs::path fresh_dir(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

// metrics.csv minus the wall-clock column
std::string loss_columns(const fs::path& csv) {
    std::ifstream in(csv);
    std::ostringstream out;
    std::string line;
    while (std::getline(in, line)) {
        const auto last = line.rfind(',');
        out << line.substr(0, last) << "\n";
    }
    return out.str();
}

}  // namespace

TEST_CASE("phantom command is deterministic and validates its arguments") {
    const fs::path a = fresh_dir("mv_cli_ph_a");
    const fs::path b = fresh_dir("mv_cli_ph_b");
    CHECK(run("phantom --out " + a.string() + " --count 2 --seed 7 --frames 4 --size 32x32") == 0);
    CHECK(run("phantom --out " + b.string() + " --count 2 --seed 7 --frames 4 --size 32x32") == 0);
    CHECK(slurp(a / "videos/phantom_0000.mvst") == slurp(b / "videos/phantom_0000.mvst"));
    CHECK(slurp(a / "masks/phantom_0001.mvst") == slurp(b / "masks/phantom_0001.mvst"));

    CHECK(run("phantom --out " + fresh_dir("mv_cli_ph_c").string() + " --size 63x64") == 1);
    CHECK(run("phantom --out " + fresh_dir("mv_cli_ph_d").string() + " --eject 1.5") == 1);
    CHECK(run("nonsense") == 1);
    fs::remove_all(a);
    fs::remove_all(b);
}

TEST_CASE("phantom default split on 100 records is 64/16/20") {
    const fs::path dir = fresh_dir("mv_cli_split");
    CHECK(run("phantom --out " + dir.string() + " --count 100 --seed 3 --frames 4 --size 16x16") ==
          0);
    Dataset ds = Dataset::load(dir);
    CHECK(ds.split_indices("train").size() == 64);
    CHECK(ds.split_indices("val").size() == 16);
    CHECK(ds.split_indices("test").size() == 20);
    fs::remove_all(dir);
}

TEST_CASE("gradcheck command: default table passes, targeted ops work") {
    CHECK(run("gradcheck --seeds 1") == 0);
    CHECK(run("gradcheck --op temporal_fusion_attention --seeds 2") == 0);
    CHECK(run("gradcheck --op corrupted_control --seeds 1") == 2);
    CHECK(run("gradcheck --op no_such_op") == 1);
}

TEST_CASE("train/eval round trip with config file, overrides, and determinism") {
    const fs::path data = fresh_dir("mv_cli_data");
    CHECK(run("phantom --out " + data.string() + " --count 10 --seed 9 --frames 4 --size 32x32") ==
          0);

    const fs::path cfg_file = fresh_dir("mv_cli_cfg.json");
    {
        std::ofstream out(cfg_file);
        out << R"({"model":{"embed_dim":8,"depth":4,"patch_size":4,"frames":4,"height":32,)"
            << R"("width":32,"fact":{"rank":2},"adapter_rank":2,"ffm_channels":4},)"
            << R"("train":{"epochs":1,"pretrain_epochs":1,"batch_size":2,"clip_len":4,)"
            << R"("learning_rate":0.001,"seed":5}})";
    }

    const fs::path out1 = fresh_dir("mv_cli_out1");
    const fs::path out2 = fresh_dir("mv_cli_out2");
    const std::string train_args = " --data " + data.string() + " --config " + cfg_file.string();
    CHECK(run("train" + train_args + " --out " + out1.string()) == 0);
    CHECK(run("train" + train_args + " --out " + out2.string()) == 0);
    CHECK(fs::exists(out1 / "effective_config.json"));
    CHECK(loss_columns(out1 / "metrics.csv") == loss_columns(out2 / "metrics.csv"));

    // rerun from the echoed config alone reproduces the loss column
    const fs::path out3 = fresh_dir("mv_cli_out3");
    CHECK(run("train --data " + data.string() + " --config " +
              (out1 / "effective_config.json").string() + " --out " + out3.string()) == 0);
    CHECK(loss_columns(out3 / "metrics.csv") == loss_columns(out1 / "metrics.csv"));

    // unknown config keys are rejected
    CHECK(run("train" + train_args + " --out " + fresh_dir("mv_cli_out4").string() +
              " --set train.warmup=3") == 1);

    // eval writes one row per (video, structure)
    const fs::path report = fresh_dir("mv_cli_report.csv");
    CHECK(run("eval --data " + data.string() + " --ckpt " + (out1 / "checkpoint").string() +
              " --report " + report.string() + " --split val") == 0);
    std::ifstream rin(report);
    std::string line;
    std::getline(rin, line);
    CHECK(line == "video,structure,dice,dh_mm,da_mm,L");
    int rows = 0;
    while (std::getline(rin, line) && !line.empty()) ++rows;
    Dataset ds = Dataset::load(data);
    CHECK(rows == static_cast<int>(ds.split_indices("val").size() * 2));

    fs::remove_all(data);
    fs::remove_all(cfg_file);
    fs::remove_all(out1);
    fs::remove_all(out2);
    fs::remove_all(out3);
    fs::remove_all(report);
}

TEST_CASE("evaluating ground truth against itself is perfect") {
    const fs::path dir = fresh_dir("mv_cli_gt");
    PhantomParams p;
    p.frames = 4;
    p.height = 32;
    p.width = 32;
    std::vector<PhantomRecord> records;
    for (uint64_t i = 0; i < 4; ++i) records.push_back(generate_phantom(p, 60 + i));
    write_dataset(records, dir, {0.5, 0.25, 0.25}, 2);
    Dataset data = Dataset::load(dir);

    EvalReport report =
        evaluate_predictions(data, "test", [&](size_t i) { return data.load_mask(i); });
    for (const VideoEval& v : report.videos) {
        for (const StructureMetrics& s : v.structures) {
            CHECK(s.dice == doctest::Approx(1.0));
            REQUIRE(s.dh_mm.has_value());
            CHECK(*s.dh_mm == 0.0);
            CHECK(*s.da_mm == 0.0);
            REQUIRE(s.l_pred.has_value());
            REQUIRE(s.l_gt.has_value());
            CHECK(*s.l_pred == doctest::Approx(*s.l_gt));
        }
    }
    fs::remove_all(dir);
}

TEST_CASE("ablate runs one axis end-to-end and emits the expected rows") {
    const fs::path data = fresh_dir("mv_cli_ab_data");
    CHECK(run("phantom --out " + data.string() + " --count 6 --seed 4 --frames 4 --size 32x32") ==
          0);
    const fs::path out = fresh_dir("mv_cli_ab_out");
    const std::string small_model =
        " --set model.embed_dim=8 --set model.patch_size=4 --set model.adapter_rank=2"
        " --set model.fact.rank=2 --set model.ffm_channels=4"
        " --set train.epochs=1 --set train.pretrain_epochs=0 --set train.batch_size=2"
        " --set train.clip_len=4";
    CHECK(run("ablate --axis fusion --data " + data.string() + " --out " + out.string() +
              small_model) == 0);
    std::ifstream in(out / "ablate_fusion.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "variant,dice,L");
    std::vector<std::string> variants;
    while (std::getline(in, line) && !line.empty()) {
        variants.push_back(line.substr(0, line.find(',')));
    }
    CHECK(variants == std::vector<std::string>{"off", "on"});

    CHECK(run("ablate --axis bogus --data " + data.string() + " --out " + out.string()) == 1);
    fs::remove_all(data);
    fs::remove_all(out);
}
