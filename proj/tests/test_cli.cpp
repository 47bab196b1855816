#include <json.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kCli = CMV_CLI_PATH;

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("cmv-cli-" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

struct Outcome {
    int code = -1;
    std::string err;
};

Outcome cli(const std::string& args, const fs::path& dir) {
    const fs::path err = dir / "stderr.txt";
    const std::string cmd = kCli + " " + args + " > " + (dir / "stdout.txt").string() + " 2> " + err.string();
    const int status = std::system(cmd.c_str());
    Outcome o;
    o.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    std::ifstream in(err);
    std::stringstream ss;
    ss << in.rdbuf();
    o.err = ss.str();
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::size_t data_rows(const fs::path& csv) {
    std::ifstream in(csv);
    std::size_t n = 0;
    for (std::string line; std::getline(in, line);) ++n;
    return n == 0 ? 0 : n - 1;
}

void write(const fs::path& p, const json& j) { std::ofstream(p) << j.dump(2); }

} // namespace

TEST(Cli, RunHypertensionWritesSeriesAndSidecar) {
    const fs::path dir = scratch("run");
    const Outcome o = cli("run --scenario ivc-hypertension --out " + dir.string(), dir);
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_EQ(data_rows(dir / "ivc-hypertension.csv"), 181u);
    const json meta = json::parse(slurp(dir / "ivc-hypertension.meta.json"));
    EXPECT_TRUE(meta.at("completed").get<bool>());
    EXPECT_EQ(meta.at("config").at("hemodynamics").at("R_dyn_s_cm5"), 430.5);
    EXPECT_TRUE(meta.contains("wall_clock_s"));
    EXPECT_TRUE(meta.at("solver").contains("compiler"));
    EXPECT_TRUE(fs::exists(dir / "ivc-hypertension.state.json"));
}

TEST(Cli, RerunsAreByteIdentical) {
    const fs::path a = scratch("det-a"), b = scratch("det-b");
    ASSERT_EQ(cli("run --scenario ivc-flow --out " + a.string(), a).code, 0);
    ASSERT_EQ(cli("run --scenario ivc-flow --out " + b.string(), b).code, 0);
    EXPECT_EQ(slurp(a / "ivc-flow.csv"), slurp(b / "ivc-flow.csv"));
}

TEST(Cli, FractionSumOfPointNineIsAConfigError) {
    const fs::path dir = scratch("phi");
    write(dir / "bad.json", {{"preset", "ovine-ivc"},
                             {"constituent_sets",
                              {{"ivc", json::array({{{"name", "elastin"}, {"kind", "elastin"},
                                                     {"material", "neo-hookean"}, {"c_kPa", 9.913},
                                                     {"phi0", 0.9}, {"rho_hat_kg_m3", 1050},
                                                     {"deposition", {{"G_theta", 1.219}, {"G_z", 1.428}}}}})}}}});
    const Outcome o = cli("run --config " + (dir / "bad.json").string() + " --out " + dir.string(), dir);
    EXPECT_EQ(o.code, 4);
    EXPECT_NE(o.err.find("0.9"), std::string::npos) << o.err;
}

TEST(Cli, MissingConfigIsAnIoError) {
    const fs::path dir = scratch("missing");
    EXPECT_EQ(cli("run --config " + (dir / "absent.json").string(), dir).code, 3);
}

TEST(Cli, UnwritableOutputIsAnIoError) {
    const fs::path dir = scratch("unwritable");
    std::ofstream(dir / "file") << "x";
    EXPECT_EQ(cli("run --scenario ovine-ivc --out " + (dir / "file" / "sub").string(), dir).code, 3);
}

TEST(Cli, BadArgumentsAreConfigErrors) {
    const fs::path dir = scratch("args");
    EXPECT_EQ(cli("run --scenario ovine-ivc --algorithm alg9", dir).code, 4);
    EXPECT_EQ(cli("frobnicate", dir).code, 4);
    EXPECT_EQ(cli("run", dir).code, 4);
    EXPECT_EQ(cli("sweep --scenario ovine-ivc --param hemodynamics.R --values 1,x --out " + dir.string(), dir).code, 4);
}

TEST(Cli, NonConvergenceExitsWithTwoAndFlagsPartialOutput) {
    const fs::path dir = scratch("nonconv");
    write(dir / "cap.json", {{"preset", "ivc-hypertension"}, {"coupling", {{"n_max", 1}, {"k_max", 1}}}});
    const Outcome o = cli("run --config " + (dir / "cap.json").string() + " --out " + dir.string(), dir);
    EXPECT_EQ(o.code, 2) << o.err;
    const json meta = json::parse(slurp(dir / "ivc-hypertension.meta.json"));
    EXPECT_FALSE(meta.at("completed").get<bool>());
    EXPECT_TRUE(meta.contains("failure"));
    EXPECT_EQ(data_rows(dir / "ivc-hypertension.csv"), 1u);
}

TEST(Cli, SweepEmitsOneSeriesPerValue) {
    const fs::path dir = scratch("sweep");
    const Outcome o =
        cli("sweep --scenario ovine-ivc --param hemodynamics.R --values 307.5,430.5 --out " + dir.string(), dir);
    ASSERT_EQ(o.code, 0) << o.err;
    std::size_t series = 0;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.path().extension() == ".csv") {
            ++series;
            EXPECT_EQ(data_rows(e.path()), 181u);
        }
    EXPECT_EQ(series, 2u);
}

TEST(Cli, SeedHistoryContinuesARun) {
    const fs::path dir = scratch("seed");
    write(dir / "first.json", {{"preset", "ivc-hypertension"}, {"coupling", {{"t_max_day", 40}}}});
    ASSERT_EQ(cli("run --config " + (dir / "first.json").string() + " --out " + (dir / "a").string(), dir).code, 0);
    const Outcome o = cli("run --scenario ivc-hypertension --seed-history " +
                              (dir / "a" / "ivc-hypertension.state.json").string() + " --out " + (dir / "b").string(),
                          dir);
    ASSERT_EQ(o.code, 0) << o.err;
    EXPECT_EQ(data_rows(dir / "b" / "ivc-hypertension.csv"), 171u);
}

TEST(Cli, ValidatePassesAgainstCommittedReferences) {
    const fs::path dir = scratch("validate");
    const Outcome o = cli("validate --out " + dir.string(), dir);
    EXPECT_EQ(o.code, 0) << slurp(dir / "stdout.txt") << o.err;
    EXPECT_NE(slurp(dir / "stdout.txt").find("PASS"), std::string::npos);
}
