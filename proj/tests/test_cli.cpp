#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "cli_runner.hpp"
#include "test_util.hpp"
#include "tfconv/container.hpp"
#include "tfconv/conv.hpp"

using namespace tfconv;
using tfconv::testing::random_kruskal;
using tfconv::testing::rng_for;
using tfconv::testing::run_cli;
namespace fs = std::filesystem;

namespace {

const std::string kExe = TFCONV_CLI;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() / ("tfconv_cli_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

}  // namespace

TEST_F(Cli, DecomposeRankOne) {
  auto rng = rng_for(1);
  save_tensor(path("w.tensor"), kruskal_to_dense(random_kruskal({4, 3, 3, 3}, 1, rng)));
  const auto r = run_cli(kExe, "decompose --input " + path("w.tensor") + " --scheme cp --rank 1 --out " + path("plan"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_LT(std::stod(r.values.at("rel_error")), 1e-8);
  EXPECT_TRUE(fs::exists(path("plan/manifest.json")));
  EXPECT_TRUE(fs::exists(path("plan/U_K1.tensor")));
}

TEST_F(Cli, DecomposeTuckerFullRank) {
  auto rng = rng_for(2);
  save_tensor(path("w.tensor"), random_uniform({4, 3, 3, 3}, rng));
  const auto r =
      run_cli(kExe, "decompose --input " + path("w.tensor") + " --scheme tucker --rank 4,3 --out " + path("plan"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_LT(std::stod(r.values.at("rel_error")), 1e-10);
}

TEST_F(Cli, DecomposeExitCodes) {
  auto rng = rng_for(3);
  save_tensor(path("w.tensor"), random_uniform({4, 3, 3, 3}, rng));
  EXPECT_EQ(run_cli(kExe, "decompose --input " + path("w.tensor") + " --scheme cp --rank 0 --out " + path("p"))
                .exit_code,
            3);
  EXPECT_EQ(run_cli(kExe, "decompose --input " + path("w.tensor") + " --scheme cp --rank x --out " + path("p"))
                .exit_code,
            3);
  EXPECT_EQ(run_cli(kExe, "decompose --input " + path("w.tensor") + " --scheme tt --rank 1 --out " + path("p"))
                .exit_code,
            3);
  std::ofstream(path("junk.tensor")) << "garbage";
  EXPECT_EQ(run_cli(kExe, "decompose --input " + path("junk.tensor") + " --scheme cp --rank 1 --out " + path("p"))
                .exit_code,
            2);
  EXPECT_EQ(run_cli(kExe, "decompose --input " + path("none.tensor") + " --scheme cp --rank 1 --out " + path("p"))
                .exit_code,
            2);
  EXPECT_EQ(run_cli(kExe, "decompose --scheme cp").exit_code, 2);
  EXPECT_EQ(run_cli(kExe, "").exit_code, 2);
  EXPECT_EQ(run_cli(kExe, "--help").exit_code, 0);
}

TEST_F(Cli, ConvUnitKernelIsIdentity) {
  auto rng = rng_for(4);
  const DenseTensor x = random_uniform({1, 5, 4}, rng);
  save_tensor(path("x.tensor"), x);
  save_tensor(path("w.tensor"), DenseTensor::filled({1, 1, 1, 1}, 1.0));
  const auto r = run_cli(kExe, "conv --input " + path("x.tensor") + " --kernel " + path("w.tensor") +
                                   " --stride 1 --padding 0 --out " + path("y.tensor"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(load_tensor(path("y.tensor")), x);
}

TEST_F(Cli, ConvPlanMatchesDirect) {
  auto rng = rng_for(5);
  const DenseTensor w = kruskal_to_dense(random_kruskal({4, 3, 3, 3}, 2, rng));
  save_tensor(path("w.tensor"), w);
  save_tensor(path("x.tensor"), random_uniform({3, 9, 8}, rng));
  ASSERT_EQ(run_cli(kExe, "decompose --input " + path("w.tensor") + " --scheme hocp --rank 2 --out " + path("plan"))
                .exit_code,
            0);
  const std::string common = " --input " + path("x.tensor") + " --stride 2,1 --padding 1 ";
  ASSERT_EQ(run_cli(kExe, "conv" + common + "--kernel " + path("w.tensor") + " --out " + path("direct.tensor"))
                .exit_code,
            0);
  const auto r = run_cli(kExe, "conv" + common + "--plan " + path("plan/manifest.json") + " --out " +
                                   path("plan.tensor"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  const DenseTensor a = load_tensor(path("direct.tensor"));
  const DenseTensor b = load_tensor(path("plan.tensor"));
  ASSERT_EQ(a.shape(), b.shape());
  EXPECT_EQ(a.shape(), (Shape{4, 5, 8}));
  EXPECT_LT(relative_error(b, a), 1e-10);
}

TEST_F(Cli, ConvChannelMismatch) {
  auto rng = rng_for(6);
  save_tensor(path("x.tensor"), random_uniform({2, 5, 5}, rng));
  save_tensor(path("w.tensor"), random_uniform({4, 3, 3, 3}, rng));
  const auto r = run_cli(kExe, "conv --input " + path("x.tensor") + " --kernel " + path("w.tensor") +
                                   " --stride 1 --padding 0 --out " + path("y.tensor"));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_NE(r.out.find("2 channels"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("expects 3"), std::string::npos) << r.out;
}

TEST_F(Cli, CostJester) {
  const auto r = run_cli(kExe, "cost --spec '{\"preset\": \"jester\"}'");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(r.values.at("params_regular"), "2880576");
  EXPECT_EQ(r.values.at("params_hocp"), "1180632");
  EXPECT_EQ(r.values.at("params_saved"), "1699944");
  const auto skip = run_cli(kExe, "cost --skip --spec '{\"preset\": \"jester\"}'");
  EXPECT_EQ(skip.values.at("params_hocp_with_skip"), "1287320");
}

TEST_F(Cli, CostLayerList) {
  std::ofstream(path("spec.json")) << R"({"layers": [{"in_channels": 3, "out_channels": 64, "kernel": [3, 3, 3]}]})";
  const auto r = run_cli(kExe, "cost --spec " + path("spec.json") + " --rank 18");
  ASSERT_EQ(r.exit_code, 0) << r.out;
  EXPECT_EQ(r.values.at("params_regular"), "5184");
  EXPECT_EQ(r.values.at("params_hocp"), "1368");
  EXPECT_EQ(run_cli(kExe, "cost --spec '{\"layers\": []}'").values.at("params_regular"), "0");
  EXPECT_EQ(run_cli(kExe, "cost --spec '{\"layers\": [{}]}'").exit_code, 2);
}

TEST_F(Cli, SweepFig6) {
  const auto r = run_cli(kExe, "sweep --fig6 --multipliers 3,6 --out " + path("fig6.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  std::ifstream is(path("fig6.csv"));
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "in_channels,out_channels,gflops_regular,gflops_hocp_x3,gflops_hocp_x6");
  int rows = 0;
  while (std::getline(is, line)) {
    ++rows;
    std::stringstream ss(line);
    std::string c, t, reg, x3, x6;
    std::getline(ss, c, ',');
    std::getline(ss, t, ',');
    std::getline(ss, reg, ',');
    std::getline(ss, x3, ',');
    std::getline(ss, x6, ',');
    EXPECT_LT(std::stod(x3), std::stod(reg));
    EXPECT_LT(std::stod(x6), std::stod(reg));
  }
  EXPECT_EQ(rows, 11);
}

TEST_F(Cli, SweepEmptyPairs) {
  const auto r = run_cli(kExe, "sweep --pairs '' --out " + path("empty.csv"));
  ASSERT_EQ(r.exit_code, 0) << r.out;
  std::ifstream is(path("empty.csv"));
  const std::string all((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  EXPECT_EQ(all, "in_channels,out_channels,gflops_regular,gflops_hocp_x3,gflops_hocp_x6\n");
  EXPECT_EQ(run_cli(kExe, "sweep --out " + path("x.csv")).exit_code, 3);
}

TEST_F(Cli, VerifyPassAndFail) {
  auto rng = rng_for(7);
  const KruskalTensor k = random_kruskal({3, 2, 3, 3}, 2, rng);
  save_tensor(path("w.tensor"), kruskal_to_dense(k));
  ASSERT_EQ(run_cli(kExe, "decompose --input " + path("w.tensor") + " --scheme cp --rank 2 --out " + path("plan"))
                .exit_code,
            0);
  const auto pass = run_cli(kExe, "verify --plan " + path("plan/manifest.json") + " --kernel " + path("w.tensor") +
                                      " --tol 1e-8 --probes 4 --seed 3");
  EXPECT_EQ(pass.exit_code, 0) << pass.out;
  EXPECT_EQ(pass.values.at("status"), "pass");

  save_tensor(path("other.tensor"), random_uniform({3, 2, 3, 3}, rng));
  const auto fail = run_cli(kExe, "verify --plan " + path("plan/manifest.json") + " --kernel " +
                                      path("other.tensor") + " --tol 1e-8 --probes 4 --seed 3");
  EXPECT_EQ(fail.exit_code, 1);
  EXPECT_EQ(fail.values.at("status"), "fail");
  EXPECT_GT(std::stod(fail.values.at("max_rel_dev")), 1e-4);
}

TEST_F(Cli, DeterministicForSeed) {
  auto rng = rng_for(8);
  save_tensor(path("w.tensor"), random_uniform({3, 3, 3, 3}, rng));
  const std::string args = "decompose --input " + path("w.tensor") + " --scheme cp --rank 3 --seed 5 --out ";
  const auto a = run_cli(kExe, args + path("a"));
  const auto b = run_cli(kExe, args + path("b"));
  EXPECT_EQ(a.values.at("rel_error"), b.values.at("rel_error"));
  EXPECT_EQ(load_tensor(path("a/U_T.tensor")), load_tensor(path("b/U_T.tensor")));
}
