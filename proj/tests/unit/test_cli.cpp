#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

namespace {

namespace fs = std::filesystem;

struct Result {
  int code = -1;
  std::string output;
};

Result biot(const std::string& args, const std::string& env = "") {
  const fs::path log = fs::path(::testing::TempDir()) / "biot_cli_output.txt";
  const std::string cmd =
      env + " " + std::string(BIOT_CLI_PATH) + " " + args + " > " + log.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  Result r;
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(log);
  std::stringstream ss;
  ss << in.rdbuf();
  r.output = ss.str();
  return r;
}

fs::path fresh_dir(const std::string& name) {
  const fs::path d = fs::path(::testing::TempDir()) / ("biot_cli_" + name);
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Result files by name; timing files hold wall-clock values and are skipped.
std::map<std::string, std::string> result_files(const fs::path& dir) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::directory_iterator(dir)) {
    const std::string name = e.path().filename().string();
    if (name.find("_timing.csv") != std::string::npos) continue;
    out[name] = slurp(e.path());
  }
  return out;
}

TEST(Cli, Help) {
  const Result r = biot("--help");
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.output.find("reproduce"), std::string::npos);
  EXPECT_EQ(biot("run --help").code, 0);
}

TEST(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(biot("").code, 1);
  EXPECT_EQ(biot("run --bogus").code, 1);
  EXPECT_EQ(biot("run --problem terzaghi").code, 1);
  EXPECT_EQ(biot("run --algo newton").code, 1);
  EXPECT_EQ(biot("run --h 0").code, 1);
  EXPECT_EQ(biot("run --dt 4 --steps 4").code, 1);
  EXPECT_EQ(biot("run --max-iters -2").code, 1);
  EXPECT_EQ(biot("reproduce fig9").code, 1);
  EXPECT_EQ(biot("reproduce speedup --workers 1,0").code, 1);
  // T * dt_divisor must be an integer step count.
  EXPECT_EQ(biot("run --problem barry-mercer --h 4 --dt 3").code, 1);
}

TEST(Cli, StrictUnconvergedExitsThree) {
  const fs::path d = fresh_dir("strict");
  const std::string base = "run --problem mandel --algo ts --steps 5 --max-iters 2 --out-dir " + d.string();
  EXPECT_EQ(biot(base).code, 0);
  EXPECT_EQ(biot(base + " --strict").code, 3);
}

TEST(Cli, MandelFixedIterationCount) {
  const fs::path d = fresh_dir("mandel");
  ASSERT_EQ(biot("run --problem mandel --algo ts --max-iters 5 --out-dir " + d.string()).code, 0);
  std::ifstream in(d / "mandel_ts_history.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, "step,iter,re_u,re_xi,re_p,xi_change");
  std::map<int, int> per_step;
  while (std::getline(in, line)) {
    const int step = std::stoi(line.substr(0, line.find(',')));
    ++per_step[step];
  }
  ASSERT_EQ(per_step.size(), 1000u);
  for (const auto& [step, count] : per_step) EXPECT_EQ(count, 5) << "step " << step;
}

TEST(Cli, WorkerCountGivesIdenticalFiles) {
  const fs::path a = fresh_dir("w1"), b = fresh_dir("w4");
  ASSERT_EQ(biot("run --problem example1 --algo git --workers 1 --out-dir " + a.string()).code, 0);
  ASSERT_EQ(biot("run --problem example1 --algo git --workers 4 --out-dir " + b.string()).code, 0);
  const auto fa = result_files(a), fb = result_files(b);
  EXPECT_EQ(fa.size(), 2u);
  EXPECT_EQ(fa, fb);
  EXPECT_TRUE(fs::exists(a / "example1_git_timing.csv"));
}

TEST(Cli, RepeatedRunsAreBitwiseIdentical) {
  const fs::path a = fresh_dir("rep_a"), b = fresh_dir("rep_b");
  const std::string args = "run --problem barry-mercer --algo ts --h 8 --steps 8 --max-iters 6 ";
  ASSERT_EQ(biot(args + "--out-dir " + a.string()).code, 0);
  ASSERT_EQ(biot(args + "--out-dir " + b.string()).code, 0);
  const auto fa = result_files(a);
  EXPECT_EQ(fa.size(), 1u);  // no exact solution, so history only
  EXPECT_EQ(fa, result_files(b));
}

TEST(Cli, CoupledConvergenceRow) {
  const fs::path d = fresh_dir("conv");
  ASSERT_EQ(biot("run --problem example1 --algo coupled --h 8 --dt 4 --out-dir " + d.string()).code, 0);
  std::ifstream in(d / "example1_coupled_convergence.csv");
  std::string header, row, extra;
  std::getline(in, header);
  std::getline(in, row);
  EXPECT_EQ(header, "dt,h,err_u_h1,order_u,err_xi_l2,order_xi,err_p_h1,order_p");
  EXPECT_EQ(row.rfind("0.25,0.125,", 0), 0u) << row;
  EXPECT_FALSE(std::getline(in, extra));
  EXPECT_FALSE(fs::exists(d / "example1_coupled_history.csv"));
}

TEST(Cli, WorkerDefaultFromEnvironment) {
  const fs::path d = fresh_dir("env");
  const std::string args = "run --problem example1 --algo git --h 4 --dt 4 --out-dir " + d.string();
  ASSERT_EQ(biot(args, "env -u BIOT_THREADS").code, 0);
  EXPECT_NE(slurp(d / "example1_git_timing.csv").find("step_b,1,"), std::string::npos);
  ASSERT_EQ(biot(args, "BIOT_THREADS=3").code, 0);
  EXPECT_NE(slurp(d / "example1_git_timing.csv").find("step_b,3,"), std::string::npos);
  ASSERT_EQ(biot(args + " --workers 2", "BIOT_THREADS=3").code, 0);
  EXPECT_NE(slurp(d / "example1_git_timing.csv").find("step_b,2,"), std::string::npos);
  const Result bad = biot(args, "BIOT_THREADS=zero");
  EXPECT_EQ(bad.code, 0);
  EXPECT_NE(bad.output.find("ignoring BIOT_THREADS"), std::string::npos);
}

}  // namespace
