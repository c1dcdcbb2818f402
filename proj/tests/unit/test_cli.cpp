#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

namespace {

struct Result {
    int code = -1;
    std::string out;
};

Result run_cli(const std::string& args) {
    const std::string cmd = std::string(BYZREP_CLI_PATH) + " " + args + " 2>&1";
    Result r;
    FILE* p = popen(cmd.c_str(), "r");
    if (!p) return r;
    std::array<char, 4096> buf{};
    while (std::size_t n = fread(buf.data(), 1, buf.size(), p)) r.out.append(buf.data(), n);
    const int status = pclose(p);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::size_t lines(const std::string& s) {
    std::size_t n = 0;
    for (char c : s) n += c == '\n';
    return n;
}

}  // namespace

TEST(Cli, SweepRowPerValue) {
    const auto r = run_cli(
        "sweep --sweep-variable p1 --values 0.1:1.0:0.1 --algorithm RACA --n-anchors 1 --alpha0 0.75 "
        "--n-steps 30 --trials 1 --parallel 1");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(lines(r.out), 11u);
    EXPECT_EQ(r.out.rfind("value,error,", 0), 0u);
}

TEST(Cli, TheoryGridSize) {
    const auto r = run_cli("theory --alpha0 0.8 --grid 101 --fields p1,p2,h");
    ASSERT_EQ(r.code, 0) << r.out.substr(0, 200);
    EXPECT_EQ(lines(r.out), 101u * 101u + 1u);
    EXPECT_EQ(r.out.rfind("p1,p2,h\n", 0), 0u);
}

TEST(Cli, MissingConfigFile) {
    const auto r = run_cli("run --config /no/such/dir/byz.cfg");
    EXPECT_EQ(r.code, 1);
    EXPECT_NE(r.out.find("/no/such/dir/byz.cfg"), std::string::npos);
}

TEST(Cli, UsageAndValidationErrors) {
    EXPECT_EQ(run_cli("").code, 2);
    EXPECT_EQ(run_cli("run --no-such-flag 1").code, 2);
    EXPECT_EQ(run_cli("run --n-sensors abc").code, 2);
    EXPECT_EQ(run_cli("sweep --values 1").code, 2);
    EXPECT_EQ(run_cli("run --n-sensors 101").code, 1);
    EXPECT_EQ(run_cli("run --p1 1.5").code, 1);
    EXPECT_EQ(run_cli("run --algorithm RACA").code, 1);
}

TEST(Cli, ConfigFileAndFlagPrecedence) {
    const std::string path = testing::TempDir() + "byzrep_cli_test.cfg";
    {
        std::ofstream f(path);
        f << "n_sensors = 20\nn_steps = 7\nwindow = 3\n";
    }
    auto r = run_cli("run --config " + path);
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(lines(r.out), 8u);
    r = run_cli("run --config " + path + " --n-steps 4");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(lines(r.out), 5u);
}

TEST(Cli, TraceSnapshots) {
    const auto r = run_cli("trace --n-sensors 10 --n-steps 20 --every 10 --window 5");
    ASSERT_EQ(r.code, 0) << r.out;
    EXPECT_EQ(lines(r.out), 1u + 2u * 10u);
}

TEST(Cli, SweepIsReproducible) {
    const std::string args =
        "sweep --sweep-variable alpha0 --values 0.2,0.4 --trials 2 --n-sensors 20 --n-steps 40 --seed 9";
    const auto a = run_cli(args + " --parallel 1");
    const auto b = run_cli(args + " --parallel 2");
    ASSERT_EQ(a.code, 0) << a.out;
    EXPECT_EQ(a.out, b.out);
}
