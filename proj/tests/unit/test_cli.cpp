// End-to-end runs of the rotassign executable.
#include <gtest/gtest.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "rotassign/text.hpp"

namespace fs = std::filesystem;

namespace {

const std::string cli = ROTASSIGN_CLI;
const std::string data = ROTASSIGN_TEST_DATA "/dota";

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("rotassign_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct CliRun {
  int code;
  std::string err;
};

CliRun run(const std::string& args, const std::string& env = "") {
  const fs::path err = fs::temp_directory_path() / ("rotassign_cli_err_" + std::to_string(::getpid()));
  const std::string cmd = env + (env.empty() ? "" : " ") + "'" + cli + "' " + args + " >/dev/null 2>'" + err.string() + "'";
  const int status = std::system(cmd.c_str());
  std::ifstream in(err);
  std::stringstream ss;
  ss << in.rdbuf();
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, ss.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) out[fs::relative(e.path(), root).string()] = slurp(e.path());
  return out;
}

std::string fixtures() { return "--annotations '" + data + "/labelTxt' --dims '" + data + "/dims.csv'"; }

void write(const fs::path& p, const std::string& s) {
  fs::create_directories(p.parent_path());
  std::ofstream(p) << s;
}

}  // namespace

TEST(Cli, AssignIsDeterministic) {
  const fs::path a = scratch("det_a"), b = scratch("det_b"), c = scratch("det_c");
  ASSERT_EQ(run("assign " + fixtures() + " --out '" + a.string() + "'").code, 0);
  ASSERT_EQ(run("assign " + fixtures() + " --out '" + b.string() + "'").code, 0);
  ASSERT_EQ(run("assign " + fixtures() + " --out '" + c.string() + "'", "ROTASSIGN_THREADS=3").code, 0);
  const auto ta = tree(a);
  EXPECT_EQ(ta.size(), 6u);  // 4 scenes + index + categories
  EXPECT_EQ(ta, tree(b));
  EXPECT_EQ(ta, tree(c));
  EXPECT_NE(ta.at("assign/P0004.txt").find("summary: n_pos=0 "), std::string::npos);
}

TEST(Cli, SyntheticAssignDeterministicAndSeedSensitive) {
  const fs::path a = scratch("syn_a"), b = scratch("syn_b"), c = scratch("syn_c");
  const std::string args = "assign --synthetic 3 --boxes 20 --seed 9 --out ";
  ASSERT_EQ(run(args + "'" + a.string() + "'").code, 0);
  ASSERT_EQ(run(args + "'" + b.string() + "'", "ROTASSIGN_THREADS=2").code, 0);
  ASSERT_EQ(run("assign --synthetic 3 --boxes 20 --seed 10 --out '" + c.string() + "'").code, 0);
  EXPECT_EQ(tree(a), tree(b));
  EXPECT_NE(tree(a), tree(c));
}

TEST(Cli, SingleBoxGetsFifteen) {
  const fs::path d = scratch("single");
  write(d / "in" / "S1.txt", "gsd:0.1\n300 300 420 300 420 360 300 360 plane 0\n");
  write(d / "dims.csv", "S1,800,800\n");
  ASSERT_EQ(run("assign --annotations '" + (d / "in").string() + "' --dims '" + (d / "dims.csv").string() +
                "' --out '" + (d / "out").string() + "'").code,
            0);
  const std::string doc = slurp(d / "out" / "assign" / "S1.txt");
  std::size_t n = 0;
  rotassign::text::for_each_line(doc, [&](std::size_t, std::string_view l) { n += l.starts_with("positive: "); });
  EXPECT_EQ(n, 15u);
  EXPECT_EQ(slurp(d / "out" / "categories.txt"), "0 plane\n");
}

TEST(Cli, ExitCodes) {
  const fs::path d = scratch("codes");
  write(d / "bad" / "B1.txt", "1 2 3 4 5 6 7 8 plane\n");
  write(d / "dims.csv", "B1,100,100\n");
  write(d / "nodims.csv", "Other,100,100\n");
  const std::string bad = "--annotations '" + (d / "bad").string() + "' --out '" + (d / "o").string() + "'";

  CliRun r = run("assign " + bad + " --dims '" + (d / "dims.csv").string() + "'");
  EXPECT_EQ(r.code, 3);
  EXPECT_NE(r.err.find("B1.txt"), std::string::npos) << r.err;
  EXPECT_NE(r.err.find("line 1"), std::string::npos) << r.err;

  r = run("assign " + bad + " --dims '" + (d / "nodims.csv").string() + "'");
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("'B1'"), std::string::npos) << r.err;

  EXPECT_EQ(run("assign --annotations '" + (d / "missing").string() + "' --dims '" + (d / "dims.csv").string() + "'").code, 4);
  EXPECT_EQ(run("assign --annotations '" + data + "/labelTxt' --dims '" + (d / "absent.csv").string() + "'").code, 4);
  EXPECT_EQ(run("assign --synthetic 1 --xi 1.5 --out '" + (d / "o").string() + "'").code, 2);
  EXPECT_EQ(run("assign --synthetic 1 --xi wide --out '" + (d / "o").string() + "'").code, 2);
  EXPECT_EQ(run("assign --synthetic 1 --strategy atss --out '" + (d / "o").string() + "'").code, 2);
  EXPECT_EQ(run("assign --synthetic 1 --k 0 --out '" + (d / "o").string() + "'").code, 2);
  EXPECT_EQ(run("assign --synthetic 1 --tile maybe --out '" + (d / "o").string() + "'").code, 2);
  EXPECT_EQ(run("assign --out '" + (d / "o").string() + "'").code, 2);
  EXPECT_EQ(run("compare --synthetic 1 --strategies earl --out '" + (d / "o").string() + "'").code, 2);
  EXPECT_EQ(run("render --synthetic 1 --scene nope --out '" + (d / "o").string() + "'").code, 2);
  EXPECT_EQ(run("bench --synthetic 1 --repetitions 0 --out '" + (d / "o").string() + "'").code, 2);
  EXPECT_EQ(run("frobnicate").code, 2);

  write(d / "ro" / "x", "");
  EXPECT_EQ(run("stats --synthetic 1 --out '" + (d / "ro" / "x").string() + "'").code, 4);
}

TEST(Cli, RenderMatchesAssignRecords) {
  const fs::path d = scratch("render");
  ASSERT_EQ(run("assign " + fixtures() + " --out '" + d.string() + "'").code, 0);
  ASSERT_EQ(run("render " + fixtures() + " --scene P0001 --out '" + d.string() + "'").code, 0);
  // positives from the record: (level, gx, gy)
  std::set<std::tuple<int, int, int>> rec;
  rotassign::text::for_each_line(slurp(d / "assign" / "P0001.txt"), [&](std::size_t, std::string_view l) {
    if (!l.starts_with("positive: ")) return;
    int level = 0, gx = 0, gy = 0;
    for (auto tok : rotassign::text::split_ws(l.substr(10))) {
      const auto kv = rotassign::text::split(tok, '=');
      if (kv[0] == "level") level = static_cast<int>(*rotassign::text::parse_int(kv[1]));
      if (kv[0] == "gx") gx = static_cast<int>(*rotassign::text::parse_int(kv[1]));
      if (kv[0] == "gy") gy = static_cast<int>(*rotassign::text::parse_int(kv[1]));
    }
    rec.insert({level, gx, gy});
  });
  ASSERT_FALSE(rec.empty());
  std::set<std::tuple<int, int, int>> lit;
  for (int level = 3; level <= 7; ++level) {
    const std::string pgm = slurp(d / "render" / ("P0001_P" + std::to_string(level) + ".pgm"));
    std::istringstream in(pgm);
    std::string magic;
    int w = 0, h = 0, maxv = 0;
    in >> magic >> w >> h >> maxv;
    in.get();
    ASSERT_EQ(magic, "P5");
    ASSERT_EQ(maxv, 255);
    const std::size_t off = static_cast<std::size_t>(in.tellg());
    ASSERT_EQ(pgm.size() - off, static_cast<std::size_t>(w * h));
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x)
        if (pgm[off + static_cast<std::size_t>(y * w + x)] != 0) lit.insert({level, x, y});
  }
  EXPECT_EQ(rec, lit);
  const std::string overlay = slurp(d / "render" / "P0001_weights.pgm");
  EXPECT_EQ(overlay.substr(0, 14), "P5\n1024 900\n25");
}

TEST(Cli, TiledAssignUsesWindowIds) {
  const fs::path d = scratch("tiled");
  ASSERT_EQ(run("assign " + fixtures() + " --tile on --out '" + d.string() + "'").code, 0);
  EXPECT_TRUE(fs::exists(d / "assign" / "P0003__900__450.txt"));
  EXPECT_TRUE(fs::exists(d / "assign" / "P0002__0__0.txt"));
  const std::string doc = slurp(d / "assign" / "P0003__900__450.txt");
  EXPECT_NE(doc.find("image_width: 800\n"), std::string::npos);
}

TEST(Cli, StatsCompareBench) {
  const fs::path d = scratch("misc");
  ASSERT_EQ(run("stats " + fixtures() + " --filter-difficult on --out '" + d.string() + "'").code, 0);
  EXPECT_EQ(slurp(d / "stats_percent.csv").substr(0, 40), "category,P3,P4,P5,P6,P7,total,mean_level");
  ASSERT_EQ(run("compare " + fixtures() + " --strategies earl,earl,bbox --out '" + d.string() + "'").code, 0);
  std::vector<std::string> rows;
  rotassign::text::for_each_line(slurp(d / "compare.csv"),
                                 [&](std::size_t, std::string_view l) { rows.emplace_back(l); });
  ASSERT_EQ(rows.size(), 4u);
  EXPECT_EQ(rows[1], rows[2]);
  ASSERT_EQ(run("bench --synthetic 1 --boxes 50 --repetitions 1 --strategies earl,reference --out '" + d.string() + "'").code, 0);
  const std::string bench = slurp(d / "bench.csv");
  EXPECT_NE(bench.find("\nearl,1,"), std::string::npos) << bench;
  EXPECT_NE(bench.find("\nreference-earl,1,"), std::string::npos) << bench;
}
