#include <sys/wait.h>

#include <gtest/gtest.h>

#include "json.hpp"
#include "test_util.h"

namespace {

const std::string kCli = QARANK_CLI;
const std::string kData = QARANK_DATA_DIR;

struct Run {
  int status;
  std::string out, err;
};

Run run(const test::TempDir& dir, const std::string& args) {
  const std::string out = dir.file("stdout.txt"), err = dir.file("stderr.txt");
  const int raw = std::system((kCli + " " + args + " >" + out + " 2>" + err).c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, test::read_file(out), test::read_file(err)};
}

std::string corpus() { return kData + "/toy_corpus.jsonl"; }
std::string questions() { return kData + "/toy_questions.jsonl"; }

TEST(Cli, UsageErrorsExitWithTwo) {
  test::TempDir dir;
  EXPECT_EQ(run(dir, "").status, 2);
  EXPECT_EQ(run(dir, "frobnicate").status, 2);
  EXPECT_EQ(run(dir, "build-index --out " + dir.file("i.bin")).status, 2);
  EXPECT_EQ(run(dir, "build-index --corpus /nonexistent --out " + dir.file("i.bin")).status, 2);
  EXPECT_EQ(run(dir, "evaluate --corpus " + corpus() + " --full-pipeline").status, 2);
  EXPECT_EQ(run(dir, "evaluate --corpus " + corpus() + " --top-n zero --full-pipeline --questions " +
                         questions())
                .status,
            2);
  EXPECT_EQ(run(dir, "--help").status, 0);
}

TEST(Cli, RuntimeErrorsExitWithOne) {
  test::TempDir dir;
  test::write_file(dir.file("bad.jsonl"), "{\"doc_id\": \"a\"}\nnot json\n");
  auto r = run(dir, "build-index --corpus " + dir.file("bad.jsonl") + " --out " + dir.file("i.bin"));
  EXPECT_EQ(r.status, 1);
  EXPECT_FALSE(r.err.empty());
  test::write_file(dir.file("trash.bin"), "garbage");
  r = run(dir, "evaluate --corpus " + corpus() + " --index " + dir.file("trash.bin") +
                   " --full-pipeline --questions " + questions());
  EXPECT_EQ(r.status, 1);
}

TEST(Cli, BuildIndexIsDeterministicAndRecordsBuckets) {
  test::TempDir dir;
  auto a = run(dir, "build-index --corpus " + corpus() + " --out " + dir.file("a.bin"));
  ASSERT_EQ(a.status, 0) << a.err;
  EXPECT_NE(a.out.find("documents=100"), std::string::npos);
  ASSERT_EQ(run(dir, "build-index --corpus " + corpus() + " --out " + dir.file("b.bin")).status, 0);
  EXPECT_EQ(test::read_file(dir.file("a.bin")), test::read_file(dir.file("b.bin")));
  auto c = run(dir, "build-index --corpus " + corpus() + " --num-buckets 4096 --out " +
                        dir.file("c.bin"));
  ASSERT_EQ(c.status, 0) << c.err;
  EXPECT_NE(c.out.find("buckets=4096"), std::string::npos);
  EXPECT_NE(test::read_file(dir.file("a.bin")), test::read_file(dir.file("c.bin")));
  // A prebuilt index gives the same report as building on the fly.
  auto with = run(dir, "evaluate --corpus " + corpus() + " --index " + dir.file("a.bin") +
                           " --full-pipeline --questions " + questions());
  auto without = run(dir, "evaluate --corpus " + corpus() + " --full-pipeline --questions " +
                              questions());
  ASSERT_EQ(with.status, 0) << with.err;
  EXPECT_EQ(with.out, without.out);
}

TEST(Cli, ReadTrainRerankEvaluate) {
  test::TempDir dir;
  const std::string dump = dir.file("toy.jsonl");
  ASSERT_EQ(run(dir, "read --corpus " + corpus() + " --questions " + questions() + " --out " + dump)
                .status,
            0);
  const std::string train_args = "train --corpus " + corpus() + " --datasets " + dump +
                                 " --hidden-units 16 --max-epochs 5 --patience 2 --out ";
  auto t1 = run(dir, train_args + dir.file("m1.json") + " --log " + dir.file("log.txt"));
  ASSERT_EQ(t1.status, 0) << t1.err;
  ASSERT_EQ(run(dir, train_args + dir.file("m2.json")).status, 0);
  EXPECT_EQ(test::read_file(dir.file("m1.json")), test::read_file(dir.file("m2.json")));
  EXPECT_FALSE(test::read_file(dir.file("log.txt")).empty());
  auto bundle = nlohmann::json::parse(test::read_file(dir.file("m1.json")));
  EXPECT_EQ(bundle["m"], 16);
  EXPECT_EQ(bundle["datasets"], nlohmann::json::array({"toy"}));

  auto rr = run(dir, "rerank --corpus " + corpus() + " --dump " + dump + " --model " +
                         dir.file("m1.json") + " --out " + dir.file("answers.jsonl") +
                         " --report " + dir.file("report.json"));
  ASSERT_EQ(rr.status, 0) << rr.err;
  auto report = nlohmann::json::parse(test::read_file(dir.file("report.json")));
  EXPECT_LE(report["em"].get<double>(), report["upper_bound_em"].get<double>());
  std::size_t lines = 0;
  for (char ch : test::read_file(dir.file("answers.jsonl"))) lines += ch == '\n';
  EXPECT_EQ(lines, 50u);

  auto ev = run(dir, "evaluate --corpus " + corpus() + " --dump " + dump + " --model " +
                         dir.file("m1.json") + " --verdicts");
  ASSERT_EQ(ev.status, 0) << ev.err;
  auto j = nlohmann::json::parse(ev.out);
  EXPECT_EQ(j["em"], report["em"]);
  EXPECT_EQ(j["verdicts"].size(), 50u);
}

TEST(Cli, ProfileMismatchIsRejected) {
  test::TempDir dir;
  const std::string dump = dir.file("toy.jsonl");
  ASSERT_EQ(run(dir, "read --corpus " + corpus() + " --questions " + questions() +
                         " --profile bert --out " + dump)
                .status,
            0);
  ASSERT_EQ(run(dir, "init-model --out " + dir.file("id.json")).status, 0);
  auto r = run(dir, "evaluate --corpus " + corpus() + " --dump " + dump + " --model " +
                        dir.file("id.json") + " --profile bert");
  EXPECT_EQ(r.status, 1);
  EXPECT_NE(r.err.find("profile"), std::string::npos);
  ASSERT_EQ(run(dir, "init-model --profile bert --out " + dir.file("bert.json")).status, 0);
  EXPECT_EQ(run(dir, "evaluate --corpus " + corpus() + " --dump " + dump + " --model " +
                         dir.file("bert.json"))
                .status,
            0);
}

TEST(Cli, SweepEmitsOneRowPerSize) {
  test::TempDir dir;
  auto r = run(dir, "sweep --sizes 1000 10000 --out " + dir.file("s.csv"));
  ASSERT_EQ(r.status, 0) << r.err;
  const std::string csv = test::read_file(dir.file("s.csv"));
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 3);
  EXPECT_NE(csv.find("\n1000,"), std::string::npos);
  EXPECT_NE(csv.find("\n10000,"), std::string::npos);
  EXPECT_EQ(run(dir, "sweep --sizes 1000 500").status, 1);
}

TEST(Cli, GenerateToyReproducesBundledData) {
  test::TempDir dir;
  ASSERT_EQ(run(dir, "generate-toy --corpus-out " + dir.file("c.jsonl") + " --questions-out " +
                         dir.file("q.jsonl"))
                .status,
            0);
  EXPECT_EQ(test::read_file(dir.file("c.jsonl")), test::read_file(corpus()));
  EXPECT_EQ(test::read_file(dir.file("q.jsonl")), test::read_file(questions()));
}

}  // namespace
