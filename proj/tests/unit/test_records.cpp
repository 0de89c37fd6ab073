#include <gtest/gtest.h>

#include "test_support.hpp"
#include "textcoder/error.hpp"
#include "textcoder/records.hpp"

using namespace textcoder;
using tctest::fatherhood_suite;
using Rows = std::vector<std::vector<std::string>>;

TEST(Csv, ParsesQuotedFieldsAndLineEndings) {
  EXPECT_EQ(parse_csv("a,b\r\n\"c,d\",\"e \"\"q\"\"\"\n"), (Rows{{"a", "b"}, {"c,d", "e \"q\""}}));
  EXPECT_EQ(parse_csv("x,\n"), (Rows{{"x", ""}}));
  EXPECT_EQ(parse_csv("\"multi\nline\",z"), (Rows{{"multi\nline", "z"}}));
  EXPECT_THROW(parse_csv("\"open"), ConfigError);
}

TEST(Csv, EscapeRoundTrips) {
  for (const std::string f : {"plain", "with,comma", "with \"quote\"", "new\nline", ""}) {
    const auto rows = parse_csv(csv_escape(f) + "," + csv_escape(f) + "\n");
    ASSERT_EQ(rows.size(), 1u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{f, f}));
  }
  EXPECT_EQ(csv_escape("plain"), "plain");
}

TEST(Files, AtomicWriteCreatesDirectories) {
  tctest::TempDir tmp;
  const auto p = tmp / "a/b/c.txt";
  write_text_file(p, "hello");
  EXPECT_EQ(read_text_file(p), "hello");
  write_text_file(p, "again");
  EXPECT_EQ(read_text_file(p), "again");
  EXPECT_FALSE(std::filesystem::exists(tmp / "a/b/c.txt.tmp"));
  EXPECT_THROW(read_text_file(tmp / "missing"), ConfigError);
}

TEST(Instances, JsonlRoundTrip) {
  const std::vector<Instance> in = {make_instance("d:0", "d", "pappan läser ."),
                                    make_instance("d:1", "d", "fäder \"citat\" .")};
  const auto back = instances_from_jsonl(instances_to_jsonl(in));
  ASSERT_EQ(back.size(), 2u);
  EXPECT_EQ(back[1].text, in[1].text);
  EXPECT_EQ(back[1].token_spans, in[1].token_spans);
  EXPECT_EQ(back[0].doc_id, "d");
  EXPECT_THROW(instances_from_jsonl("{\"id\":\"a\",\"text\":\"x\"}\n{\"id\":\"a\",\"text\":\"y\"}\n"),
               ConfigError);
  EXPECT_THROW(instances_from_jsonl("{not json}\n"), ConfigError);
}

TEST(Annotations, JsonlRoundTrip) {
  AnnotationRecord r;
  r.instance_id = "i";
  r.run_id = "run";
  r.task_ids = {"involvement", "explicitness", "normativeness"};
  r.labels = {"passive", "explicit", "not_applicable"};
  r.fallback_applied = {false, false, true};
  r.extra_ignored = true;
  r.raw_response = "passive, explicit\n\"x\"";
  const std::vector<AnnotationRecord> in = {r};
  EXPECT_EQ(annotations_from_jsonl(annotations_to_jsonl(in)), in);
  EXPECT_THROW(annotations_from_jsonl("{\"instance_id\":\"i\",\"task_ids\":[\"a\"],\"labels\":[]}\n"),
               ConfigError);
}

TEST(Annotations, CsvLayout) {
  AnnotationRecord r;
  r.instance_id = "i,1";
  r.task_ids = {"a", "b"};
  r.labels = {"x", "y"};
  r.fallback_applied = {false, true};
  const std::vector<AnnotationRecord> in = {r};
  const std::vector<std::string> tasks = {"a", "b"};
  EXPECT_EQ(annotations_to_csv(in, tasks), "instance_id,a,b,a_fallback,b_fallback\n\"i,1\",x,y,0,1\n");
}

TEST(Gold, ParsesPanelsAndResolvesAliases) {
  const auto g = parse_gold_csv(
      "instance_id,h1:involvement,h2:involvement,h1:explicitness\n"
      "a,passive,active positive daring,explicit\n"
      "b,not_applicable,passive,not_applicable\n",
      fatherhood_suite());
  EXPECT_EQ(g.instance_ids, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(g.annotators, (std::vector<std::string>{"h1", "h2"}));
  const auto panel = g.panel("involvement");
  ASSERT_EQ(panel.size(), 2u);
  EXPECT_EQ(panel[1].labels, (std::vector<std::string>{"active_positive_challenging", "passive"}));
  EXPECT_EQ(panel[0].instance_ids, g.instance_ids);
  EXPECT_EQ(g.panel("explicitness").size(), 1u);
  EXPECT_TRUE(g.panel("normativeness").empty());
}

TEST(Gold, UnknownLabelsAreListed) {
  try {
    parse_gold_csv("instance_id,h1:involvement\na,passive\nb,busy\n", fatherhood_suite());
    FAIL();
  } catch (const SchemaError& e) {
    const std::string what = e.what();
    EXPECT_NE(what.find("b h1:involvement='busy'"), std::string::npos) << what;
  }
}

TEST(Gold, StructuralErrors) {
  EXPECT_THROW(parse_gold_csv("", fatherhood_suite()), ConfigError);
  EXPECT_THROW(parse_gold_csv("id,h1:involvement\n", fatherhood_suite()), ConfigError);
  EXPECT_THROW(parse_gold_csv("instance_id,h1\n", fatherhood_suite()), ConfigError);
  EXPECT_THROW(parse_gold_csv("instance_id,h1:mood\n", fatherhood_suite()), ConfigError);
  EXPECT_THROW(parse_gold_csv("instance_id,h1:involvement,h1:involvement\n", fatherhood_suite()), ConfigError);
  EXPECT_THROW(parse_gold_csv("instance_id,h1:involvement\na,passive,extra\n", fatherhood_suite()), ConfigError);
  EXPECT_THROW(parse_gold_csv("instance_id,h1:involvement\na,passive\na,passive\n", fatherhood_suite()),
               ConfigError);
}

TEST(Scores, WithAndWithoutHeader) {
  const auto rows = parse_scores_csv("annotator,kappa,raw,f1\nHuman 1,49.30,61.29,57.22\n", "involvement");
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_EQ(rows[0].annotator_id, "Human 1");
  EXPECT_DOUBLE_EQ(rows[0].kappa, 49.30);
  EXPECT_EQ(rows[0].task_id, "involvement");
  EXPECT_EQ(rows[0].against, "precomputed");
  EXPECT_EQ(parse_scores_csv("0,1,2,3\n").size(), 1u);
  EXPECT_THROW(parse_scores_csv("a,1,2\n"), ConfigError);
  EXPECT_THROW(parse_scores_csv("a,1,x,3\n"), ConfigError);
  EXPECT_THROW(parse_scores_csv("annotator,kappa,raw,f1\n"), ConfigError);
}
