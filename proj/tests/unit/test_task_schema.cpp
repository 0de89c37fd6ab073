#include <gtest/gtest.h>

#include "test_support.hpp"
#include "textcoder/error.hpp"
#include "textcoder/prompt.hpp"
#include "textcoder/task_schema.hpp"

using namespace textcoder;
using tctest::fatherhood_suite;

namespace {

const char* kTwoTasks = R"(
tasks:
  - id: a
    default_label: na
    labels:
      - id: x
        aliases: [ex]
        description_short: short x
      - id: na
        description_short: short na
  - id: b
    default_label: na
    labels: [y, na]
gate: {task: a, label: na}
)";

void expect_schema_error(const std::string& yaml, const std::string& fragment) {
  try {
    load_task_suite(yaml);
    FAIL() << "expected SchemaError containing '" << fragment << "'";
  } catch (const SchemaError& e) {
    EXPECT_NE(std::string(e.what()).find(fragment), std::string::npos) << e.what();
  }
}

}  // namespace

TEST(TaskSchema, FatherhoodSuiteShape) {
  const auto& s = fatherhood_suite();
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s.tasks()[0].id, "involvement");
  EXPECT_EQ(s.tasks()[0].labels.size(), 6u);
  EXPECT_EQ(s.tasks()[1].labels.size(), 3u);
  EXPECT_EQ(s.tasks()[2].labels.size(), 3u);
  ASSERT_TRUE(s.gate().has_value());
  EXPECT_EQ(s.gate()->label_id, "not_applicable");
  EXPECT_TRUE(s.tasks()[0].offers(DescriptionLevel::kLong));
  EXPECT_FALSE(s.tasks()[1].offers(DescriptionLevel::kShort));
  EXPECT_TRUE(s.tasks()[2].offers(DescriptionLevel::kShort));
  EXPECT_FALSE(s.tasks()[2].offers(DescriptionLevel::kLong));
}

TEST(TaskSchema, SerializeRoundTrip) {
  const auto& s = fatherhood_suite();
  EXPECT_EQ(load_task_suite(serialize_task_suite(s)), s);
  const auto small = load_task_suite(kTwoTasks);
  EXPECT_EQ(load_task_suite(serialize_task_suite(small)), small);
}

TEST(TaskSchema, ResolveEveryIdAndAlias) {
  for (const auto& task : fatherhood_suite().tasks()) {
    for (const auto& l : task.labels) {
      EXPECT_EQ(resolve_label(task, l.id), (LabelResolution{l.id, false}));
      std::string upper;
      for (const char c : l.id) upper += static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
      EXPECT_EQ(resolve_label(task, "  " + upper + "\n"), (LabelResolution{l.id, false}));
      for (const auto& a : l.aliases) EXPECT_EQ(resolve_label(task, a), (LabelResolution{l.id, false}));
    }
  }
}

TEST(TaskSchema, DaringIsAnAliasOfChallenging) {
  const auto& t = fatherhood_suite().task("involvement");
  EXPECT_EQ(resolve_label(t, "active_positive_daring").id, "active_positive_challenging");
}

TEST(TaskSchema, UnknownSurfaceFallsBack) {
  const auto& t = fatherhood_suite().task("involvement");
  EXPECT_EQ(resolve_label(t, "very active"), (LabelResolution{"not_applicable", true}));
  EXPECT_EQ(resolve_label(t, ""), (LabelResolution{"not_applicable", true}));
  // No substring search inside prose.
  EXPECT_TRUE(resolve_label(t, "the father is passive").fallback);
}

TEST(TaskSchema, ApplyGate) {
  const auto& s = fatherhood_suite();
  const std::vector<std::string> na(3, "not_applicable");
  EXPECT_EQ(apply_gate(s, {"not_applicable"}), na);
  EXPECT_EQ(apply_gate(s, {"not_applicable", "explicit", "ideal"}), na);
  const std::vector<std::string> full = {"passive", "explicit", "ideal"};
  EXPECT_EQ(apply_gate(s, full), full);
  EXPECT_THROW(apply_gate(s, {"passive", "sometimes", "ideal"}), PreconditionError);
  EXPECT_THROW(apply_gate(s, {"passive", "explicit"}), PreconditionError);
}

TEST(TaskSchema, GatedLabelDefaultsToGateLabel) {
  const auto s = load_task_suite(kTwoTasks);
  EXPECT_EQ(s.gated_label(0), "na");
  EXPECT_EQ(s.gated_label(1), "na");
  EXPECT_TRUE(s.triggers_gate("na"));
  EXPECT_FALSE(s.triggers_gate("x"));
}

TEST(TaskSchema, DescriptionLevelsInferredFromLabels) {
  const auto s = load_task_suite(kTwoTasks);
  EXPECT_TRUE(s.task("a").offers(DescriptionLevel::kShort));
  EXPECT_FALSE(s.task("a").offers(DescriptionLevel::kLong));
  EXPECT_FALSE(s.task("b").offers(DescriptionLevel::kShort));
}

TEST(TaskSchema, EffectiveLevelFallsBackToRichestOffered) {
  const auto& s = fatherhood_suite();
  EXPECT_EQ(effective_level(s.task("involvement"), DescriptionLevel::kLong), DescriptionLevel::kLong);
  EXPECT_EQ(effective_level(s.task("explicitness"), DescriptionLevel::kLong), DescriptionLevel::kNone);
  EXPECT_EQ(effective_level(s.task("normativeness"), DescriptionLevel::kLong), DescriptionLevel::kShort);
}

TEST(TaskSchema, RejectsMalformedSuites) {
  expect_schema_error("tasks: []", "non-empty");
  expect_schema_error("tasks: [ {id: a, default_label: x, labels: [x]} ]", "at least two labels");
  expect_schema_error("tasks: [ {id: a, default_label: z, labels: [x, y]} ]", "default label 'z'");
  expect_schema_error(
      "tasks: [ {id: a, default_label: x, labels: [x, y]}, {id: a, default_label: x, labels: [x, y]} ]",
      "duplicate task id 'a'");
  expect_schema_error(
      "tasks: [ {id: a, default_label: x, labels: [ {id: x, aliases: [Y]}, y ]} ]",
      "label collision");
  expect_schema_error("tasks: [ {id: a, default_label: x, labels: [X, y]} ]", "lowercase");
  expect_schema_error("tasks: [ {id: a, default_label: x, labels: [x, y]} ]\ngate: {task: b, label: x}",
                      "unknown task 'b'");
  expect_schema_error("tasks: [ {id: a, default_label: x, labels: [x, y]} ]\ngate: {task: a, label: q}",
                      "unknown label 'q'");
  expect_schema_error(
      "tasks: [ {id: a, default_label: x, labels: [x, y]}, {id: b, default_label: x, labels: [x, na]} ]\n"
      "gate: {task: b, label: na}",
      "must be the first task");
  expect_schema_error(
      "tasks: [ {id: a, default_label: na, labels: [x, na]}, {id: b, default_label: y, labels: [y, z]} ]\n"
      "gate: {task: a, label: na}",
      "lacks the not-applicable label");
  expect_schema_error(
      "tasks: [ {id: a, default_label: x, description_levels: [long], labels: [x, y]} ]",
      "offers long descriptions");
  expect_schema_error("tasks: [ {id: a, labels: [x, y]} ]", "missing 'default_label'");
  expect_schema_error("tasks: [ {id: a\n", "does not parse");
}

TEST(TaskSchema, UnknownDescriptionLevelIsConfigError) {
  EXPECT_EQ(parse_description_level("short"), DescriptionLevel::kShort);
  EXPECT_THROW(parse_description_level("medium"), ConfigError);
}

TEST(TaskSchema, MissingFileIsConfigError) {
  EXPECT_THROW(load_task_suite_file("/nonexistent/suite.yaml"), ConfigError);
}
