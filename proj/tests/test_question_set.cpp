#include <doctest.h>

#include <random>

#include "qguard/error.hpp"
#include "qguard/question_set.hpp"

#include "oracles.hpp"

using namespace qguard;

namespace {

bool has_violation(const std::vector<Violation>& violations, const std::string& code) {
  for (const auto& v : violations)
    if (v.code == code) return true;
  return false;
}

}  // namespace

TEST_CASE("default set matches the documented roster") {
  const auto& set = default_question_set();
  REQUIRE(set.groups.size() == 4);
  CHECK(set.groups[0].name == "General Toxic");
  CHECK(set.groups[1].name == "Toxic Prompt");
  CHECK(set.groups[2].name == "Core Harmfulness Detection");
  CHECK(set.groups[3].name == "Additional Nuanced Questions");
  CHECK(set.groups[0].questions.size() == 5);
  CHECK(set.groups[1].questions.size() == 10);
  CHECK(set.groups[2].questions.size() == 10);
  CHECK(set.groups[3].questions.size() == 10);
  CHECK(set.question_count() == 35);

  bool has_hate_speech = false, has_weapons = false, has_hostility = false;
  for (const auto& g : set.groups) {
    for (const auto& q : g.questions) {
      if (q.text == "Does this prompt include explicit hate speech or threatening language?")
        has_hate_speech = true;
      if (q.text ==
          "Does this prompt request or provide information on chemical or biological weapons or "
          "drug manufacturing?")
        has_weapons = true;
      if (q.text == "Does the user's input promote hostility, hatred, or divisiveness?")
        has_hostility = true;
    }
  }
  CHECK(has_hate_speech);
  CHECK(has_weapons);
  CHECK(has_hostility);
}

TEST_CASE("default set validates clean") {
  CHECK(validate(default_question_set()).empty());
}

TEST_CASE("minimal single-group document loads") {
  auto set = load_question_set(std::string(R"({
    "version": "v1",
    "groups": [{"id": "g", "name": "G", "questions": [{"id": "q", "text": "Harmful?"}]}]
  })"));
  CHECK(set.groups.size() == 1);
  CHECK(set.question_count() == 1);
  CHECK(set.similarity.empty());
  CHECK(set.groups[0].questions[0].group_id == "g");
}

TEST_CASE("duplicate question id across groups is rejected") {
  std::string doc = R"({
    "version": "v1",
    "groups": [
      {"id": "a", "name": "A", "questions": [{"id": "q1", "text": "x?"}]},
      {"id": "b", "name": "B", "questions": [{"id": "q1", "text": "y?"}]}
    ]
  })";
  try {
    load_question_set(doc);
    FAIL("expected validation error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Validation);
    CHECK(std::string(e.what()).find("DUPLICATE_QUESTION_ID") != std::string::npos);
  }
}

TEST_CASE("schema violations name the offending path") {
  std::string doc = R"({
    "version": "v1",
    "groups": [{"id": "a", "name": "A", "questions": [{"id": "q1"}]}]
  })";
  try {
    load_question_set(doc);
    FAIL("expected parse error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Parse);
    CHECK(std::string(e.what()).find("$.groups[0].questions[0].text") != std::string::npos);
  }
}

TEST_CASE("validate reports EMPTY_TEXT") {
  QuestionSet set;
  set.version = "v";
  set.groups = {{"g", "G", {{"q", "", "g"}}}};
  auto violations = validate(set);
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].code == "EMPTY_TEXT");
  CHECK(violations[0].path == "groups[0].questions[0].text");
}

TEST_CASE("validate reports SELF_SIMILARITY") {
  QuestionSet set;
  set.version = "v";
  set.groups = {{"g1", "G1", {{"q1", "x?", "g1"}}}, {"g2", "G2", {{"q2", "y?", "g2"}}}};
  set.similarity[{"g1", "g1"}] = 0.5;
  auto violations = validate(set);
  CHECK(has_violation(violations, "SELF_SIMILARITY"));
}

TEST_CASE("validate reports dangling similarity and empty groups") {
  QuestionSet set;
  set.version = "v";
  set.groups = {{"g1", "G1", {{"q1", "x?", "g1"}}}, {"g2", "G2", {}}};
  set.similarity[{"g1", "nope"}] = 0.5;
  auto violations = validate(set);
  CHECK(has_violation(violations, "DANGLING_SIMILARITY"));
  CHECK(has_violation(violations, "EMPTY_GROUP"));
}

TEST_CASE("zero-group set is invalid") {
  QuestionSet set;
  set.version = "v";
  CHECK(has_violation(validate(set), "EMPTY_SET"));
}

TEST_CASE("duplicate similarity pair is rejected at load") {
  std::string doc = R"({
    "version": "v1",
    "groups": [
      {"id": "a", "name": "A", "questions": [{"id": "q1", "text": "x?"}]},
      {"id": "b", "name": "B", "questions": [{"id": "q2", "text": "y?"}]}
    ],
    "similarity": [
      {"a": "a", "b": "b", "weight": 0.4},
      {"a": "b", "b": "a", "weight": 0.4}
    ]
  })";
  CHECK_THROWS_AS(load_question_set(doc), Error);
}

TEST_CASE("similarity lookup is symmetric") {
  auto set = load_question_set(std::string(R"({
    "version": "v1",
    "groups": [
      {"id": "a", "name": "A", "questions": [{"id": "q1", "text": "x?"}]},
      {"id": "b", "name": "B", "questions": [{"id": "q2", "text": "y?"}]}
    ],
    "similarity": [{"a": "b", "b": "a", "weight": 0.4}]
  })"));
  CHECK(set.similarity_between("a", "b") == 0.4);
  CHECK(set.similarity_between("b", "a") == 0.4);
  CHECK(!set.similarity_between("a", "missing").has_value());
}

TEST_CASE("serialize/load round-trips random sets field-by-field") {
  std::mt19937 rng(1234);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto roster = qguard::testing::random_roster(rng, 1, 5, 1, 8);
    // Sprinkle similarity entries over distinct group pairs.
    auto& set = roster.set;
    for (std::size_t i = 0; i + 1 < set.groups.size(); i += 2)
      set.similarity[{set.groups[i].id, set.groups[i + 1].id}] = unit(rng);
    auto round_tripped = load_question_set(serialize(set));
    CHECK(round_tripped == set);
  }
}

TEST_CASE("load rejects exactly the documents validate flags") {
  // Mutations that stay structurally parseable but break one invariant each.
  std::mt19937 rng(99);
  for (int trial = 0; trial < 30; ++trial) {
    auto roster = qguard::testing::random_roster(rng, 2, 4, 1, 5);
    auto doc = serialize(roster.set);
    int mutation = trial % 3;
    if (mutation == 0) {
      doc["groups"][0]["questions"][0]["text"] = "";
    } else if (mutation == 1) {
      doc["similarity"] = nlohmann::json::array(
          {{{"a", doc["groups"][0]["id"]}, {"b", doc["groups"][0]["id"]}, {"weight", 1.0}}});
    } else {
      doc["groups"][1]["id"] = doc["groups"][0]["id"];
    }
    CHECK_THROWS_AS(load_question_set(doc), Error);
  }
}
