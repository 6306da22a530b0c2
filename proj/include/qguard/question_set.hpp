#pragma once

#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

namespace qguard {

struct GuardQuestion {
  std::string id;
  std::string text;
  std::string group_id;

  bool operator==(const GuardQuestion&) const = default;
};

struct GuardGroup {
  std::string id;
  std::string name;
  std::vector<GuardQuestion> questions;

  bool operator==(const GuardGroup&) const = default;
};

// A bank of guard questions partitioned into groups, plus an optional
// symmetric group-similarity map. Immutable after load; safe to share across
// threads without synchronization.
struct QuestionSet {
  std::string version;
  std::vector<GuardGroup> groups;
  // Keyed by the unordered pair normalized to (min, max) lexicographically.
  std::map<std::pair<std::string, std::string>, double> similarity;

  std::size_t question_count() const;
  const GuardQuestion* find_question(const std::string& question_id) const;
  std::optional<double> similarity_between(const std::string& a, const std::string& b) const;

  bool operator==(const QuestionSet&) const = default;
};

struct Violation {
  std::string code;     // machine-readable, e.g. "EMPTY_TEXT"
  std::string path;     // e.g. "groups[1].questions[2].text"
  std::string message;  // human-readable detail
};

// Returns every invariant violation; empty means the set is valid.
std::vector<Violation> validate(const QuestionSet& set);

// Parses and validates a question-set document. Throws Error(Parse) for
// structural problems (wrong types, missing keys — message names the path)
// and Error(Validation) when validate() reports violations.
QuestionSet load_question_set(const nlohmann::json& doc);
QuestionSet load_question_set(const std::string& json_text);
QuestionSet load_question_set_file(const std::string& path);

// Canonical document form; load_question_set(serialize(s)) == s.
nlohmann::json serialize(const QuestionSet& set);

// The built-in default bank: 4 groups of 5/10/10/10 questions.
const QuestionSet& default_question_set();

}  // namespace qguard
