#include "qguard/question_set.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "qguard/error.hpp"
#include "qguard/util.hpp"

namespace qguard {

std::size_t QuestionSet::question_count() const {
  std::size_t n = 0;
  for (const auto& g : groups) n += g.questions.size();
  return n;
}

const GuardQuestion* QuestionSet::find_question(const std::string& question_id) const {
  for (const auto& g : groups)
    for (const auto& q : g.questions)
      if (q.id == question_id) return &q;
  return nullptr;
}

std::optional<double> QuestionSet::similarity_between(const std::string& a,
                                                      const std::string& b) const {
  auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  auto it = similarity.find(key);
  if (it == similarity.end()) return std::nullopt;
  return it->second;
}

std::vector<Violation> validate(const QuestionSet& set) {
  std::vector<Violation> out;
  auto add = [&out](std::string code, std::string path, std::string message) {
    out.push_back({std::move(code), std::move(path), std::move(message)});
  };

  if (set.groups.empty()) add("EMPTY_SET", "groups", "question set has no groups");

  std::set<std::string> group_ids;
  std::set<std::string> question_ids;
  for (std::size_t gi = 0; gi < set.groups.size(); ++gi) {
    const auto& g = set.groups[gi];
    std::string gpath = "groups[" + std::to_string(gi) + "]";
    if (g.id.empty()) add("EMPTY_ID", gpath + ".id", "group id is empty");
    if (!group_ids.insert(g.id).second)
      add("DUPLICATE_GROUP_ID", gpath + ".id", "duplicate group id '" + g.id + "'");
    if (g.questions.empty())
      add("EMPTY_GROUP", gpath + ".questions", "group '" + g.id + "' has no questions");
    for (std::size_t qi = 0; qi < g.questions.size(); ++qi) {
      const auto& q = g.questions[qi];
      std::string qpath = gpath + ".questions[" + std::to_string(qi) + "]";
      if (q.id.empty()) add("EMPTY_ID", qpath + ".id", "question id is empty");
      if (!question_ids.insert(q.id).second)
        add("DUPLICATE_QUESTION_ID", qpath + ".id", "duplicate question id '" + q.id + "'");
      if (q.text.empty()) add("EMPTY_TEXT", qpath + ".text", "question text is empty");
      if (q.group_id != g.id)
        add("GROUP_MISMATCH", qpath + ".group_id",
            "question '" + q.id + "' claims group '" + q.group_id + "' but lives in '" + g.id + "'");
    }
  }

  std::size_t si = 0;
  for (const auto& [key, weight] : set.similarity) {
    std::string spath = "similarity[" + std::to_string(si++) + "]";
    if (key.first == key.second)
      add("SELF_SIMILARITY", spath, "similarity pair (" + key.first + ", " + key.second + ")");
    for (const auto& gid : {key.first, key.second}) {
      if (!group_ids.count(gid))
        add("DANGLING_SIMILARITY", spath, "similarity references unknown group '" + gid + "'");
    }
    if (!(weight >= 0.0) || !std::isfinite(weight))
      add("NEGATIVE_SIMILARITY", spath + ".weight",
          "similarity weight must be finite and >= 0, got " + format_double(weight));
  }
  return out;
}

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key))
    throw Error(ErrorCode::Parse, "missing field: " + path + "." + key);
  return obj.at(key);
}

std::string require_string(const nlohmann::json& obj, const char* key, const std::string& path) {
  const auto& v = require(obj, key, path);
  if (!v.is_string())
    throw Error(ErrorCode::Parse, "expected string at " + path + "." + key);
  return v.get<std::string>();
}

}  // namespace

QuestionSet load_question_set(const nlohmann::json& doc) {
  if (!doc.is_object()) throw Error(ErrorCode::Parse, "question set document must be an object");
  QuestionSet set;
  set.version = require_string(doc, "version", "$");

  const auto& groups = require(doc, "groups", "$");
  if (!groups.is_array()) throw Error(ErrorCode::Parse, "expected array at $.groups");
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    const auto& gj = groups[gi];
    std::string gpath = "$.groups[" + std::to_string(gi) + "]";
    GuardGroup group;
    group.id = require_string(gj, "id", gpath);
    group.name = require_string(gj, "name", gpath);
    const auto& questions = require(gj, "questions", gpath);
    if (!questions.is_array()) throw Error(ErrorCode::Parse, "expected array at " + gpath + ".questions");
    for (std::size_t qi = 0; qi < questions.size(); ++qi) {
      const auto& qj = questions[qi];
      std::string qpath = gpath + ".questions[" + std::to_string(qi) + "]";
      GuardQuestion q;
      q.id = require_string(qj, "id", qpath);
      q.text = require_string(qj, "text", qpath);
      q.group_id = group.id;
      group.questions.push_back(std::move(q));
    }
    set.groups.push_back(std::move(group));
  }

  if (doc.contains("similarity")) {
    const auto& sim = doc.at("similarity");
    if (!sim.is_array()) throw Error(ErrorCode::Parse, "expected array at $.similarity");
    for (std::size_t si = 0; si < sim.size(); ++si) {
      const auto& sj = sim[si];
      std::string spath = "$.similarity[" + std::to_string(si) + "]";
      std::string a = require_string(sj, "a", spath);
      std::string b = require_string(sj, "b", spath);
      const auto& wj = require(sj, "weight", spath);
      if (!wj.is_number()) throw Error(ErrorCode::Parse, "expected number at " + spath + ".weight");
      double w = wj.get<double>();
      auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
      if (set.similarity.count(key))
        throw Error(ErrorCode::Validation,
                    "DUPLICATE_SIMILARITY at " + spath + ": pair (" + a + ", " + b + ") listed twice");
      set.similarity.emplace(key, w);
    }
  }

  auto violations = validate(set);
  if (!violations.empty()) {
    std::ostringstream msg;
    msg << "invalid question set (" << violations.size() << " violation(s)):";
    for (const auto& v : violations) msg << " [" << v.code << " at " << v.path << "] " << v.message << ";";
    throw Error(ErrorCode::Validation, msg.str());
  }
  return set;
}

QuestionSet load_question_set(const std::string& json_text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("question set is not valid JSON: ") + e.what());
  }
  return load_question_set(doc);
}

QuestionSet load_question_set_file(const std::string& path) {
  return load_question_set(read_file(path));
}

nlohmann::json serialize(const QuestionSet& set) {
  nlohmann::json doc;
  doc["version"] = set.version;
  doc["groups"] = nlohmann::json::array();
  for (const auto& g : set.groups) {
    nlohmann::json gj;
    gj["id"] = g.id;
    gj["name"] = g.name;
    gj["questions"] = nlohmann::json::array();
    for (const auto& q : g.questions) gj["questions"].push_back({{"id", q.id}, {"text", q.text}});
    doc["groups"].push_back(std::move(gj));
  }
  if (!set.similarity.empty()) {
    doc["similarity"] = nlohmann::json::array();
    for (const auto& [key, w] : set.similarity)
      doc["similarity"].push_back({{"a", key.first}, {"b", key.second}, {"weight", w}});
  }
  return doc;
}

}  // namespace qguard
