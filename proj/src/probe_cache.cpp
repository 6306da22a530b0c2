#include "qguard/probe_cache.hpp"

#include <cmath>

#include <json.hpp>

#include "qguard/error.hpp"

namespace qguard {

std::string ProbeCache::make_key(const std::string& backend_id, const std::string& digest,
                                 const std::string& question_id) {
  std::string key;
  key.reserve(backend_id.size() + digest.size() + question_id.size() + 2);
  key.append(backend_id);
  key.push_back('\x1f');
  key.append(digest);
  key.push_back('\x1f');
  key.append(question_id);
  return key;
}

ProbeCache::ProbeCache(const std::string& path) {
  if (path.empty()) return;
  {
    std::ifstream in(path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        auto j = nlohmann::json::parse(line);
        LogitPair lp{j.at("yes_logit").get<double>(), j.at("no_logit").get<double>()};
        if (!std::isfinite(lp.yes_logit) || !std::isfinite(lp.no_logit)) {
          ++skipped_;
          continue;
        }
        map_[make_key(j.at("backend_id").get<std::string>(), j.at("digest").get<std::string>(),
                      j.at("question_id").get<std::string>())] = lp;
      } catch (const nlohmann::json::exception&) {
        // A truncated trailing line from an interrupted run is not fatal.
        ++skipped_;
      }
    }
  }
  out_.open(path, std::ios::app);
  if (!out_) throw Error(ErrorCode::Io, "cannot open probe cache for append: " + path);
}

std::optional<LogitPair> ProbeCache::lookup(const std::string& backend_id,
                                            const std::string& digest,
                                            const std::string& question_id) {
  std::lock_guard lock(mu_);
  auto it = map_.find(make_key(backend_id, digest, question_id));
  if (it == map_.end()) return std::nullopt;
  return it->second;
}

void ProbeCache::store(const std::string& backend_id, const std::string& digest,
                       const std::string& question_id, const LogitPair& logits) {
  std::lock_guard lock(mu_);
  auto [it, inserted] = map_.insert_or_assign(make_key(backend_id, digest, question_id), logits);
  (void)it;
  if (out_.is_open()) {
    nlohmann::json j{{"backend_id", backend_id},
                     {"digest", digest},
                     {"question_id", question_id},
                     {"yes_logit", logits.yes_logit},
                     {"no_logit", logits.no_logit}};
    out_ << j.dump() << '\n';
    out_.flush();
  }
}

std::size_t ProbeCache::size() const {
  std::lock_guard lock(mu_);
  return map_.size();
}

}  // namespace qguard
