#pragma once

#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

namespace qguard {

struct LogitPair {
  double yes_logit = 0.0;
  double no_logit = 0.0;

  bool operator==(const LogitPair&) const = default;
};

// Persistent probe cache keyed by (backend_id, input_digest, question_id).
// Backed by an append-only JSONL file when a path is given; memory-only
// otherwise. Values are deterministic for a deterministic backend, so
// last-writer-wins races on identical keys are benign.
class ProbeCache {
 public:
  ProbeCache() = default;
  explicit ProbeCache(const std::string& path);  // loads existing records, opens for append

  std::optional<LogitPair> lookup(const std::string& backend_id, const std::string& digest,
                                  const std::string& question_id);
  void store(const std::string& backend_id, const std::string& digest,
             const std::string& question_id, const LogitPair& logits);

  std::size_t size() const;
  std::size_t skipped_lines() const { return skipped_; }  // malformed lines ignored at load

  static std::string make_key(const std::string& backend_id, const std::string& digest,
                              const std::string& question_id);

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, LogitPair> map_;
  std::ofstream out_;
  std::size_t skipped_ = 0;
};

}  // namespace qguard
