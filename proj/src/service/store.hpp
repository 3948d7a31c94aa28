#pragma once

// Completed games on disk: one JSON Lines file per UTC day plus index.jsonl
// mapping game id to (file, byte offset, length). Both files are only ever
// appended to.

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace rbc::service {

struct StoredGame {
  std::string id;
  std::string file;
  std::uint64_t offset = 0;
  std::uint64_t length = 0;
  std::string result;
};

class GameStore {
 public:
  // Creates the directory if needed and loads the index. Index entries that
  // point past the end of their data file (a torn write) are dropped.
  explicit GameStore(std::filesystem::path dir);

  // `line` is the serialized record without a trailing newline.
  void put(const std::string& id, const std::string& line, const std::string& result);
  // The exact bytes stored for `id`.
  std::optional<std::string> get(const std::string& id) const;
  bool contains(const std::string& id) const;
  std::vector<StoredGame> list() const;
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::map<std::string, StoredGame> index_;
  mutable std::mutex mutex_;
};

}  // namespace rbc::service
