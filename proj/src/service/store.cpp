#include "service/store.hpp"

#include <ctime>
#include <fstream>
#include <stdexcept>

namespace rbc::service {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string day_file() {
  const std::time_t now = std::time(nullptr);
  std::tm utc{};
  gmtime_r(&now, &utc);
  char name[32];
  std::strftime(name, sizeof name, "games-%Y-%m-%d.jsonl", &utc);
  return name;
}

}  // namespace

GameStore::GameStore(fs::path dir) : dir_(std::move(dir)) {
  fs::create_directories(dir_);
  std::ifstream in(dir_ / "index.jsonl");
  std::string line;
  while (std::getline(in, line)) {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception&) {
      continue;
    }
    StoredGame g{j.value("id", ""), j.value("file", ""), j.value("offset", std::uint64_t{0}), j.value("length", std::uint64_t{0}),
                 j.value("result", "")};
    std::error_code ec;
    const auto size = fs::file_size(dir_ / g.file, ec);
    if (g.id.empty() || ec || g.offset + g.length > size) continue;
    index_[g.id] = g;
  }
}

void GameStore::put(const std::string& id, const std::string& line, const std::string& result) {
  std::lock_guard lock(mutex_);
  if (index_.count(id)) throw std::invalid_argument("game " + id + " is already stored");
  StoredGame g{id, day_file(), 0, line.size(), result};
  {
    std::ofstream out(dir_ / g.file, std::ios::binary | std::ios::app);
    out.seekp(0, std::ios::end);
    g.offset = static_cast<std::uint64_t>(out.tellp());
    out << line << '\n';
    out.flush();
    if (!out) throw std::runtime_error("cannot write " + (dir_ / g.file).string());
  }
  std::ofstream idx(dir_ / "index.jsonl", std::ios::app);
  idx << json{{"id", g.id}, {"file", g.file}, {"offset", g.offset}, {"length", g.length}, {"result", g.result}}.dump() << '\n';
  idx.flush();
  if (!idx) throw std::runtime_error("cannot write the game index");
  index_[id] = g;
}

std::optional<std::string> GameStore::get(const std::string& id) const {
  StoredGame g;
  {
    std::lock_guard lock(mutex_);
    const auto it = index_.find(id);
    if (it == index_.end()) return std::nullopt;
    g = it->second;
  }
  std::ifstream in(dir_ / g.file, std::ios::binary);
  in.seekg(static_cast<std::streamoff>(g.offset));
  std::string bytes(g.length, '\0');
  in.read(bytes.data(), static_cast<std::streamsize>(g.length));
  if (!in) return std::nullopt;
  return bytes;
}

bool GameStore::contains(const std::string& id) const {
  std::lock_guard lock(mutex_);
  return index_.count(id) > 0;
}

std::vector<StoredGame> GameStore::list() const {
  std::lock_guard lock(mutex_);
  std::vector<StoredGame> out;
  for (const auto& [id, g] : index_) out.push_back(g);
  return out;
}

}  // namespace rbc::service
