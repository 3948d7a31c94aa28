#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <thread>

#include "arena/bots.hpp"
#include "encoding/observation_json.hpp"
#include "service/service.hpp"
#include "support/service_client.hpp"

#include <httplib.h>

using namespace rbc;
using namespace rbc::service;
using nlohmann::json;
using testing::Client;
using testing::allowed_projection;
using testing::play_out;

namespace {

struct TempDir {
  std::filesystem::path path;
  explicit TempDir(const std::string& name) : path(std::filesystem::temp_directory_path() / name) {
    std::filesystem::remove_all(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

ServiceOptions options_in(const TempDir& d) {
  ServiceOptions o;
  o.data_dir = d.path;
  return o;
}

std::string code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const ServiceError& e) {
    return e.code();
  }
  return "";
}

}  // namespace

TEST_CASE("create: human vs bot issues one token, bot vs bot runs to the end") {
  TempDir d("rbc_svc_create");
  GameService svc(options_in(d));
  const json hv = svc.create({{"white", "human"}, {"black", "greedy"}, {"seed", 1}});
  CHECK(hv["type"] == "create");
  CHECK(hv["protocol"] == kProtocolVersion);
  CHECK(hv["tokens"].size() == 1);
  CHECK(hv["tokens"].contains("white"));
  CHECK(hv["phase"] == "awaiting_sense");

  const json bb = svc.create({{"white", "random"}, {"black", "greedy"}, {"seed", 2}});
  CHECK(bb["tokens"].empty());
  CHECK(bb["phase"] == "finished");
  const auto rec = record_from_json(json::parse(svc.replay(bb["game"], std::nullopt)));
  const auto check = validate_record(rec);
  CHECK(check.ok);
  CHECK(to_fen(check.final_state) == rec.meta["final_fen"]);

  CHECK(code_of([&] { svc.create({{"white", "net:/does/not/exist.ckpt"}}); }) == "invalid_config");
  CHECK(code_of([&] { svc.create({{"white", "wizard"}}); }) == "invalid_config");
  CHECK(code_of([&] { svc.create({{"turn_cap", 0}}); }) == "invalid_config");
  CHECK(code_of([&] { svc.create(json::array()); }) == "invalid_config");
  // Unknown fields are ignored.
  CHECK(svc.create({{"white", "human"}, {"black", "open"}, {"colour_scheme", "dark"}})["type"] == "create");
}

TEST_CASE("join: open seats once, never a taken seat") {
  TempDir d("rbc_svc_join");
  GameService svc(options_in(d));
  const json g = svc.create({{"white", "human"}, {"black", "open"}});
  const std::string id = g["game"];
  CHECK(g["open_seats"] == json::array({"black"}));
  const json j = svc.join(id, {{"color", "black"}});
  CHECK(j["token"].get<std::string>().size() == 32);
  CHECK(code_of([&] { svc.join(id, {{"color", "black"}}); }) == "seat_taken");
  CHECK(code_of([&] { svc.join(id, {{"color", "white"}}); }) == "seat_taken");
  CHECK(code_of([&] { svc.join(id, {{"color", "green"}}); }) == "malformed");
  CHECK(code_of([&] { svc.join("nope", {{"color", "black"}}); }) == "unknown_game");
}

TEST_CASE("turn order, sense geometry, illegal moves and passes") {
  TempDir d("rbc_svc_turns");
  GameService svc(options_in(d));
  const json g = svc.create({{"white", "human"}, {"black", "open"}});
  const std::string id = g["game"];
  const std::string w = g["tokens"]["white"];
  const std::string b = svc.join(id, {{"color", "black"}})["token"];

  const auto before = svc.state(id, b, 0, 0)["messages"].size();
  CHECK(code_of([&] { svc.sense(id, {{"token", b}, {"square", "e4"}}); }) == "out_of_turn");
  CHECK(code_of([&] { svc.move(id, {{"token", w}, {"move", "e2e4"}}); }) == "out_of_turn");
  CHECK(code_of([&] { svc.sense(id, {{"token", "forged"}, {"square", "e4"}}); }) == "bad_token");
  CHECK(code_of([&] { svc.sense(id, {{"token", w}, {"square", "z9"}}); }) == "malformed");
  CHECK(code_of([&] { svc.sense(id, {{"token", w}}); }) == "malformed");
  CHECK(svc.state(id, b, 0, 0)["messages"].size() == before);
  CHECK(svc.state(id, w, 0, 0)["phase"] == "awaiting_sense");

  CHECK(svc.sense(id, {{"token", w}, {"square", "a1"}})["payload"]["revealed"].size() == 4);
  CHECK(code_of([&] { svc.move(id, {{"token", w}, {"move", "e2"}}); }) == "malformed");
  const json illegal = svc.move(id, {{"token", w}, {"move", "e2e5"}});
  CHECK(illegal["payload"]["was_illegal"] == true);
  CHECK(svc.state(id, w, 0, 0)["to_move"] == "black");

  CHECK(svc.sense(id, {{"token", b}, {"square", "a4"}})["payload"]["revealed"].size() == 6);
  const json pass = svc.move(id, {{"token", b}, {"move", "pass"}});
  CHECK(pass["payload"]["taken"].is_null());
  CHECK(pass["payload"]["was_illegal"] == false);
  CHECK(svc.sense(id, {{"token", w}, {"square", "d4"}})["payload"]["revealed"].size() == 9);
  const auto last = svc.state(id, w, 0, 0)["messages"];
  const auto& turn2 = last[last.size() - 2];
  CHECK(turn2["type"] == "your_turn");
  CHECK(turn2["payload"]["opp_capture"].is_null());
}

TEST_CASE("king capture ends the game for both seats; finished games refuse actions") {
  TempDir d("rbc_svc_king");
  GameService svc(options_in(d));
  const json g = svc.create({{"white", "human"}, {"black", "open"}});
  const std::string id = g["game"];
  const std::string w = g["tokens"]["white"];
  const std::string b = svc.join(id, {{"color", "black"}})["token"];
  const char* moves[] = {"e2e3", "f7f5", "d1h5", "e8f7", "h5f7"};
  for (int i = 0; i < 5; ++i) {
    const std::string& t = i % 2 ? b : w;
    svc.sense(id, {{"token", t}, {"square", "b2"}});
    svc.move(id, {{"token", t}, {"move", moves[i]}});
  }
  for (const auto& t : {w, b}) {
    const json st = svc.state(id, t, 0, 0);
    CHECK(st["phase"] == "finished");
    CHECK(st["messages"].back()["type"] == "game_over");
    CHECK(st["messages"].back()["payload"]["result"] == "white");
    CHECK(st["messages"].back()["payload"]["reason"] == "king_captured");
  }
  CHECK(code_of([&] { svc.sense(id, {{"token", b}, {"square", "e4"}}); }) == "game_finished");
}

TEST_CASE("replay: finished, unfinished with and without a token, unknown") {
  TempDir d("rbc_svc_replay");
  GameService svc(options_in(d));
  const json g = svc.create({{"white", "human"}, {"black", "greedy"}, {"seed", 3}});
  const std::string id = g["game"];
  const std::string w = g["tokens"]["white"];
  CHECK(code_of([&] { svc.replay(id, std::nullopt); }) == "not_finished");
  CHECK(code_of([&] { svc.replay("missing", std::nullopt); }) == "unknown_game");
  svc.sense(id, {{"token", w}, {"square", "e7"}});
  svc.move(id, {{"token", w}, {"move", "e2e4"}});
  const json own = json::parse(svc.replay(id, w));
  CHECK(own["white"]["turns"].size() == 1);
  CHECK_FALSE(own.contains("black"));
  CHECK(own["in_progress"] == true);
}

TEST_CASE("information hiding: every pre-game-over payload is the seat's own projection") {
  TempDir d("rbc_svc_sniff");
  GameService svc(options_in(d));
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    const json g = svc.create({{"white", "human"}, {"black", seed % 3 == 0 ? "open" : (seed % 3 == 1 ? "greedy" : "random")}, {"seed", seed}, {"turn_cap", 60}});
    const std::string id = g["game"];
    Client white(svc, id, g["tokens"]["white"], Color::White, seed * 7 + 1);
    std::optional<Client> black;
    if (seed % 3 == 0) black.emplace(svc, id, svc.join(id, {{"color", "black"}})["token"], Color::Black, seed * 7 + 2);
    std::vector<Client*> clients{&white};
    if (black) clients.push_back(&*black);
    play_out(clients);
    for (auto* c : clients) c->poll();

    const auto rec = record_from_json(json::parse(svc.replay(id, std::nullopt)));
    REQUIRE(validate_record(rec, 60).ok);
    for (auto* c : clients) {
      // The sniffer sees the log through state() plus the direct replies.
      const json log = svc.state(id, c->token, 0, 0)["messages"];
      const auto allowed = allowed_projection(rec, c->color);
      REQUIRE(log.size() == allowed.size() + 1);
      for (std::size_t i = 0; i < allowed.size(); ++i) {
        INFO("game " << seed << " message " << i);
        CHECK(log[i]["type"] == allowed[i]["type"]);
        CHECK(log[i]["payload"] == allowed[i]["payload"]);
        CHECK(log[i]["seq"] == i);
      }
      CHECK(log.back()["type"] == "game_over");
      // The client's own rebuilt view agrees with the server's frames.
      CHECK(c->view.log().size() == rec.stream(c->color).size());
    }
  }
}

TEST_CASE("persistence: completed games survive a restart byte for byte") {
  TempDir d("rbc_svc_persist");
  std::vector<std::pair<std::string, std::string>> stored;
  {
    GameService svc(options_in(d));
    for (int i = 0; i < 3; ++i) {
      const std::string id = svc.create({{"white", "greedy"}, {"black", "random"}, {"seed", i}})["game"];
      stored.emplace_back(id, svc.replay(id, std::nullopt));
    }
    svc.create({{"white", "human"}, {"black", "open"}});  // unfinished, not persisted
  }
  // A torn index line is ignored.
  std::ofstream(d.path / "index.jsonl", std::ios::app) << R"({"id":"torn","file":"games-x.jsonl","offset":0,"length":9})" << "\n{not json\n";
  GameService again(options_in(d));
  for (const auto& [id, body] : stored) CHECK(again.replay(id, std::nullopt) == body);
  const json list = again.list();
  CHECK(list["games"].size() == 3);
  CHECK(code_of([&] { again.sense(stored[0].first, {{"token", "x"}, {"square", "e4"}}); }) == "game_finished");
  CHECK(code_of([&] { again.replay("torn", std::nullopt); }) == "unknown_game");
}

TEST_CASE("concurrent games and the game limit") {
  TempDir d("rbc_svc_conc");
  ServiceOptions o = options_in(d);
  o.max_games = 8;  // bot games count while they run
  GameService svc(o);
  std::vector<std::thread> threads;
  std::vector<std::string> ids(8);
  for (int i = 0; i < 8; ++i)
    threads.emplace_back([&, i] { ids[static_cast<std::size_t>(i)] = svc.create({{"white", "random"}, {"black", "random"}, {"seed", i}})["game"]; });
  for (auto& t : threads) t.join();
  for (const auto& id : ids) CHECK(validate_record(record_from_json(json::parse(svc.replay(id, std::nullopt)))).ok);
  for (int i = 0; i < 8; ++i) svc.create({{"white", "human"}, {"black", "open"}});
  CHECK(code_of([&] { svc.create({{"white", "human"}, {"black", "open"}}); }) == "too_many_games");

  // A long-poll wakes when the opponent acts.
  TempDir d2("rbc_svc_poll");
  GameService svc2(options_in(d2));
  const json g = svc2.create({{"white", "human"}, {"black", "open"}});
  const std::string id = g["game"];
  const std::string w = g["tokens"]["white"];
  const std::string b = svc2.join(id, {{"color", "black"}})["token"];
  std::thread mover([&] {
    std::this_thread::sleep_for(std::chrono::milliseconds(50));
    svc2.sense(id, {{"token", w}, {"square", "e4"}});
    svc2.move(id, {{"token", w}, {"move", "e2e4"}});
  });
  const auto t0 = std::chrono::steady_clock::now();
  const json st = svc2.state(id, b, 0, 5000);
  mover.join();
  CHECK(st["messages"].size() == 1);
  CHECK(std::chrono::steady_clock::now() - t0 < std::chrono::seconds(4));
}

TEST_CASE("HTTP endpoints") {
  TempDir d("rbc_svc_http");
  GameService svc(options_in(d));
  auto server = make_http_server(svc);
  const int port = server->bind_to_any_port("127.0.0.1");
  std::thread listener([&] { server->listen_after_bind(); });
  server->wait_until_ready();
  httplib::Client cli("127.0.0.1", port);

  auto created = cli.Post("/api/games", R"({"white": "human", "black": "greedy", "seed": 4})", "application/json");
  REQUIRE(created);
  CHECK(created->status == 201);
  const json g = json::parse(created->body);
  const std::string id = g["game"], token = g["tokens"]["white"];
  const httplib::Headers bearer{{"Authorization", "Bearer " + token}};

  auto st = cli.Get("/api/games/" + id + "/state?wait_ms=10", bearer);
  REQUIRE(st);
  CHECK(json::parse(st->body)["messages"][0]["type"] == "your_turn");
  auto sense = cli.Post("/api/games/" + id + "/sense", bearer, R"({"square": "e7"})", "application/json");
  CHECK(sense->status == 200);
  CHECK(json::parse(sense->body)["payload"]["revealed"].size() == 9);
  auto mv = cli.Post("/api/games/" + id + "/move", R"({"token": ")" + token + R"(", "move": "e2e4"})", "application/json");
  CHECK(json::parse(mv->body)["type"] == "move_result");

  CHECK(cli.Get("/api/games/" + id + "/state?token=wrong")->status == 403);
  CHECK(cli.Get("/api/games/unknown-1/state?token=x")->status == 404);
  CHECK(cli.Post("/api/games/" + id + "/move", bearer, R"({"move": "e2e4"})", "application/json")->status == 409);
  auto bad = cli.Post("/api/games", "{oops", "application/json");
  CHECK(bad->status == 400);
  CHECK(json::parse(bad->body)["type"] == "error");
  CHECK(cli.Get("/api/games/" + id + "/replay")->status == 409);
  CHECK(json::parse(cli.Get("/api/games/" + id + "/replay", bearer)->body)["white"]["turns"].size() == 1);
  CHECK(json::parse(cli.Get("/api/games")->body)["games"].size() == 1);

  server->stop();
  listener.join();
}

TEST_CASE("wire sample for the schema check") {
  // Writes every kind of message to wire_sample.jsonl in the working
  // directory; a separate test validates it against the shipped schema.
  TempDir d("rbc_svc_sample");
  GameService svc(options_in(d));
  std::ofstream out("wire_sample.jsonl");
  auto emit = [&](const json& j) { out << j.dump() << '\n'; };
  const json g = svc.create({{"white", "human"}, {"black", "open"}, {"turn_cap", 3}});
  emit(g);
  const std::string id = g["game"], w = g["tokens"]["white"];
  const json j = svc.join(id, {{"color", "black"}});
  emit(j);
  const std::string b = j["token"];
  for (int i = 0; i < 6; ++i) {
    const std::string& t = i % 2 ? b : w;
    emit(svc.sense(id, {{"token", t}, {"square", i == 0 ? "a1" : "e5"}}));
    emit(svc.move(id, {{"token", t}, {"move", i == 0 ? "e2e5" : (i == 1 ? "pass" : "g1f3")}}));
  }
  emit(svc.state(id, w, 0, 0));
  emit(svc.list());
  try {
    svc.sense(id, {{"token", w}, {"square", "e4"}});
  } catch (const ServiceError& e) {
    emit(error_message(e, id));
  }
  CHECK(out.good());
}
