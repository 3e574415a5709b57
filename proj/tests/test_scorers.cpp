#include <doctest.h>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "bridge_logic.hpp"
#include "fixtures.hpp"
#include "ltlfbeam/decoder.hpp"
#include "ltlfbeam/errors.hpp"

using namespace ltlfbeam;
using namespace fixtures;
using namespace std::chrono_literals;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::string bridge_cmd(const std::string& mode, std::size_t vocab) {
  return std::string(ECHO_BRIDGE_PATH) + " " + mode + " " + std::to_string(vocab);
}

RemoteScorer stdio_remote(const std::string& mode, std::size_t vocab, RemoteOptions opt = {},
                          std::chrono::milliseconds timeout = 5s) {
  return RemoteScorer(stdio_transport(bridge_cmd(mode, vocab), timeout), opt);
}

std::vector<Prefix> some_prefixes(std::size_t vocab, std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Prefix> out;
  for (std::size_t i = 0; i < n; ++i) {
    Prefix p(rng() % 6);
    for (auto& x : p) x = static_cast<OutputId>(rng() % vocab);
    out.push_back(std::move(p));
  }
  return out;
}

// Same checks for every scorer kind.
void conformance(Scorer& s, const std::vector<Prefix>& prefixes) {
  const auto batch = s.score(prefixes);
  REQUIRE(batch.size() == prefixes.size());
  CHECK_NOTHROW(check_normalized(batch, s.vocab_size()));
  CHECK(s.score(prefixes) == batch);
  for (std::size_t i = 0; i < prefixes.size(); ++i) {
    const auto one = s.score({prefixes[i]});
    REQUIRE(one.size() == 1);
    CHECK(one.front() == batch[i]);
  }
  CHECK(s.score({}).empty());
}

std::filesystem::path temp_file(const std::string& name, const std::string& content) {
  const auto dir = std::filesystem::temp_directory_path() / "ltlfbeam_scorer_tests";
  std::filesystem::create_directories(dir);
  const auto path = dir / name;
  std::ofstream(path) << content;
  return path;
}

// In-process HTTP bridge on a free port.
class HttpBridge {
 public:
  HttpBridge(std::string mode, std::size_t vocab) : mode_(std::move(mode)), vocab_(vocab) {
    server_.Get("/vocab", [this](const httplib::Request&, httplib::Response& res) {
      res.set_content(bridge::reply(mode_, vocab_, {{"id", 0}, {"method", "vocab"}}), "application/json");
    });
    server_.Post("/score", [this](const httplib::Request& req, httplib::Response& res) {
      ++hits_;
      if (mode_ == "http-500") {
        res.status = 500;
        return;
      }
      res.set_content(bridge::reply(mode_, vocab_, nlohmann::json::parse(req.body)), "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~HttpBridge() {
    server_.stop();
    thread_.join();
  }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }
  int hits() const { return hits_; }

 private:
  std::string mode_;
  std::size_t vocab_;
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
  std::atomic<int> hits_{0};
};

}  // namespace

TEST_CASE("logsumexp and normalization check") {
  CHECK(logsumexp({kNegInf, kNegInf}) == kNegInf);
  CHECK(logsumexp({std::log(0.25), std::log(0.75)}) == doctest::Approx(0.0));
  CHECK_NOTHROW(check_normalized({{std::log(0.5), std::log(0.5)}}, 2));
  CHECK_NOTHROW(check_normalized({{0.0, kNegInf}}, 2));
  CHECK_THROWS_AS(check_normalized({{0.0, 0.0}}, 2), NormalizationError);
  CHECK_THROWS_AS(check_normalized({{0.0}}, 2), NormalizationError);
  CHECK_THROWS_AS(check_normalized({{std::nan(""), 0.0}}, 2), NormalizationError);
  CHECK_THROWS_AS(check_normalized({{kNegInf, kNegInf}}, 2), NormalizationError);
  // 1e-4 tolerance
  CHECK_NOTHROW(check_normalized({{std::log(0.5) + 5e-5, std::log(0.5) + 5e-5}}, 2));
  CHECK_THROWS_AS(check_normalized({{std::log(0.5) + 2e-4, std::log(0.5) + 2e-4}}, 2), NormalizationError);
}

TEST_CASE("Markov scorer") {
  const MarkovScorer m({0.2, 0.5, 0.3}, {{0.1, 0.6, 0.3}, {0.4, 0.4, 0.2}, {0.7, 0.2, 0.1}});
  auto s = m;
  SUBCASE("pinned rows") {
    const auto rows = s.score({{}, {0, 2}, {1}});
    CHECK(rows[0][1] == doctest::Approx(std::log(0.5)));
    CHECK(rows[1] == std::vector<double>{std::log(0.7), std::log(0.2), std::log(0.1)});
    CHECK(rows[2][2] == doctest::Approx(std::log(0.2)));
  }
  SUBCASE("conformance") { conformance(s, some_prefixes(3, 20, 1)); }
  SUBCASE("zero probability is a hard zero") {
    MarkovScorer z({1, 0}, {{0.5, 0.5}, {0.5, 0.5}});
    CHECK(z.score({{}}).front()[1] == kNegInf);
  }
  SUBCASE("validation") {
    CHECK_THROWS_AS(MarkovScorer({}, {}), InvalidInputError);
    CHECK_THROWS_AS(MarkovScorer({0.5, 0.5}, {{1.0, 0.0}}), InvalidInputError);
    CHECK_THROWS_AS(MarkovScorer({0.5, 0.6}, {{1, 0}, {0, 1}}), InvalidInputError);
    CHECK_THROWS_AS(MarkovScorer({1.5, -0.5}, {{1, 0}, {0, 1}}), InvalidInputError);
    CHECK_THROWS_AS(s.score({{7}}), InvalidInputError);
    CHECK_THROWS_AS(MarkovScorer::from_json({{"initial", {1.0}}}), InvalidInputError);
  }
  SUBCASE("JSON") {
    const auto j = nlohmann::json::parse(R"({"initial":[0.5,0.5],"transition":[[1,0],[0.25,0.75]]})");
    auto f = MarkovScorer::from_json(j);
    CHECK(f.score({{1}}).front()[1] == doctest::Approx(std::log(0.75)));
  }
}

TEST_CASE("logit file scorer") {
  const auto j = nlohmann::json::parse(
      R"({"vocab":3,"sequences":{"s0":[[-0.6931471805599453,-0.6931471805599453,null],[0,null,null]],)"
      R"("s1":[[-1.0986122886681098,-1.0986122886681098,-1.0986122886681098]]}})");
  auto file = std::make_shared<const LogitFile>(LogitFile::from_json(j));
  LogitFileScorer s(file, "s0");
  CHECK(s.vocab_size() == 3);
  CHECK(s.steps() == 2);
  SUBCASE("rows are indexed by prefix length") {
    const auto rows = s.score({{}, {2}, {0}});
    CHECK(rows[0][2] == kNegInf);
    CHECK(rows[1] == rows[2]);
    CHECK(rows[1][0] == 0.0);
  }
  SUBCASE("conformance") { conformance(s, {{}, {0}, {1}, {2}, {}}); }
  SUBCASE("step overflow") { CHECK_THROWS_AS(s.score({{0, 1}}), InvalidInputError); }
  SUBCASE("missing sequence") { CHECK_THROWS_AS(LogitFileScorer(file, "nope"), InvalidInputError); }
  SUBCASE("round trip keeps nulls") {
    const auto back = LogitFile::from_json(file->to_json());
    CHECK(back.to_json() == file->to_json());
    CHECK(file->to_json()["sequences"]["s0"][0][2].is_null());
  }
  SUBCASE("bad files") {
    CHECK_THROWS_AS(LogitFile::from_json(nlohmann::json::parse(R"({"vocab":2,"sequences":{"a":[[0]]}})")),
                    InvalidInputError);
    CHECK_THROWS_AS(LogitFile::from_json(nlohmann::json::parse(R"({"vocab":2,"sequences":{"a":[["x",0]]}})")),
                    InvalidInputError);
    CHECK_THROWS_AS(LogitFile::from_json(nlohmann::json::parse(R"({"vocab":0,"sequences":{}})")), InvalidInputError);
    CHECK_THROWS_AS(LogitFile::load("/nonexistent/file.json"), InvalidInputError);
  }
}

TEST_CASE("scorer specs") {
  const auto markov = temp_file("chain.json", R"({"initial":[0.5,0.5],"transition":[[1,0],[0,1]]})");
  const auto logits = temp_file("logits.json", R"({"vocab":2,"sequences":{"x":[[0,null]],"y":[[null,0]]}})");
  CHECK(make_scorer("markov:" + markov.string())->vocab_size() == 2);
  CHECK(make_scorer("logits:" + logits.string())->score({{}}).front()[0] == 0.0);
  CHECK(make_scorer("logits:" + logits.string() + "#y")->score({{}}).front()[1] == 0.0);
  CHECK_THROWS_AS(make_scorer("logits:" + logits.string() + "#z"), InvalidInputError);
  CHECK_THROWS_AS(make_scorer("markov"), InvalidInputError);
  CHECK_THROWS_AS(make_scorer("gpt:foo"), InvalidInputError);
  CHECK_THROWS_AS(make_scorer("markov:/nonexistent.json"), InvalidInputError);
  CHECK(make_scorer("remote:stdio:" + bridge_cmd("uniform", 4))->vocab_size() == 4);
}

TEST_CASE("remote scorer over stdio") {
  SUBCASE("handshake and conformance") {
    auto s = stdio_remote("hash", 5);
    CHECK(s.vocab_size() == 5);
    CHECK(s.exclusive());
    CHECK_FALSE(s.concept_table().has_value());
    conformance(s, some_prefixes(5, 10, 2));
  }
  SUBCASE("rows match the bridge's own computation") {
    auto s = stdio_remote("hash", 5);
    const auto row = s.score({{3, 1, 4}}).front();
    const auto want = bridge::row_for({3, 1, 4}, 5);
    for (std::size_t x = 0; x < 5; ++x) CHECK(row[x] == doctest::Approx(want[x]).epsilon(1e-12));
  }
  SUBCASE("large batches are chunked") {
    auto s = stdio_remote("hash", 5, {.batch_limit = 16, .tolerance = 1e-4});
    const auto prefixes = some_prefixes(5, 64, 3);
    const auto batched = s.score(prefixes);
    CHECK(s.requests_sent() == 4);
    for (std::size_t i = 0; i < prefixes.size(); ++i) CHECK(s.score({prefixes[i]}).front() == batched[i]);
    CHECK(s.requests_sent() == 68);
  }
  SUBCASE("null means a hard zero") {
    auto s = stdio_remote("null-first", 4);
    const auto row = s.score({{}}).front();
    CHECK(row[0] == kNegInf);
    CHECK(row[1] == doctest::Approx(-std::log(3.0)));
  }
  SUBCASE("announced concept table") {
    auto s = stdio_remote("table", 4);
    REQUIRE(s.concept_table().has_value());
    const auto t = ConceptTable::from_json(*s.concept_table(), s.vocab_size());
    CHECK(t.nu(std::vector<OutputId>{1, 2, 0}) == std::vector<std::string>{"b", "a"});
  }
  SUBCASE("malformed reply") {
    auto s = stdio_remote("malformed", 3);
    CHECK_THROWS_AS(s.score({{}}), ProtocolError);
  }
  SUBCASE("id mismatch") {
    auto s = stdio_remote("wrong-id", 3);
    CHECK_THROWS_AS(s.score({{}}), ProtocolError);
  }
  SUBCASE("unnormalized rows") {
    auto s = stdio_remote("unnormalized", 3);
    CHECK_THROWS_AS(s.score({{}}), NormalizationError);
  }
  SUBCASE("timeout leaves the stream unusable") {
    auto s = stdio_remote("sleep", 3, {}, 200ms);
    CHECK_THROWS_AS(s.score({{}}), ScorerTimeoutError);
    CHECK_THROWS_AS(s.score({{}}), ScorerError);
  }
  SUBCASE("bridge exits") {
    auto s = stdio_remote("exit", 3);
    CHECK_THROWS_AS(s.score({{}}), ScorerError);
  }
  SUBCASE("bridge never starts") {
    CHECK_THROWS_AS(RemoteScorer(stdio_transport("/nonexistent/bridge", 2s)), ScorerError);
  }
  SUBCASE("zero batch limit") {
    CHECK_THROWS_AS(RemoteScorer(stdio_transport(bridge_cmd("uniform", 3), 2s), {.batch_limit = 0}), InvalidInputError);
  }
}

TEST_CASE("remote scorer over HTTP") {
  SUBCASE("conformance and chunking") {
    HttpBridge b("hash", 6);
    RemoteScorer s(http_transport(b.url(), 5s), {.batch_limit = 10});
    CHECK(s.vocab_size() == 6);
    conformance(s, some_prefixes(6, 25, 4));
    const int before = b.hits();
    s.score(some_prefixes(6, 64, 5));
    CHECK(b.hits() - before == 7);
  }
  SUBCASE("HTTP and stdio agree") {
    HttpBridge b("hash", 5);
    RemoteScorer h(http_transport(b.url(), 5s));
    auto p = stdio_remote("hash", 5);
    const auto prefixes = some_prefixes(5, 12, 6);
    CHECK(h.score(prefixes) == p.score(prefixes));
  }
  SUBCASE("server error") {
    HttpBridge b("http-500", 3);
    RemoteScorer s(http_transport(b.url(), 5s));
    CHECK_THROWS_AS(s.score({{}}), ProtocolError);
  }
  SUBCASE("timeout") {
    HttpBridge b("sleep", 3);
    RemoteScorer s(http_transport(b.url(), 200ms));
    CHECK_THROWS_AS(s.score({{}}), ScorerTimeoutError);
  }
  SUBCASE("nobody listening") {
    int port = 0;
    {
      HttpBridge b("hash", 3);
      port = std::stoi(b.url().substr(b.url().rfind(':') + 1));
    }
    CHECK_THROWS_AS(RemoteScorer(http_transport("http://127.0.0.1:" + std::to_string(port), 1s)), ScorerError);
  }
}

TEST_CASE("decoding through a uniform bridge covers the ordered pattern") {
  // three keywords, each its own output; 3 is any other word, 4 the stop word
  const std::vector<std::string> concepts{"a", "b", "c", "eos"};
  const Formula phi = parse_formula("(!eos U a) & (!eos U b) & (!eos U c) & F(eos)", {"a", "b", "c", "eos", "noMatch"});
  const Dfa d = compile(phi, concepts);
  const Guide g(d, ConceptTable({{"a", {0}}, {"b", {1}}, {"c", {2}}, {"eos", {4}}}, 5));
  auto s = stdio_remote("uniform", 5);
  DecodeConfig cfg;
  cfg.beams = 8;
  cfg.horizon = 24;
  const auto r = decode(s, g, {}, cfg);
  CHECK(r.satisfied);
  CHECK(r.best.outputs.size() == 24);
}

TEST_CASE("scorer copies get their own lock") {
  MarkovScorer a = uniform_markov(2);
  MarkovScorer b = a;
  CHECK(&a.call_mutex() != &b.call_mutex());
  std::lock_guard lock(a.call_mutex());
  CHECK(b.call_mutex().try_lock());
  b.call_mutex().unlock();
}
