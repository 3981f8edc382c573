#include <doctest.h>

#include "memcoder/error.hpp"
#include "memcoder/llm.hpp"
#include "memcoder/reflector.hpp"
#include "support.hpp"

using namespace memcoder;

namespace {

LibraryCatalog pandas_like() {
  return LibraryCatalog("pd", {{"pd.read_csv", "read_csv(path)", "Read.", std::nullopt},
                               {"pd.DataFrame", "DataFrame(data)", "Frame.", std::nullopt},
                               {"pd.DataFrame.merge", "merge(other)", "Merge.", std::nullopt},
                               {"pd.concat", "concat(frames)", "Concat.", std::nullopt}});
}

std::vector<Guideline> three_guidelines() {
  return {{GuidelineId{10}, "a", 1.0, 0}, {GuidelineId{11}, "b", 1.0, 0}, {GuidelineId{12}, "c", 1.0, 0}};
}

ExecutionFeedback fail() { return ExecutionFeedback::classify(true, 0, 2, "AssertionError", 1, false); }

}  // namespace

TEST_SUITE("reflector") {
  TEST_CASE("invoked apis through module paths and aliases") {
    const auto cat = pandas_like();
    CHECK(extract_invoked_apis("import pd\nx = pd.read_csv('f')\n", cat) == std::set<std::string>{"pd.read_csv"});
    CHECK(extract_invoked_apis("import pd as p\ny = p.concat([a])\n", cat) == std::set<std::string>{"pd.concat"});
    CHECK(extract_invoked_apis("from pd import read_csv as rc, concat\nrc(1)\nconcat(2)\n", cat) ==
          std::set<std::string>{"pd.read_csv", "pd.concat"});
  }

  TEST_CASE("comments and strings are ignored") {
    const auto cat = pandas_like();
    CHECK(extract_invoked_apis("# pd.read_csv\ns = 'pd.concat'\nt = \"\"\"pd.DataFrame\"\"\"\n", cat).empty());
    CHECK(extract_invoked_apis("s = 'it\\'s pd.concat'\npd.read_csv(s)\n", cat) == std::set<std::string>{"pd.read_csv"});
  }

  TEST_CASE("longest catalog prefix wins") {
    const auto cat = pandas_like();
    CHECK(extract_invoked_apis("pd.DataFrame.merge(a, b)\n", cat) == std::set<std::string>{"pd.DataFrame.merge"});
    CHECK(extract_invoked_apis("pd.DataFrame.shape\n", cat) == std::set<std::string>{"pd.DataFrame"});
    CHECK(extract_invoked_apis("mypd.concat(x)\n", cat).empty());
  }

  TEST_CASE("routing decision parsing") {
    const auto g = three_guidelines();
    CHECK(std::holds_alternative<routing::Discard>(parse_routing_decision("DISCARD", g, "new")));
    const auto add = parse_routing_decision("add.\nbecause it is new", g, "new");
    REQUIRE(std::holds_alternative<routing::Add>(add));
    CHECK(std::get<routing::Add>(add).text == "new");
    const auto del = parse_routing_decision("  DELETE 2", g, "new");
    REQUIRE(std::holds_alternative<routing::Delete>(del));
    CHECK(std::get<routing::Delete>(del).target == GuidelineId{12});
    CHECK(std::get<routing::Delete>(del).replacement == "new");
    CHECK(std::holds_alternative<routing::Add>(parse_routing_decision("DELETE 3", g, "new")));
    CHECK(std::holds_alternative<routing::Add>(parse_routing_decision("DELETE 99999999999999", g, "new")));
    CHECK(std::holds_alternative<routing::Discard>(parse_routing_decision("banana", g, "new")));
    CHECK(std::holds_alternative<routing::Discard>(parse_routing_decision("DELETE two", g, "new")));
    CHECK(std::holds_alternative<routing::Discard>(parse_routing_decision("ADD something", g, "new")));
    CHECK(std::holds_alternative<routing::Discard>(parse_routing_decision("", g, "new")));
  }

  TEST_CASE("fuzzed replies never escape the three decisions") {
    testing::Gen gen(5);
    const auto g = three_guidelines();
    const std::vector<std::string> parts = {"ADD", "DISCARD", "DELETE", " ", "0", "7", "-1", "\n", ".", "x"};
    for (int i = 0; i < 2000; ++i) {
      std::string reply;
      for (std::size_t k = gen.below(5); k > 0; --k) reply += gen.pick(parts);
      const auto action = parse_routing_decision(reply, g, "cand");
      if (const auto* d = std::get_if<routing::Delete>(&action)) {
        CHECK(std::any_of(g.begin(), g.end(), [&](const Guideline& x) { return x.id == d->target; }));
      }
    }
  }

  TEST_CASE("fallbacks when the model fails") {
    FunctionBackend broken([](const ChatRequest&, std::size_t) -> std::string { throw TransportError("down"); });
    Reflector r(broken, testing::templates());
    const auto doc = pandas_like().doc("pd.concat");
    CHECK(r.reflect_task("req", "code", fail(), {"pd.concat"}) ==
          "APIs used: pd.concat; outcome: Failure (0/2 tests passed)");
    CHECK_FALSE(r.reflect_api("pd.concat", doc, "code", fail()).has_value());
    CHECK(std::holds_alternative<routing::Discard>(r.route_guideline("x", doc, {})));
    CHECK(r.calls() == 3);
    CHECK(r.failures() == 3);

    FunctionBackend blank([](const ChatRequest&, std::size_t) { return std::string("  \n"); });
    Reflector rb(blank, testing::templates());
    CHECK(rb.reflect_task("req", "code", fail(), {}) == "APIs used: (none); outcome: Failure (0/2 tests passed)");
    CHECK_FALSE(rb.reflect_api("pd.concat", doc, "code", fail()).has_value());
  }

  TEST_CASE("reflection uses deterministic sampling and lists guidelines by index") {
    std::vector<ChatRequest> seen;
    FunctionBackend spy([&](const ChatRequest& req, std::size_t i) {
      CHECK(i == 0);
      seen.push_back(req);
      return std::string("DELETE 1");
    });
    Reflector r(spy, testing::templates());
    const auto doc = pandas_like().doc("pd.concat");
    const auto action = r.route_guideline("cand", doc, three_guidelines());
    REQUIRE(std::holds_alternative<routing::Delete>(action));
    CHECK(std::get<routing::Delete>(action).target == GuidelineId{11});
    REQUIRE(seen.size() == 1);
    CHECK(seen[0].temperature == 0.0);
    const auto& user = seen[0].messages.back().content;
    CHECK(user.find("[0] a\n[1] b\n[2] c") != std::string::npos);
    CHECK(user.find("cand") != std::string::npos);
  }
}
