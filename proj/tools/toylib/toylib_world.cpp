#include "toylib_world.hpp"

#include "memcoder/embedding.hpp"
#include "memcoder/error.hpp"
#include "memcoder/evolution.hpp"
#include "memcoder/prompt.hpp"
#include "memcoder/text_util.hpp"

namespace toylib {

using memcoder::ApiDoc;

namespace {

std::string traceback(const std::string& test_line, const std::string& error) {
  return "Traceback (most recent call last):\n  File \"test_case.py\", line 2, in <module>\n    " + test_line +
         "\n" + error;
}

std::vector<TaskSpec> build_tasks() {
  std::vector<TaskSpec> t;

  t.push_back({
      "toylib/001",
      "Load the table from 'sales.csv' and return a column that takes 'price' where 'promo' is true and "
      "'list_price' elsewhere.",
      "toylib.where",
      {"toylib.load", "toylib.where", "toylib.broadcast_arrays"},
      {"from solution import solve\nassert solve('sales.csv') == [9.5, 12.0, 7.25]",
       "from solution import solve\nassert solve('empty.csv') == []",
       "from solution import solve\nassert len(solve('sales_big.csv')) == 128"},
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    cond, x, y = toylib.broadcast_arrays(table['promo'], table['price'], table['list_price'])\n"
      "    return toylib.where(cond, x, y).tolist()\n",
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.where(table['price'], table['promo'], table['list_price']).tolist()\n",
      traceback("assert solve('sales.csv') == [9.5, 12.0, 7.25]",
                "AssertionError: [1.0, 12.0, 7.25] != [9.5, 12.0, 7.25]"),
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.where(table['promo'], table['price'], 0.0).tolist()\n",
      traceback("assert solve('sales.csv') == [9.5, 12.0, 7.25]",
                "ValueError: toylib.where: operands could not be broadcast together with shapes (3,) (3,) ()"),
      "Load the table once, then derive the output column from the input columns in a single vectorized step.",
  });

  t.push_back({
      "toylib/002",
      "Load the table from 'orders.csv' and reduce the 'amount' column to its total with toylib.reduce.",
      "toylib.reduce",
      {"toylib.load", "toylib.reduce"},
      {"from solution import solve\nassert solve('orders.csv') == 42",
       "from solution import solve\nassert solve('empty.csv') == 0",
       "from solution import solve\nassert solve('orders_neg.csv') == -3"},
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.reduce(table['amount'], op=\"add\")\n",
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.reduce(table['amount'], op=\"max\")\n",
      traceback("assert solve('orders.csv') == 42", "AssertionError: 17 != 42"),
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.reduce(table['amount'], op=sum)\n",
      traceback("assert solve('orders.csv') == 42",
                "TypeError: toylib.reduce: op must be str, not builtin_function_or_method"),
      "Load the table, select the single column the requirement names, and reduce it to one scalar.",
  });

  t.push_back({
      "toylib/003",
      "Load the table from 'parcels.csv', scale the 'weight' column by 2.5 in place with toylib.scale and "
      "return the scaled column.",
      "toylib.scale",
      {"toylib.load", "toylib.scale"},
      {"from solution import solve\nassert solve('parcels.csv') == [2.5, 5.0, 10.0]",
       "from solution import solve\nassert solve('empty.csv') == []",
       "from solution import solve\nassert solve('parcels_one.csv') == [0.25]"},
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    column = table['weight']\n"
      "    toylib.scale(column, 2.5, inplace=True)\n"
      "    return column.tolist()\n",
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    column = table['weight']\n"
      "    toylib.scale(column, 2.5)\n"
      "    return column.tolist()\n",
      traceback("assert solve('parcels.csv') == [2.5, 5.0, 10.0]",
                "AssertionError: [1.0, 2.0, 4.0] != [2.5, 5.0, 10.0]"),
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.scale(table['weight'], 2.5, inplace=True).tolist()\n",
      traceback("assert solve('parcels.csv') == [2.5, 5.0, 10.0]",
                "AttributeError: 'NoneType' object has no attribute 'tolist'"),
      "Load the table, take a reference to the column, transform it, and return that same column.",
  });

  t.push_back({
      "toylib/004",
      "Load the table from 'quarters.csv' and concat the 'q1' and 'q2' columns end to end with toylib.concat.",
      "toylib.concat",
      {"toylib.load", "toylib.concat"},
      {"from solution import solve\nassert solve('quarters.csv') == [1, 2, 3, 4]",
       "from solution import solve\nassert solve('empty.csv') == []",
       "from solution import solve\nassert len(solve('quarters_big.csv')) == 64"},
      "import toylib as tl\n\n"
      "def solve(path):\n"
      "    table = tl.load(path)\n"
      "    return tl.concat([table['q1'], table['q2']]).tolist()\n",
      "import toylib as tl\n\n"
      "def solve(path):\n"
      "    table = tl.load(path)\n"
      "    return tl.concat([table['q1']]).tolist() + table['q2'].tolist()[::-1]\n",
      traceback("assert solve('quarters.csv') == [1, 2, 3, 4]", "AssertionError: [1, 2, 4, 3] != [1, 2, 3, 4]"),
      "import toylib as tl\n\n"
      "def solve(path):\n"
      "    table = tl.load(path)\n"
      "    return tl.concat(table['q1'], table['q2']).tolist()\n",
      traceback("assert solve('quarters.csv') == [1, 2, 3, 4]",
                "TypeError: toylib.concat() takes 1 positional argument but 2 were given"),
      "Load the table, gather the columns in the order the requirement lists them, and combine them in one call.",
  });

  t.push_back({
      "toylib/005",
      "Load the table from 'tickets.csv' and return a column that takes 'discount' where 'member' is true and "
      "'base' elsewhere.",
      "toylib.where",
      {"toylib.load", "toylib.where", "toylib.broadcast_arrays"},
      {"from solution import solve\nassert solve('tickets.csv') == [8.0, 10.0, 8.0]",
       "from solution import solve\nassert solve('empty.csv') == []",
       "from solution import solve\nassert solve('tickets_one.csv') == [10.0]"},
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    cond, x, y = toylib.broadcast_arrays(table['member'], table['discount'], table['base'])\n"
      "    return toylib.where(cond, x, y).tolist()\n",
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.where(table['discount'], table['member'], table['base']).tolist()\n",
      traceback("assert solve('tickets.csv') == [8.0, 10.0, 8.0]",
                "AssertionError: [1.0, 10.0, 1.0] != [8.0, 10.0, 8.0]"),
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.where(table['member'], table['discount'], 10.0).tolist()\n",
      traceback("assert solve('tickets.csv') == [8.0, 10.0, 8.0]",
                "ValueError: toylib.where: operands could not be broadcast together with shapes (3,) (3,) ()"),
      "Load the table once, then derive the output column from the input columns in a single vectorized step.",
  });

  t.push_back({
      "toylib/006",
      "Load the table from 'visits.csv' and reduce the 'count' column to its total with toylib.reduce.",
      "toylib.reduce",
      {"toylib.load", "toylib.reduce"},
      {"from solution import solve\nassert solve('visits.csv') == 120",
       "from solution import solve\nassert solve('empty.csv') == 0",
       "from solution import solve\nassert solve('visits_one.csv') == 7"},
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.reduce(table['count'], op=\"add\")\n",
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.reduce(table['count'], op=\"max\")\n",
      traceback("assert solve('visits.csv') == 120", "AssertionError: 55 != 120"),
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.reduce(table['count'], op=sum)\n",
      traceback("assert solve('visits.csv') == 120",
                "TypeError: toylib.reduce: op must be str, not builtin_function_or_method"),
      "Load the table, select the single column the requirement names, and reduce it to one scalar.",
  });

  t.push_back({
      "toylib/007",
      "Load the table from 'readings.csv', scale the 'signal' column by 0.5 in place with toylib.scale and "
      "return the scaled column.",
      "toylib.scale",
      {"toylib.load", "toylib.scale"},
      {"from solution import solve\nassert solve('readings.csv') == [0.5, 1.0, 1.5]",
       "from solution import solve\nassert solve('empty.csv') == []",
       "from solution import solve\nassert solve('readings_one.csv') == [4.0]"},
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    column = table['signal']\n"
      "    toylib.scale(column, 0.5, inplace=True)\n"
      "    return column.tolist()\n",
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    column = table['signal']\n"
      "    toylib.scale(column, 0.5)\n"
      "    return column.tolist()\n",
      traceback("assert solve('readings.csv') == [0.5, 1.0, 1.5]",
                "AssertionError: [1.0, 2.0, 3.0] != [0.5, 1.0, 1.5]"),
      "import toylib\n\n"
      "def solve(path):\n"
      "    table = toylib.load(path)\n"
      "    return toylib.scale(table['signal'], 0.5, inplace=True).tolist()\n",
      traceback("assert solve('readings.csv') == [0.5, 1.0, 1.5]",
                "AttributeError: 'NoneType' object has no attribute 'tolist'"),
      "Load the table, take a reference to the column, transform it, and return that same column.",
  });

  t.push_back({
      "toylib/008",
      "Load the table from 'regions.csv' and concat the 'north', 'south' and 'west' columns end to end with "
      "toylib.concat.",
      "toylib.concat",
      {"toylib.load", "toylib.concat"},
      {"from solution import solve\nassert solve('regions.csv') == [1, 2, 3]",
       "from solution import solve\nassert solve('empty.csv') == []",
       "from solution import solve\nassert len(solve('regions_big.csv')) == 96"},
      "from toylib import load, concat\n\n"
      "def solve(path):\n"
      "    table = load(path)\n"
      "    return concat([table['north'], table['south'], table['west']]).tolist()\n",
      "from toylib import load, concat\n\n"
      "def solve(path):\n"
      "    table = load(path)\n"
      "    return concat([table['north'], table['west']]).tolist()\n",
      traceback("assert solve('regions.csv') == [1, 2, 3]", "AssertionError: [1, 3] != [1, 2, 3]"),
      "from toylib import load, concat\n\n"
      "def solve(path):\n"
      "    table = load(path)\n"
      "    return concat(table['north'], table['south'], table['west']).tolist()\n",
      traceback("assert solve('regions.csv') == [1, 2, 3]",
                "TypeError: toylib.concat() takes 1 positional argument but 3 were given"),
      "Load the table, gather the columns in the order the requirement lists them, and combine them in one call.",
  });
  return t;
}

std::string after(const std::string& text, const std::string& marker) {
  const auto pos = text.rfind(marker);
  if (pos == std::string::npos) return {};
  return text.substr(pos + marker.size());
}

std::string line_after(const std::string& text, const std::string& marker) {
  const auto rest = after(text, marker);
  return rest.substr(0, rest.find('\n'));
}

}  // namespace

const std::vector<TaskSpec>& tasks() {
  static const std::vector<TaskSpec> specs = build_tasks();
  return specs;
}

memcoder::LibraryCatalog catalog() {
  return memcoder::LibraryCatalog(
      "toylib",
      {
          ApiDoc{"toylib.load", "toylib.load(path) -> Table",
                 "Load a CSV file into a Table whose columns are indexed by name.", std::nullopt},
          ApiDoc{"toylib.broadcast_arrays", "toylib.broadcast_arrays(*arrays) -> tuple",
                 "Broadcast any number of arrays or scalars against each other and return them with one common "
                 "shape.",
                 std::nullopt},
          ApiDoc{"toylib.where", "toylib.where(cond, x, y) -> Array",
                 "Elementwise selection: takes values from x where cond is true and from y elsewhere.",
                 std::nullopt},
          ApiDoc{"toylib.reduce", "toylib.reduce(values, op) -> scalar",
                 "Reduce an array to a single scalar total with the named operation.", std::nullopt},
          ApiDoc{"toylib.scale", "toylib.scale(array, factor, inplace=False) -> Array | None",
                 "Scale every element of an array by factor, in place or into a new array.", std::nullopt},
          ApiDoc{"toylib.concat", "toylib.concat(arrays) -> Array",
                 "Concat arrays end to end into one array.", std::nullopt},
      });
}

std::vector<memcoder::TaskRecord> benchmark() {
  std::vector<memcoder::TaskRecord> out;
  for (const auto& t : tasks()) {
    out.push_back(memcoder::TaskRecord{t.task_id, t.requirement, t.tests, t.gold_apis, std::string("solve")});
  }
  return out;
}

const std::map<std::string, std::string>& api_guidelines() {
  static const std::map<std::string, std::string> g = {
      {"toylib.where",
       "toylib.where takes (cond, x, y) in that order and all three must share one shape; pass the inputs "
       "through toylib.broadcast_arrays first."},
      {"toylib.reduce", "toylib.reduce needs op as the string name \"add\" for a total; a Python callable such as "
                        "sum raises TypeError."},
      {"toylib.scale", "toylib.scale(..., inplace=True) mutates its argument and returns None; return the "
                       "original array, not the call's result."},
      {"toylib.concat", "toylib.concat takes one list of arrays; wrap the arrays in a list instead of passing "
                        "them as separate arguments."},
  };
  return g;
}

Variant variant_for(const TaskSpec& task, std::size_t index, bool guideline_in_prompt) {
  if (guideline_in_prompt) {
    // An occasional unrelated slip keeps Pass@k informative above k=1.
    if (task.task_id == "toylib/007" && (index == 3 || index == 8)) return Variant::kSlip;
    return Variant::kCorrect;
  }
  return index % 3 == 0 ? Variant::kRaiseBug : Variant::kAssertBug;
}

std::string candidate_code(const TaskSpec& task, Variant variant, std::size_t index) {
  const std::string header = "# candidate " + std::to_string(index) + "\n";
  switch (variant) {
    case Variant::kCorrect: return header + task.correct_code;
    case Variant::kAssertBug: return header + task.assert_bug_code;
    case Variant::kRaiseBug: return header + task.raise_bug_code;
    case Variant::kSlip: return header + task.correct_code + "\nsolve = lambda path: []\n";
  }
  return header;
}

World::World(const memcoder::TemplateSet& templates) : templates_(templates) {
  constexpr std::size_t kMaxSamples = 64;
  for (const auto& t : tasks()) {
    const int total = static_cast<int>(t.tests.size());
    for (std::size_t i = 0; i < kMaxSamples; ++i) {
      auto add = [&](Variant v, bool executed, int passed, std::optional<std::string> tb) {
        nlohmann::json r{{"executed", executed},
                         {"tests_passed", passed},
                         {"tests_total", total},
                         {"traceback", tb ? nlohmann::json(*tb) : nlohmann::json(nullptr)},
                         {"timed_out", false},
                         {"wall_time_ms", 40 + static_cast<int>(i)}};
        // Keyed by the code as the pipeline extracts it from a reply.
        const auto code = memcoder::extract_code("```python\n" + candidate_code(t, v, i) + "```\n");
        outcomes_[memcoder::candidate_fingerprint(code, t.tests)] = r;
      };
      add(Variant::kCorrect, true, total, std::nullopt);
      add(Variant::kAssertBug, true, 1, t.assert_bug_traceback);
      add(Variant::kRaiseBug, false, 0, t.raise_bug_traceback);
      add(Variant::kSlip, true, 1, traceback(t.tests.front().substr(t.tests.front().find('\n') + 1),
                                              "AssertionError: [] != expected"));
    }
  }
}

const TaskSpec* World::task_by_requirement(const std::string& requirement) const {
  const auto wanted = memcoder::trim(requirement);
  for (const auto& t : tasks()) {
    if (t.requirement == wanted) return &t;
  }
  return nullptr;
}

std::string World::respond(const memcoder::ChatRequest& request, std::size_t sample_index) const {
  if (request.messages.size() != 2) throw memcoder::InvariantError("toylib world: expected system + user");
  const auto& system = request.messages[0].content;
  const auto& user = request.messages[1].content;

  if (system == templates_.get("generation_system")) {
    const auto* task = task_by_requirement(after(user, "## Requirement\n"));
    if (!task) throw memcoder::InvariantError("toylib world: unknown requirement");
    const bool hinted = user.find(api_guidelines().at(task->tricky_api)) != std::string::npos;
    const auto variant = variant_for(*task, sample_index, hinted);
    return "Here is the solution.\n\n```python\n" + candidate_code(*task, variant, sample_index) + "```\n";
  }
  if (system == templates_.get("reflect_task_system")) {
    const auto requirement = user.substr(0, user.find("\n\nCode:"));
    const auto* task = task_by_requirement(after(requirement, "Requirement:\n"));
    if (!task) throw memcoder::InvariantError("toylib world: unknown requirement in task reflection");
    return task->lesson;
  }
  if (system == templates_.get("reflect_api_system")) {
    const auto api = line_after(user, "API: ");
    auto it = api_guidelines().find(api);
    return it == api_guidelines().end() ? std::string() : it->second;
  }
  if (system == templates_.get("route_system")) {
    const auto candidate = memcoder::trim(after(user, "Candidate guideline:\n"));
    const auto existing = user.substr(0, user.rfind("\n\nCandidate guideline:"));
    const auto listed = after(existing, "Existing guidelines:\n");
    for (const auto& line : memcoder::split_lines(listed)) {
      const auto close = line.find("] ");
      if (close != std::string::npos && line.substr(close + 2) == candidate) return "DISCARD";
    }
    return "ADD";
  }
  throw memcoder::InvariantError("toylib world: unrecognized request");
}

nlohmann::json World::execute(const memcoder::RunnerRequest& request) const {
  return memcoder::StubRunner::lookup(outcomes_, request);
}

std::string WorldRunner::run(const memcoder::RunnerRequest& request) {
  auto response = world_.execute(request);
  {
    std::lock_guard lock(mu_);
    recorded_[memcoder::candidate_fingerprint(request.code, request.tests)] = response;
  }
  return response.dump();
}

std::map<std::string, nlohmann::json> WorldRunner::recorded() const {
  std::lock_guard lock(mu_);
  return recorded_;
}

FixtureSet generate_fixtures(const memcoder::TemplateSet& templates) {
  using namespace memcoder;
  World world(templates);
  FunctionBackend model([&](const ChatRequest& r, std::size_t i) { return world.respond(r, i); }, "toylib-world");
  RecordingBackend recorder(model);
  WorldRunner runner(world);
  DeterministicEmbedder embedder;
  auto lib = std::make_shared<LibraryCatalog>(catalog());
  lib->build_index(embedder);
  const auto stream = benchmark();
  for (const auto mode : all_modes()) {
    RunConfig config;
    config.mode = mode;
    config.n_samples = kFixtureSamples;
    EvolutionEngine engine(Services{recorder, embedder, runner, templates, lib}, config);
    engine.run_stream(stream);
  }

  FixtureSet set;
  set.catalog_json = lib->to_json().dump(2) + "\n";
  for (const auto& task : stream) set.benchmark_jsonl += to_json(task).dump() + "\n";
  set.llm_fixtures_json = fixtures_to_json(recorder.recorded()).dump(2) + "\n";
  nlohmann::json responses = nlohmann::json::object();
  for (const auto& [fp, r] : runner.recorded()) responses[fp] = r;
  set.runner_fixtures_json = responses.dump(2) + "\n";
  return set;
}

void write_fixtures(const FixtureSet& set, const std::filesystem::path& dir) {
  memcoder::write_file_atomic(dir / "catalog.json", set.catalog_json);
  memcoder::write_file_atomic(dir / "benchmark.jsonl", set.benchmark_jsonl);
  memcoder::write_file_atomic(dir / "llm_fixtures.json", set.llm_fixtures_json);
  memcoder::write_file_atomic(dir / "runner_fixtures.json", set.runner_fixtures_json);
}

}  // namespace toylib
