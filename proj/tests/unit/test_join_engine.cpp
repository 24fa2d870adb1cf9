#include <gtest/gtest.h>

#include <atomic>
#include <thread>

#include "joinsim/errors.hpp"
#include "joinsim/join_engine.hpp"
#include "test_support.hpp"

namespace joinsim {
namespace {

using testing::brute_force_count;
using testing::make_instance;

SlotIndex slot_of(const Query& q, const std::string& alias) {
  for (const auto& [slot, name] : q.aliases) {
    if (name == alias) return slot;
  }
  throw std::out_of_range(alias);
}

std::shared_ptr<Catalog> people_catalog() {
  auto catalog = std::make_shared<Catalog>();
  Relation p("p", {{"id", ValueDomain::integer}, {"city", ValueDomain::string}, {"age", ValueDomain::integer}});
  const char* cities[] = {"rome", "oslo", "rome", "lima", "oslo"};
  for (std::int64_t i = 0; i < 5; ++i) {
    std::vector<std::int64_t> row{i, catalog->strings().intern(cities[i]), 20 + 5 * i};
    p.append_row(row);
  }
  catalog->add_relation(std::move(p));
  catalog->add_relation(testing::int_relation("f", {"a", "b"}, {{0, 1}, {0, 2}, {1, 2}, {2, 2}, {4, 0}, {4, 4}}));
  catalog->add_relation(testing::int_relation("e", {"x"}, {}));
  return catalog;
}

TEST(Filter, EvaluatesEachKind) {
  auto inst = make_instance(people_catalog(),
                            "SELECT * FROM p AS p1, f AS f1 WHERE p1.id = f1.a AND p1.city IN ('rome', 'nowhere') "
                            "AND p1.age > 20");
  CardinalityOracle oracle(*inst.catalog, inst.registry, inst.query);
  const FilteredTable& people = oracle.filtered(*oracle.graph().local_index(slot_of(inst.query, "p1")));
  EXPECT_EQ(people.rows, (std::vector<std::uint32_t>{2}));
  EXPECT_DOUBLE_EQ(people.selectivity, 0.2);
  EXPECT_EQ(people.base_row_count, 5u);
}

TEST(Filter, UnknownStringMatchesNothing) {
  auto inst = make_instance(people_catalog(),
                            "SELECT * FROM p AS p1, f AS f1 WHERE p1.id = f1.a AND p1.city = 'paris'");
  CardinalityOracle oracle(*inst.catalog, inst.registry, inst.query);
  EXPECT_TRUE(oracle.subset_cardinality(SubsetKey{inst.query.table_mask()}).is_zero());
}

TEST(Filter, RejectsTypeMismatch) {
  auto inst = make_instance(people_catalog(), "SELECT * FROM p AS p1, f AS f1 WHERE p1.id = f1.a AND p1.city = 3");
  EXPECT_THROW(CardinalityOracle(*inst.catalog, inst.registry, inst.query), BindError);
  auto inst2 = make_instance(people_catalog(), "SELECT * FROM p AS p1, f AS f1 WHERE p1.id = f1.a AND p1.age = 'x'");
  EXPECT_THROW(CardinalityOracle(*inst2.catalog, inst2.registry, inst2.query), BindError);
  auto inst3 = make_instance(people_catalog(), "SELECT * FROM p AS p1, f AS f1 WHERE p1.id = f1.a");
  FilterPredicate foreign{FilterKind::equals, ColumnId{*inst3.registry.column_id(slot_of(inst3.query, "f1"), "a")},
                          {std::int64_t{1}}, {}};
  EXPECT_THROW(apply_filter(*inst3.catalog, inst3.registry, slot_of(inst3.query, "p1"), &foreign), BindError);
}

TEST(Oracle, BagSemanticsAndCartesianProducts) {
  auto inst = make_instance(people_catalog(),
                            "SELECT * FROM p AS p1, f AS f1, f AS f2 WHERE p1.id = f1.a AND f1.b = f2.b");
  CardinalityOracle oracle(*inst.catalog, inst.registry, inst.query);
  const QueryGraph& g = oracle.graph();
  for (std::uint64_t mask = 1; mask <= g.full_mask(); ++mask) {
    EXPECT_EQ(oracle.local_cardinality(mask), brute_force_count(*inst.catalog, inst.registry, inst.query, mask))
        << mask;
  }
  const std::uint64_t f1 = 1ULL << *g.local_index(slot_of(inst.query, "f1"));
  const std::uint64_t f2 = 1ULL << *g.local_index(slot_of(inst.query, "f2"));
  EXPECT_EQ(oracle.local_cardinality(f1 | f2), Cardinality{12});
  EXPECT_THROW(oracle.local_cardinality(0), LimitError);
  EXPECT_THROW(oracle.subset_cardinality(SubsetKey{1ULL << 40}), LimitError);
}

TEST(Oracle, UnlinkedSetsMultiply) {
  auto inst = make_instance(people_catalog(), "SELECT * FROM p AS p1, f AS f1, f AS f2 WHERE p1.id = f1.a");
  CardinalityOracle oracle(*inst.catalog, inst.registry, inst.query);
  const auto& g = oracle.graph();
  const std::uint64_t f2 = 1ULL << *g.local_index(slot_of(inst.query, "f2"));
  const std::uint64_t rest = g.full_mask() & ~f2;
  EXPECT_EQ(oracle.local_cardinality(g.full_mask()), oracle.local_cardinality(rest) * oracle.local_cardinality(f2));
}

TEST(Oracle, EmptyTableGivesZero) {
  auto inst = make_instance(people_catalog(), "SELECT * FROM p AS p1, e AS e1 WHERE p1.id = e1.x");
  CardinalityOracle oracle(*inst.catalog, inst.registry, inst.query);
  EXPECT_TRUE(oracle.local_cardinality(0b11).is_zero());
  const auto e = *oracle.graph().local_index(inst.query.tables[0]);
  EXPECT_EQ(inst.registry.slot(inst.query.tables[0]).base_table, "e");
  EXPECT_EQ(oracle.filtered(e).size(), 0u);
  EXPECT_DOUBLE_EQ(oracle.filtered(e).selectivity, 1.0);
}

TEST(Oracle, MatchesBruteForceOnRandomInstances) {
  Rng rng(99);
  for (int i = 0; i < 40; ++i) {
    testing::RandomInstanceOptions opts;
    opts.connected = i % 3 != 0;
    auto inst = testing::random_instance(rng, opts);
    CardinalityOracle oracle(*inst.catalog, inst.registry, inst.query);
    for (std::uint64_t mask = 1; mask <= oracle.graph().full_mask(); ++mask) {
      ASSERT_EQ(oracle.local_cardinality(mask), brute_force_count(*inst.catalog, inst.registry, inst.query, mask))
          << inst.query.sql << " mask " << mask;
    }
  }
}

TEST(Oracle, ConcurrentReadersAgree) {
  const auto& pipeline = testing::fixture_pipeline(4, 3, {"q3"});
  const Query& q = pipeline.workload->queries.front();
  CardinalityOracle shared(*pipeline.catalog, pipeline.workload->registry, q);
  const Trace& expected = pipeline.traces->at(q.id);
  std::vector<std::thread> threads;
  std::atomic<int> mismatches{0};
  for (int t = 0; t < 4; ++t) {
    threads.emplace_back([&, t] {
      const std::uint64_t full = shared.graph().full_mask();
      for (std::uint64_t m = full; m >= 1; --m) {
        const std::uint64_t mask = t % 2 ? m : full + 1 - m;
        if (shared.local_cardinality(mask) != expected.lookup_local(mask)) ++mismatches;
      }
    });
  }
  for (auto& th : threads) th.join();
  EXPECT_EQ(mismatches.load(), 0);
}

TEST(Trace, BuildFullTraceRespectsLimit) {
  const auto& pipeline = testing::fixture_pipeline(4, 3, {"q3"});
  const Query& q = pipeline.workload->queries.front();
  CardinalityOracle oracle(*pipeline.catalog, pipeline.workload->registry, q);
  EXPECT_THROW(build_full_trace(oracle, q.tables.size() - 1), LimitError);
  const Trace t = build_full_trace(oracle);
  EXPECT_TRUE(t.complete());
  EXPECT_EQ(t.entry_count(), (1u << q.tables.size()) - 1);
  for (std::size_t k = 0; k < q.tables.size(); ++k) {
    EXPECT_DOUBLE_EQ(t.selectivities()[k], oracle.filtered(k).selectivity);
  }
}

}  // namespace
}  // namespace joinsim
