#include <gtest/gtest.h>

#include "joinsim/errors.hpp"
#include "joinsim/query.hpp"
#include "test_support.hpp"

namespace joinsim {
namespace {

std::shared_ptr<Catalog> chain_catalog() {
  auto catalog = std::make_shared<Catalog>();
  catalog->add_relation(testing::int_relation("a", {"id", "f"}, {{0, 1}}));
  catalog->add_relation(testing::int_relation("b", {"aid", "cid"}, {{0, 0}}));
  catalog->add_relation(testing::int_relation("c", {"id", "g"}, {{0, 0}}));
  catalog->add_relation(testing::int_relation("d", {"id"}, {{0}}));
  Relation s("s", {{"name", ValueDomain::string}});
  catalog->add_relation(std::move(s));
  return catalog;
}

TEST(Query, BindsSlotsColumnsAndJoins) {
  auto inst = testing::make_instance(chain_catalog(),
                                     "SELECT * FROM c AS z, b AS y, a AS x, d AS w "
                                     "WHERE y.cid = z.id AND x.id = y.aid AND x.f = 1 AND x.f < 4");
  const Query& q = inst.query;
  EXPECT_EQ(q.tables, (std::vector<SlotIndex>{0, 1, 2, 3}));
  ASSERT_EQ(q.joins.size(), 2u);
  for (const auto& j : q.joins) {
    EXPECT_LT(inst.registry.column(j.left).slot, inst.registry.column(j.right).slot);
  }
  EXPECT_TRUE(std::is_sorted(q.joins.begin(), q.joins.end()));
  ASSERT_EQ(q.filters.size(), 1u);
  EXPECT_EQ(q.filters.begin()->second.kind, FilterKind::conjunction);
  EXPECT_EQ(q.aliases.at(0), "x");
  EXPECT_EQ(q.table_mask(), 0xFu);

  QueryGraph graph(q, inst.registry);
  EXPECT_EQ(graph.size(), 4u);
  EXPECT_TRUE(graph.linked(0b0001, 0b0010));
  EXPECT_FALSE(graph.linked(0b0001, 0b0100));
  EXPECT_TRUE(graph.is_connected(0b0111));
  EXPECT_FALSE(graph.is_connected(0b1111));
  EXPECT_EQ(graph.components(0b1101), (std::vector<std::uint64_t>{0b0001, 0b0100, 0b1000}));
  EXPECT_EQ(graph.to_local(graph.to_global(0b1010)), 0b1010u);
}

TEST(Query, SelfJoinsGetDistinctSlots) {
  auto inst = testing::make_instance(chain_catalog(), "SELECT * FROM b AS b1, b AS b2 WHERE b1.aid = b2.cid");
  EXPECT_EQ(inst.query.tables.size(), 2u);
  EXPECT_EQ(inst.registry.slot(inst.query.tables[1]).occurrence, 2u);
  EXPECT_EQ(inst.query.aliases.at(inst.query.tables[1]), "b2");
}

TEST(Query, BindErrors) {
  auto catalog = chain_catalog();
  std::vector<std::vector<std::string>> tables{{"a", "b", "s"}};
  const AliasRegistry registry = build_alias_registry(*catalog, tables);
  EXPECT_THROW(parse_and_bind("SELECT * FROM a AS x, b AS y WHERE x.nope = y.aid", registry), BindError);
  EXPECT_THROW(parse_and_bind("SELECT * FROM a AS x, b AS y, b AS z WHERE x.id = y.aid", registry), BindError);
  EXPECT_THROW(parse_and_bind("SELECT * FROM a AS x", registry), BindError);
  EXPECT_THROW(parse_and_bind("SELECT * FROM a AS x, s AS y WHERE x.id = y.name", registry), BindError);
  EXPECT_THROW(parse_and_bind("SELECT * FROM a AS x, d AS y WHERE x.id = y.id", registry), BindError);
}

TEST(Query, FilterToStringUsesColumnNames) {
  auto inst = testing::make_instance(chain_catalog(), "SELECT * FROM a AS x, b AS y WHERE x.id = y.aid AND x.f IN (1, 2)");
  const std::string text = to_string(inst.query.filters.begin()->second, inst.registry);
  EXPECT_NE(text.find("f"), std::string::npos);
  EXPECT_NE(text.find("2"), std::string::npos);
}

}  // namespace
}  // namespace joinsim
