#pragma once

// Evaluator fixture shared by the unit tests and the acceptance binary.

#include <string>
#include <utility>
#include <vector>

#include "jnrf/corpus.hpp"

namespace jnrf::testing {

inline EntitySpan ent(std::size_t s, std::size_t e, EntityType t) { return {"", t, s, e, ""}; }

// Two documents, three gold relations, two predicted, one of them right.
inline std::pair<std::vector<Document>, std::vector<Document>> two_doc_fixture() {
  const std::string t1 = "Aspirin 81 mg daily. Heparin iv.";
  const std::string t2 = "Insulin sc for diabetes.";
  auto doc = [](std::string id, std::string text, std::vector<EntitySpan> es, std::vector<Relation> rs) {
    Document d;
    d.doc_id = std::move(id);
    d.text = std::move(text);
    d.gold_entities = std::move(es);
    d.gold_relations = std::move(rs);
    return d;
  };
  // doc a: Aspirin(0,7) 81 mg(8,13) daily(14,19) Heparin(21,28) iv(29,31)
  std::vector<Document> gold{
      doc("a", t1,
          {ent(0, 7, EntityType::kDrug), ent(8, 13, EntityType::kStrength), ent(14, 19, EntityType::kFrequency),
           ent(21, 28, EntityType::kDrug), ent(29, 31, EntityType::kRoute)},
          {{"R1", 0, 1, 0}, {"R2", 3, 2, 0}, {"R3", 4, 4, 3}}),
      doc("b", t2, {ent(0, 7, EntityType::kDrug), ent(8, 10, EntityType::kRoute)}, {})};
  std::vector<Document> pred{
      doc("a", t1,
          {ent(0, 7, EntityType::kDrug), ent(8, 10, EntityType::kStrength), ent(14, 19, EntityType::kFrequency),
           ent(21, 28, EntityType::kDrug)},
          {{"R1", 0, 1, 0}, {"R2", 3, 2, 3}}),  // strength right (lenient), frequency attached to wrong drug
      doc("b", t2, {ent(0, 7, EntityType::kDrug), ent(8, 10, EntityType::kRoute)}, {})};
  for (auto* set : {&gold, &pred})
    for (auto& d : *set) d.tokens.resize(d.text.size() / 4);
  return {pred, gold};
}

}  // namespace jnrf::testing
