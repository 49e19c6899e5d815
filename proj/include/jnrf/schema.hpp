#pragma once

// Medication entity/relation schema: nine entity types, eight attribute->drug
// relation types, and the 19-class BIO label space built from them.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>

namespace jnrf {

enum class EntityType : int { kDrug = 0, kStrength, kForm, kDosage, kFrequency, kRoute, kDuration, kReason, kAde };

inline constexpr int kNumEntityTypes = 9;
inline constexpr int kNumRelationTypes = 8;
inline constexpr int kNumBioClasses = 2 * kNumEntityTypes + 1;
inline constexpr int kOutsideLabel = 0;

inline constexpr std::array<std::string_view, kNumEntityTypes> kEntityNames = {
    "Drug", "Strength", "Form", "Dosage", "Frequency", "Route", "Duration", "Reason", "ADE"};

inline constexpr std::array<std::string_view, kNumRelationTypes> kRelationNames = {
    "Strength-Drug", "Form-Drug", "Dosage-Drug", "Frequency-Drug",
    "Route-Drug",    "Duration-Drug", "Reason-Drug", "ADE-Drug"};

inline std::string_view entity_name(EntityType t) { return kEntityNames[static_cast<int>(t)]; }

inline std::optional<EntityType> parse_entity_type(std::string_view s) {
  for (int i = 0; i < kNumEntityTypes; ++i)
    if (kEntityNames[i] == s) return static_cast<EntityType>(i);
  return std::nullopt;
}

/// Relation type index (0..7) of an attribute type; Drug has none.
inline std::optional<int> relation_for_attribute(EntityType t) {
  if (t == EntityType::kDrug) return std::nullopt;
  return static_cast<int>(t) - 1;
}

/// Attribute entity type expected as Arg1 of relation type `r`.
inline EntityType attribute_of_relation(int r) { return static_cast<EntityType>(r + 1); }

inline std::string_view relation_name(int r) { return kRelationNames[r]; }

inline std::optional<int> parse_relation_type(std::string_view s) {
  for (int i = 0; i < kNumRelationTypes; ++i)
    if (kRelationNames[i] == s) return i;
  return std::nullopt;
}

// O = 0, B-X = 1 + 2x, I-X = 2 + 2x.
inline int begin_label(EntityType t) { return 1 + 2 * static_cast<int>(t); }
inline int inside_label(EntityType t) { return 2 + 2 * static_cast<int>(t); }
inline bool is_begin(int label) { return label > 0 && label % 2 == 1; }
inline bool is_inside(int label) { return label > 0 && label % 2 == 0; }
inline EntityType label_type(int label) { return static_cast<EntityType>((label - 1) / 2); }

inline std::string label_name(int label) {
  if (label == kOutsideLabel) return "O";
  return std::string(is_begin(label) ? "B-" : "I-") + std::string(entity_name(label_type(label)));
}

}  // namespace jnrf
