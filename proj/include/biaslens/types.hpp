#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace biaslens {

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LengthMismatchError : Error {
  using Error::Error;
};
// Carries which input ("x" or "y") had no spread.
struct ZeroVarianceError : Error {
  explicit ZeroVarianceError(std::string which_vector)
      : Error("zero variance in vector '" + which_vector + "'"),
        which(std::move(which_vector)) {}
  std::string which;
};
struct EmptyInputError : Error {
  using Error::Error;
};
struct InsufficientDataError : Error {
  using Error::Error;
};
struct EmptyDatasetError : Error {
  using Error::Error;
};
struct UnknownKeywordError : Error {
  using Error::Error;
};
struct ConfigError : Error {
  using Error::Error;
};

// ---------------------------------------------------------------------------
// Domain enums
// ---------------------------------------------------------------------------

enum class Action : std::uint8_t { Click = 0, Like = 1 };
enum class Gender : std::uint8_t { Male = 0, Female = 1 };
enum class AgeCategory : std::uint8_t {
  Under20 = 0,
  Age20to24,
  Age25to29,
  Thirties,
  Forties,
  Over50
};
enum class AgeBucket : std::uint8_t { Young = 0, Middle = 1, Older = 2 };
enum class Axis : std::uint8_t { Gender = 0, Age = 1 };

inline constexpr std::size_t kNumActions = 2;
inline constexpr std::size_t kNumGenders = 2;
inline constexpr std::size_t kNumAgeBuckets = 3;

inline std::string_view label(Action a) {
  return a == Action::Click ? "click" : "like";
}
inline std::string_view label(Gender g) {
  return g == Gender::Male ? "male" : "female";
}
inline std::string_view label(AgeBucket b) {
  switch (b) {
    case AgeBucket::Young: return "young";
    case AgeBucket::Middle: return "middle";
    default: return "older";
  }
}
inline std::string_view label(AgeCategory c) {
  switch (c) {
    case AgeCategory::Under20: return "u20";
    case AgeCategory::Age20to24: return "20-24";
    case AgeCategory::Age25to29: return "25-29";
    case AgeCategory::Thirties: return "30s";
    case AgeCategory::Forties: return "40s";
    default: return "50+";
  }
}
inline std::string_view label(Axis a) {
  return a == Axis::Gender ? "gender" : "age";
}

inline std::optional<Action> action_from_label(std::string_view s) {
  if (s == "click") return Action::Click;
  if (s == "like") return Action::Like;
  return std::nullopt;
}
inline std::optional<Gender> gender_from_label(std::string_view s) {
  if (s == "male") return Gender::Male;
  if (s == "female") return Gender::Female;
  return std::nullopt;
}
inline std::optional<AgeCategory> age_from_label(std::string_view s) {
  if (s == "u20") return AgeCategory::Under20;
  if (s == "20-24") return AgeCategory::Age20to24;
  if (s == "25-29") return AgeCategory::Age25to29;
  if (s == "30s") return AgeCategory::Thirties;
  if (s == "40s") return AgeCategory::Forties;
  if (s == "50+") return AgeCategory::Over50;
  return std::nullopt;
}

// Total function: collapses the six raw age categories into three buckets.
inline AgeBucket bucket_age(AgeCategory age) {
  switch (age) {
    case AgeCategory::Under20:
    case AgeCategory::Age20to24:
    case AgeCategory::Age25to29:
      return AgeBucket::Young;
    case AgeCategory::Thirties:
      return AgeBucket::Middle;
    default:
      return AgeBucket::Older;
  }
}

// ---------------------------------------------------------------------------
// Attribute values and pairs
// ---------------------------------------------------------------------------

// One value on one demographic axis. The two axes never mix in a pair.
using AttributeValue = std::variant<Gender, AgeBucket>;

inline Axis axis_of(const AttributeValue& v) {
  return std::holds_alternative<Gender>(v) ? Axis::Gender : Axis::Age;
}
inline std::string_view label(const AttributeValue& v) {
  if (const auto* g = std::get_if<Gender>(&v)) return label(*g);
  return label(std::get<AgeBucket>(v));
}
inline std::optional<AttributeValue> attribute_value_from_labels(
    std::string_view axis, std::string_view value) {
  if (axis == "gender") {
    if (auto g = gender_from_label(value)) return AttributeValue{*g};
    return std::nullopt;
  }
  if (axis == "age") {
    if (value == "young") return AttributeValue{AgeBucket::Young};
    if (value == "middle") return AttributeValue{AgeBucket::Middle};
    if (value == "older") return AttributeValue{AgeBucket::Older};
  }
  return std::nullopt;
}

// Ordered pair on one axis: `first` plays the regression response y,
// `second` the predictor x.
struct AttributePair {
  AttributeValue first;
  AttributeValue second;

  AttributePair(AttributeValue a, AttributeValue b) : first(a), second(b) {
    if (axis_of(a) != axis_of(b) || a == b)
      throw ConfigError("attribute pair must hold two distinct values on one axis");
  }

  Axis axis() const { return axis_of(first); }
  std::string name() const {
    return std::string(label(first)) + "-" + std::string(label(second));
  }

  friend bool operator==(const AttributePair& a, const AttributePair& b) {
    return a.first == b.first && a.second == b.second;
  }
  friend bool operator<(const AttributePair& a, const AttributePair& b) {
    if (a.first != b.first) return a.first < b.first;
    return a.second < b.second;
  }
};

// The four comparisons reported throughout: one gender pair, three age pairs.
inline const std::vector<AttributePair>& canonical_pairs() {
  static const std::vector<AttributePair> pairs = {
      AttributePair{Gender::Male, Gender::Female},
      AttributePair{AgeBucket::Young, AgeBucket::Middle},
      AttributePair{AgeBucket::Middle, AgeBucket::Older},
      AttributePair{AgeBucket::Older, AgeBucket::Young},
  };
  return pairs;
}

// ---------------------------------------------------------------------------
// Records
// ---------------------------------------------------------------------------

struct InteractionEvent {
  std::string user_id;
  std::string article_id;
  Action action = Action::Click;
  Gender gender = Gender::Male;
  AgeCategory age = AgeCategory::Under20;
  std::optional<std::string> ts;
};

struct Article {
  std::string article_id;
  std::string title;
  std::string category;
};

}  // namespace biaslens
