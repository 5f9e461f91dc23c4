#pragma once

#include <array>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace hcdir {

// The four node types of the insurance interaction graph.
enum class NodeType : int { User = 0, Agent = 1, Item = 2, Property = 3 };
constexpr int kNumNodeTypes = 4;

// The six directed relations. Each forward relation has an exact reverse.
enum class RelationKind : int {
  Purchase = 0,     // User -> Item
  PurchasedBy = 1,  // Item -> User
  ServedBy = 2,     // User -> Agent
  Serve = 3,        // Agent -> User
  Possess = 4,      // Item -> Property
  PossessedBy = 5,  // Property -> Item
};
constexpr int kNumRelations = 6;

struct RelationInfo {
  const char* name;
  NodeType src;
  NodeType dst;
  RelationKind reverse;
};

constexpr std::array<RelationInfo, kNumRelations> kRelations{{
    {"purchase", NodeType::User, NodeType::Item, RelationKind::PurchasedBy},
    {"purchased_by", NodeType::Item, NodeType::User, RelationKind::Purchase},
    {"served_by", NodeType::User, NodeType::Agent, RelationKind::Serve},
    {"serve", NodeType::Agent, NodeType::User, RelationKind::ServedBy},
    {"possess", NodeType::Item, NodeType::Property, RelationKind::PossessedBy},
    {"possessed_by", NodeType::Property, NodeType::Item, RelationKind::Possess},
}};

inline const RelationInfo& relation_info(RelationKind r) {
  return kRelations[static_cast<int>(r)];
}

const char* node_type_name(NodeType t);
char node_type_code(NodeType t);  // U / A / I / P
NodeType node_type_from_code(char c);

// Resolves the relation for a (src, dst) node-type pair; throws if none exists.
RelationKind relation_between(NodeType src, NodeType dst);
bool has_relation_between(NodeType src, NodeType dst);

// Parses a relation name ("purchase", ...); throws SchemaError for unknown names.
RelationKind relation_from_name(const std::string& name);

struct NodeRef {
  NodeType type;
  int id;

  friend bool operator==(const NodeRef&, const NodeRef&) = default;
  friend auto operator<=>(const NodeRef& a, const NodeRef& b) {
    if (auto c = static_cast<int>(a.type) <=> static_cast<int>(b.type); c != 0) return c;
    return a.id <=> b.id;
  }
};

std::string to_string(const NodeRef& n);

// Error taxonomy for the operation contracts.
struct SchemaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct BoundsError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ContractError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct NumericError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct IntegrityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct TrainingError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace hcdir
