#include "hcdir/types.hpp"

namespace hcdir {

const char* node_type_name(NodeType t) {
  switch (t) {
    case NodeType::User: return "user";
    case NodeType::Agent: return "agent";
    case NodeType::Item: return "item";
    case NodeType::Property: return "property";
  }
  throw ContractError("invalid node type");
}

char node_type_code(NodeType t) {
  switch (t) {
    case NodeType::User: return 'U';
    case NodeType::Agent: return 'A';
    case NodeType::Item: return 'I';
    case NodeType::Property: return 'P';
  }
  throw ContractError("invalid node type");
}

NodeType node_type_from_code(char c) {
  switch (c) {
    case 'U': return NodeType::User;
    case 'A': return NodeType::Agent;
    case 'I': return NodeType::Item;
    case 'P': return NodeType::Property;
  }
  throw SchemaError(std::string("unknown node type code '") + c + "'");
}

bool has_relation_between(NodeType src, NodeType dst) {
  for (const auto& r : kRelations)
    if (r.src == src && r.dst == dst) return true;
  return false;
}

RelationKind relation_between(NodeType src, NodeType dst) {
  for (int i = 0; i < kNumRelations; ++i)
    if (kRelations[i].src == src && kRelations[i].dst == dst)
      return static_cast<RelationKind>(i);
  throw SchemaError(std::string("no relation from ") + node_type_name(src) + " to " +
                    node_type_name(dst));
}

RelationKind relation_from_name(const std::string& name) {
  for (int i = 0; i < kNumRelations; ++i)
    if (name == kRelations[i].name) return static_cast<RelationKind>(i);
  throw SchemaError("unknown relation name '" + name + "'");
}

std::string to_string(const NodeRef& n) {
  return std::string(1, node_type_code(n.type)) + std::to_string(n.id);
}

}  // namespace hcdir
