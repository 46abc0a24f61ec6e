#pragma once

#include <string>
#include <vector>

namespace docforge {

/// Node of the keyword hierarchy. Leaves (no children) carry the retrieval
/// query keywords; the root is level 1 and never counts as a leaf.
struct OntologyNode {
    std::string name;
    int level = 1;
    std::vector<OntologyNode> children;

    bool is_leaf() const { return children.empty(); }
    bool operator==(const OntologyNode&) const = default;
};

struct OntologyTree {
    OntologyNode root;
    std::size_t leaf_count = 0;

    bool operator==(const OntologyTree&) const = default;
};

struct LeafKeyword {
    std::string keyword;
    std::vector<std::string> path;  // ancestor names, root first
};

/// Lowercase + collapse runs of whitespace; the form used for the
/// cross-leaf uniqueness check.
std::string normalize_keyword(const std::string& keyword);

/// Parse and validate {"name": ..., "children": [...]} JSON text.
/// Rejects depth > 4, empty names, duplicate sibling names, duplicate leaf
/// keywords (case-insensitive) and trees without any leaf below the root.
OntologyTree parse_ontology(const std::string& json_text);

OntologyTree load_ontology(const std::string& path);

/// Canonical serialization; parse(serialize(t)) == t.
std::string serialize_ontology(const OntologyTree& tree);

/// Pre-order leaf enumeration; result size equals tree.leaf_count.
std::vector<LeafKeyword> leaf_keywords(const OntologyTree& tree);

}  // namespace docforge
