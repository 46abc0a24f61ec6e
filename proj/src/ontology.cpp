#include "docforge/ontology.hpp"

#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include <json.hpp>

#include "docforge/error.hpp"

namespace docforge {

namespace {

using nlohmann::json;

OntologyNode node_from_json(const json& j, int level) {
    if (level > 4) {
        throw ValidationError("ontology deeper than 4 levels");
    }
    if (!j.is_object() || !j.contains("name") || !j["name"].is_string()) {
        throw ValidationError("ontology node must be an object with a string 'name'");
    }
    OntologyNode node;
    node.name = j["name"].get<std::string>();
    node.level = level;
    if (normalize_keyword(node.name).empty()) {
        throw ValidationError("ontology node with empty name at level " + std::to_string(level));
    }
    if (j.contains("children")) {
        if (!j["children"].is_array()) {
            throw ValidationError("'children' must be an array");
        }
        std::unordered_set<std::string> sibling_names;
        for (const auto& child : j["children"]) {
            node.children.push_back(node_from_json(child, level + 1));
            if (!sibling_names.insert(normalize_keyword(node.children.back().name)).second) {
                throw ValidationError("duplicate sibling name '" + node.children.back().name + "'");
            }
        }
    }
    return node;
}

std::size_t collect_leaves(const OntologyNode& node, std::vector<std::string>* path,
                           std::vector<LeafKeyword>* out) {
    if (node.is_leaf()) {
        if (node.level < 2) {
            return 0;  // a childless root carries no query keywords
        }
        if (out != nullptr) {
            out->push_back({node.name, *path});
        }
        return 1;
    }
    std::size_t count = 0;
    path->push_back(node.name);
    for (const auto& child : node.children) {
        count += collect_leaves(child, path, out);
    }
    path->pop_back();
    return count;
}

void write_node(const OntologyNode& node, json& out) {
    out["name"] = node.name;
    if (!node.children.empty()) {
        out["children"] = json::array();
        for (const auto& child : node.children) {
            out["children"].push_back(json::object());
            write_node(child, out["children"].back());
        }
    }
}

}  // namespace

std::string normalize_keyword(const std::string& keyword) {
    std::string out;
    out.reserve(keyword.size());
    bool pending_space = false;
    for (unsigned char c : keyword) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

OntologyTree parse_ontology(const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("ontology is not valid JSON: ") + e.what());
    }
    OntologyTree tree;
    tree.root = node_from_json(j, 1);

    std::vector<LeafKeyword> leaves;
    std::vector<std::string> path;
    tree.leaf_count = collect_leaves(tree.root, &path, &leaves);
    if (tree.leaf_count == 0) {
        throw ValidationError("ontology has no leaf keywords");
    }
    std::unordered_set<std::string> seen;
    for (const auto& leaf : leaves) {
        if (!seen.insert(normalize_keyword(leaf.keyword)).second) {
            throw ValidationError("duplicate leaf keyword '" + leaf.keyword + "'");
        }
    }
    return tree;
}

OntologyTree load_ontology(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open ontology file: " + path);
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_ontology(ss.str());
}

std::string serialize_ontology(const OntologyTree& tree) {
    json j = json::object();
    write_node(tree.root, j);
    return j.dump(2) + "\n";
}

std::vector<LeafKeyword> leaf_keywords(const OntologyTree& tree) {
    std::vector<LeafKeyword> out;
    std::vector<std::string> path;
    collect_leaves(tree.root, &path, &out);
    return out;
}

}  // namespace docforge
