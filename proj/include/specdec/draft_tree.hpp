// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "specdec/common.hpp"

namespace specdec {

// Parent sentinel: the (implicit) root of a draft tree, i.e. the last
// committed token of root_context.
inline constexpr std::int32_t root_index = -1;

struct draft_node {
    token_id token = 0;
    std::int32_t parent = root_index; // node index or root_index
    std::int32_t depth = 1;           // root children have depth 1
    double logprob = 0.0;             // draft logprob of token given its path
    double cum_logprob = 0.0;         // sum of logprob along the root path
};

// Token tree drafted each cycle. Nodes are append-only and stored in
// topological order (parents precede children); pruning produces a new tree.
struct draft_tree {
    std::vector<token_id> root_context; // tokens already committed
    std::vector<draft_node> nodes;

    std::int32_t add_child(std::int32_t parent, token_id token, double logprob) {
        if (parent != root_index &&
            (parent < 0 || parent >= static_cast<std::int32_t>(nodes.size()))) {
            throw structural_error("draft_tree::add_child: dangling parent index");
        }
        if (token < 0) {
            throw input_error("draft_tree::add_child: negative token");
        }
        if (!(logprob <= 0.0)) {
            throw input_error("draft_tree::add_child: logprob must be <= 0");
        }
        draft_node n;
        n.token = token;
        n.parent = parent;
        if (parent == root_index) {
            n.depth = 1;
            n.cum_logprob = logprob;
        } else {
            n.depth = nodes[parent].depth + 1;
            n.cum_logprob = nodes[parent].cum_logprob + logprob;
        }
        n.logprob = logprob;
        nodes.push_back(n);
        return static_cast<std::int32_t>(nodes.size()) - 1;
    }

    // Tokens from the depth-1 ancestor down to `node`, in order.
    std::vector<token_id> path_to_root(std::int32_t node) const {
        if (node < 0 || node >= static_cast<std::int32_t>(nodes.size())) {
            throw structural_error("draft_tree::path_to_root: bad node index");
        }
        std::vector<token_id> path;
        path.reserve(nodes[node].depth);
        for (std::int32_t i = node; i != root_index; i = nodes[i].parent) {
            path.push_back(nodes[i].token);
        }
        std::reverse(path.begin(), path.end());
        return path;
    }

    // Indented text dump, children in insertion order.
    std::string dump_indented() const {
        std::string out;
        char line[160];
        std::vector<std::vector<std::int32_t>> children(nodes.size() + 1);
        for (std::int32_t i = 0; i < static_cast<std::int32_t>(nodes.size()); ++i) {
            const std::int32_t p = nodes[i].parent;
            children[p == root_index ? nodes.size() : p].push_back(i);
        }
        std::snprintf(line, sizeof(line), "root (%zu context tokens)\n", root_context.size());
        out += line;
        // iterative DFS, siblings visited in index order
        std::vector<std::int32_t> stack(children[nodes.size()].rbegin(), children[nodes.size()].rend());
        while (!stack.empty()) {
            const std::int32_t i = stack.back();
            stack.pop_back();
            const draft_node& n = nodes[i];
            std::snprintf(line, sizeof(line), "%*s[%d] token=%d logprob=%.6f cum=%.6f\n",
                          2 * n.depth, "", i, n.token, n.logprob, n.cum_logprob);
            out += line;
            for (auto it = children[i].rbegin(); it != children[i].rend(); ++it) {
                stack.push_back(*it);
            }
        }
        return out;
    }

    // Machine-readable node list: one node per line,
    // "index\ttoken\tparent\tdepth\tlogprob\tcum_logprob" (doubles round-trip).
    std::string dump_node_list() const {
        std::string out = "index\ttoken\tparent\tdepth\tlogprob\tcum_logprob\n";
        char line[160];
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const draft_node& n = nodes[i];
            std::snprintf(line, sizeof(line), "%zu\t%d\t%d\t%d\t%.17g\t%.17g\n",
                          i, n.token, n.parent, n.depth, n.logprob, n.cum_logprob);
            out += line;
        }
        return out;
    }
};

// Structural well-formedness: topological parent order, depth bookkeeping,
// cumulative sums, nonnegative tokens. Throws structural_error.
inline void validate_structure(const draft_tree& tree) {
    for (std::int32_t i = 0; i < static_cast<std::int32_t>(tree.nodes.size()); ++i) {
        const draft_node& n = tree.nodes[i];
        if (n.parent != root_index && (n.parent < 0 || n.parent >= i)) {
            throw structural_error("draft_tree: parent does not precede child");
        }
        const std::int32_t want_depth = n.parent == root_index ? 1 : tree.nodes[n.parent].depth + 1;
        if (n.depth != want_depth) {
            throw structural_error("draft_tree: inconsistent depth");
        }
        const double want_cum = n.logprob + (n.parent == root_index ? 0.0 : tree.nodes[n.parent].cum_logprob);
        if (!(std::fabs(n.cum_logprob - want_cum) <= 1e-9)) {
            throw structural_error("draft_tree: inconsistent cum_logprob");
        }
        if (n.token < 0) {
            throw structural_error("draft_tree: negative token");
        }
    }
}

// Fixed drafting shape: entry d gives, for every node retained at depth d
// (entry 0 applies to the root), how many top-ranked child tokens to expand.
struct static_tree_template {
    std::vector<std::int32_t> children_per_depth;
};

inline void validate(const static_tree_template& tmpl) {
    for (std::int32_t c : tmpl.children_per_depth) {
        if (c < 1) {
            throw config_error("static_tree_template: entries must be >= 1");
        }
    }
}

// Stand-in for the usual fixed drafting tree; configurable via bench keys.
inline static_tree_template default_static_template() {
    return static_tree_template{{4, 2, 2, 1, 1, 1}};
}

} // namespace specdec
