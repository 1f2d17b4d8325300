// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "specdec/common.hpp"
#include "specdec/draft_tree.hpp"
#include "specdec/lm.hpp"
#include "specdec/numeric.hpp"

namespace specdec {

// One beam member: a leaf node of the draft tree and its cumulative draft
// logprob (the node's cum_logprob).
struct beam_entry {
    std::int32_t node = root_index;
    double logprobsum = 0.0;
};

// Frontier of the beam search, sorted by logprobsum descending, ties by
// lowest node index. Never longer than the beam width.
using beam = std::vector<beam_entry>;

// Variable-depth drafting parameters: at the top of every loop step listed in
// check_steps, the heuristic over the current beam decides whether drafting
// continues (H >= threshold) or stops.
struct ddd_config {
    std::int32_t max_steps = 11;                   // n: max draft scoring rounds
    std::int32_t beam_width = 10;                  // w
    std::vector<std::int32_t> check_steps = {5, 7, 9}; // S, subset of [1, n-1]
    double threshold = -0.3;                       // x, may be -inf
};

inline void validate(const ddd_config& cfg) {
    if (cfg.max_steps < 1) {
        throw config_error("ddd_config: max_steps must be >= 1");
    }
    if (cfg.beam_width < 1) {
        throw config_error("ddd_config: beam_width must be >= 1");
    }
    for (std::int32_t s : cfg.check_steps) {
        if (s < 1 || s > cfg.max_steps - 1) {
            throw config_error("ddd_config: check_steps must lie in [1, max_steps-1]");
        }
    }
}

struct heuristic_check {
    std::int32_t step = 0;
    double value = 0.0;
    bool continued = true;
};

// What one drafting phase produced: the tree to verify, the number of draft
// scoring rounds spent on it, and every heuristic decision taken.
struct draft_outcome {
    draft_tree tree;
    std::int32_t steps_executed = 0;
    std::vector<heuristic_check> checks;
};

// H = log(sum_i exp(logprobsum[i])): log of the summed probabilities of the
// beam sequences. At most log(len), and <= 0 while the sequences are disjoint.
inline double heuristic(std::span<const double> logprobsums) {
    if (logprobsums.empty()) {
        throw input_error("heuristic: empty beam");
    }
    return log_sum_exp(logprobsums);
}

namespace detail {

struct beam_candidate {
    double logprobsum;
    token_id token;
    std::int32_t parent; // node index or root_index
    double logprob;
};

inline bool candidate_before(const beam_candidate& a, const beam_candidate& b) {
    if (a.logprobsum != b.logprobsum) {
        return a.logprobsum > b.logprobsum;
    }
    if (a.token != b.token) {
        return a.token < b.token;
    }
    return a.parent < b.parent;
}

// Scores every frontier member, ranks all (member, token) continuations and
// appends the winners to the tree. Members may include root_index (seeding).
inline beam grow_frontier(draft_tree& tree, const beam& frontier,
                          const language_model& draft, std::int32_t width) {
    const std::int32_t vocab = draft.vocab_size();
    std::vector<beam_candidate> cands;
    cands.reserve(frontier.size() * static_cast<std::size_t>(vocab));
    std::vector<token_id> ctx;
    std::vector<double> lp(static_cast<std::size_t>(vocab));
    for (const beam_entry& member : frontier) {
        ctx.assign(tree.root_context.begin(), tree.root_context.end());
        if (member.node != root_index) {
            const std::vector<token_id> path = tree.path_to_root(member.node);
            ctx.insert(ctx.end(), path.begin(), path.end());
        }
        draft.next_logprobs_into(ctx, lp);
        for (token_id t = 0; t < vocab; ++t) {
            cands.push_back({member.logprobsum + lp[static_cast<std::size_t>(t)],
                             t, member.node, lp[static_cast<std::size_t>(t)]});
        }
    }
    const std::size_t take = std::min<std::size_t>(cands.size(), static_cast<std::size_t>(width));
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(take),
                      cands.end(), candidate_before);
    beam next;
    next.reserve(take);
    for (std::size_t i = 0; i < take; ++i) {
        const std::int32_t idx = tree.add_child(cands[i].parent, cands[i].token, cands[i].logprob);
        next.push_back({idx, cands[i].logprobsum});
    }
    return next;
}

} // namespace detail

// One beam-search step: scores every beam member with the draft model, forms
// all (member, token) candidates scored by member logprobsum + token logprob,
// appends the top `width` (ties: lower token id, then lower parent index) to
// the tree and returns them as the new beam.
inline beam expand_beam(draft_tree& tree, const beam& current,
                        const language_model& draft, std::int32_t width) {
    if (width < 1) {
        throw config_error("expand_beam: width must be >= 1");
    }
    for (const beam_entry& member : current) {
        if (member.node < 0 || member.node >= static_cast<std::int32_t>(tree.nodes.size())) {
            throw structural_error("expand_beam: beam member is not a node of the tree");
        }
    }
    return detail::grow_frontier(tree, current, draft, width);
}

namespace detail {

// Shared beam drafting loop. The first scoring round seeds the beam from the
// root context; each later round expands it. check_steps must be sorted and
// unique; the check runs at the top of its loop step, before that step's
// draft call, so a break at step s leaves exactly s scoring rounds executed.
inline draft_outcome beam_draft(std::span<const token_id> root_context,
                                const language_model& draft, std::int32_t width,
                                std::int32_t max_steps,
                                std::span<const std::int32_t> check_steps,
                                double threshold) {
    draft_outcome out;
    out.tree.root_context.assign(root_context.begin(), root_context.end());
    beam b = grow_frontier(out.tree, beam{{root_index, 0.0}}, draft, width);
    out.steps_executed = 1;
    std::vector<double> sums;
    std::size_t next_check = 0;
    for (std::int32_t step = 1; step < max_steps; ++step) {
        if (next_check < check_steps.size() && check_steps[next_check] == step) {
            ++next_check;
            sums.clear();
            for (const beam_entry& member : b) {
                sums.push_back(member.logprobsum);
            }
            const double h = heuristic(sums);
            const bool continued = !(h < threshold);
            out.checks.push_back({step, h, continued});
            if (!continued) {
                break;
            }
        }
        b = grow_frontier(out.tree, b, draft, width);
        out.steps_executed = step + 1;
    }
    return out;
}

} // namespace detail

// Fixed-depth beam drafting: seeds the beam with the top `width` tokens of
// the root context, then expands it depth-1 times. No heuristic checks.
inline draft_outcome draft_eagle2(std::span<const token_id> root_context,
                                  const language_model& draft,
                                  std::int32_t width, std::int32_t depth) {
    if (depth < 1) {
        throw config_error("draft_eagle2: depth must be >= 1");
    }
    if (width < 1) {
        throw config_error("draft_eagle2: width must be >= 1");
    }
    return detail::beam_draft(root_context, draft, width, depth, {}, -std::numeric_limits<double>::infinity());
}

// Variable-depth beam drafting: identical to draft_eagle2 at depth
// cfg.max_steps, except that each loop step in cfg.check_steps evaluates the
// heuristic first and stops drafting when it falls below cfg.threshold.
inline draft_outcome draft_ddd(std::span<const token_id> root_context,
                               const language_model& draft, const ddd_config& cfg) {
    validate(cfg);
    std::vector<std::int32_t> steps = cfg.check_steps;
    std::sort(steps.begin(), steps.end());
    steps.erase(std::unique(steps.begin(), steps.end()), steps.end());
    return detail::beam_draft(root_context, draft, cfg.beam_width, cfg.max_steps,
                              steps, cfg.threshold);
}

// Fixed-shape drafting: at each depth every retained node expands its top
// children_per_depth[d] tokens by draft logprob (ties: lowest token id,
// capped by the vocabulary). The shape never depends on model outputs.
inline draft_outcome draft_static(std::span<const token_id> root_context,
                                  const language_model& draft,
                                  const static_tree_template& tmpl) {
    validate(tmpl);
    draft_outcome out;
    out.tree.root_context.assign(root_context.begin(), root_context.end());
    const std::int32_t vocab = draft.vocab_size();
    std::vector<std::int32_t> frontier{root_index};
    std::vector<token_id> ctx;
    std::vector<double> lp(static_cast<std::size_t>(vocab));
    std::vector<token_id> order(static_cast<std::size_t>(vocab));
    for (std::int32_t take_cfg : tmpl.children_per_depth) {
        const std::int32_t take = std::min(take_cfg, vocab);
        std::vector<std::int32_t> next;
        next.reserve(frontier.size() * static_cast<std::size_t>(take));
        for (std::int32_t node : frontier) {
            ctx.assign(out.tree.root_context.begin(), out.tree.root_context.end());
            if (node != root_index) {
                const std::vector<token_id> path = out.tree.path_to_root(node);
                ctx.insert(ctx.end(), path.begin(), path.end());
            }
            draft.next_logprobs_into(ctx, lp);
            for (token_id t = 0; t < vocab; ++t) {
                order[static_cast<std::size_t>(t)] = t;
            }
            std::partial_sort(order.begin(), order.begin() + take, order.end(),
                              [&lp](token_id a, token_id b) {
                                  const double la = lp[static_cast<std::size_t>(a)];
                                  const double lb = lp[static_cast<std::size_t>(b)];
                                  if (la != lb) {
                                      return la > lb;
                                  }
                                  return a < b;
                              });
            for (std::int32_t k = 0; k < take; ++k) {
                const token_id t = order[static_cast<std::size_t>(k)];
                next.push_back(out.tree.add_child(node, t, lp[static_cast<std::size_t>(t)]));
            }
        }
        frontier = std::move(next);
        ++out.steps_executed;
    }
    return out;
}

// Fixture dump of a drafting phase: steps, every heuristic decision, and the
// machine-readable node list.
inline std::string dump(const draft_outcome& outcome) {
    std::string out;
    char line[96];
    std::snprintf(line, sizeof(line), "steps_executed\t%d\n", outcome.steps_executed);
    out += line;
    for (const heuristic_check& c : outcome.checks) {
        std::snprintf(line, sizeof(line), "check\t%d\t%.17g\t%s\n", c.step, c.value,
                      c.continued ? "continue" : "stop");
        out += line;
    }
    out += outcome.tree.dump_node_list();
    return out;
}

} // namespace specdec
