// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <span>
#include <vector>

#include "specdec/common.hpp"
#include "specdec/draft_tree.hpp"
#include "specdec/numeric.hpp"

namespace specdec {

enum class model_kind {
    hashed_logit, // seeded hash of (seed, context window, candidate) -> logits
    ngram,        // add-one smoothed counts over a training corpus
};

// Everything needed to (re)construct a deterministic toy target/draft pair.
struct model_spec {
    std::int32_t vocab_size = 16;
    model_kind kind = model_kind::hashed_logit;
    std::int32_t context_order = 2; // conditioning window length
    std::uint64_t seed = 1;
    double draft_noise = 0.0; // perturbation used to derive the draft model
};

inline void validate(const model_spec& spec) {
    if (spec.vocab_size < 2) {
        throw config_error("model_spec: vocab_size must be >= 2");
    }
    if (spec.context_order < 1) {
        throw config_error("model_spec: context_order must be >= 1");
    }
    if (!(spec.draft_noise >= 0.0)) {
        throw config_error("model_spec: draft_noise must be >= 0");
    }
}

// Pluggable next-token scorer. Implementations are immutable after
// construction and safe to share across concurrent decode sessions; outputs
// are pure functions of (construction parameters, context).
class language_model {
public:
    virtual ~language_model() = default;

    virtual std::int32_t vocab_size() const = 0;

    // Writes a normalized logprob vector (log-sum-exp == 0) of size
    // vocab_size() to `out`. Context tokens outside [0, vocab) -> input_error.
    virtual void next_logprobs_into(std::span<const token_id> context,
                                    std::span<double> out) const = 0;

    std::vector<double> next_logprobs(std::span<const token_id> context) const {
        std::vector<double> out(static_cast<std::size_t>(vocab_size()));
        next_logprobs_into(context, out);
        return out;
    }

protected:
    void check_context(std::span<const token_id> context) const {
        const std::int32_t v = vocab_size();
        for (token_id t : context) {
            if (t < 0 || t >= v) {
                throw input_error("language_model: context token out of vocab range");
            }
        }
    }
};

// Greedy (temperature-0) next token: argmax of next_logprobs, ties to the
// lowest token id. This is the verification reference everywhere.
inline token_id greedy_next(const language_model& model, std::span<const token_id> context) {
    const std::vector<double> lp = model.next_logprobs(context);
    return static_cast<token_id>(argmax(lp));
}

namespace detail {

inline constexpr std::uint64_t k_ctx_salt = 0x243f6a8885a308d3ull;
inline constexpr std::uint64_t k_cand_salt = 0x13198a2e03707344ull;
inline constexpr std::uint64_t k_noise_salt = 0xa4093822299f31d0ull;
inline constexpr std::uint64_t k_corpus_salt = 0x082efa98ec4e6c89ull;

} // namespace detail

// Deterministic stand-in for a neural LM: logits come from a seeded 64-bit
// hash of (seed, last context_order tokens, candidate token), shaped so that
// next-token distributions are peaked, then log-softmaxed. A nonzero
// noise magnitude adds a second seeded hash stream to every logit, which is
// how draft models are derived from their target.
class hashed_logit_model final : public language_model {
public:
    // Cubing the unit hash stretches the gap between top candidates; with the
    // span below, top-1 probability lands near 3*span/(3*span + V).
    static constexpr double k_logit_span = 24.0;

    hashed_logit_model(const model_spec& spec, double noise_magnitude)
        : vocab_(spec.vocab_size),
          order_(spec.context_order),
          seed_(spec.seed),
          noise_(noise_magnitude) {
        validate(spec);
        if (!(noise_magnitude >= 0.0)) {
            throw config_error("hashed_logit_model: noise magnitude must be >= 0");
        }
    }

    std::int32_t vocab_size() const override { return vocab_; }

    void next_logprobs_into(std::span<const token_id> context,
                            std::span<double> out) const override {
        check_context(context);
        if (out.size() != static_cast<std::size_t>(vocab_)) {
            throw input_error("hashed_logit_model: bad output size");
        }
        // absorb the last `order_` tokens, left-padded with token 0
        std::uint64_t h = detail::mix64(seed_ ^ detail::k_ctx_salt);
        for (std::int32_t i = order_; i >= 1; --i) {
            const std::int64_t pos = static_cast<std::int64_t>(context.size()) - i;
            const token_id t = pos >= 0 ? context[static_cast<std::size_t>(pos)] : 0;
            h = detail::mix64(h ^ (static_cast<std::uint64_t>(t) + 1));
        }
        for (std::int32_t c = 0; c < vocab_; ++c) {
            const std::uint64_t hc =
                detail::mix64(h ^ (detail::k_cand_salt + static_cast<std::uint64_t>(c)));
            const double u = detail::to_unit(hc);
            double logit = k_logit_span * u * u * u;
            if (noise_ > 0.0) {
                const double un = detail::to_unit(detail::mix64(hc ^ detail::k_noise_salt));
                logit += noise_ * (2.0 * un - 1.0);
            }
            out[static_cast<std::size_t>(c)] = logit;
        }
        log_softmax_inplace(out);
    }

private:
    std::int32_t vocab_;
    std::int32_t order_;
    std::uint64_t seed_;
    double noise_;
};

// Add-one smoothed n-gram model counted over a training corpus. The
// conditioning context is the last `order` tokens, left-padded with token 0;
// the corpus is counted with the same padding.
class ngram_model final : public language_model {
public:
    ngram_model(std::int32_t vocab_size, std::int32_t order, std::span<const token_id> corpus)
        : vocab_(vocab_size), order_(order) {
        if (vocab_size < 2) {
            throw config_error("ngram_model: vocab_size must be >= 2");
        }
        if (order < 1) {
            throw config_error("ngram_model: order must be >= 1");
        }
        for (token_id t : corpus) {
            if (t < 0 || t >= vocab_) {
                throw input_error("ngram_model: corpus token out of vocab range");
            }
        }
        std::vector<token_id> ctx(static_cast<std::size_t>(order_), 0);
        for (std::size_t i = 0; i < corpus.size(); ++i) {
            for (std::int32_t j = 0; j < order_; ++j) {
                const std::int64_t pos = static_cast<std::int64_t>(i) - order_ + j;
                ctx[static_cast<std::size_t>(j)] = pos >= 0 ? corpus[static_cast<std::size_t>(pos)] : 0;
            }
            row& r = rows_[ctx];
            if (r.counts.empty()) {
                r.counts.assign(static_cast<std::size_t>(vocab_), 0);
            }
            ++r.counts[static_cast<std::size_t>(corpus[i])];
            ++r.total;
        }
    }

    std::int32_t vocab_size() const override { return vocab_; }

    void next_logprobs_into(std::span<const token_id> context,
                            std::span<double> out) const override {
        check_context(context);
        if (out.size() != static_cast<std::size_t>(vocab_)) {
            throw input_error("ngram_model: bad output size");
        }
        std::vector<token_id> ctx(static_cast<std::size_t>(order_));
        for (std::int32_t j = 0; j < order_; ++j) {
            const std::int64_t pos = static_cast<std::int64_t>(context.size()) - order_ + j;
            ctx[static_cast<std::size_t>(j)] = pos >= 0 ? context[static_cast<std::size_t>(pos)] : 0;
        }
        const auto it = rows_.find(ctx);
        if (it == rows_.end()) {
            // unseen context: add-one smoothing degenerates to uniform
            const double lp = -std::log(static_cast<double>(vocab_));
            for (double& v : out) {
                v = lp;
            }
            return;
        }
        const row& r = it->second;
        const double denom = static_cast<double>(r.total + vocab_);
        for (std::int32_t c = 0; c < vocab_; ++c) {
            const double num = static_cast<double>(r.counts[static_cast<std::size_t>(c)] + 1);
            out[static_cast<std::size_t>(c)] = std::log(num / denom);
        }
    }

private:
    struct row {
        std::vector<std::int32_t> counts;
        std::int64_t total = 0;
    };

    std::int32_t vocab_;
    std::int32_t order_;
    std::map<std::vector<token_id>, row> rows_;
};

// Seeded synthetic corpus for n-gram training: tokens sampled from a
// hashed-logit model of the same vocab/order, so the counts carry real
// order-k structure instead of uniform noise.
inline std::vector<token_id> sample_training_corpus(const model_spec& spec,
                                                    std::size_t length = 4096) {
    validate(spec);
    model_spec gen_spec = spec;
    gen_spec.kind = model_kind::hashed_logit;
    gen_spec.seed = spec.seed ^ detail::k_corpus_salt;
    const hashed_logit_model gen(gen_spec, 0.0);

    std::vector<token_id> corpus;
    corpus.reserve(length);
    std::vector<double> lp(static_cast<std::size_t>(spec.vocab_size));
    std::uint64_t state = detail::mix64(spec.seed + detail::k_corpus_salt);
    for (std::size_t i = 0; i < length; ++i) {
        gen.next_logprobs_into(corpus, lp);
        state = detail::mix64(state);
        double u = detail::to_unit(state);
        token_id pick = spec.vocab_size - 1;
        for (std::int32_t c = 0; c < spec.vocab_size; ++c) {
            u -= std::exp(lp[static_cast<std::size_t>(c)]);
            if (u <= 0.0) {
                pick = c;
                break;
            }
        }
        corpus.push_back(pick);
    }
    return corpus;
}

struct toy_pair {
    std::shared_ptr<const language_model> target;
    std::shared_ptr<const language_model> draft;
};

// Builds a (target, draft) pair whose draft confidence tracks acceptance:
//  - hashed-logit: draft = target logits + seeded noise of magnitude
//    spec.draft_noise (zero noise -> identical models);
//  - ngram: zero noise -> identical models, otherwise the draft is counted
//    from the same corpus with the context order reduced by one (floor 1).
// An explicit corpus overrides the seeded synthetic one for ngram kinds.
inline toy_pair make_toy_pair(const model_spec& spec,
                              std::span<const token_id> ngram_corpus = {}) {
    validate(spec);
    toy_pair pair;
    if (spec.kind == model_kind::hashed_logit) {
        pair.target = std::make_shared<hashed_logit_model>(spec, 0.0);
        pair.draft = std::make_shared<hashed_logit_model>(spec, spec.draft_noise);
        return pair;
    }
    std::vector<token_id> corpus;
    if (ngram_corpus.empty()) {
        corpus = sample_training_corpus(spec);
        ngram_corpus = corpus;
    }
    auto target = std::make_shared<ngram_model>(spec.vocab_size, spec.context_order, ngram_corpus);
    pair.target = target;
    if (spec.draft_noise == 0.0) {
        pair.draft = target;
    } else {
        const std::int32_t draft_order = std::max<std::int32_t>(1, spec.context_order - 1);
        pair.draft = std::make_shared<ngram_model>(spec.vocab_size, draft_order, ngram_corpus);
    }
    return pair;
}

// Scores every node of the tree in one pass: entry i is
// next_logprobs(root_context ++ path_to_root(i)). Observationally identical
// to scoring each root path sequentially; this is the tree-parallel forward
// both verification and metrics accounting treat as a single model call.
inline std::vector<std::vector<double>> tree_logprobs(const language_model& model,
                                                      const draft_tree& tree) {
    validate_structure(tree);
    const std::int32_t v = model.vocab_size();
    for (const draft_node& n : tree.nodes) {
        if (n.token >= v) {
            throw structural_error("tree_logprobs: tree token out of vocab range");
        }
    }
    std::vector<std::vector<double>> out(tree.nodes.size());
    std::vector<token_id> ctx;
    for (std::size_t i = 0; i < tree.nodes.size(); ++i) {
        ctx.assign(tree.root_context.begin(), tree.root_context.end());
        const std::size_t base = ctx.size();
        ctx.resize(base + static_cast<std::size_t>(tree.nodes[i].depth));
        std::size_t at = ctx.size();
        for (std::int32_t j = static_cast<std::int32_t>(i); j != root_index; j = tree.nodes[j].parent) {
            ctx[--at] = tree.nodes[j].token;
        }
        out[i] = model.next_logprobs(ctx);
    }
    return out;
}

} // namespace specdec
