// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <stdexcept>

namespace specdec {

// Token identifier; valid values are [0, vocab_size) of the owning model.
using token_id = std::int32_t;

// Caller-supplied data violates a precondition (bad token, empty list, ...).
struct input_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

// A tree or node reference is malformed (dangling parent, bad index, ...).
struct structural_error : std::logic_error {
    using std::logic_error::logic_error;
};

// Invalid strategy, model, or experiment configuration.
struct config_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace specdec
