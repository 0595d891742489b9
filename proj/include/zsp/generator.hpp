#pragma once

#include <functional>
#include <optional>

#include "zsp/domain.hpp"

namespace zsp {

struct StatePair {
  State initial;
  MethodCall call;
  State desired;
};

struct GenerationStats {
  int initial_states = 0;   // initial states drawn, including the accepted one
  int argument_draws = 0;   // total argument draws over all initial states
};

struct PairGenerationOptions {
  /// Argument draws per initial state before it is discarded.
  int max_argument_draws = 1000;
  /// Initial states tried before giving up.
  int max_restarts = 100;
  std::optional<GenerationRanges> ranges;  // domain defaults when unset
  /// Replaces the domain's initial-state generator (tests force states here).
  std::function<State(Rng&)> initial_source;
};

/// Random initial state drawn from `ranges` (domain defaults when omitted).
State generate_initial_state(const Domain& domain, Rng& rng, const std::optional<GenerationRanges>& ranges = {});

/// Draws (s, c, s') with s' = invoke(s, c) and s' != s. Re-draws arguments
/// while the call fails or leaves the state unchanged; discards the initial
/// state after `max_argument_draws` failures. Throws GenerationError after
/// `max_restarts` discarded initial states.
StatePair generate_state_pair(const Domain& domain, const InterfaceMethod& method, Rng& rng,
                              const PairGenerationOptions& options = {}, GenerationStats* stats = nullptr);

}  // namespace zsp
