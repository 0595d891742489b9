#include "zsp/generator.hpp"

#include "zsp/errors.hpp"

namespace zsp {

State generate_initial_state(const Domain& domain, Rng& rng, const std::optional<GenerationRanges>& ranges) {
  if (ranges) {
    // Missing keys fall back to the domain defaults.
    GenerationRanges merged = domain.default_ranges();
    for (const auto& [k, r] : ranges->all()) merged.set(k, r);
    return domain.generate_initial_state(rng, merged);
  }
  return domain.generate_initial_state(rng, domain.default_ranges());
}

StatePair generate_state_pair(const Domain& domain, const InterfaceMethod& method, Rng& rng,
                              const PairGenerationOptions& options, GenerationStats* stats) {
  GenerationStats local;
  GenerationStats& st = stats ? *stats : local;
  st = {};
  for (int restart = 0; restart < options.max_restarts; ++restart) {
    State initial = options.initial_source ? options.initial_source(rng)
                                           : generate_initial_state(domain, rng, options.ranges);
    ++st.initial_states;
    for (int draw = 0; draw < options.max_argument_draws; ++draw) {
      ++st.argument_draws;
      MethodCall call = domain.random_call(initial, method, rng);
      try {
        State desired = domain.invoke(initial, call);
        if (!states_equal(initial, desired)) return StatePair{std::move(initial), std::move(call), std::move(desired)};
      } catch (const DomainException&) {
        // rejected arguments: draw again
      }
    }
  }
  throw GenerationError("no state pair for " + domain.id() + "." + method.name + " after " +
                        std::to_string(options.max_restarts) + " initial states");
}

}  // namespace zsp
