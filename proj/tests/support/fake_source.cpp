#include "fake_source.hpp"

#include <stdexcept>

namespace zsp::testing {

std::vector<CandidateFeatures> random_candidates(Rng& rng, int n, int dims) {
  std::uniform_real_distribution<double> val(-1, 1);
  std::vector<CandidateFeatures> out;
  for (int i = 0; i < n; ++i) {
    auto f = std::make_shared<FeatureVector>();
    for (int k = 0; k < dims; ++k) {
      if (uniform_int(rng, 0, 2) != 0) (*f)["f" + std::to_string(k)] = val(rng);
    }
    CandidateFeatures c;
    c.features = f;
    c.correct = uniform_int(rng, 0, 2) == 0;
    c.multiplicity = uniform_int(rng, 1, 3);
    out.push_back(std::move(c));
  }
  out[static_cast<std::size_t>(uniform_int(rng, 0, n - 1))].correct = true;
  return out;
}

std::vector<CandidateFeatures> FixedCandidateSource::candidates(const Example& example, const WeightVector&) const {
  auto it = table_.find(example.id);
  if (it == table_.end()) throw std::out_of_range("no candidates for " + example.id);
  return it->second;
}

ExamplesByDomain fake_examples(const std::vector<std::string>& domains, int per_domain, FixedCandidateSource& source,
                               Rng& rng) {
  ExamplesByDomain out;
  for (const auto& d : domains) {
    for (int i = 0; i < per_domain; ++i) {
      Example ex;
      ex.id = d + "-" + std::to_string(i);
      ex.domain = d;
      source.set(ex.id, random_candidates(rng, uniform_int(rng, 2, 6), 8));
      out[d].push_back(std::move(ex));
    }
  }
  return out;
}

}  // namespace zsp::testing
