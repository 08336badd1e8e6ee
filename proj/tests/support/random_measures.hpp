#pragma once

#include <vector>

#include "lambda_asg/measures.hpp"
#include "lambda_asg/rng.hpp"

namespace test_support {

/// Random probability measure with `atoms` atoms.
inline lambda_asg::FiniteMeasure1D random_probability(lambda_asg::Rng& rng, int atoms) {
  std::vector<lambda_asg::Atom1D> v;
  double total = 0.0;
  for (int i = 0; i < atoms; ++i) {
    v.push_back({rng.uniform(), 0.05 + rng.uniform()});
    total += v.back().mass;
  }
  for (auto& a : v) a.mass /= total;
  return lambda_asg::FiniteMeasure1D(std::move(v));
}

/// A measure below `upper` in the stochastic order: every atom is moved left
/// by a random fraction and its mass scaled by `keep` ∈ (0, 1].
inline lambda_asg::FiniteMeasure1D shifted_below(lambda_asg::Rng& rng,
                                                 const lambda_asg::FiniteMeasure1D& upper,
                                                 double keep = 1.0) {
  std::vector<lambda_asg::Atom1D> v;
  for (const auto& a : upper.atoms()) v.push_back({a.location * rng.uniform(), a.mass * keep});
  return lambda_asg::FiniteMeasure1D(std::move(v));
}

}  // namespace test_support
