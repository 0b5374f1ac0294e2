#pragma once

// Shared model fixtures for the test binaries. Fixtures only use library
// constructors and the evaluation primitives (push_forward,
// label_probability); the derived machinery under test is cross-checked
// against the oracle functions.

#include <cstdint>
#include <vector>

#include "oracle.hpp"
#include "rca/scm.hpp"

namespace fixtures {

// Two symmetric binary errors feeding a saturated logistic gate: D = E1 or
// E2, with P(E_i = 1) = 1/2. The workhorse for closed-form values.
rca::Scm or_model();

// X1 = E1, X2 = 0.8 X1 + E2 with unit-scale laplace errors; no diagnosis.
rca::Scm chain_linear(double laplace_scale = 1.0);

// Five-variable shape: X1 -> X3 <- X2, X3 -> X4 -> D, all structural
// weights 1, standard gaussian errors, logistic label on X4.
rca::Scm funnel_linear();

// Random discrete model: X-layer DAG from the library generator, binary
// error supports with success probabilities in [0.2, 0.8], logistic label
// with weights in [-w_max, w_max] over a nonempty random parent subset.
rca::Scm random_discrete(std::size_t p, rca::Rng& rng, double edge_prob = 0.5,
                         double w_max = 1.5);

// Same, but the last coordinate is guaranteed to have no outgoing edges and
// no label weight, making it a non-ancestor of the diagnosis.
rca::Scm random_discrete_with_nonancestor(std::size_t p, rca::Rng& rng,
                                          double edge_prob = 0.5, double w_max = 1.5);

// Oracle marginals for a discrete model.
std::vector<oracle::Marginal> marginals_of(const rca::Scm& scm);

// P(D=1 | e) through the model's own mechanics layer.
oracle::Predictor predictor_of(const rca::Scm& scm);

}  // namespace fixtures
