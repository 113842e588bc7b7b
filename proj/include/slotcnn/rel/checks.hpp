#pragma once

#include <random>
#include <vector>

#include "slotcnn/data/vocab.hpp"
#include "slotcnn/nn/gradcheck.hpp"
#include "slotcnn/rel/example.hpp"
#include "slotcnn/rel/model.hpp"

namespace slotcnn {

/// Reserved tokens plus "w0" .. "w{n-1}".
data::Vocabulary numbered_vocabulary(int n);

/// A well-formed encoded example with random words (ids from the
/// non-reserved range of a vocabulary of `vocab_size`), random argument
/// order, gold label in [0, num_labels) and random argument types (each
/// unknown with probability `unknown_type_rate`).
EncodedExample random_example(int vocab_size, int min_context_length, int num_labels,
                              std::mt19937_64& rng, double unknown_type_rate = 0.2);

/// Dimensions small enough for exhaustive finite-difference checks.
ModelDims small_dims();

/// Gradient check of the summed example loss over `examples`.
nn::GradCheckResult check_model_gradients(Model& model,
                                          const std::vector<EncodedExample>& examples,
                                          double alpha, double eps = 1e-5);

}  // namespace slotcnn
