#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "slotcnn/crf/chain_crf.hpp"
#include "slotcnn/data/vocab.hpp"
#include "slotcnn/nn/params.hpp"
#include "slotcnn/nn/tape.hpp"
#include "slotcnn/rel/example.hpp"
#include "slotcnn/rel/schema.hpp"

namespace slotcnn {

enum class Variant { binary, multiclass, pipeline, joint, structured };

/// "binary", "multiclass", "multiclass+p", "multiclass+j", "multiclass+s".
std::string_view variant_name(Variant v);
Variant parse_variant(std::string_view name);

inline constexpr int kPoolSize = 3;

struct ModelDims {
  int emb_dim = 50;
  int filter_width = 3;
  int num_filters = 300;
  int hidden_rel = 100;
  /// Type-embedding size (+p, +j) and entity-head hidden size (+j, +s).
  int hidden_ent = 100;

  friend bool operator==(const ModelDims&, const ModelDims&) = default;
};

/// A relation classifier of one variant together with its vocabulary.
///
/// Every variant shares the relation CNN: embeddings, one filter bank
/// applied to all three contexts, 3-max pooling and a tanh hidden layer
/// over [P_left, P_middle, P_right, order flag]. On top of that:
///   binary      one sigmoid output for `binary_slot`
///   multiclass  softmax over the merged slots plus N
///   +p          type embeddings of given type vectors join the hidden layer
///   +j          a second CNN predicts argument types (sigmoid); its scores
///               are the type vectors of +p
///   +s          entity heads and relation scores feed a chain CRF
class Model {
 public:
  Model(Variant variant, ModelDims dims, data::Vocabulary vocab, std::uint64_t seed,
        std::string binary_slot = {});

  Variant variant() const { return variant_; }
  const ModelDims& dims() const { return dims_; }
  std::uint64_t seed() const { return seed_; }
  const data::Vocabulary& vocab() const { return vocab_; }
  const std::string& binary_slot() const { return binary_slot_; }
  int binary_label() const { return binary_label_; }
  const SlotSchema& schema() const { return SlotSchema::standard(); }

  nn::ParamSet& params() { return params_; }
  const nn::ParamSet& params() const { return params_; }

  /// Output classes: 1 for binary, merged slots + N otherwise.
  int num_outputs() const;
  int min_context_length() const { return dims_.filter_width + kPoolSize - 1; }

  /// Overwrites rows of the embedding table for tokens in `table`.
  void load_embeddings(const data::EmbeddingTable& table);

  EncodedExample encode(const data::RawExample& raw) const;

  friend bool operator==(const Model& a, const Model& b);

 private:
  void build(std::uint64_t seed);

  Variant variant_;
  ModelDims dims_;
  std::uint64_t seed_;
  data::Vocabulary vocab_;
  std::string binary_slot_;
  int binary_label_ = -1;
  nn::ParamSet params_;
};

/// Type vector inputs of the +p variant.
struct TypeVectors {
  nn::Vec name;
  nn::Vec filler;
};

struct JointOutput {
  nn::Vec relation;     // softmax over merged slots + N
  nn::Vec name_types;   // sigmoid scores of the query entity's type
  nn::Vec filler_types; // sigmoid scores of the filler's type
};

nn::Vec forward_multiclass(const Model& model, const EncodedExample& ex);
double forward_binary(const Model& model, const EncodedExample& ex);
nn::Vec forward_pipeline(const Model& model, const EncodedExample& ex, const nn::Vec& t1,
                         const nn::Vec& t2);
JointOutput forward_joint(const Model& model, const EncodedExample& ex);
crf::ChainEmissions<double> forward_structured(const Model& model, const EncodedExample& ex);
crf::CrfParams<double> crf_params(const Model& model);

/// +p type vectors: one-hot observed types; an unknown argument type falls
/// back to the expected types of `slot` (a merged label), or zeros when no
/// slot is given.
TypeVectors pipeline_type_vectors(const EncodedExample& ex, int slot = -1);

/// Scores over the merged labels (size num_labels) in the example's own
/// orientation: softmax for multi-class variants, CRF relation marginals
/// for +s, and the single sigmoid at binary_label() for binary models.
nn::Vec label_probabilities(const Model& model, const EncodedExample& ex);

/// Probability that `ex` expresses the original slot `queried`. Inverse
/// slots are read from the canonical label on reverse_arguments(ex).
/// Self-inverse slots (per:spouse, per:siblings) average both orientations.
double predict_slot_probability(const Model& model, const EncodedExample& ex,
                                std::string_view queried);

/// Training loss of one example, recorded on `tape`. `alpha` weights the
/// typing losses of +j.
nn::Var example_loss(nn::Tape& tape, Model& model, const EncodedExample& ex, double alpha);

/// (1 - alpha) * rel + alpha / 2 * (t1 + t2); alpha must lie in [0, 1].
double joint_loss(double l_rel, double l_t1, double l_t2, double alpha);

}  // namespace slotcnn
