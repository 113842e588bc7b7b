#include "slotcnn/rel/model.hpp"

#include <array>

#include "slotcnn/error.hpp"
#include "slotcnn/nn/ops.hpp"

namespace slotcnn {

using nn::Matrix;
using nn::Param;
using nn::ParamSet;
using nn::Tape;
using nn::Var;
using nn::Vec;

namespace {

constexpr std::array<std::pair<Variant, std::string_view>, 5> kVariantNames = {{
    {Variant::binary, "binary"},
    {Variant::multiclass, "multiclass"},
    {Variant::pipeline, "multiclass+p"},
    {Variant::joint, "multiclass+j"},
    {Variant::structured, "multiclass+s"},
}};

Matrix column(const Vec& v) { return Eigen::Map<const Matrix>(v.data(), v.size(), 1); }

Vec as_vec(const Matrix& m) { return Eigen::Map<const Vec>(m.data(), m.size()); }

Vec one_hot_type(int type) {
  Vec v = Vec::Zero(kNumEntityTypes);
  if (type != kUnknownType) v(type) = 1.0;
  return v;
}

struct Pooled {
  Var left, middle, right;
};

/// Shared-filter convolution and 3-max pooling over the three contexts.
Pooled pool_contexts(Tape& tape, ParamSet& params, const std::string& prefix,
                     const Model& model, const EncodedExample& ex) {
  Param& emb = params.at("emb");
  Var filters = tape.param(params.at(prefix + ".H"));
  Var bias = tape.param(params.at(prefix + ".b"));
  const int width = model.dims().filter_width;
  auto one = [&](const std::vector<int>& ids) {
    Var x = tape.embed(emb, ids);
    Var c = tape.conv_tanh(x, filters, bias, width);
    return tape.flatten(tape.kmax(c, kPoolSize));
  };
  return {one(ex.left), one(ex.middle), one(ex.right)};
}

/// Entity head: tanh hidden layer over two pooled contexts plus the
/// observed-type evidence, then |E| output scores.
Var entity_head(Tape& tape, ParamSet& params, const std::string& prefix, const Var& a,
                const Var& b, int observed_type) {
  Var evidence = tape.constant(column(one_hot_type(observed_type)));
  Var hidden = tape.tanh(tape.affine({{tape.param(params.at(prefix + ".W_a")), a},
                                      {tape.param(params.at(prefix + ".W_b")), b},
                                      {tape.param(params.at(prefix + ".W_ner")), evidence}},
                                     tape.param(params.at(prefix + ".b"))));
  return tape.affine({{tape.param(params.at(prefix + ".out.W")), hidden}},
                     tape.param(params.at(prefix + ".out.b")));
}

Var type_embedding(Tape& tape, ParamSet& params, const Var& t) {
  return tape.tanh(
      tape.affine({{tape.param(params.at("type.V")), t}}, tape.param(params.at("type.c"))));
}

struct Graph {
  Var relation;  // logits (binary / multi-class) or relation emissions (+s)
  Var head1;     // first-in-sentence argument type scores (logits), +j / +s
  Var head2;
};

Graph build_graph(Tape& tape, ParamSet& params, const Model& model, const EncodedExample& ex,
                  const TypeVectors* types) {
  Graph g;
  const Pooled rel = pool_contexts(tape, params, "conv", model, ex);
  Matrix flag(1, 1);
  flag(0, 0) = ex.order_flag;
  std::vector<std::pair<Var, Var>> terms = {
      {tape.param(params.at("rel.W_left")), rel.left},
      {tape.param(params.at("rel.W_middle")), rel.middle},
      {tape.param(params.at("rel.W_right")), rel.right},
      {tape.param(params.at("rel.W_flag")), tape.constant(flag)},
  };

  switch (model.variant()) {
    case Variant::pipeline: {
      if (!types) throw VariantError("multiclass+p needs type vectors");
      nn::require_shape(types->name.size() == kNumEntityTypes &&
                            types->filler.size() == kNumEntityTypes,
                        "type vectors must have length " + std::to_string(kNumEntityTypes));
      Var e1 = type_embedding(tape, params, tape.constant(column(types->name)));
      Var e2 = type_embedding(tape, params, tape.constant(column(types->filler)));
      terms.emplace_back(tape.param(params.at("rel.W_type1")), e1);
      terms.emplace_back(tape.param(params.at("rel.W_type2")), e2);
      break;
    }
    case Variant::joint: {
      const Pooled typ = pool_contexts(tape, params, "tconv", model, ex);
      g.head1 = entity_head(tape, params, "ent1", typ.left, typ.middle, ex.first_type());
      g.head2 = entity_head(tape, params, "ent2", typ.middle, typ.right, ex.second_type());
      Var s1 = tape.sigmoid(g.head1);
      Var s2 = tape.sigmoid(g.head2);
      const Var& name_scores = ex.order_flag ? s1 : s2;
      const Var& filler_scores = ex.order_flag ? s2 : s1;
      terms.emplace_back(tape.param(params.at("rel.W_type1")),
                         type_embedding(tape, params, name_scores));
      terms.emplace_back(tape.param(params.at("rel.W_type2")),
                         type_embedding(tape, params, filler_scores));
      break;
    }
    case Variant::structured:
      g.head1 = entity_head(tape, params, "ent1", rel.left, rel.middle, ex.first_type());
      g.head2 = entity_head(tape, params, "ent2", rel.middle, rel.right, ex.second_type());
      break;
    case Variant::binary:
    case Variant::multiclass:
      break;
  }

  Var hidden = tape.tanh(tape.affine(terms, tape.param(params.at("rel.d"))));
  g.relation = tape.affine({{tape.param(params.at("out.W")), hidden}},
                           tape.param(params.at("out.b")));
  return g;
}

ParamSet& mutable_params(const Model& model) {
  // Inference tapes never record, so nothing writes through this.
  return const_cast<ParamSet&>(model.params());
}

void require_variant(const Model& model, std::initializer_list<Variant> allowed,
                     const char* op) {
  for (Variant v : allowed)
    if (model.variant() == v) return;
  throw VariantError(std::string(op) + " is not defined for variant " +
                     std::string(variant_name(model.variant())));
}

}  // namespace

std::string_view variant_name(Variant v) {
  for (auto [variant, name] : kVariantNames)
    if (variant == v) return name;
  return "?";
}

Variant parse_variant(std::string_view name) {
  for (auto [variant, n] : kVariantNames)
    if (n == name) return variant;
  throw ConfigError("unknown variant '" + std::string(name) +
                    "' (expected binary, multiclass, multiclass+p, multiclass+j or "
                    "multiclass+s)");
}

Model::Model(Variant variant, ModelDims dims, data::Vocabulary vocab, std::uint64_t seed,
             std::string binary_slot)
    : variant_(variant),
      dims_(dims),
      seed_(seed),
      vocab_(std::move(vocab)),
      binary_slot_(std::move(binary_slot)) {
  if (dims_.emb_dim < 1 || dims_.filter_width < 1 || dims_.num_filters < 1 ||
      dims_.hidden_rel < 1 || dims_.hidden_ent < 1)
    throw ConfigError("model dimensions must all be positive");
  if (variant_ == Variant::binary) {
    if (binary_slot_.empty()) throw ConfigError("binary models need a target slot");
    binary_label_ = schema().label_index(binary_slot_);
  } else if (!binary_slot_.empty()) {
    throw ConfigError("only binary models take a target slot");
  }
  build(seed);
}

int Model::num_outputs() const {
  return variant_ == Variant::binary ? 1 : schema().num_labels();
}

void Model::build(std::uint64_t seed) {
  const int D = dims_.emb_dim;
  const int w = dims_.filter_width;
  const int m = dims_.num_filters;
  const int h = dims_.hidden_rel;
  const int he = dims_.hidden_ent;
  const int pooled = m * kPoolSize;
  const int E = kNumEntityTypes;
  const int R = schema().num_labels();

  auto rng = nn::make_rng(seed, "init");
  auto weight = [&](const std::string& name, int rows, int cols) {
    nn::glorot_uniform(params_.add(name, rows, cols).value, cols, rows, rng);
  };
  auto bias = [&](const std::string& name, int rows) { params_.add(name, rows, 1); };

  Param& emb = params_.add("emb", vocab_.size(), D);
  nn::glorot_uniform(emb.value, vocab_.size(), D, rng);
  emb.value.row(data::kPadId).setZero();

  auto conv = [&](const std::string& prefix) {
    weight(prefix + ".H", m, w * D);
    bias(prefix + ".b", m);
  };
  auto head = [&](const std::string& prefix) {
    weight(prefix + ".W_a", he, pooled);
    weight(prefix + ".W_b", he, pooled);
    weight(prefix + ".W_ner", he, E);
    bias(prefix + ".b", he);
    weight(prefix + ".out.W", E, he);
    bias(prefix + ".out.b", E);
  };

  conv("conv");
  weight("rel.W_left", h, pooled);
  weight("rel.W_middle", h, pooled);
  weight("rel.W_right", h, pooled);
  weight("rel.W_flag", h, 1);
  bias("rel.d", h);
  if (variant_ == Variant::pipeline || variant_ == Variant::joint) {
    weight("type.V", he, E);
    bias("type.c", he);
    weight("rel.W_type1", h, he);
    weight("rel.W_type2", h, he);
  }
  if (variant_ == Variant::joint) conv("tconv");
  if (variant_ == Variant::joint || variant_ == Variant::structured) {
    head("ent1");
    head("ent2");
  }
  weight("out.W", num_outputs(), h);
  bias("out.b", num_outputs());
  if (variant_ == Variant::structured) {
    weight("crf.begin", E, 1);
    weight("crf.ent_rel", E, R);
    weight("crf.rel_ent", R, E);
    weight("crf.end", E, 1);
  }
}

void Model::load_embeddings(const data::EmbeddingTable& table) {
  if (table.dim() != dims_.emb_dim)
    throw ConfigError("embedding file has dimension " + std::to_string(table.dim()) +
                      ", model expects " + std::to_string(dims_.emb_dim));
  Param& emb = params_.at("emb");
  for (size_t i = 0; i < table.tokens.size(); ++i) {
    if (!vocab_.contains(table.tokens[i])) continue;
    const int id = vocab_.id(table.tokens[i]);
    if (id == data::kPadId) continue;
    emb.value.row(id) = table.vectors.row(static_cast<nn::Index>(i));
  }
}

EncodedExample Model::encode(const data::RawExample& raw) const {
  return encode_example(raw, vocab_, schema(), min_context_length());
}

bool operator==(const Model& a, const Model& b) {
  if (a.variant_ != b.variant_ || !(a.dims_ == b.dims_) || a.seed_ != b.seed_ ||
      !(a.vocab_ == b.vocab_) || a.binary_slot_ != b.binary_slot_ ||
      a.params_.size() != b.params_.size())
    return false;
  auto ia = a.params_.begin();
  auto ib = b.params_.begin();
  for (; ia != a.params_.end(); ++ia, ++ib) {
    if (ia->name != ib->name || ia->value.rows() != ib->value.rows() ||
        ia->value.cols() != ib->value.cols() || ia->value != ib->value)
      return false;
  }
  return true;
}

TypeVectors pipeline_type_vectors(const EncodedExample& ex, int slot) {
  TypeVectors t{one_hot_type(ex.type1), one_hot_type(ex.type2)};
  if ((ex.type1 == kUnknownType || ex.type2 == kUnknownType) && slot >= 0 &&
      slot < SlotSchema::standard().num_slots()) {
    auto [name, filler] = SlotSchema::standard().type_vectors(slot);
    if (ex.type1 == kUnknownType) t.name = name;
    if (ex.type2 == kUnknownType) t.filler = filler;
  }
  return t;
}

Vec forward_multiclass(const Model& model, const EncodedExample& ex) {
  require_variant(model, {Variant::multiclass}, "forward_multiclass");
  Tape tape(false);
  return nn::softmax(as_vec(build_graph(tape, mutable_params(model), model, ex, nullptr)
                                .relation->value()));
}

double forward_binary(const Model& model, const EncodedExample& ex) {
  require_variant(model, {Variant::binary}, "forward_binary");
  Tape tape(false);
  const Graph g = build_graph(tape, mutable_params(model), model, ex, nullptr);
  return nn::sigmoid(g.relation->value()(0, 0));
}

Vec forward_pipeline(const Model& model, const EncodedExample& ex, const Vec& t1,
                     const Vec& t2) {
  require_variant(model, {Variant::pipeline}, "forward_pipeline");
  Tape tape(false);
  const TypeVectors types{t1, t2};
  return nn::softmax(
      as_vec(build_graph(tape, mutable_params(model), model, ex, &types).relation->value()));
}

JointOutput forward_joint(const Model& model, const EncodedExample& ex) {
  require_variant(model, {Variant::joint}, "forward_joint");
  Tape tape(false);
  const Graph g = build_graph(tape, mutable_params(model), model, ex, nullptr);
  auto scores = [](const Var& logits) {
    return Vec(as_vec(logits->value()).unaryExpr([](double z) { return nn::sigmoid(z); }));
  };
  Vec first = scores(g.head1);
  Vec second = scores(g.head2);
  JointOutput out;
  out.relation = nn::softmax(as_vec(g.relation->value()));
  out.name_types = ex.order_flag ? first : second;
  out.filler_types = ex.order_flag ? second : first;
  return out;
}

crf::ChainEmissions<double> forward_structured(const Model& model, const EncodedExample& ex) {
  require_variant(model, {Variant::structured}, "forward_structured");
  Tape tape(false);
  const Graph g = build_graph(tape, mutable_params(model), model, ex, nullptr);
  return {as_vec(g.head1->value()), as_vec(g.relation->value()), as_vec(g.head2->value())};
}

crf::CrfParams<double> crf_params(const Model& model) {
  require_variant(model, {Variant::structured}, "crf_params");
  const auto& p = model.params();
  return {as_vec(p.at("crf.begin").value), p.at("crf.ent_rel").value,
          p.at("crf.rel_ent").value, as_vec(p.at("crf.end").value)};
}

Vec label_probabilities(const Model& model, const EncodedExample& ex) {
  const SlotSchema& schema = model.schema();
  switch (model.variant()) {
    case Variant::binary: {
      Vec out = Vec::Zero(schema.num_labels());
      out(model.binary_label()) = forward_binary(model, ex);
      return out;
    }
    case Variant::multiclass:
      return forward_multiclass(model, ex);
    case Variant::pipeline: {
      const TypeVectors base = pipeline_type_vectors(ex);
      Vec out = forward_pipeline(model, ex, base.name, base.filler);
      if (ex.type1 != kUnknownType && ex.type2 != kUnknownType) return out;
      for (int s = 0; s < schema.num_slots(); ++s) {
        const TypeVectors t = pipeline_type_vectors(ex, s);
        out(s) = forward_pipeline(model, ex, t.name, t.filler)(s);
      }
      return out;
    }
    case Variant::joint:
      return forward_joint(model, ex).relation;
    case Variant::structured:
      return crf::marginals(forward_structured(model, ex), crf_params(model)).rel;
  }
  throw VariantError("unknown variant");
}

namespace {

double oriented_probability(const Model& model, const EncodedExample& target, int merged,
                            std::string_view queried) {
  switch (model.variant()) {
    case Variant::binary:
      if (merged != model.binary_label())
        throw VariantError("binary model for " + model.binary_slot() + " cannot score " +
                           std::string(queried));
      return forward_binary(model, target);
    case Variant::pipeline: {
      const TypeVectors t = pipeline_type_vectors(target, merged);
      return forward_pipeline(model, target, t.name, t.filler)(merged);
    }
    default:
      return label_probabilities(model, target)(merged);
  }
}

}  // namespace

double predict_slot_probability(const Model& model, const EncodedExample& ex,
                                std::string_view queried) {
  const SlotSchema& schema = model.schema();
  SlotMapping m;
  if (schema.covers(queried)) {
    m = schema.mapping(queried);
  } else {
    const int label = schema.find_label(queried);
    if (label < 0 || label == schema.negative_label())
      throw UncoveredSlotError("slot '" + std::string(queried) +
                               "' is not covered by the classifier");
    m.merged = label;
  }
  // A self-inverse relation holds in both directions, so both readings count.
  if (schema.inverse_slot(queried) == std::string(queried)) {
    const double forward = oriented_probability(model, ex, m.merged, queried);
    const double backward = oriented_probability(model, reverse_arguments(ex), m.merged, queried);
    return 0.5 * (forward + backward);
  }
  return oriented_probability(model, m.inverse ? reverse_arguments(ex) : ex, m.merged, queried);
}

double joint_loss(double l_rel, double l_t1, double l_t2, double alpha) {
  if (!(alpha >= 0.0 && alpha <= 1.0))
    throw ConfigError("alpha must lie in [0, 1], got " + std::to_string(alpha));
  return (1.0 - alpha) * l_rel + alpha / 2.0 * l_t1 + alpha / 2.0 * l_t2;
}

Var example_loss(Tape& tape, Model& model, const EncodedExample& ex, double alpha) {
  const SlotSchema& schema = model.schema();
  if (ex.gold < 0 || ex.gold >= schema.num_labels())
    throw LabelError("example '" + ex.id + "' has no valid gold label");
  ParamSet& params = model.params();
  switch (model.variant()) {
    case Variant::binary: {
      const Graph g = build_graph(tape, params, model, ex, nullptr);
      Vec target(1);
      target(0) = ex.gold == model.binary_label() ? 1.0 : 0.0;
      return tape.sigmoid_bce(g.relation, target);
    }
    case Variant::multiclass:
      return tape.softmax_nll(build_graph(tape, params, model, ex, nullptr).relation, ex.gold);
    case Variant::pipeline: {
      const int slot = ex.gold == schema.negative_label() ? -1 : ex.gold;
      const TypeVectors t = pipeline_type_vectors(ex, slot);
      return tape.softmax_nll(build_graph(tape, params, model, ex, &t).relation, ex.gold);
    }
    case Variant::joint: {
      if (!(alpha >= 0.0 && alpha <= 1.0))
        throw ConfigError("alpha must lie in [0, 1], got " + std::to_string(alpha));
      const Graph g = build_graph(tape, params, model, ex, nullptr);
      std::vector<std::pair<double, Var>> terms = {{1.0 - alpha, tape.softmax_nll(g.relation, ex.gold)}};
      if (ex.first_type() != kUnknownType)
        terms.emplace_back(alpha / 2.0, tape.sigmoid_bce(g.head1, one_hot_type(ex.first_type())));
      if (ex.second_type() != kUnknownType)
        terms.emplace_back(alpha / 2.0, tape.sigmoid_bce(g.head2, one_hot_type(ex.second_type())));
      return tape.weighted_sum(terms);
    }
    case Variant::structured: {
      const Graph g = build_graph(tape, params, model, ex, nullptr);
      const int other = static_cast<int>(EntityType::other);
      const crf::ChainLabels gold{ex.first_type() == kUnknownType ? other : ex.first_type(),
                                  ex.gold,
                                  ex.second_type() == kUnknownType ? other : ex.second_type()};
      return tape.crf_nll(g.head1, g.relation, g.head2, tape.param(params.at("crf.begin")),
                          tape.param(params.at("crf.ent_rel")),
                          tape.param(params.at("crf.rel_ent")),
                          tape.param(params.at("crf.end")), gold);
    }
  }
  throw VariantError("unknown variant");
}

}  // namespace slotcnn
