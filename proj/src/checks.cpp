#include "slotcnn/rel/checks.hpp"

#include "slotcnn/nn/tape.hpp"

namespace slotcnn {

data::Vocabulary numbered_vocabulary(int n) {
  data::Vocabulary vocab;
  for (int i = 0; i < n; ++i) vocab.add("w" + std::to_string(i));
  return vocab;
}

EncodedExample random_example(int vocab_size, int min_context_length, int num_labels,
                              std::mt19937_64& rng, double unknown_type_rate) {
  std::uniform_int_distribution<int> word(data::kFillerTagId + 1, vocab_size - 1);
  std::uniform_int_distribution<int> length(0, 4);
  std::uniform_int_distribution<int> label(0, num_labels - 1);
  std::uniform_int_distribution<int> type(0, kNumEntityTypes - 1);
  std::bernoulli_distribution coin(0.5);
  std::bernoulli_distribution unknown(unknown_type_rate);

  EncodedExample ex;
  ex.id = "random";
  ex.order_flag = coin(rng) ? 1 : 0;
  const int first_tag = ex.order_flag ? data::kNameTagId : data::kFillerTagId;
  const int second_tag = ex.order_flag ? data::kFillerTagId : data::kNameTagId;
  auto words = [&](std::vector<int>& out) {
    for (int n = length(rng); n > 0; --n) out.push_back(word(rng));
  };
  words(ex.left);
  ex.left.push_back(first_tag);
  ex.middle.push_back(first_tag);
  words(ex.middle);
  ex.middle.push_back(second_tag);
  ex.right.push_back(second_tag);
  words(ex.right);
  for (auto* ctx : {&ex.left, &ex.middle, &ex.right})
    while (static_cast<int>(ctx->size()) < min_context_length) ctx->push_back(data::kPadId);
  ex.gold = label(rng);
  ex.type1 = unknown(rng) ? kUnknownType : type(rng);
  ex.type2 = unknown(rng) ? kUnknownType : type(rng);
  return ex;
}

ModelDims small_dims() { return ModelDims{4, 3, 5, 6, 4}; }

nn::GradCheckResult check_model_gradients(Model& model,
                                          const std::vector<EncodedExample>& examples,
                                          double alpha, double eps) {
  auto loss = [&](bool with_grad) {
    if (with_grad) model.params().zero_grad();
    double total = 0.0;
    for (const auto& ex : examples) {
      nn::Tape tape(with_grad);
      auto l = example_loss(tape, model, ex, alpha);
      total += l->value()(0, 0);
      if (with_grad) tape.backward(l);
    }
    return total;
  };
  return nn::grad_check(loss, model.params(), eps);
}

}  // namespace slotcnn
