#pragma once

#include <iosfwd>
#include <string>

#include "slotcnn/rel/model.hpp"

namespace slotcnn {

// Versioned text format:
//
//   slotcnn-model 1 variant=<v> emb_dim=.. filter_width=.. num_filters=..
//                   hidden_rel=.. hidden_ent=.. seed=.. slot=<slot or ->
//   vocab <n>
//   <one token per line>
//   param <name> <rows> <cols>
//   <one value per line, 17 significant digits, row-major>
//   ...
//   end
//
// 17 significant digits round-trip every double exactly.

void save_model(const Model& model, std::ostream& out);
void save_model(const Model& model, const std::string& path);
Model load_model(std::istream& in, const std::string& source);
Model load_model(const std::string& path);

}  // namespace slotcnn
