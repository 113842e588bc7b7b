#include "slotcnn/nn/tape.hpp"

#include <cmath>

#include "slotcnn/nn/ops.hpp"

namespace slotcnn::nn {

namespace {

Vec as_vec(const Matrix& m) {
  return Eigen::Map<const Vec>(m.data(), m.size());
}

Matrix as_column(const Vec& v) {
  return Eigen::Map<const Matrix>(v.data(), v.size(), 1);
}

double softplus(double z) {
  return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z)));
}

}  // namespace

Var Tape::make(Matrix value) {
  auto node = std::make_shared<Node>(std::move(value));
  nodes_.push_back(node);
  return node;
}

void Tape::on_backward(std::function<void()> step) {
  if (record_) steps_.push_back(std::move(step));
}

Var Tape::param(Param& p) {
  auto node = std::make_shared<Node>(p);
  nodes_.push_back(node);
  return node;
}

Var Tape::constant(Matrix value) { return make(std::move(value)); }

Var Tape::embed(Param& table, const std::vector<int>& ids) {
  const Index dim = table.value.cols();
  Matrix out(static_cast<Index>(ids.size()), dim);
  for (size_t t = 0; t < ids.size(); ++t) {
    if (ids[t] < 0 || ids[t] >= table.value.rows())
      throw ShapeError("token id " + std::to_string(ids[t]) +
                       " outside embedding table");
    out.row(static_cast<Index>(t)) = table.value.row(ids[t]);
  }
  Var y = make(std::move(out));
  on_backward([y = y.get(), &table, ids] {
    for (size_t t = 0; t < ids.size(); ++t)
      table.grad.row(ids[t]) += y->grad().row(static_cast<Index>(t));
  });
  return y;
}

Var Tape::conv_tanh(const Var& input, const Var& filters, const Var& bias,
                    Index width) {
  const Matrix& in = input->value();
  const Matrix& h = filters->value();
  require_shape(h.cols() == width * in.cols(),
                "filters have " + std::to_string(h.cols()) +
                    " columns, expected width*D = " +
                    std::to_string(width * in.cols()));
  require_shape(bias->value().size() == h.rows(),
                "conv bias length must equal filter count");
  Matrix windows = im2col(in, width);
  Matrix pre = h * windows.transpose();
  pre.colwise() += as_vec(bias->value());
  Var y = make(pre.array().tanh().matrix());
  on_backward([y = y.get(), x = input.get(), f = filters.get(), b = bias.get(),
               windows = std::move(windows), width] {
    const Matrix dz =
        (y->grad().array() * (1.0 - y->value().array().square())).matrix();
    f->grad().noalias() += dz * windows;
    b->grad() += dz.rowwise().sum();
    const Matrix dwin = dz.transpose() * f->value();
    const Index dim = x->value().cols();
    Matrix& dx = x->grad();
    for (Index t = 0; t < dwin.rows(); ++t)
      for (Index j = 0; j < width; ++j)
        dx.row(t + j) += dwin.row(t).segment(j * dim, dim);
  });
  return y;
}

Var Tape::kmax(const Var& c, Index k) {
  auto pooled = kmax_pool(c->value(), k);
  Var y = make(std::move(pooled.values));
  on_backward([y = y.get(), c = c.get(), idx = std::move(pooled.indices)] {
    Matrix& dc = c->grad();
    const Matrix& dy = y->grad();
    for (Index i = 0; i < idx.rows(); ++i)
      for (Index j = 0; j < idx.cols(); ++j) dc(i, idx(i, j)) += dy(i, j);
  });
  return y;
}

Var Tape::flatten(const Var& x) {
  const Matrix& v = x->value();
  Var y = make(Eigen::Map<const Matrix>(v.data(), v.size(), 1));
  on_backward([y = y.get(), x = x.get()] {
    Matrix& dx = x->grad();
    Eigen::Map<Matrix>(dx.data(), dx.size(), 1) += y->grad();
  });
  return y;
}

Var Tape::concat(const std::vector<Var>& parts) {
  Index total = 0;
  for (const auto& p : parts) {
    require_shape(p->value().cols() == 1, "concat expects column vectors");
    total += p->value().rows();
  }
  Matrix out(total, 1);
  Index offset = 0;
  for (const auto& p : parts) {
    out.block(offset, 0, p->value().rows(), 1) = p->value();
    offset += p->value().rows();
  }
  Var y = make(std::move(out));
  std::vector<Node*> raw;
  for (const auto& p : parts) raw.push_back(p.get());
  on_backward([y = y.get(), raw = std::move(raw)] {
    Index off = 0;
    for (Node* p : raw) {
      const Index n = p->value().rows();
      p->grad() += y->grad().block(off, 0, n, 1);
      off += n;
    }
  });
  return y;
}

Var Tape::affine(const std::vector<std::pair<Var, Var>>& terms,
                 const Var& bias) {
  Matrix out = bias->value();
  require_shape(out.cols() == 1, "bias must be a column vector");
  for (const auto& [w, x] : terms) {
    require_shape(w->value().cols() == x->value().rows() &&
                      w->value().rows() == out.rows() && x->value().cols() == 1,
                  "affine term " + std::to_string(w->value().rows()) + "x" +
                      std::to_string(w->value().cols()) + " times " +
                      std::to_string(x->value().rows()) + "x" +
                      std::to_string(x->value().cols()));
    out.noalias() += w->value() * x->value();
  }
  Var y = make(std::move(out));
  std::vector<std::pair<Node*, Node*>> raw;
  for (const auto& [w, x] : terms) raw.emplace_back(w.get(), x.get());
  on_backward([y = y.get(), raw = std::move(raw), b = bias.get()] {
    const Matrix& dy = y->grad();
    for (auto [w, x] : raw) {
      w->grad().noalias() += dy * x->value().transpose();
      x->grad().noalias() += w->value().transpose() * dy;
    }
    b->grad() += dy;
  });
  return y;
}

Var Tape::tanh(const Var& x) {
  Var y = make(x->value().array().tanh().matrix());
  on_backward([y = y.get(), x = x.get()] {
    x->grad().array() +=
        y->grad().array() * (1.0 - y->value().array().square());
  });
  return y;
}

Var Tape::sigmoid(const Var& x) {
  Var y = make((1.0 / (1.0 + (-x->value().array()).exp())).matrix());
  on_backward([y = y.get(), x = x.get()] {
    x->grad().array() +=
        y->grad().array() * y->value().array() * (1.0 - y->value().array());
  });
  return y;
}

Var Tape::softmax_nll(const Var& logits, Index gold) {
  const Vec z = as_vec(logits->value());
  if (gold < 0 || gold >= z.size())
    throw LabelError("gold index " + std::to_string(gold) +
                     " out of range for " + std::to_string(z.size()) +
                     " classes");
  Matrix loss(1, 1);
  loss(0, 0) = log_sum_exp(z) - z(gold);
  Var y = make(std::move(loss));
  on_backward([y = y.get(), x = logits.get(), gold] {
    Vec g = softmax(as_vec(x->value()));
    g(gold) -= 1.0;
    x->grad() += y->grad()(0, 0) * as_column(g);
  });
  return y;
}

Var Tape::sigmoid_bce(const Var& logits, const Vec& target) {
  const Vec z = as_vec(logits->value());
  require_shape(z.size() == target.size(), "BCE target length mismatch");
  Matrix loss(1, 1);
  loss(0, 0) = 0;
  for (Index i = 0; i < z.size(); ++i)
    loss(0, 0) += softplus(z(i)) - target(i) * z(i);
  Var y = make(std::move(loss));
  on_backward([y = y.get(), x = logits.get(), target] {
    const Vec z = as_vec(x->value());
    Vec g(z.size());
    for (Index i = 0; i < z.size(); ++i) g(i) = nn::sigmoid(z(i)) - target(i);
    x->grad() += y->grad()(0, 0) * as_column(g);
  });
  return y;
}

Var Tape::crf_nll(const Var& e1, const Var& rel, const Var& e2,
                  const Var& begin, const Var& ent_rel, const Var& rel_ent,
                  const Var& end, const crf::ChainLabels& gold) {
  crf::ChainEmissions<double> em{as_vec(e1->value()), as_vec(rel->value()),
                                 as_vec(e2->value())};
  crf::CrfParams<double> params{as_vec(begin->value()), ent_rel->value(),
                                rel_ent->value(), as_vec(end->value())};
  auto result = crf::nll_and_gradients(em, params, gold);
  Matrix loss(1, 1);
  loss(0, 0) = result.loss;
  Var y = make(std::move(loss));
  on_backward([y = y.get(), e1 = e1.get(), rel = rel.get(), e2 = e2.get(),
               begin = begin.get(), ent_rel = ent_rel.get(),
               rel_ent = rel_ent.get(), end = end.get(),
               g = std::move(result)] {
    const double s = y->grad()(0, 0);
    e1->grad() += s * as_column(g.d_emissions.e1);
    rel->grad() += s * as_column(g.d_emissions.rel);
    e2->grad() += s * as_column(g.d_emissions.e2);
    begin->grad() += s * as_column(g.d_params.begin_ent);
    ent_rel->grad() += s * g.d_params.ent_rel;
    rel_ent->grad() += s * g.d_params.rel_ent;
    end->grad() += s * as_column(g.d_params.ent_end);
  });
  return y;
}

Var Tape::weighted_sum(const std::vector<std::pair<double, Var>>& terms) {
  Matrix out = Matrix::Zero(1, 1);
  for (const auto& [w, x] : terms) {
    require_shape(x->value().size() == 1, "weighted_sum expects scalars");
    out(0, 0) += w * x->value()(0, 0);
  }
  Var y = make(std::move(out));
  std::vector<std::pair<double, Node*>> raw;
  for (const auto& [w, x] : terms) raw.emplace_back(w, x.get());
  on_backward([y = y.get(), raw = std::move(raw)] {
    for (auto [w, x] : raw) x->grad()(0, 0) += w * y->grad()(0, 0);
  });
  return y;
}

void Tape::backward(const Var& loss, double seed) {
  if (!record_) throw NumericError("backward() on a non-recording tape");
  if (replayed_) throw NumericError("backward() called twice on one tape");
  replayed_ = true;
  require_shape(loss->value().size() == 1, "backward() needs a scalar loss");
  loss->grad()(0, 0) += seed;
  for (auto it = steps_.rbegin(); it != steps_.rend(); ++it) (*it)();
}

}  // namespace slotcnn::nn
