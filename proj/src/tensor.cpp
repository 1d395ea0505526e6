#include "docgraph/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>

#include "docgraph/error.hpp"

namespace docgraph {

Tensor Tensor::from_rows(const std::vector<std::vector<double>>& rows) {
  const std::size_t cols = rows.empty() ? 0 : rows.front().size();
  Tensor t(rows.size(), cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != cols) throw Error(ErrorCode::DimensionMismatch, "ragged rows");
    std::copy(rows[r].begin(), rows[r].end(), t.data.begin() + static_cast<std::ptrdiff_t>(r * cols));
  }
  return t;
}

Tensor& ParamStore::add(const std::string& name, Tensor t) {
  auto [it, inserted] = params_.emplace(name, std::move(t));
  if (!inserted) throw Error(ErrorCode::InvalidConfig, "duplicate parameter " + name);
  return it->second;
}

Tensor& ParamStore::get(const std::string& name) {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error(ErrorCode::MissingKey, "parameter " + name);
  return it->second;
}

const Tensor& ParamStore::get(const std::string& name) const {
  auto it = params_.find(name);
  if (it == params_.end()) throw Error(ErrorCode::MissingKey, "parameter " + name);
  return it->second;
}

std::vector<std::string> ParamStore::names() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : params_) out.push_back(k);
  return out;
}

std::size_t ParamStore::parameter_count() const {
  std::size_t n = 0;
  for (const auto& [k, v] : params_) n += v.size();
  return n;
}

void ParamStore::zero_grad() {
  for (auto& [k, v] : params_) v.zero_grad();
}

bool operator==(const ParamStore& a, const ParamStore& b) {
  if (a.params_.size() != b.params_.size()) return false;
  for (auto ia = a.params_.begin(), ib = b.params_.begin(); ia != a.params_.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.shape != ib->second.shape || ia->second.data != ib->second.data) {
      return false;
    }
  }
  return true;
}

std::string save_checkpoint(const ParamStore& params) {
  std::string out = "docgraph-checkpoint 1\n";
  out += "params " + std::to_string(std::distance(params.begin(), params.end())) + "\n";
  char buf[64];
  for (const auto& [name, t] : params) {
    out += name + " " + std::to_string(t.shape.size());
    for (auto d : t.shape) out += " " + std::to_string(d);
    out += "\n";
    for (std::size_t i = 0; i < t.data.size(); ++i) {
      std::snprintf(buf, sizeof buf, "%a", t.data[i]);
      if (i) out += ' ';
      out += buf;
    }
    out += "\n";
  }
  return out;
}

ParamStore load_checkpoint(std::string_view raw) {
  std::istringstream in{std::string(raw)};
  std::string magic, word;
  int version = 0;
  std::size_t count = 0;
  if (!(in >> magic >> version) || magic != "docgraph-checkpoint" || version != 1) {
    throw Error(ErrorCode::BadHeader, "not a docgraph checkpoint (v1)");
  }
  if (!(in >> word >> count) || word != "params") throw Error(ErrorCode::BadHeader, "missing params count");
  ParamStore store;
  for (std::size_t p = 0; p < count; ++p) {
    std::string name;
    std::size_t rank = 0;
    if (!(in >> name >> rank) || rank == 0 || rank > 4) throw Error(ErrorCode::BadHeader, "bad parameter header");
    Tensor t;
    t.shape.resize(rank);
    std::size_t total = 1;
    for (auto& d : t.shape) {
      if (!(in >> d)) throw Error(ErrorCode::BadHeader, "bad shape for " + name);
      total *= d;
    }
    t.data.resize(total);
    for (auto& x : t.data) {
      if (!(in >> word)) throw Error(ErrorCode::DimensionMismatch, "truncated values for " + name);
      char* end = nullptr;
      x = std::strtod(word.c_str(), &end);
      if (end != word.c_str() + word.size()) throw Error(ErrorCode::BadHeader, "bad value in " + name);
    }
    store.add(name, std::move(t));
  }
  return store;
}

std::vector<double> softmax(std::span<const double> logits) {
  std::vector<double> p(logits.begin(), logits.end());
  if (p.empty()) return p;
  const double m = *std::max_element(p.begin(), p.end());
  double z = 0;
  for (double& x : p) {
    x = std::exp(x - m);
    z += x;
  }
  for (double& x : p) x /= z;
  return p;
}

// ---------------------------------------------------------------------------
// Tape

namespace {

void require(bool cond, const char* what) {
  if (!cond) throw Error(ErrorCode::DimensionMismatch, what);
}

}  // namespace

Var Tape::push(Tensor value, std::vector<int> inputs, std::function<void(Tape&, int)> backprop) {
  Node n;
  n.value = std::move(value);
  n.inputs = std::move(inputs);
  n.backprop = std::move(backprop);
  nodes_.push_back(std::move(n));
  return Var{static_cast<int>(nodes_.size()) - 1};
}

std::vector<double>& Tape::grad_slot(int id) {
  auto& n = nodes_[static_cast<std::size_t>(id)];
  if (n.grad.empty()) n.grad.assign(n.value.size(), 0.0);
  return n.grad;
}

Var Tape::constant(Tensor value) { return push(std::move(value), {}, nullptr); }

Var Tape::param(Tensor& p) {
  Tensor copy;
  copy.shape = p.shape;
  copy.data = p.data;
  Var v = push(std::move(copy), {}, nullptr);
  nodes_.back().param = &p;
  return v;
}

Var Tape::matmul(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.cols() == B.rows(), "matmul: inner dimensions differ");
  const std::size_t n = A.rows(), k = A.cols(), m = B.cols();
  Tensor out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const double aip = A.data[i * k + p];
      if (aip == 0.0) continue;
      const double* brow = &B.data[p * m];
      double* orow = &out.data[i * m];
      for (std::size_t j = 0; j < m; ++j) orow[j] += aip * brow[j];
    }
  }
  return push(std::move(out), {a.id, b.id}, [a, b, n, k, m](Tape& t, int self) {
    const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    const auto& Ad = t.value(a).data;
    const auto& Bd = t.value(b).data;
    auto& ga = t.grad_slot(a.id);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        double s = 0;
        for (std::size_t j = 0; j < m; ++j) s += g[i * m + j] * Bd[p * m + j];
        ga[i * k + p] += s;
      }
    }
    auto& gb = t.grad_slot(b.id);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t p = 0; p < k; ++p) {
        const double aip = Ad[i * k + p];
        if (aip == 0.0) continue;
        for (std::size_t j = 0; j < m; ++j) gb[p * m + j] += aip * g[i * m + j];
      }
    }
  });
}

Var Tape::add(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.rows() == B.rows() && A.cols() == B.cols(), "add: shapes differ");
  Tensor out = A;
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] += B.data[i];
  out.grad.clear();
  return push(std::move(out), {a.id, b.id}, [a, b](Tape& t, int self) {
    const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    auto& ga = t.grad_slot(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    auto& gb = t.grad_slot(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i];
  });
}

Var Tape::add_bias(Var a, Var bias) {
  const Tensor& A = value(a);
  const Tensor& B = value(bias);
  require(B.size() == A.cols(), "add_bias: bias length differs from columns");
  const std::size_t n = A.rows(), m = A.cols();
  Tensor out(n, m);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) out.data[i * m + j] = A.data[i * m + j] + B.data[j];
  }
  return push(std::move(out), {a.id, bias.id}, [a, bias, n, m](Tape& t, int self) {
    const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    auto& ga = t.grad_slot(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
    auto& gb = t.grad_slot(bias.id);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) gb[j] += g[i * m + j];
    }
  });
}

Var Tape::relu(Var a) {
  Tensor out(value(a).rows(), value(a).cols());
  const auto& in = value(a).data;
  for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = in[i] > 0 ? in[i] : 0.0;
  return push(std::move(out), {a.id}, [a](Tape& t, int self) {
    const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    const auto& x = t.value(a).data;
    auto& ga = t.grad_slot(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) {
      if (x[i] > 0) ga[i] += g[i];
    }
  });
}

Var Tape::scale(Var a, double c) {
  Tensor out(value(a).rows(), value(a).cols());
  const auto& in = value(a).data;
  for (std::size_t i = 0; i < in.size(); ++i) out.data[i] = c * in[i];
  return push(std::move(out), {a.id}, [a, c](Tape& t, int self) {
    const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    auto& ga = t.grad_slot(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += c * g[i];
  });
}

Var Tape::hadamard(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.rows() == B.rows() && A.cols() == B.cols(), "hadamard: shapes differ");
  Tensor out(A.rows(), A.cols());
  for (std::size_t i = 0; i < out.size(); ++i) out.data[i] = A.data[i] * B.data[i];
  return push(std::move(out), {a.id, b.id}, [a, b](Tape& t, int self) {
    const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    const auto& Ad = t.value(a).data;
    const auto& Bd = t.value(b).data;
    auto& ga = t.grad_slot(a.id);
    for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * Bd[i];
    auto& gb = t.grad_slot(b.id);
    for (std::size_t i = 0; i < g.size(); ++i) gb[i] += g[i] * Ad[i];
  });
}

Var Tape::concat_cols(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.rows() == B.rows(), "concat_cols: row counts differ");
  const std::size_t n = A.rows(), ca = A.cols(), cb = B.cols();
  Tensor out(n, ca + cb);
  for (std::size_t i = 0; i < n; ++i) {
    std::copy_n(&A.data[i * ca], ca, &out.data[i * (ca + cb)]);
    std::copy_n(&B.data[i * cb], cb, &out.data[i * (ca + cb) + ca]);
  }
  return push(std::move(out), {a.id, b.id}, [a, b, n, ca, cb](Tape& t, int self) {
    const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    auto& ga = t.grad_slot(a.id);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < ca; ++j) ga[i * ca + j] += g[i * (ca + cb) + j];
    }
    auto& gb = t.grad_slot(b.id);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < cb; ++j) gb[i * cb + j] += g[i * (ca + cb) + ca + j];
    }
  });
}

Var Tape::gather_rows(Var a, std::vector<int> rows) {
  const Tensor& A = value(a);
  const std::size_t m = A.cols();
  Tensor out(rows.size(), m);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i] >= 0 && static_cast<std::size_t>(rows[i]) < A.rows(), "gather_rows: index out of range");
    std::copy_n(&A.data[static_cast<std::size_t>(rows[i]) * m], m, &out.data[i * m]);
  }
  return push(std::move(out), {a.id}, [a, rows = std::move(rows), m](Tape& t, int self) {
    const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    auto& ga = t.grad_slot(a.id);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const std::size_t r = static_cast<std::size_t>(rows[i]);
      for (std::size_t j = 0; j < m; ++j) ga[r * m + j] += g[i * m + j];
    }
  });
}

Var Tape::row_dot(Var a, Var b) {
  const Tensor& A = value(a);
  const Tensor& B = value(b);
  require(A.rows() == B.rows() && A.cols() == B.cols(), "row_dot: shapes differ");
  const std::size_t n = A.rows(), m = A.cols();
  Tensor out(n, 1);
  for (std::size_t i = 0; i < n; ++i) {
    double s = 0;
    for (std::size_t j = 0; j < m; ++j) s += A.data[i * m + j] * B.data[i * m + j];
    out.data[i] = s;
  }
  return push(std::move(out), {a.id, b.id}, [a, b, n, m](Tape& t, int self) {
    const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    const auto& Ad = t.value(a).data;
    const auto& Bd = t.value(b).data;
    auto& ga = t.grad_slot(a.id);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) ga[i * m + j] += g[i] * Bd[i * m + j];
    }
    auto& gb = t.grad_slot(b.id);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < m; ++j) gb[i * m + j] += g[i] * Ad[i * m + j];
    }
  });
}

Var Tape::mean_neighbors(Var h, const std::vector<std::vector<int>>& adjacency) {
  const Tensor& H = value(h);
  require(adjacency.size() == H.rows(), "mean_neighbors: adjacency size differs from node count");
  const std::size_t n = H.rows(), m = H.cols();
  Tensor out(n, m);
  for (std::size_t u = 0; u < n; ++u) {
    const auto& nbrs = adjacency[u];
    if (nbrs.empty()) continue;
    const double w = 1.0 / static_cast<double>(nbrs.size());
    for (int v : nbrs) {
      require(v >= 0 && static_cast<std::size_t>(v) < n, "mean_neighbors: neighbour out of range");
      for (std::size_t j = 0; j < m; ++j) out.data[u * m + j] += w * H.data[static_cast<std::size_t>(v) * m + j];
    }
  }
  return push(std::move(out), {h.id}, [h, adjacency, n, m](Tape& t, int self) {
    const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    auto& gh = t.grad_slot(h.id);
    for (std::size_t u = 0; u < n; ++u) {
      const auto& nbrs = adjacency[u];
      if (nbrs.empty()) continue;
      const double w = 1.0 / static_cast<double>(nbrs.size());
      for (int v : nbrs) {
        for (std::size_t j = 0; j < m; ++j) gh[static_cast<std::size_t>(v) * m + j] += w * g[u * m + j];
      }
    }
  });
}

Var Tape::softmax_xent(Var logits, std::vector<int> labels) {
  const Tensor& L = value(logits);
  require(labels.size() == L.rows(), "softmax_xent: one label per row");
  const std::size_t n = L.rows(), c = L.cols();
  Tensor out(n, 1);
  Tensor probs(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    require(labels[i] >= 0 && static_cast<std::size_t>(labels[i]) < c, "softmax_xent: label out of range");
    auto p = softmax(L.row(i));
    std::copy(p.begin(), p.end(), &probs.data[i * c]);
    // log-sum-exp form keeps the value finite for confident wrong predictions
    const auto row = L.row(i);
    const double mx = *std::max_element(row.begin(), row.end());
    double z = 0;
    for (double x : row) z += std::exp(x - mx);
    out.data[i] = mx + std::log(z) - row[static_cast<std::size_t>(labels[i])];
  }
  return push(std::move(out), {logits.id},
              [logits, labels = std::move(labels), probs = std::move(probs), n, c](Tape& t, int self) {
                const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
                auto& gl = t.grad_slot(logits.id);
                for (std::size_t i = 0; i < n; ++i) {
                  for (std::size_t j = 0; j < c; ++j) {
                    const double y = static_cast<int>(j) == labels[i] ? 1.0 : 0.0;
                    gl[i * c + j] += g[i] * (probs.data[i * c + j] - y);
                  }
                }
              });
}

Var Tape::squared_error(Var pred, std::vector<double> target) {
  const Tensor& P = value(pred);
  require(P.cols() == 1 && P.rows() == target.size(), "squared_error: pred must be n x 1");
  Tensor out(P.rows(), 1);
  for (std::size_t i = 0; i < target.size(); ++i) {
    const double e = P.data[i] - target[i];
    out.data[i] = e * e;
  }
  return push(std::move(out), {pred.id}, [pred, target = std::move(target)](Tape& t, int self) {
    const auto& g = t.nodes_[static_cast<std::size_t>(self)].grad;
    const auto& p = t.value(pred).data;
    auto& gp = t.grad_slot(pred.id);
    for (std::size_t i = 0; i < target.size(); ++i) gp[i] += 2.0 * (p[i] - target[i]) * g[i];
  });
}

Var Tape::weighted_sum(Var a, std::vector<double> weights) {
  const Tensor& A = value(a);
  require(A.size() == weights.size(), "weighted_sum: one weight per element");
  Tensor out(1, 1);
  for (std::size_t i = 0; i < weights.size(); ++i) out.data[0] += weights[i] * A.data[i];
  return push(std::move(out), {a.id}, [a, weights = std::move(weights)](Tape& t, int self) {
    const double g = t.nodes_[static_cast<std::size_t>(self)].grad[0];
    auto& ga = t.grad_slot(a.id);
    for (std::size_t i = 0; i < weights.size(); ++i) ga[i] += g * weights[i];
  });
}

Var Tape::sum(Var a) { return weighted_sum(a, std::vector<double>(value(a).size(), 1.0)); }

void Tape::backward(Var out) {
  if (out.id < 0 || static_cast<std::size_t>(out.id) >= nodes_.size()) {
    throw Error(ErrorCode::InvalidConfig, "backward: unknown output");
  }
  require(value(out).size() == 1, "backward: output must be a scalar");
  for (auto& n : nodes_) n.grad.clear();
  grad_slot(out.id)[0] = 1.0;
  for (int id = out.id; id >= 0; --id) {
    Node& n = nodes_[static_cast<std::size_t>(id)];
    if (n.grad.empty()) continue;
    for (int in : n.inputs) {
      if (in >= id) throw Error(ErrorCode::GraphCycle, "node " + std::to_string(id) + " reads a later node");
    }
    if (n.backprop) n.backprop(*this, id);
    if (n.param) {
      if (n.param->grad.size() != n.param->data.size()) n.param->zero_grad();
      for (std::size_t i = 0; i < n.grad.size(); ++i) n.param->grad[i] += n.grad[i];
    }
  }
}

}  // namespace docgraph
