#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace docgraph {

/// Dense row-major array of doubles. Everything in this library is rank 1
/// or rank 2; rows()/cols() treat rank 1 as a single row.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;
  std::vector<double> grad;  // empty until a gradient is requested

  Tensor() = default;
  Tensor(std::size_t rows, std::size_t cols, double fill = 0.0)
      : shape{rows, cols}, data(rows * cols, fill) {}

  static Tensor from_rows(const std::vector<std::vector<double>>& rows);

  std::size_t rows() const { return shape.size() < 2 ? 1 : shape[0]; }
  std::size_t cols() const { return shape.empty() ? 0 : shape.back(); }
  std::size_t size() const { return data.size(); }

  double& at(std::size_t r, std::size_t c) { return data[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols() + c]; }
  std::span<const double> row(std::size_t r) const { return {data.data() + r * cols(), cols()}; }

  void zero_grad() { grad.assign(data.size(), 0.0); }
};

/// Named trainable parameters. std::map keeps addresses stable, so a Tape
/// may hold pointers into the store while a step is in flight.
class ParamStore {
 public:
  Tensor& add(const std::string& name, Tensor t);
  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  std::vector<std::string> names() const;
  std::size_t parameter_count() const;
  void zero_grad();

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

  friend bool operator==(const ParamStore& a, const ParamStore& b);

 private:
  std::map<std::string, Tensor> params_;
};

/// Versioned text checkpoint; values written as hex floats so loading is exact.
std::string save_checkpoint(const ParamStore& params);
ParamStore load_checkpoint(std::string_view raw);

struct Var {
  int id = -1;
};

/// Records a forward computation and replays it in reverse to fill
/// gradients. Only the operations the GNN and IE head need are provided.
class Tape {
 public:
  Var constant(Tensor value);
  Var param(Tensor& param);

  const Tensor& value(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].value; }
  const std::vector<double>& grad(Var v) const { return nodes_[static_cast<std::size_t>(v.id)].grad; }
  std::size_t size() const { return nodes_.size(); }

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var add_bias(Var a, Var bias);  // bias is 1 x cols, broadcast over rows
  Var relu(Var a);
  Var scale(Var a, double c);
  Var hadamard(Var a, Var b);
  Var concat_cols(Var a, Var b);
  Var gather_rows(Var a, std::vector<int> rows);
  Var row_dot(Var a, Var b);                      // n x 1
  Var mean_neighbors(Var h, const std::vector<std::vector<int>>& adjacency);
  Var softmax_xent(Var logits, std::vector<int> labels);  // n x 1, -log softmax[label]
  Var squared_error(Var pred, std::vector<double> target);  // n x 1
  Var weighted_sum(Var a, std::vector<double> weights);    // 1 x 1
  Var sum(Var a);                                          // 1 x 1

  /// Seeds d(out)/d(out) = 1 for a 1 x 1 output and accumulates into the
  /// grad slots of every parameter reached.
  void backward(Var out);

 private:
  struct Node {
    Tensor value;
    std::vector<double> grad;
    std::vector<int> inputs;
    std::function<void(Tape&, int)> backprop;
    Tensor* param = nullptr;
  };

  Var push(Tensor value, std::vector<int> inputs, std::function<void(Tape&, int)> backprop);
  std::vector<double>& grad_slot(int id);

  std::vector<Node> nodes_;
};

std::vector<double> softmax(std::span<const double> logits);

}  // namespace docgraph
