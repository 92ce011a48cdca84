#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mrccs/ops.hpp"
#include "mrccs/params.hpp"
#include "mrccs/tensor.hpp"

namespace mrccs {

// Reverse-mode tape. Each op records its output value plus a closure that
// pushes gradients to its parents and into parameter stores. The graph is
// rebuilt per forward pass; backward() walks it once in reverse creation
// order. Single-threaded per instance.
class Tape {
 public:
  using NodeId = int;

  // Leaf with no gradient tracking (inputs, targets).
  NodeId constant(Tensor3 value);

  // Leaf bound to a parameter entry; rank<=3 shapes only. backward()
  // accumulates into the entry's grad slot.
  NodeId param(ParamStore& store, const std::string& name);

  NodeId conv(NodeId input, const ConvSpec& spec, ParamStore& store,
              const std::string& weight_name, const std::string& bias_name = "");
  NodeId mean_pool2(NodeId input);
  NodeId depth_to_space(NodeId input, int r);
  NodeId space_to_depth(NodeId input, int r);
  NodeId concat(const std::vector<NodeId>& parts);
  NodeId relu(NodeId input);
  NodeId add(NodeId a, NodeId b);
  NodeId sub(NodeId a, NodeId b);
  // sum over all elements of x^2, as a 1x1x1 scalar node.
  NodeId sum_squares(NodeId input);

  const Tensor3& value(NodeId id) const;
  float scalar(NodeId id) const;

  // Seeds d(loss)/d(loss)=1 and propagates. loss must be a 1x1x1 node.
  void backward(NodeId loss);

  size_t node_count() const { return nodes_.size(); }

 private:
  struct Node {
    Tensor3 value;
    Tensor3 grad;  // allocated on first contribution during backward
    bool needs_grad = false;
    std::function<void(Tape&, NodeId)> back;  // empty for leaves
  };

  NodeId push(Node n);
  Node& node(NodeId id);
  const Node& node(NodeId id) const;
  void check_id(NodeId id) const;
  // Accumulate g into node id's grad (no-op when the node doesn't need it).
  void add_grad(NodeId id, const Tensor3& g);
  Tensor3& grad_buffer(NodeId id);

  std::vector<Node> nodes_;
};

}  // namespace mrccs
