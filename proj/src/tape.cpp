#include "mrccs/tape.hpp"

#include <algorithm>

namespace mrccs {

Tape::NodeId Tape::push(Node n) {
  nodes_.push_back(std::move(n));
  return static_cast<NodeId>(nodes_.size()) - 1;
}

Tape::Node& Tape::node(NodeId id) {
  check_id(id);
  return nodes_[id];
}

const Tape::Node& Tape::node(NodeId id) const {
  check_id(id);
  return nodes_[id];
}

void Tape::check_id(NodeId id) const {
  if (id < 0 || id >= static_cast<NodeId>(nodes_.size())) {
    throw ConfigError("invalid tape node id " + std::to_string(id) +
                      " (tape has " + std::to_string(nodes_.size()) + " nodes)");
  }
}

const Tensor3& Tape::value(NodeId id) const { return node(id).value; }

float Tape::scalar(NodeId id) const {
  const Tensor3& v = value(id);
  if (v.size() != 1) {
    throw ConfigError("node is not scalar, shape " + v.shape_string());
  }
  return v.data[0];
}

Tensor3& Tape::grad_buffer(NodeId id) {
  Node& n = nodes_[id];
  if (n.grad.size() == 0) {
    n.grad = Tensor3(n.value.channels, n.value.height, n.value.width);
  }
  return n.grad;
}

void Tape::add_grad(NodeId id, const Tensor3& g) {
  Node& n = nodes_[id];
  if (!n.needs_grad) return;
  Tensor3& acc = grad_buffer(id);
  for (size_t i = 0; i < acc.data.size(); ++i) acc.data[i] += g.data[i];
}

Tape::NodeId Tape::constant(Tensor3 value) {
  Node n;
  n.value = std::move(value);
  return push(std::move(n));
}

Tape::NodeId Tape::param(ParamStore& store, const std::string& name) {
  ParamStore::Entry& e = store.at(name);
  if (e.shape.size() > 3) {
    throw ConfigError("param node requires rank<=3 entry, " + name + " has rank " +
                      std::to_string(e.shape.size()));
  }
  int c = 1, h = 1, w = 1;
  if (e.shape.size() == 1) {
    w = e.shape[0];
  } else if (e.shape.size() == 2) {
    h = e.shape[0];
    w = e.shape[1];
  } else if (e.shape.size() == 3) {
    c = e.shape[0];
    h = e.shape[1];
    w = e.shape[2];
  }
  Node n;
  n.value = Tensor3::from(c, h, w, e.value);
  n.needs_grad = true;
  ParamStore::Entry* entry = &e;
  n.back = [entry](Tape& t, NodeId self) {
    const Tensor3& g = t.nodes_[self].grad;
    for (size_t i = 0; i < g.data.size(); ++i) entry->grad[i] += g.data[i];
  };
  return push(std::move(n));
}

Tape::NodeId Tape::conv(NodeId input, const ConvSpec& spec, ParamStore& store,
                        const std::string& weight_name, const std::string& bias_name) {
  const Node& in = node(input);
  ParamStore::Entry& w = store.at(weight_name);
  if (w.count() != spec.weight_count()) {
    throw ConfigError("conv weight " + weight_name + " has " +
                      std::to_string(w.count()) + " values, spec expects " +
                      std::to_string(spec.weight_count()));
  }
  ParamStore::Entry* b = nullptr;
  if (spec.has_bias) {
    if (bias_name.empty()) {
      throw ConfigError("conv spec has bias but no bias parameter was given");
    }
    b = &store.at(bias_name);
    if (b->count() != spec.out_channels) {
      throw ConfigError("conv bias " + bias_name + " has " + std::to_string(b->count()) +
                        " values, spec expects " + std::to_string(spec.out_channels));
    }
  }

  Node n;
  n.value = conv_forward(in.value, spec, w.value,
                         b ? std::span<const float>(b->value) : std::span<const float>{});
  n.needs_grad = true;
  ParamStore::Entry* wp = &w;
  const bool input_needs = in.needs_grad;
  n.back = [input, spec, wp, b, input_needs](Tape& t, NodeId self) {
    const Tensor3& go = t.nodes_[self].grad;
    const Tensor3& x = t.nodes_[input].value;
    Tensor3 gin;
    conv_backward(x, spec, wp->value, go, input_needs ? &gin : nullptr, wp->grad,
                  b ? std::span<float>(b->grad) : std::span<float>{});
    if (input_needs) t.add_grad(input, gin);
  };
  return push(std::move(n));
}

Tape::NodeId Tape::mean_pool2(NodeId input) {
  const Node& in = node(input);
  Node n;
  n.value = mrccs::mean_pool2(in.value);
  n.needs_grad = in.needs_grad;
  if (n.needs_grad) {
    n.back = [input](Tape& t, NodeId self) {
      t.add_grad(input, mean_pool2_backward(t.nodes_[self].grad));
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::depth_to_space(NodeId input, int r) {
  const Node& in = node(input);
  Node n;
  n.value = mrccs::depth_to_space(in.value, r);
  n.needs_grad = in.needs_grad;
  if (n.needs_grad) {
    n.back = [input, r](Tape& t, NodeId self) {
      t.add_grad(input, mrccs::space_to_depth(t.nodes_[self].grad, r));
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::space_to_depth(NodeId input, int r) {
  const Node& in = node(input);
  Node n;
  n.value = mrccs::space_to_depth(in.value, r);
  n.needs_grad = in.needs_grad;
  if (n.needs_grad) {
    n.back = [input, r](Tape& t, NodeId self) {
      t.add_grad(input, mrccs::depth_to_space(t.nodes_[self].grad, r));
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::concat(const std::vector<NodeId>& parts) {
  if (parts.empty()) throw ConfigError("concat of zero tensors");
  int channels = 0;
  bool needs = false;
  const Tensor3& first = node(parts[0]).value;
  for (NodeId id : parts) {
    const Node& p = node(id);
    if (p.value.height != first.height || p.value.width != first.width) {
      throw ConfigError("concat spatial mismatch: " + p.value.shape_string() + " vs " +
                        first.shape_string());
    }
    channels += p.value.channels;
    needs = needs || p.needs_grad;
  }
  Node n;
  n.value = Tensor3(channels, first.height, first.width);
  float* dst = n.value.data.data();
  for (NodeId id : parts) {
    const Tensor3& v = node(id).value;
    std::copy(v.data.begin(), v.data.end(), dst);
    dst += v.data.size();
  }
  n.needs_grad = needs;
  if (needs) {
    std::vector<NodeId> srcs = parts;
    n.back = [srcs](Tape& t, NodeId self) {
      const Tensor3& go = t.nodes_[self].grad;
      const float* src = go.data.data();
      for (NodeId id : srcs) {
        const Tensor3& v = t.nodes_[id].value;
        Tensor3 slice(v.channels, v.height, v.width);
        std::copy(src, src + slice.data.size(), slice.data.begin());
        src += slice.data.size();
        t.add_grad(id, slice);
      }
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::relu(NodeId input) {
  const Node& in = node(input);
  Node n;
  n.value = in.value;
  for (auto& v : n.value.data) v = std::max(v, 0.0f);
  n.needs_grad = in.needs_grad;
  if (n.needs_grad) {
    n.back = [input](Tape& t, NodeId self) {
      const Tensor3& go = t.nodes_[self].grad;
      const Tensor3& x = t.nodes_[input].value;
      Tensor3 gin(x.channels, x.height, x.width);
      for (size_t i = 0; i < gin.data.size(); ++i) {
        gin.data[i] = x.data[i] > 0.0f ? go.data[i] : 0.0f;
      }
      t.add_grad(input, gin);
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::add(NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (!na.value.same_shape(nb.value)) {
    throw ConfigError("add shape mismatch: " + na.value.shape_string() + " vs " +
                      nb.value.shape_string());
  }
  Node n;
  n.value = na.value;
  for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] += nb.value.data[i];
  n.needs_grad = na.needs_grad || nb.needs_grad;
  if (n.needs_grad) {
    n.back = [a, b](Tape& t, NodeId self) {
      const Tensor3& go = t.nodes_[self].grad;
      t.add_grad(a, go);
      t.add_grad(b, go);
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::sub(NodeId a, NodeId b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (!na.value.same_shape(nb.value)) {
    throw ConfigError("sub shape mismatch: " + na.value.shape_string() + " vs " +
                      nb.value.shape_string());
  }
  Node n;
  n.value = na.value;
  for (size_t i = 0; i < n.value.data.size(); ++i) n.value.data[i] -= nb.value.data[i];
  n.needs_grad = na.needs_grad || nb.needs_grad;
  if (n.needs_grad) {
    n.back = [a, b](Tape& t, NodeId self) {
      const Tensor3& go = t.nodes_[self].grad;
      t.add_grad(a, go);
      Tensor3 neg = go;
      for (auto& v : neg.data) v = -v;
      t.add_grad(b, neg);
    };
  }
  return push(std::move(n));
}

Tape::NodeId Tape::sum_squares(NodeId input) {
  const Node& in = node(input);
  Node n;
  n.value = Tensor3(1, 1, 1);
  float acc = 0.0f;
  for (float v : in.value.data) acc += v * v;
  n.value.data[0] = acc;
  n.needs_grad = in.needs_grad;
  if (n.needs_grad) {
    n.back = [input](Tape& t, NodeId self) {
      const float g = t.nodes_[self].grad.data[0];
      const Tensor3& x = t.nodes_[input].value;
      Tensor3 gin(x.channels, x.height, x.width);
      for (size_t i = 0; i < gin.data.size(); ++i) gin.data[i] = 2.0f * x.data[i] * g;
      t.add_grad(input, gin);
    };
  }
  return push(std::move(n));
}

void Tape::backward(NodeId loss) {
  if (nodes_.empty()) {
    throw ConfigError("backward called on an empty tape (no forward recorded)");
  }
  check_id(loss);
  Node& top = nodes_[loss];
  if (top.value.size() != 1) {
    throw ConfigError("backward requires a scalar loss node, got shape " +
                      top.value.shape_string());
  }
  if (!top.needs_grad) return;  // loss independent of parameters
  grad_buffer(loss).data[0] = 1.0f;
  for (NodeId id = loss; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.needs_grad || n.grad.size() == 0 || !n.back) continue;
    n.back(*this, id);
  }
}

}  // namespace mrccs
