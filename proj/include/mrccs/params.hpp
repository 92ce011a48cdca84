#pragma once

#include <deque>
#include <numeric>
#include <string>
#include <unordered_map>
#include <vector>

#include "mrccs/errors.hpp"
#include "mrccs/rng.hpp"

namespace mrccs {

// Named collection of trainable arrays with gradient slots. Iteration order
// is insertion order; entries live in a deque so references stay valid while
// the graph holds them.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    std::vector<int> shape;
    std::vector<float> value;
    std::vector<float> grad;

    int count() const {
      int n = 1;
      for (int d : shape) n *= d;
      return n;
    }
  };

  Entry& add(const std::string& name, std::vector<int> shape) {
    if (index_.count(name)) {
      throw ConfigError("duplicate parameter name: " + name);
    }
    for (int d : shape) {
      if (d < 1) throw ConfigError("parameter " + name + " has non-positive dim");
    }
    Entry e;
    e.name = name;
    e.shape = std::move(shape);
    e.value.assign(e.count(), 0.0f);
    e.grad.assign(e.count(), 0.0f);
    index_[name] = entries_.size();
    entries_.push_back(std::move(e));
    return entries_.back();
  }

  Entry& at(const std::string& name) {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
    return entries_[it->second];
  }
  const Entry& at(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw ConfigError("unknown parameter: " + name);
    return entries_[it->second];
  }

  bool contains(const std::string& name) const { return index_.count(name) > 0; }

  void zero_grads() {
    for (auto& e : entries_) std::fill(e.grad.begin(), e.grad.end(), 0.0f);
  }

  size_t size() const { return entries_.size(); }
  size_t total_values() const {
    size_t n = 0;
    for (const auto& e : entries_) n += e.value.size();
    return n;
  }

  auto begin() { return entries_.begin(); }
  auto end() { return entries_.end(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

 private:
  std::deque<Entry> entries_;
  std::unordered_map<std::string, size_t> index_;
};

// Kaiming-uniform fan-in init for a conv weight entry, using the standard
// framework-default bound 1/sqrt(fan_in) (PyTorch's Conv2d reset). The wider
// sqrt(6/fan_in) bound compounds across this architecture's unnormalized conv
// stacks into badly scaled outputs that optimizers crawl out of.
inline void kaiming_uniform_init(ParamStore::Entry& e, int fan_in, Rng& rng) {
  const float bound = 1.0f / std::sqrt(static_cast<float>(fan_in));
  for (auto& v : e.value) v = rng.uniform(-bound, bound);
}

}  // namespace mrccs
