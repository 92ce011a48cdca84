#pragma once

#include <string>
#include <vector>

#include "mrccs/params.hpp"
#include "mrccs/rng.hpp"
#include "mrccs/sensing.hpp"
#include "mrccs/tape.hpp"

namespace mrccs {

// Node handles for one block invocation, recorded so tests can verify the
// wiring structurally: the preserved copies fused at each scale must be the
// very nodes produced on the way down, not recomputations.
struct MrbTrace {
  Tape::NodeId f_down = -1;       // C x H/2 x W/2
  Tape::NodeId f_down_down = -1;  // C x H/4 x W/4
  Tape::NodeId y1 = -1, y2 = -1, y3 = -1;
  Tape::NodeId fuse1 = -1, fuse2 = -1, fuse3 = -1;  // measurement fusions per scale
  Tape::NodeId up1 = -1, up2 = -1;                  // re-expanded features
  Tape::NodeId out = -1;
  std::vector<Tape::NodeId> fuse1_parents, fuse2_parents, fuse3_parents;
  // Parents of the expansion/closing fusions, whose second element must be
  // the preserved copy: {F1, f_down_down}, {F2, f_down}, {F3, f_t}.
  std::vector<Tape::NodeId> expand1_parents, expand2_parents, close_parents;
};

// One measurements-reuse block: compress the running reconstruction feature
// twice, then climb back up through three fuse-and-expand stages, injecting
// measurement-derived features (y1, y2, y3) at matching scales. A trailing
// fusion with the block input closes the ladder. All convs are 3x3 ReLU
// except the last, which is linear.
class MrbBlock {
 public:
  // channels must be divisible by 4 (the expansion convs feed r=2 shuffles).
  MrbBlock(int index, int channels, SensingPlan plan, bool measurements_reuse = true);

  const std::string& prefix() const { return prefix_; }
  bool reuse_enabled() const { return reuse_; }

  void register_params(ParamStore& store) const;
  void init_params(ParamStore& store, Rng& rng) const;

  // f_t: C x H x W node; y: measurements node (m x H/2^k x W/2^k). Returns
  // the C x H x W output node; fills trace when non-null.
  Tape::NodeId build(Tape& tape, Tape::NodeId f_t, Tape::NodeId y, ParamStore& store,
                     MrbTrace* trace = nullptr) const;

 private:
  // Adapter ladder from raw measurements to (y1, y2, y3) at H/4, H/2, H.
  std::vector<Tape::NodeId> build_reuse(Tape& tape, Tape::NodeId y, ParamStore& store) const;

  std::string prefix_;
  int channels_;
  SensingPlan plan_;
  bool reuse_;
};

}  // namespace mrccs
