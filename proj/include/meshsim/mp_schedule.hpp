#pragma once

#include <array>
#include <vector>

#include "meshsim/hierarchy.hpp"
#include "meshsim/locator.hpp"
#include "meshsim/partition.hpp"

namespace meshsim {

inline constexpr int kDefaultStepCap = 16;

/// MP step counts L^{r,k}, stored level-major: steps[(r - 1) * K + k].
struct MPSchedule {
  int R = 0;
  int K = 0;
  int cap = kDefaultStepCap;
  std::vector<int> steps;

  static MPSchedule filled(int R, int K, int value, int cap = kDefaultStepCap);
  int& at(int r, int k) { return steps.at(static_cast<std::size_t>((r - 1) * K + k)); }
  int at(int r, int k) const { return steps.at(static_cast<std::size_t>((r - 1) * K + k)); }
  int total() const;
  friend bool operator==(const MPSchedule&, const MPSchedule&) = default;
};

/// Fine nodes located in one coarse element plus the directed fine edges
/// (indices into directed_edges(fine)) joining two of them.
struct ProjectedArea {
  std::vector<int> nodes;
  std::vector<int> edges;
};

ProjectedArea project_area(int coarse_element, const MeshGraph& fine, const ElementLocator& coarse_locator);

/// Areas of every coarse element at once (index = coarse element).
std::vector<ProjectedArea> project_all_areas(const MeshGraph& fine, const ElementLocator& coarse_locator);

/// Hop-count diameter of every connected component of the undirected graph
/// on `nodes` with `edges` (pairs of node ids drawn from `nodes`). Components
/// are reported in order of their smallest node id; isolated nodes give 0.
std::vector<int> component_diameters(const std::vector<int>& nodes, const std::vector<std::array<int, 2>>& edges);

/// L^{r,k}: the largest component diameter of group k inside any projected
/// area of level r (the auxiliary level is the coarser mesh for r = 1),
/// clamped to [1, cap].
MPSchedule tune_mp_steps(const MultiLevelMesh& mesh, const std::vector<SubgraphPartition>& partitions,
                         int cap = kDefaultStepCap);

/// Equal split of `intra_steps` over all (r, k); the remainder goes to the
/// finest level, one step per group in group order.
MPSchedule uniform_schedule(int R, int K, int intra_steps);

/// Rescales a tuned schedule to sum to exactly `intra_steps`, keeping every
/// entry >= 1 and proportions as close as integer rounding allows.
MPSchedule fit_schedule(const MPSchedule& tuned, int intra_steps);

MPSchedule elementwise_max(const std::vector<MPSchedule>& schedules);

}  // namespace meshsim
