#include "meshsim/mp_schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>
#include <unordered_map>

#include "meshsim/errors.hpp"

namespace meshsim {

MPSchedule MPSchedule::filled(int R, int K, int value, int cap) {
  MPSchedule s;
  s.R = R;
  s.K = K;
  s.cap = cap;
  s.steps.assign(static_cast<std::size_t>(R * K), value);
  return s;
}

int MPSchedule::total() const { return std::accumulate(steps.begin(), steps.end(), 0); }

std::vector<ProjectedArea> project_all_areas(const MeshGraph& fine, const ElementLocator& coarse_locator) {
  const auto located = locate_nodes(fine, coarse_locator);
  std::vector<ProjectedArea> areas(coarse_locator.graph().elements.size());
  for (int i = 0; i < fine.num_nodes(); ++i) areas[located[i]].nodes.push_back(i);
  for (int e = 0; e < fine.num_edges(); ++e) {
    const auto [a, b] = fine.edges[e];
    if (located[a] == located[b]) {
      areas[located[a]].edges.push_back(2 * e);
      areas[located[a]].edges.push_back(2 * e + 1);
    }
  }
  return areas;
}

ProjectedArea project_area(int coarse_element, const MeshGraph& fine, const ElementLocator& coarse_locator) {
  if (coarse_element < 0 || coarse_element >= coarse_locator.graph().num_elements())
    throw InvalidArgument("project_area: element index out of range");
  ProjectedArea area;
  std::vector<char> inside(fine.nodes.size(), 0);
  for (int i = 0; i < fine.num_nodes(); ++i) {
    if (locate_element(fine.nodes[i], coarse_locator.graph(), coarse_locator) == coarse_element) {
      area.nodes.push_back(i);
      inside[i] = 1;
    }
  }
  for (int e = 0; e < fine.num_edges(); ++e) {
    const auto [a, b] = fine.edges[e];
    if (inside[a] && inside[b]) {
      area.edges.push_back(2 * e);
      area.edges.push_back(2 * e + 1);
    }
  }
  return area;
}

std::vector<int> component_diameters(const std::vector<int>& nodes, const std::vector<std::array<int, 2>>& edges) {
  std::vector<int> ids = nodes;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  const int n = static_cast<int>(ids.size());
  std::unordered_map<int, int> local;
  for (int i = 0; i < n; ++i) local[ids[i]] = i;
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : edges) {
    const auto ia = local.find(a), ib = local.find(b);
    if (ia == local.end() || ib == local.end())
      throw InvalidArgument("component_diameters: edge endpoint outside node set");
    if (ia->second == ib->second) continue;
    adj[ia->second].push_back(ib->second);
    adj[ib->second].push_back(ia->second);
  }

  std::vector<int> component(n, -1), dist(n, -1), diameters;
  std::vector<int> queue;
  for (int s = 0; s < n; ++s) {
    if (component[s] >= 0) continue;
    const int c = static_cast<int>(diameters.size());
    std::vector<int> members{s};
    component[s] = c;
    for (std::size_t q = 0; q < members.size(); ++q)
      for (int v : adj[members[q]])
        if (component[v] < 0) {
          component[v] = c;
          members.push_back(v);
        }
    int diameter = 0;
    for (int src : members) {
      for (int v : members) dist[v] = -1;
      dist[src] = 0;
      queue.assign(1, src);
      for (std::size_t q = 0; q < queue.size(); ++q) {
        const int u = queue[q];
        diameter = std::max(diameter, dist[u]);
        for (int v : adj[u])
          if (dist[v] < 0) {
            dist[v] = dist[u] + 1;
            queue.push_back(v);
          }
      }
    }
    diameters.push_back(diameter);
  }
  return diameters;
}

MPSchedule tune_mp_steps(const MultiLevelMesh& mesh, const std::vector<SubgraphPartition>& partitions, int cap) {
  const int R = mesh.num_levels();
  if (static_cast<int>(partitions.size()) != R) throw InvalidArgument("tune_mp_steps: need one partition per level");
  const int K = partitions.front().K;
  auto schedule = MPSchedule::filled(R, K, 0, cap);

  for (int r = 1; r <= R; ++r) {
    const auto& fine = mesh.level(r);
    const auto& part = partitions[r - 1];
    if (part.K != K || part.assignment.size() != 2 * fine.edges.size())
      throw InvalidArgument("tune_mp_steps: partition of level " + std::to_string(r) + " does not match its mesh");
    const ElementLocator locator(mesh.coarser_than(r));
    const auto areas = project_all_areas(fine, locator);

    std::vector<std::vector<std::array<int, 2>>> by_group(K);
    for (const auto& area : areas) {
      for (auto& g : by_group) g.clear();
      for (int de : area.edges) {
        const auto [a, b] = fine.edges[de / 2];
        by_group[part.assignment[de]].push_back(de % 2 == 0 ? std::array{a, b} : std::array{b, a});
      }
      for (int k = 0; k < K; ++k) {
        if (by_group[k].empty()) continue;
        for (int d : component_diameters(area.nodes, by_group[k])) schedule.at(r, k) = std::max(schedule.at(r, k), d);
      }
    }
  }
  for (int& L : schedule.steps) L = std::clamp(L, 1, cap);
  return schedule;
}

MPSchedule uniform_schedule(int R, int K, int intra_steps) {
  if (intra_steps < R * K)
    throw InvalidArgument("uniform schedule: " + std::to_string(intra_steps) + " steps cannot give every one of " +
                          std::to_string(R * K) + " groups a step");
  const int base = intra_steps / (R * K);
  auto s = MPSchedule::filled(R, K, base, std::max(kDefaultStepCap, intra_steps));
  for (int i = 0, rem = intra_steps - base * R * K; rem > 0; ++i, --rem) ++s.at(R, i % K);
  return s;
}

MPSchedule fit_schedule(const MPSchedule& tuned, int intra_steps) {
  const int n = static_cast<int>(tuned.steps.size());
  if (intra_steps < n)
    throw InvalidArgument("fit schedule: " + std::to_string(intra_steps) + " steps cannot give every one of " +
                          std::to_string(n) + " groups a step");
  const double sum = tuned.total();
  std::vector<double> ideal(n);
  auto out = tuned;
  out.cap = std::max(kDefaultStepCap, intra_steps);
  for (int i = 0; i < n; ++i) {
    ideal[i] = intra_steps * tuned.steps[i] / sum;
    out.steps[i] = std::max(1, static_cast<int>(std::floor(ideal[i])));
  }
  // Largest-remainder correction; ties resolve to the lower index.
  while (out.total() < intra_steps) {
    int pick = 0;
    for (int i = 1; i < n; ++i)
      if (ideal[i] - out.steps[i] > ideal[pick] - out.steps[pick]) pick = i;
    ++out.steps[pick];
  }
  while (out.total() > intra_steps) {
    int pick = -1;
    for (int i = 0; i < n; ++i)
      if (out.steps[i] > 1 && (pick < 0 || ideal[i] - out.steps[i] < ideal[pick] - out.steps[pick])) pick = i;
    --out.steps[pick];
  }
  return out;
}

MPSchedule elementwise_max(const std::vector<MPSchedule>& schedules) {
  if (schedules.empty()) throw InvalidArgument("elementwise_max: no schedules");
  auto out = schedules.front();
  for (const auto& s : schedules) {
    if (s.R != out.R || s.K != out.K) throw InvalidArgument("elementwise_max: shape mismatch");
    for (std::size_t i = 0; i < s.steps.size(); ++i) out.steps[i] = std::max(out.steps[i], s.steps[i]);
  }
  return out;
}

}  // namespace meshsim
