#pragma once

#include <vector>

#include "meshsim/hierarchy.hpp"
#include "meshsim/model.hpp"
#include "meshsim/mp_schedule.hpp"
#include "meshsim/partition.hpp"

namespace meshsim {

/// Directed edges of one group (ascending directed-edge index) or one set of
/// cross-level links, with raw [dx, dy, len] features.
struct EdgeSet {
  ad::IndexPtr src;
  ad::IndexPtr dst;
  ad::Var features;
  int size() const { return static_cast<int>(src->size()); }
};

struct LevelInputs {
  int num_nodes = 0;
  ad::Var node_features;       // num_nodes x 4
  std::vector<EdgeSet> groups;  // K entries
};

/// Everything the network reads from one sample, as constant leaves.
struct ModelInputs {
  int R = 0;
  int K = 0;
  std::vector<LevelInputs> levels;  // [r - 1]
  std::vector<EdgeSet> up;          // [r - 1]: level r -> r + 1
  std::vector<EdgeSet> down;        // [r - 2]: level r -> r - 1 (reversed up links)
};

/// z-score applied to the two force components of the node features.
struct ForceScaling {
  double mean[2] = {0.0, 0.0};
  double stddev[2] = {1.0, 1.0};
};

ModelInputs prepare_inputs(const MultiLevelMesh& mesh, const std::vector<SubgraphPartition>& partitions,
                           const ForceScaling& scaling = {});

/// One message-passing step over a group: e <- f_E(e, v_src, v_dst), then
/// v_i <- f_V(v_i, sum of e over edges leaving i). Returns the new node
/// embeddings; `edge_embeddings` is replaced.
ad::Var mp_step(const EdgeSet& edges, const ad::Var& nodes, ad::Var& edge_embeddings, const EdgeNodeMlps& mlps);

/// Encodes the group's edges and runs `steps` mp_steps from `level_nodes`.
ad::Var propagate_group(const EdgeSet& edges, const ad::Var& level_nodes, int steps, const Mlp& edge_encoder,
                        const EdgeNodeMlps& mlps);

/// g_V over the K group outputs concatenated in group order; with no
/// aggregator (K = 1) the single group output passes through.
ad::Var aggregate_subgraphs(const std::vector<ad::Var>& group_nodes, const Mlp* aggregator);

/// Cross-level pass along `links` (src in the sending level, dst in the
/// receiving level). Returns the updated receiving-level embeddings;
/// `link_embeddings` is replaced. For up links every receiving node must
/// have exactly three incoming links.
ad::Var upsample(const EdgeSet& links, const ad::Var& coarse, const ad::Var& fine, ad::Var& link_embeddings,
                 const EdgeNodeMlps& mlps);
ad::Var downsample(const EdgeSet& links, const ad::Var& fine, const ad::Var& coarse, ad::Var& link_embeddings,
                   const EdgeNodeMlps& mlps);

struct StepCounter {
  long long intra = 0;
  long long up = 0;
  long long down = 0;
  long long total() const { return intra + up + down; }
};

struct ForwardState {
  std::vector<ad::Var> level_nodes;                  // final v^r per level
  std::vector<std::vector<ad::Var>> group_edges;     // [r - 1][k] final e^{r,k}
  std::vector<std::vector<ad::Var>> group_nodes;     // [r - 1][k] v^{r,k,L}
  std::vector<ad::Var> up_edges;                     // [r - 1]
  std::vector<ad::Var> down_edges;                   // [r - 2]
};

struct ForwardResult {
  ad::Var output;  // |V^R| x output_dim
  StepCounter steps;
  ForwardState state;
};

/// Encode all levels; in up_down mode first run down passes R -> 1; then for
/// r = 1..R propagate every group (groups of a level may run concurrently),
/// aggregate, and up-sample into level r + 1; decode level R.
ForwardResult forward(const ModelParameters& params, const ModelInputs& inputs, const MPSchedule& schedule,
                      int workers = 1);

/// Total MP steps a forward with this schedule executes (intra steps plus
/// one per up or down pass).
long long counted_steps(const MPSchedule& schedule, SamplingMode sampling);

long long estimate_flops(const ModelInputs& inputs, const MPSchedule& schedule, const ModelParameters& params);
long long estimate_flops(const MultiLevelMesh& mesh, const std::vector<SubgraphPartition>& partitions,
                         const MPSchedule& schedule, const ModelParameters& params);

}  // namespace meshsim
