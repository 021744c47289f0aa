#include "meshsim/forward.hpp"

#include <string>

#include "meshsim/errors.hpp"
#include "meshsim/parallel.hpp"

namespace meshsim {

using ad::Mat;

namespace {

EdgeSet make_edge_set(std::vector<int> src, std::vector<int> dst, Mat features) {
  EdgeSet e;
  e.src = std::make_shared<const ad::IndexList>(std::move(src));
  e.dst = std::make_shared<const ad::IndexList>(std::move(dst));
  e.features = ad::constant(std::move(features));
  return e;
}

void check_rows(const ad::Var& v, int rows, const char* what) {
  if (v->value.rows() != rows)
    throw InvalidArgument(std::string(what) + ": expected " + std::to_string(rows) + " rows, got " +
                          std::to_string(v->value.rows()));
}

}  // namespace

ModelInputs prepare_inputs(const MultiLevelMesh& mesh, const std::vector<SubgraphPartition>& partitions,
                           const ForceScaling& scaling) {
  const int R = mesh.num_levels();
  if (static_cast<int>(partitions.size()) != R) throw InvalidArgument("prepare_inputs: need one partition per level");
  ModelInputs in;
  in.R = R;
  in.K = partitions.front().K;
  for (int r = 1; r <= R; ++r) {
    const auto& g = mesh.level(r);
    const auto& c = mesh.level_conditions(r);
    const auto& part = partitions[r - 1];
    if (part.K != in.K || part.assignment.size() != 2 * g.edges.size())
      throw InvalidArgument("prepare_inputs: partition of level " + std::to_string(r) + " does not match its mesh");
    LevelInputs level;
    level.num_nodes = g.num_nodes();
    Mat nf(g.num_nodes(), kNodeInputDim);
    for (int i = 0; i < g.num_nodes(); ++i) {
      const auto f = node_input_features(c, i);
      nf(i, 0) = f[0];
      nf(i, 1) = f[1];
      nf(i, 2) = (f[2] - scaling.mean[0]) / scaling.stddev[0];
      nf(i, 3) = (f[3] - scaling.mean[1]) / scaling.stddev[1];
    }
    level.node_features = ad::constant(std::move(nf));

    const auto directed = directed_edges(g);
    std::vector<std::vector<int>> members(in.K);
    for (std::size_t de = 0; de < directed.size(); ++de) members.at(part.assignment[de]).push_back(static_cast<int>(de));
    for (int k = 0; k < in.K; ++k) {
      std::vector<int> src, dst;
      Mat ef(static_cast<Eigen::Index>(members[k].size()), kEdgeInputDim);
      for (std::size_t i = 0; i < members[k].size(); ++i) {
        const auto& e = directed[members[k][i]];
        src.push_back(e.src);
        dst.push_back(e.dst);
        const auto f = edge_input_features(e);
        for (int j = 0; j < kEdgeInputDim; ++j) ef(static_cast<Eigen::Index>(i), j) = f[j];
      }
      level.groups.push_back(make_edge_set(std::move(src), std::move(dst), std::move(ef)));
    }
    in.levels.push_back(std::move(level));
  }
  for (int r = 1; r < R; ++r) {
    const auto& links = mesh.cross_edges[r - 1];
    std::vector<int> src, dst;
    Mat up(static_cast<Eigen::Index>(links.size()), kEdgeInputDim);
    for (std::size_t i = 0; i < links.size(); ++i) {
      src.push_back(links[i].src);
      dst.push_back(links[i].dst);
      up.row(static_cast<Eigen::Index>(i)) << links[i].displacement.x, links[i].displacement.y, links[i].length;
    }
    Mat down = up;
    down.leftCols(2) *= -1.0;
    in.down.push_back(make_edge_set(dst, src, std::move(down)));
    in.up.push_back(make_edge_set(std::move(src), std::move(dst), std::move(up)));
  }
  return in;
}

ad::Var mp_step(const EdgeSet& edges, const ad::Var& nodes, ad::Var& edge_embeddings, const EdgeNodeMlps& mlps) {
  check_rows(edge_embeddings, edges.size(), "mp_step edge embeddings");
  edge_embeddings = mlps.edge({{edge_embeddings, nullptr}, {nodes, edges.src}, {nodes, edges.dst}});
  const auto sum = ad::scatter_add_rows(edge_embeddings, edges.src, static_cast<int>(nodes->value.rows()));
  return mlps.node({{nodes, nullptr}, {sum, nullptr}});
}

ad::Var propagate_group(const EdgeSet& edges, const ad::Var& level_nodes, int steps, const Mlp& edge_encoder,
                        const EdgeNodeMlps& mlps) {
  ad::Var e = edge_encoder(edges.features);
  ad::Var v = level_nodes;
  for (int l = 0; l < steps; ++l) v = mp_step(edges, v, e, mlps);
  return v;
}

ad::Var aggregate_subgraphs(const std::vector<ad::Var>& group_nodes, const Mlp* aggregator) {
  if (group_nodes.empty()) throw InvalidArgument("aggregate_subgraphs: no groups");
  if (!aggregator) {
    if (group_nodes.size() != 1) throw InvalidArgument("aggregate_subgraphs: several groups need an aggregator");
    return group_nodes.front();
  }
  const int K = static_cast<int>(group_nodes.size());
  if (aggregator->in % K != 0 || aggregator->in / K != group_nodes.front()->value.cols())
    throw InvalidArgument("aggregate_subgraphs: aggregator expects " + std::to_string(aggregator->in) +
                          " inputs, got " + std::to_string(K) + " groups");
  std::vector<MlpInput> blocks;
  for (const auto& g : group_nodes) {
    check_rows(g, static_cast<int>(group_nodes.front()->value.rows()), "aggregate_subgraphs group");
    blocks.push_back({g, nullptr});
  }
  return (*aggregator)(blocks);
}

namespace {

ad::Var cross_pass(const EdgeSet& links, const ad::Var& sender, const ad::Var& receiver, ad::Var& link_embeddings,
                   const EdgeNodeMlps& mlps) {
  check_rows(link_embeddings, links.size(), "cross-level link embeddings");
  link_embeddings = mlps.edge({{link_embeddings, nullptr}, {sender, links.src}, {receiver, links.dst}});
  const auto sum = ad::scatter_add_rows(link_embeddings, links.dst, static_cast<int>(receiver->value.rows()));
  return mlps.node({{receiver, nullptr}, {sum, nullptr}});
}

}  // namespace

ad::Var upsample(const EdgeSet& links, const ad::Var& coarse, const ad::Var& fine, ad::Var& link_embeddings,
                 const EdgeNodeMlps& mlps) {
  std::vector<int> indegree(static_cast<std::size_t>(fine->value.rows()), 0);
  for (int d : *links.dst) ++indegree.at(d);
  for (std::size_t i = 0; i < indegree.size(); ++i)
    if (indegree[i] != 3)
      throw StructuralError("upsample: fine node " + std::to_string(i) + " has " + std::to_string(indegree[i]) +
                            " incoming links, expected 3");
  return cross_pass(links, coarse, fine, link_embeddings, mlps);
}

ad::Var downsample(const EdgeSet& links, const ad::Var& fine, const ad::Var& coarse, ad::Var& link_embeddings,
                   const EdgeNodeMlps& mlps) {
  return cross_pass(links, fine, coarse, link_embeddings, mlps);
}

long long counted_steps(const MPSchedule& schedule, SamplingMode sampling) {
  const long long passes = schedule.R - 1;
  return schedule.total() + passes + (sampling == SamplingMode::UpDown ? passes : 0);
}

ForwardResult forward(const ModelParameters& params, const ModelInputs& inputs, const MPSchedule& schedule,
                      int workers) {
  const auto& cfg = params.config;
  const int R = cfg.R, K = cfg.K;
  if (inputs.R != R || inputs.K != K || schedule.R != R || schedule.K != K)
    throw InvalidArgument("forward: model, inputs and schedule disagree on (R, K)");
  for (int L : schedule.steps)
    if (L < 0) throw InvalidArgument("forward: negative step count");

  ForwardResult res;
  auto& st = res.state;
  st.level_nodes.resize(R);
  st.group_edges.assign(R, std::vector<ad::Var>(K));
  st.group_nodes.assign(R, std::vector<ad::Var>(K));
  std::vector<ad::Var> v(R);
  for (int r = 0; r < R; ++r) v[r] = params.node_encoder(inputs.levels[r].node_features);

  if (cfg.sampling == SamplingMode::UpDown) {
    st.down_edges.resize(R > 1 ? R - 1 : 0);
    for (int r = R; r >= 2; --r) {
      ad::Var e = params.edge_encoder_cross(inputs.down[r - 2].features);
      v[r - 2] = downsample(inputs.down[r - 2], v[r - 1], v[r - 2], e, params.downsamplers[r - 2]);
      st.down_edges[r - 2] = e;
      ++res.steps.down;
    }
  }

  st.up_edges.resize(R > 1 ? R - 1 : 0);
  for (int r = 1; r <= R; ++r) {
    const auto& level = inputs.levels[r - 1];
    const ad::Var snapshot = v[r - 1];
    parallel_for(
        K,
        [&](int k) {
          const auto& edges = level.groups[k];
          ad::Var e = params.edge_encoder_intra(edges.features);
          ad::Var x = snapshot;
          for (int l = 0; l < schedule.at(r, k); ++l) x = mp_step(edges, x, e, params.processor(r, k));
          st.group_nodes[r - 1][k] = x;
          st.group_edges[r - 1][k] = e;
        },
        workers);
    for (int k = 0; k < K; ++k) res.steps.intra += schedule.at(r, k);
    v[r - 1] = aggregate_subgraphs(st.group_nodes[r - 1], params.aggregators.empty() ? nullptr
                                                                                    : &params.aggregators[r - 1]);
    if (r < R) {
      ad::Var e = params.edge_encoder_cross(inputs.up[r - 1].features);
      v[r] = upsample(inputs.up[r - 1], v[r - 1], v[r], e, params.upsamplers[r - 1]);
      st.up_edges[r - 1] = e;
      ++res.steps.up;
    }
  }
  st.level_nodes = v;
  res.output = params.decoder(v[R - 1]);
  return res;
}

long long estimate_flops(const ModelInputs& in, const MPSchedule& schedule, const ModelParameters& p) {
  const auto& cfg = p.config;
  const long long d = cfg.latent;
  long long f = 0;
  for (int r = 1; r <= cfg.R; ++r) {
    const auto& level = in.levels[r - 1];
    const long long n = level.num_nodes;
    f += p.node_encoder.flops(n);
    for (int k = 0; k < cfg.K; ++k) {
      const long long m = level.groups[k].size();
      const long long L = schedule.at(r, k);
      f += p.edge_encoder_intra.flops(m);
      f += L * (p.processor(r, k).edge.flops(m) + p.processor(r, k).node.flops(n) + m * d);
    }
    if (!p.aggregators.empty()) f += p.aggregators[r - 1].flops(n);
    if (r < cfg.R) {
      const long long m = in.up[r - 1].size();
      f += p.edge_encoder_cross.flops(m) + p.upsamplers[r - 1].edge.flops(m) +
           p.upsamplers[r - 1].node.flops(in.levels[r].num_nodes) + m * d;
    }
    if (r >= 2 && cfg.sampling == SamplingMode::UpDown) {
      const long long m = in.down[r - 2].size();
      f += p.edge_encoder_cross.flops(m) + p.downsamplers[r - 2].edge.flops(m) +
           p.downsamplers[r - 2].node.flops(in.levels[r - 2].num_nodes) + m * d;
    }
  }
  f += p.decoder.flops(in.levels[cfg.R - 1].num_nodes);
  return f;
}

long long estimate_flops(const MultiLevelMesh& mesh, const std::vector<SubgraphPartition>& partitions,
                         const MPSchedule& schedule, const ModelParameters& params) {
  return estimate_flops(prepare_inputs(mesh, partitions), schedule, params);
}

}  // namespace meshsim
