#include <cmath>
#include <filesystem>
#include <random>

#include "doctest.h"
#include "meshsim/checkpoint.hpp"
#include "meshsim/dataset.hpp"
#include "meshsim/errors.hpp"
#include "meshsim/forward.hpp"
#include "meshsim/model.hpp"
#include "meshsim/optimizer.hpp"
#include "oracles.hpp"

using namespace meshsim;
using ad::Mat;

namespace {

double silu(double z) { return z / (1.0 + std::exp(-z)); }

Mat mat(std::initializer_list<std::initializer_list<double>> rows) {
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  int i = 0;
  for (const auto& r : rows) {
    int j = 0;
    for (double x : r) m(i, j++) = x;
    ++i;
  }
  return m;
}

/// 1-unit MLP: z -> w3 * silu(w2 * silu(w1 . x + b1) + b2) + b3
Mlp scalar_mlp(Mat w1, double b1, double w2, double b2, double w3, double b3) {
  std::mt19937_64 rng(0);
  Mlp m = make_mlp(static_cast<int>(w1.rows()), 1, 1, false, rng);
  m.w1->value = std::move(w1);
  m.b1->value = mat({{b1}});
  m.w2->value = mat({{w2}});
  m.b2->value = mat({{b2}});
  m.w3->value = mat({{w3}});
  m.b3->value = mat({{b3}});
  return m;
}

double scalar_eval(const Mlp& m, std::vector<double> x) {
  double z = m.b1->value(0, 0);
  for (std::size_t i = 0; i < x.size(); ++i) z += m.w1->value(static_cast<Eigen::Index>(i), 0) * x[i];
  return m.w3->value(0, 0) * silu(m.w2->value(0, 0) * silu(z) + m.b2->value(0, 0)) + m.b3->value(0, 0);
}

EdgeSet edge_set(std::vector<int> src, std::vector<int> dst, Mat features) {
  EdgeSet e;
  e.src = std::make_shared<const ad::IndexList>(std::move(src));
  e.dst = std::make_shared<const ad::IndexList>(std::move(dst));
  e.features = ad::constant(std::move(features));
  return e;
}

Mat random_mat(int r, int c, std::mt19937_64& rng) {
  std::normal_distribution<double> N;
  Mat m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = N(rng);
  return m;
}

long long dense(long long in, long long h, long long out, bool norm) {
  return in * h + h + h * h + h + h * out + out + (norm ? 2 * out : 0);
}

double max_abs(const Mat& a, const Mat& b) { return (a - b).cwiseAbs().maxCoeff(); }

ModelConfig small_config(int R, int K, std::uint64_t seed, SamplingMode mode = SamplingMode::UpOnly) {
  ModelConfig c;
  c.R = R;
  c.K = K;
  c.latent = 8;
  c.hidden = 8;
  c.seed = seed;
  c.sampling = mode;
  return c;
}

}  // namespace

TEST_SUITE("network") {
  TEST_CASE("init is deterministic per seed and matches the closed-form count") {
    ModelConfig c;
    const auto a = init_parameters(c), b = init_parameters(c);
    const auto na = a.named_parameters(), nb = b.named_parameters();
    REQUIRE(na.size() == nb.size());
    for (std::size_t i = 0; i < na.size(); ++i) {
      CHECK(na[i].first == nb[i].first);
      CHECK(na[i].second->value == nb[i].second->value);
    }
    c.seed = 1;
    CHECK(init_parameters(c).decoder.w1->value != a.decoder.w1->value);

    const long long d = 128;
    const long long pair = dense(3 * d, d, d, true) + dense(2 * d, d, d, true);
    const long long expected = dense(4, d, d, true) + 2 * dense(3, d, d, true) + 12 * pair + 3 * dense(4 * d, d, d, true) +
                               2 * pair + dense(d, d, 1, false);
    CHECK(count_parameters(a) == expected);
    CHECK(count_parameters(ModelConfig{}) == expected);
    CHECK(expected == 2513793);

    ModelConfig flat;
    flat.R = 1;
    flat.K = 1;
    CHECK(count_parameters(init_parameters(flat)) == dense(4, d, d, true) + dense(3, d, d, true) + pair + dense(d, d, 1, false));
    CHECK(count_parameters(flat) == count_flat_mgn_parameters(1));

    ModelConfig ud;
    ud.sampling = SamplingMode::UpDown;
    CHECK(count_parameters(init_parameters(ud)) == expected + 2 * pair);
    CHECK(count_parameters(ud) == expected + 2 * pair);
  }

  TEST_CASE("weights are uniform within the fan-in bound; biases, shift zero; scale one") {
    std::mt19937_64 rng(3);
    const auto m = make_mlp(384, 128, 128, true, rng);
    const double bound = std::sqrt(3.0 / 384);
    CHECK(m.w1->value.cwiseAbs().maxCoeff() <= bound);
    CHECK(m.w1->value.cwiseAbs().maxCoeff() > 0.95 * bound);
    CHECK(std::abs(m.w1->value.mean()) < 0.01 * bound);
    CHECK(m.b1->value.isZero());
    CHECK(m.beta->value.isZero());
    CHECK((m.gamma->value.array() == 1.0).all());
    CHECK(mlp_parameter_count(384, 128, 128, true) == m.parameter_count());
    CHECK(m.flops(1) == 2 * (384 * 128 + 128 * 128 + 128 * 128));
  }

  TEST_CASE("MLP forward matches a dense evaluation, with and without gathers") {
    std::mt19937_64 rng(4);
    const auto m = make_mlp(6, 5, 4, true, rng);
    const Mat a = random_mat(3, 2, rng), b = random_mat(5, 4, rng);
    auto idx = std::make_shared<const ad::IndexList>(ad::IndexList{4, 0, 2});
    const auto y = m({{ad::constant(a), nullptr}, {ad::constant(b), idx}});
    Eigen::MatrixXd x(3, 6);
    for (int i = 0; i < 3; ++i) x.row(i) << a.row(i), b.row((*idx)[i]);
    CHECK(max_abs(y->value, oracle::mlp_rows(m, x)) < 1e-13);
  }

  TEST_CASE("mp_step on one edge matches the hand-evaluated chain") {
    EdgeNodeMlps mlps{scalar_mlp(mat({{1}, {2}, {3}}), 0.1, 0.5, 0, 2, -1), scalar_mlp(mat({{1}, {-1}}), 0.2, 1.5, 0.3, -0.7, 0.4)};
    const auto edges = edge_set({0}, {1}, mat({{0, 0, 0}}));
    ad::Var e = ad::constant(mat({{0.7}}));
    const auto v = mp_step(edges, ad::constant(mat({{0.3}, {-0.2}})), e, mlps);
    const double e1 = scalar_eval(mlps.edge, {0.7, 0.3, -0.2});
    CHECK(e->value(0, 0) == doctest::Approx(e1).epsilon(1e-14));
    CHECK(v->value(0, 0) == doctest::Approx(scalar_eval(mlps.node, {0.3, e1})).epsilon(1e-14));
    CHECK(v->value(1, 0) == doctest::Approx(scalar_eval(mlps.node, {-0.2, 0.0})).epsilon(1e-14));
  }

  TEST_CASE("mp_step with no group edges sees a zero aggregate") {
    std::mt19937_64 rng(5);
    EdgeNodeMlps mlps{make_mlp(12, 4, 4, true, rng), make_mlp(8, 4, 4, true, rng)};
    const auto edges = edge_set({}, {}, Mat(0, 3));
    ad::Var e = ad::constant(Mat(0, 4));
    const Mat v0 = random_mat(5, 4, rng);
    const auto v = mp_step(edges, ad::constant(v0), e, mlps);
    Eigen::MatrixXd in(5, 8);
    in << v0, Eigen::MatrixXd::Zero(5, 4);
    CHECK(max_abs(v->value, oracle::mlp_rows(mlps.node, in)) < 1e-13);
  }

  TEST_CASE("aggregation: K = 1 passes through; group permutation with permuted weights is equivalent") {
    std::mt19937_64 rng(6);
    const auto one = ad::constant(random_mat(4, 3, rng));
    CHECK(aggregate_subgraphs({one}, nullptr) == one);
    CHECK_THROWS_AS(aggregate_subgraphs({one, one}, nullptr), InvalidArgument);

    const auto g = make_mlp(9, 5, 3, true, rng);
    std::vector<ad::Var> groups{ad::constant(random_mat(4, 3, rng)), ad::constant(random_mat(4, 3, rng)),
                                ad::constant(random_mat(4, 3, rng))};
    const auto y = aggregate_subgraphs(groups, &g);
    CHECK(y->value.rows() == 4);
    CHECK(y->value.cols() == 3);
    const int order[3] = {2, 0, 1};
    Mlp h = g;
    h.w1 = ad::parameter(g.w1->value);
    std::vector<ad::Var> permuted;
    for (int k = 0; k < 3; ++k) {
      permuted.push_back(groups[order[k]]);
      h.w1->value.middleRows(3 * k, 3) = g.w1->value.middleRows(3 * order[k], 3);
    }
    CHECK(max_abs(aggregate_subgraphs(permuted, &h)->value, y->value) < 1e-12);
    CHECK_THROWS_AS(aggregate_subgraphs({groups[0], groups[1]}, &g), InvalidArgument);
  }

  TEST_CASE("upsample: hand arithmetic, locality, in-degree check") {
    std::mt19937_64 rng(7);
    EdgeNodeMlps mlps{make_mlp(9, 4, 3, true, rng), make_mlp(6, 4, 3, true, rng)};
    const Mat coarse = random_mat(3, 3, rng), fine = random_mat(2, 3, rng), e0 = random_mat(6, 3, rng);
    const auto links = edge_set({0, 1, 2, 2, 0, 1}, {0, 0, 0, 1, 1, 1}, Mat::Zero(6, 3));
    ad::Var e = ad::constant(e0);
    const auto out = upsample(links, ad::constant(coarse), ad::constant(fine), e, mlps);

    Eigen::MatrixXd ein(6, 9);
    for (int i = 0; i < 6; ++i) ein.row(i) << e0.row(i), coarse.row((*links.src)[i]), fine.row((*links.dst)[i]);
    const Eigen::MatrixXd e1 = oracle::mlp_rows(mlps.edge, ein);
    Eigen::MatrixXd vin(2, 6);
    vin << fine, Eigen::MatrixXd::Zero(2, 3);
    for (int i = 0; i < 6; ++i) vin.block(( *links.dst)[i], 3, 1, 3) += e1.row(i);
    CHECK(max_abs(e->value, e1) < 1e-13);
    CHECK(max_abs(out->value, oracle::mlp_rows(mlps.node, vin)) < 1e-13);

    Mat zeroed = e0;
    zeroed.bottomRows(3).setZero();
    ad::Var e2 = ad::constant(zeroed);
    const auto out2 = upsample(links, ad::constant(coarse), ad::constant(fine), e2, mlps);
    CHECK(out2->value.row(0) == out->value.row(0));
    CHECK(out2->value.row(1) != out->value.row(1));

    const auto bad = edge_set({0, 1, 2, 0, 1}, {0, 0, 0, 1, 1}, Mat::Zero(5, 3));
    ad::Var e3 = ad::constant(Mat::Zero(5, 3));
    CHECK_THROWS_AS(upsample(bad, ad::constant(coarse), ad::constant(fine), e3, mlps), StructuralError);
  }

  TEST_CASE("forward shapes, step counts and per-group independence") {
    const auto f = oracle::small_fixture(3, 2, 2);
    for (auto mode : {SamplingMode::UpOnly, SamplingMode::UpDown}) {
      const auto p = init_parameters(small_config(2, 2, 1, mode));
      const auto in = prepare_inputs(f.mesh, f.partitions);
      auto s = MPSchedule::filled(2, 2, 1);
      s.steps = {2, 1, 3, 1};
      const auto res = forward(p, in, s);
      CHECK(res.output->value.rows() == f.mesh.finest().num_nodes());
      CHECK(res.output->value.cols() == 1);
      CHECK(res.steps.intra == 7);
      CHECK(res.steps.up == 1);
      CHECK(res.steps.down == (mode == SamplingMode::UpDown ? 1 : 0));
      CHECK(res.steps.total() == counted_steps(s, mode));
      for (int r = 1; r <= 2; ++r) {
        CHECK(res.state.level_nodes[r - 1]->value.rows() == f.mesh.level(r).num_nodes());
        for (int k = 0; k < 2; ++k) CHECK(res.state.group_edges[r - 1][k]->value.rows() == in.levels[r - 1].groups[k].size());
      }
      CHECK(res.state.up_edges[0]->value.rows() == static_cast<Eigen::Index>(f.mesh.cross_edges[0].size()));

      if (mode == SamplingMode::UpOnly) {
        // Group 0 on level 1 reads only the level snapshot and its own edges.
        const auto v1 = p.node_encoder(in.levels[0].node_features);
        const auto alone = propagate_group(in.levels[0].groups[0], v1, 2, p.edge_encoder_intra, p.processor(1, 0));
        CHECK(alone->value == res.state.group_nodes[0][0]->value);
        auto other = in;
        other.levels[0].groups[1].features = ad::constant(Mat::Zero(other.levels[0].groups[1].size(), 3));
        const auto res2 = forward(p, other, s);
        CHECK(res2.state.group_nodes[0][0]->value == res.state.group_nodes[0][0]->value);
        CHECK(res2.state.group_nodes[0][1]->value != res.state.group_nodes[0][1]->value);
      }
    }
  }

  TEST_CASE("flat R = 1, K = 1 forward equals a directly coded flat MGN") {
    const auto f = oracle::small_fixture(8, 1, 1, 60);
    ModelConfig c;
    c.R = 1;
    c.K = 1;
    c.latent = c.hidden = 32;
    const auto p = init_parameters(c);
    ForceScaling s;
    s.mean[0] = 1.5;
    s.stddev[1] = 4.0;
    for (int L : {1, 3, 5}) {
      const auto res = forward(p, prepare_inputs(f.mesh, f.partitions, s), MPSchedule::filled(1, 1, L));
      const auto ref = oracle::flat_mgn(p, f.mesh.finest(), f.mesh.level_conditions(1), s, L);
      CHECK(max_abs(res.output->value, ref) < 1e-12);
    }
  }

  TEST_CASE("reverse-mode gradients match central differences") {
    for (std::uint64_t seed = 0; seed < 2; ++seed) {
      const auto f = oracle::small_fixture(100 + seed, 2, 2);
      CHECK(f.mesh.finest().num_nodes() <= 30);
      for (auto mode : {SamplingMode::UpOnly, SamplingMode::UpDown}) {
        const auto p = init_parameters(small_config(2, 2, seed, mode));
        const auto in = prepare_inputs(f.mesh, f.partitions);
        auto s = MPSchedule::filled(2, 2, 1);
        s.steps = {1, 2, 2, 1};
        std::mt19937_64 rng(seed);
        const Mat target = random_mat(f.mesh.finest().num_nodes(), 1, rng);
        auto run = [&](bool grad) {
          const auto loss = ad::mse(forward(p, in, s).output, target);
          if (grad) ad::backward(loss);
          return loss->value(0, 0);
        };
        CHECK(oracle::max_gradient_error(p.parameters(), run) < 1e-4);
      }
    }
  }

  TEST_CASE("a perfect prediction has zero loss and zero gradients") {
    const auto f = oracle::small_fixture(5, 2, 2);
    const auto p = init_parameters(small_config(2, 2, 0));
    const auto in = prepare_inputs(f.mesh, f.partitions);
    const auto s = MPSchedule::filled(2, 2, 1);
    const auto out = forward(p, in, s).output;
    const auto loss = ad::mse(out, out->value);
    ad::backward(loss);
    CHECK(loss->value(0, 0) == 0.0);
    for (const auto& leaf : p.parameters()) CHECK((leaf->grad.size() == 0 || leaf->grad.isZero()));
  }

  TEST_CASE("forward and backward are bit-identical for any worker count") {
    const auto f = oracle::small_fixture(9, 2, 4, 60);
    const auto p = init_parameters(small_config(2, 4, 3));
    const auto in = prepare_inputs(f.mesh, f.partitions);
    auto s = MPSchedule::filled(2, 4, 2);
    std::vector<Mat> outs, grads;
    for (int workers : {1, 2, 4}) {
      ad::zero_grad(p.parameters());
      const auto res = forward(p, in, s, workers);
      ad::backward(ad::mse(res.output, Mat::Ones(res.output->value.rows(), 1)));
      outs.push_back(res.output->value);
      grads.push_back(p.processor(1, 2).edge.w1->grad);
    }
    CHECK(outs[0] == outs[1]);
    CHECK(outs[0] == outs[2]);
    CHECK(grads[0] == grads[1]);
    CHECK(grads[0] == grads[2]);
  }

  TEST_CASE("forward is invariant to translating the mesh") {
    DatasetSpec spec;
    const auto sample = build_sample(spec, 17);
    auto moved = sample.mesh;
    const Vec2 shift{10, -7};
    for (auto* g : {&moved.auxiliary, &moved.levels[0], &moved.levels[1], &moved.levels[2]})
      for (auto& p : g->nodes) p = p + shift;
    for (int r = 1; r < 3; ++r)
      for (auto& e : moved.cross_edges[r - 1]) {
        e.displacement = moved.level(r + 1).nodes[e.dst] - moved.level(r).nodes[e.src];
        e.length = norm(e.displacement);
      }
    std::vector<SubgraphPartition> parts;
    for (int r = 1; r <= 3; ++r) parts.push_back(canonicalize_partition(divide_mesh_graph(moved.level(r), 4, 1)));
    CHECK(parts[2].assignment == canonicalize_partition(divide_mesh_graph(sample.mesh.level(3), 4, 1)).assignment);
    ModelConfig c;
    const auto p = init_parameters(c);
    const auto s = uniform_schedule(3, 4, 14);
    const auto a = forward(p, prepare_inputs(sample.mesh, sample.partitions), s).output->value;
    std::vector<SubgraphPartition> same = sample.partitions;
    const auto b = forward(p, prepare_inputs(moved, same), s).output->value;
    CHECK(max_abs(a, b) < 1e-9);
  }

  TEST_CASE("parameter count ignores the schedule; FLOPs grow with it") {
    const auto f = oracle::small_fixture(4, 2, 2, 60);
    ModelConfig c;
    c.R = 2;
    c.K = 2;
    const auto p = init_parameters(c);
    const long long params = count_parameters(p);
    auto s = MPSchedule::filled(2, 2, 1);
    const long long base = estimate_flops(f.mesh, f.partitions, s, p);
    for (int L : {2, 4, 8}) {
      const auto t = MPSchedule::filled(2, 2, L);
      const long long fl = estimate_flops(f.mesh, f.partitions, t, p);
      CHECK(fl > base);
      CHECK(fl > estimate_flops(f.mesh, f.partitions, MPSchedule::filled(2, 2, L / 2), p));
      CHECK(count_parameters(p) == params);
    }
    // One MLP applied to a single row.
    std::mt19937_64 rng(1);
    CHECK(make_mlp(3, 128, 128, true, rng).flops(1) == 2LL * (3 * 128 + 128 * 128 + 128 * 128));
  }

  TEST_CASE("Adam reaches the minimizer of a quadratic") {
    auto x = ad::parameter(mat({{-4.0}}));
    Adam opt({x}, AdamHyper{});
    int steps = 0;
    for (; steps < 2000; ++steps) {
      const auto loss = ad::mse(x, mat({{2.5}}));
      ad::backward(loss);
      opt.step(decayed_learning_rate(0.1, 1e-4, steps, 2000));
    }
    CHECK(std::abs(x->value(0, 0) - 2.5) < 1e-6);
    CHECK(opt.steps_taken() == 2000);
    CHECK(decayed_learning_rate(1e-3, 1e-4, 0, 100) == doctest::Approx(1e-3));
    CHECK(decayed_learning_rate(1e-3, 1e-4, 100, 100) == doctest::Approx(1e-4));
    CHECK(decayed_learning_rate(1e-3, 1e-4, 50, 100) == doctest::Approx(std::sqrt(1e-7)));
  }

  TEST_CASE("checkpoints round-trip exactly") {
    const auto p = init_parameters(small_config(3, 2, 11, SamplingMode::UpDown));
    Normalization n;
    n.force.mean[0] = 0.25;
    n.force.stddev[1] = 3.5;
    n.target_mean = 1.0 / 3.0;
    n.target_stddev = 7.0;
    const auto path = (std::filesystem::temp_directory_path() / "meshsim_ckpt.json").string();
    save_checkpoint(path, p, n, {{"epoch", 4}});
    const auto back = load_checkpoint(path);
    const auto a = p.named_parameters(), b = back.params.named_parameters();
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i].first == b[i].first);
      CHECK(a[i].second->value == b[i].second->value);
    }
    CHECK(back.params.config.sampling == SamplingMode::UpDown);
    CHECK(back.norm.target_mean == n.target_mean);
    CHECK(back.norm.force.stddev[1] == 3.5);
    CHECK(back.extra["epoch"] == 4);
    std::filesystem::remove(path);
    std::filesystem::remove(blob_path_for(path));
  }

  TEST_CASE("config validation") {
    ModelConfig c;
    c.K = 0;
    CHECK_THROWS_AS(validate_model_config(c), InvalidArgument);
    CHECK(sampling_mode_from_string(to_string(SamplingMode::UpDown)) == SamplingMode::UpDown);
    CHECK(propagation_mode_from_string("uniform") == PropagationMode::Uniform);
    CHECK_THROWS_AS(sampling_mode_from_string("sideways"), InvalidArgument);
  }
}
