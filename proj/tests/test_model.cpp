#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>

#include "poselab/ad/grad_check.hpp"
#include "poselab/imaging/pipelines.hpp"
#include "poselab/model/checkpoint.hpp"
#include "poselab/model/network.hpp"
#include "poselab/synth/scene.hpp"
#include "poselab/synth/trajectory.hpp"
#include "poselab/util/rng.hpp"

using namespace poselab;
using ad::Tensor;
using model::BackboneConfig;
using model::HeadConfig;
using model::HeadKind;
using model::NetworkConfig;

namespace {

Tensor random_tensor(ad::Shape shape, rng::Generator& gen, bool requires_grad,
                     double lo = -1.0, double hi = 1.0) {
    std::vector<double> v(ad::shape_numel(shape));
    for (auto& x : v) x = gen.uniform(lo, hi);
    return Tensor(std::move(shape), std::move(v), requires_grad);
}

// two conv stages on an 8x8 input; small enough for finite differences
BackboneConfig tiny_backbone() {
    BackboneConfig c;
    c.stages = {{4, 3, 1, true}, {6, 3, 1, true}};
    c.input_h = 8;
    c.input_w = 8;
    return c;
}

void zero_params(model::ParamRegistry& reg) {
    for (const auto& [name, t] : reg.entries())
        std::fill(const_cast<Tensor&>(t).data().begin(),
                  const_cast<Tensor&>(t).data().end(), 0.0);
}

}  // namespace

TEST_CASE("backbone forward determinism and shape contract") {
    NetworkConfig cfg{tiny_backbone(), HeadConfig{}};
    model::PoseRegressor net(cfg, 7);
    rng::Generator gen(1);
    Tensor img = random_tensor({3, 8, 8}, gen, false);

    auto f1 = net.features(img);
    auto f2 = net.features(img);
    CHECK(f1.data() == f2.data());
    CHECK(f1.shape() == ad::Shape{cfg.backbone.feature_dim()});
    CHECK(cfg.backbone.feature_dim() == 6 * 2 * 2);

    Tensor bad = random_tensor({3, 9, 8}, gen, false);
    CHECK_THROWS_AS(net.features(bad), std::invalid_argument);
}

TEST_CASE("preset backbones have the documented feature dimensions") {
    CHECK(BackboneConfig::standard().feature_dim() == 64 * 14 * 14);
    CHECK(BackboneConfig::compact().feature_dim() == 16 * 7 * 7);

    auto with_mixed = BackboneConfig::standard();
    with_mixed.inception_block = true;
    CHECK(with_mixed.feature_dim() ==
          with_mixed.inception.out_channels() * 14 * 14);
}

TEST_CASE("backbone gradients match finite differences") {
    model::ParamRegistry reg(11);
    model::Backbone bb(tiny_backbone(), reg);
    rng::Generator gen(2);
    Tensor img = random_tensor({3, 8, 8}, gen, false, 0.0, 1.0);

    auto params = reg.tensors();
    double err = ad::grad_check(
        [&] { return ad::l2norm(bb.forward(img)); }, params, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("inception block geometry") {
    model::InceptionConfig ic;  // 8 + 8 + 4 + 4 = 24 channels
    model::ParamRegistry reg(3);
    model::InceptionBlock block(ic, 5, reg, "mixed");

    rng::Generator gen(4);
    Tensor in = random_tensor({5, 28, 28}, gen, false);
    auto out = block.forward(in);
    CHECK(out.shape() == ad::Shape{ic.out_channels(), 28, 28});

    Tensor small = random_tensor({5, 4, 4}, gen, false);
    CHECK_THROWS_AS(block.forward(small), std::invalid_argument);
}

TEST_CASE("inception block gradients match finite differences") {
    model::InceptionConfig ic{2, 2, 2, 2, 2, 2};
    model::ParamRegistry reg(5);
    model::InceptionBlock block(ic, 2, reg, "mixed");
    rng::Generator gen(6);
    Tensor in = random_tensor({2, 6, 6}, gen, false);

    auto params = reg.tensors();
    double err = ad::grad_check(
        [&] { return ad::l2norm(block.forward(in)); }, params, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("fc head output contract") {
    model::ParamRegistry reg(8);
    HeadConfig hc;
    hc.fc_hidden = 16;
    model::FcHead head(10, hc, reg);

    rng::Generator gen(9);
    Tensor f = random_tensor({10}, gen, false);
    auto pred = head.forward(f);
    CHECK(pred.position.shape() == ad::Shape{3});
    CHECK(pred.orientation.shape() == ad::Shape{4});

    zero_params(reg);
    auto zero_pred = head.forward(f);
    for (double v : zero_pred.position.data()) CHECK(v == 0.0);
    for (double v : zero_pred.orientation.data()) CHECK(v == 0.0);
}

TEST_CASE("fc head gradients match finite differences") {
    model::ParamRegistry reg(10);
    HeadConfig hc;
    hc.fc_hidden = 12;
    model::FcHead head(6, hc, reg);
    rng::Generator gen(11);
    Tensor f = random_tensor({6}, gen, false);

    auto params = reg.tensors();
    double err = ad::grad_check(
        [&] {
            auto p = head.forward(f);
            return ad::add(ad::l2norm(p.position), ad::l2norm(p.orientation));
        },
        params, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("fc head parameter count formula") {
    model::ParamRegistry reg(12);
    HeadConfig hc;  // fc_hidden = 2048
    model::FcHead head(100, hc, reg);
    CHECK(reg.scalar_count() == model::FcHead::parameter_count(100, 2048));
    CHECK(model::FcHead::parameter_count(100, 2048) ==
          100u * 2048 + 2048 + 2048u * 3 + 3 + 2048u * 4 + 4);
}

TEST_CASE("lstm cell algebra") {
    const int units = 8;
    model::ParamRegistry reg(13);
    model::LstmCell cell(5, units, reg, "cell");

    rng::Generator gen(14);
    Tensor x = random_tensor({5}, gen, false);

    SECTION("zero parameters, zero state give zero hidden state") {
        zero_params(reg);
        auto [h, c] = cell.zero_state();
        auto [h2, c2] = cell.step(x, h, c);
        for (double v : h2.data()) CHECK(v == 0.0);  // o=0.5, tanh(0)=0
        for (double v : c2.data()) CHECK(v == 0.0);
    }

    SECTION("saturated forget gate preserves the cell state") {
        // f ~ 1 and i ~ 0 via large bias blocks, weights zeroed
        zero_params(reg);
        auto& bias = const_cast<Tensor&>(*reg.find("cell.b")).data();
        for (int u = 0; u < units; ++u) {
            bias[static_cast<std::size_t>(u)] = -40.0;          // input gate
            bias[static_cast<std::size_t>(units + u)] = 40.0;   // forget gate
        }
        auto [h0, c0] = cell.zero_state();
        Tensor c_prev = random_tensor({units}, gen, false);
        auto [h2, c2] = cell.step(x, h0, c_prev);
        for (std::size_t i = 0; i < c2.numel(); ++i)
            CHECK(c2.data()[i] == Catch::Approx(c_prev.data()[i]).margin(1e-12));
    }
}

TEST_CASE("lstm gradients through chained steps match finite differences") {
    model::ParamRegistry reg(15);
    model::LstmCell cell(4, 6, reg, "cell");
    rng::Generator gen(16);
    std::vector<Tensor> xs{random_tensor({4}, gen, false),
                           random_tensor({4}, gen, false),
                           random_tensor({4}, gen, false)};

    auto params = reg.tensors();
    double err = ad::grad_check(
        [&] { return ad::l2norm(cell.run(xs)); }, params, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("lstm head with length 1 is one cell step plus the output layers") {
    const int fdim = 5, units = 6;
    model::ParamRegistry reg(17);
    HeadConfig hc;
    hc.kind = HeadKind::lstm;
    hc.lstm_units = units;
    hc.sequence_length = 1;
    model::LstmHead head(fdim, hc, reg);

    rng::Generator gen(18);
    Tensor f = random_tensor({fdim}, gen, false);
    auto pred = head.forward(std::vector<Tensor>{f});

    // manual: one step of each cell from zero state, then the linear layers
    auto manual_cell = [&](const std::string& prefix) {
        const auto& w = *reg.find(prefix + ".w");
        const auto& b = *reg.find(prefix + ".b");
        auto z = ad::add(ad::matmul(w, ad::concat({f, Tensor::zeros({units})}, 0)), b);
        auto i = ad::sigmoid(ad::slice(z, 0, 0, units));
        auto g = ad::tanh(ad::slice(z, 0, 2 * units, units));
        return ad::mul(ad::sigmoid(ad::slice(z, 0, 3 * units, units)),
                       ad::tanh(ad::mul(i, g)));
    };
    auto h_pos = manual_cell("head.lstm.pos0");
    auto h_ori = manual_cell("head.lstm.ori0");
    auto x_manual =
        ad::add(ad::matmul(*reg.find("head.lstm.pos_out.w"), h_pos),
                *reg.find("head.lstm.pos_out.b"));
    auto q_manual =
        ad::add(ad::matmul(*reg.find("head.lstm.ori_out.w"), h_ori),
                *reg.find("head.lstm.ori_out.b"));

    for (int i = 0; i < 3; ++i)
        CHECK(pred.position.data()[static_cast<std::size_t>(i)] ==
              Catch::Approx(x_manual.data()[static_cast<std::size_t>(i)]).margin(1e-12));
    for (int i = 0; i < 4; ++i)
        CHECK(pred.orientation.data()[static_cast<std::size_t>(i)] ==
              Catch::Approx(q_manual.data()[static_cast<std::size_t>(i)]).margin(1e-12));
}

TEST_CASE("lstm head is sensitive to the order of earlier frames") {
    const int fdim = 4;
    model::ParamRegistry reg(19);
    HeadConfig hc;
    hc.kind = HeadKind::lstm;
    hc.lstm_units = 8;
    hc.sequence_length = 4;
    model::LstmHead head(fdim, hc, reg);

    rng::Generator gen(20);
    std::vector<Tensor> seq;
    for (int i = 0; i < 4; ++i) seq.push_back(random_tensor({fdim}, gen, false));
    auto base = head.forward(seq);

    std::swap(seq[0], seq[2]);  // keep the last frame fixed
    auto permuted = head.forward(seq);
    double diff = 0.0;
    for (int i = 0; i < 3; ++i)
        diff += std::abs(base.position.data()[static_cast<std::size_t>(i)] -
                         permuted.position.data()[static_cast<std::size_t>(i)]);
    CHECK(diff > 1e-6);

    std::vector<Tensor> wrong_len(seq.begin(), seq.begin() + 2);
    CHECK_THROWS_AS(head.forward(wrong_len), std::invalid_argument);
}

TEST_CASE("lstm head gradients at length 5 match finite differences") {
    const int fdim = 3;
    model::ParamRegistry reg(21);
    HeadConfig hc;
    hc.kind = HeadKind::lstm;
    hc.lstm_units = 4;
    hc.sequence_length = 5;
    model::LstmHead head(fdim, hc, reg);

    rng::Generator gen(22);
    std::vector<Tensor> seq;
    for (int i = 0; i < 5; ++i) seq.push_back(random_tensor({fdim}, gen, false));

    auto params = reg.tensors();
    double err = ad::grad_check(
        [&] {
            auto p = head.forward(seq);
            return ad::add(ad::l2norm(p.position), ad::l2norm(p.orientation));
        },
        params, 1e-5);
    CHECK(err < 1e-4);
}

TEST_CASE("stacked and shared lstm variants run") {
    const int fdim = 4;
    rng::Generator gen(23);
    std::vector<Tensor> seq{random_tensor({fdim}, gen, false),
                            random_tensor({fdim}, gen, false)};

    HeadConfig stacked;
    stacked.kind = HeadKind::lstm;
    stacked.lstm_units = 5;
    stacked.sequence_length = 2;
    stacked.lstm_layers = 2;
    model::ParamRegistry reg1(24);
    model::LstmHead head1(fdim, stacked, reg1);
    auto p1 = head1.forward(seq);
    CHECK(p1.position.shape() == ad::Shape{3});

    HeadConfig shared = stacked;
    shared.lstm_layers = 1;
    shared.lstm_shared = true;
    model::ParamRegistry reg2(25);
    model::LstmHead head2(fdim, shared, reg2);
    auto p2 = head2.forward(seq);
    CHECK(p2.orientation.shape() == ad::Shape{4});
}

TEST_CASE("feature similarity") {
    Tensor a({3}, {1.0, 2.0, 3.0});
    CHECK(model::feature_similarity(a, a) == Catch::Approx(1.0));

    Tensor e1({2}, {1.0, 0.0});
    Tensor e2({2}, {0.0, 5.0});
    CHECK(model::feature_similarity(e1, e2) == Catch::Approx(0.0).margin(1e-15));

    Tensor zero({2}, {0.0, 0.0});
    CHECK_THROWS_AS(model::feature_similarity(e1, zero), std::invalid_argument);
}

TEST_CASE("consecutive synthetic frames give highly similar features") {
    synth::SceneConfig scene;
    scene.image_h = 96;
    scene.image_w = 96;
    scene.focal_px = 96.0;
    synth::TrajectoryConfig traj;
    traj.length = 3;
    traj.step_size = 0.01;
    traj.drift_deg_per_frame = 0.1;

    auto poses = synth::trajectory_poses(scene, traj, 33, false);
    NetworkConfig cfg;
    cfg.backbone = BackboneConfig::compact();
    cfg.backbone.input_h = 224;
    cfg.backbone.input_w = 224;
    model::PoseRegressor net(cfg, 42);

    auto to_input = [&](const geometry::Pose& p) {
        return model::image_to_input(
            imaging::whole_fov_resize(synth::render(p, scene)));
    };
    auto f0 = net.features(to_input(poses[0]));
    auto f1 = net.features(to_input(poses[1]));
    const double sim = model::feature_similarity(f0, f1);
    INFO("consecutive-frame feature similarity = " << sim);
    CHECK(sim > 0.9);
}

TEST_CASE("predict dispatches by head kind") {
    NetworkConfig cfg{tiny_backbone(), HeadConfig{}};
    cfg.head.fc_hidden = 8;
    model::PoseRegressor fc_net(cfg, 50);
    rng::Generator gen(26);
    Tensor img = random_tensor({3, 8, 8}, gen, false);
    auto pred = fc_net.predict_one(img);
    CHECK(pred.position.shape() == ad::Shape{3});

    NetworkConfig lcfg{tiny_backbone(), HeadConfig{}};
    lcfg.head.kind = HeadKind::lstm;
    lcfg.head.lstm_units = 6;
    lcfg.head.sequence_length = 2;
    model::PoseRegressor lstm_net(lcfg, 51);
    std::vector<Tensor> seq{img, img};
    auto lpred = lstm_net.predict(seq);
    CHECK(lpred.orientation.shape() == ad::Shape{4});

    CHECK_THROWS_AS(lstm_net.predict_one(img), std::invalid_argument);

    NetworkConfig bad{tiny_backbone(), HeadConfig{}};
    bad.head.sequence_length = 3;  // FC heads are frame-wise
    CHECK_THROWS_AS(model::PoseRegressor(bad, 52), std::invalid_argument);
}

TEST_CASE("checkpoints round trip bit-exactly") {
    namespace fs = std::filesystem;
    const auto dir = fs::temp_directory_path() / "poselab_ckpt";
    fs::create_directories(dir);
    const auto path = (dir / "model.ckpt").string();

    NetworkConfig cfg{tiny_backbone(), HeadConfig{}};
    cfg.head.fc_hidden = 8;
    model::PoseRegressor net(cfg, 60);
    model::save_checkpoint(path, {{"head", "fc"}, {"note", "unit test"}},
                           net.params());

    auto ckpt = model::load_checkpoint(path);
    REQUIRE(ckpt.params.size() == net.params().entries().size());
    CHECK(*ckpt.find_config("head") == "fc");

    // restore into a fresh model with different init: identical predictions
    model::PoseRegressor other(cfg, 61);
    model::restore_params(other.params(), ckpt);
    for (std::size_t i = 0; i < ckpt.params.size(); ++i)
        CHECK(other.params().entries()[i].second.data() ==
              net.params().entries()[i].second.data());

    rng::Generator gen(27);
    Tensor img = random_tensor({3, 8, 8}, gen, false);
    CHECK(other.predict_one(img).position.data() ==
          net.predict_one(img).position.data());

    // shape mismatch is rejected
    NetworkConfig bigger{tiny_backbone(), HeadConfig{}};
    bigger.head.fc_hidden = 12;
    model::PoseRegressor wrong(bigger, 62);
    CHECK_THROWS_AS(model::restore_params(wrong.params(), ckpt), DataError);

    fs::remove_all(dir);
}
