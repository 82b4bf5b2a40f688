#include <doctest.h>

#include <cmath>
#include <cstring>

#include "vclean/errors.hpp"
#include "vclean/gradcheck.hpp"
#include "vclean/matrix.hpp"
#include "vclean/rng.hpp"
#include "vclean/transformer.hpp"

using namespace vclean;

namespace {

ModelConfig tiny_config(PositionalEncodingKind pe = PositionalEncodingKind::Sinusoidal) {
    ModelConfig config;
    config.seq_len = 4;
    config.d_model = 8;
    config.n_heads = 2;
    config.d_ff = 8;
    config.positional = pe;
    return config;
}

std::vector<double> random_window(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> w(n);
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    return w;
}

bool params_equal(const TransformerParams& a, const TransformerParams& b) {
    const auto ra = tensor_refs(a);
    const auto rb = tensor_refs(b);
    if (ra.size() != rb.size()) return false;
    for (std::size_t t = 0; t < ra.size(); ++t) {
        if (ra[t].size() != rb[t].size()) return false;
        if (std::memcmp(ra[t].data, rb[t].data, ra[t].size() * sizeof(double)) != 0) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("config validation rejects inconsistent shapes") {
    ModelConfig config = tiny_config();
    config.n_heads = 3;
    CHECK_THROWS_AS(config.validate(), DataError);
    config = tiny_config();
    config.ln_eps = 0.0;
    CHECK_THROWS_AS(config.validate(), DataError);
}

TEST_CASE("init_params is deterministic per seed") {
    const ModelConfig config = tiny_config();
    CHECK(params_equal(init_params(config, 5), init_params(config, 5)));
    CHECK(!params_equal(init_params(config, 5), init_params(config, 6)));
}

TEST_CASE("init_params zeroes biases and sets unit layer-norm gains") {
    const TransformerParams p = init_params(tiny_config(), 9);
    for (double v : p.b_embed) CHECK(v == 0.0);
    for (double v : p.b_head) CHECK(v == 0.0);
    CHECK(p.b_out == 0.0);
    for (const auto& b : p.blocks) {
        for (double v : b.b_ff1) CHECK(v == 0.0);
        for (double v : b.b_ff2) CHECK(v == 0.0);
        for (double v : b.ln1_gamma) CHECK(v == 1.0);
        for (double v : b.ln1_beta) CHECK(v == 0.0);
        for (double v : b.ln2_gamma) CHECK(v == 1.0);
        for (double v : b.ln2_beta) CHECK(v == 0.0);
    }
}

TEST_CASE("init_params keeps every weight inside its Glorot bound") {
    TransformerParams p = init_params(tiny_config(), 10);
    for (const auto& ref : tensor_refs(p)) {
        if (ref.name.find("w") == std::string::npos) continue;
        const double bound =
            std::sqrt(6.0 / (static_cast<double>(ref.rows) + static_cast<double>(ref.cols)));
        for (std::size_t i = 0; i < ref.size(); ++i) {
            CHECK(std::abs(ref.data[i]) <= bound);
        }
    }
}

TEST_CASE("positional encoding at t=0 alternates 0 and 1") {
    const Matrix pe = positional_encoding(4, 8);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(pe(0, 2 * i) == 0.0);
        CHECK(pe(0, 2 * i + 1) == 1.0);
    }
}

TEST_CASE("embedding a zero window without PE is the bias row") {
    const ModelConfig config = tiny_config(PositionalEncodingKind::None);
    TransformerParams p = init_params(config, 11);
    const std::vector<double> window(4, 0.0);
    const Matrix e = embed(window, p, config);
    for (std::size_t t = 0; t < e.rows(); ++t) {
        for (std::size_t j = 0; j < e.cols(); ++j) CHECK(e(t, j) == 0.0);
    }
}

TEST_CASE("embedding a zero window with PE reproduces the PE table") {
    const ModelConfig config = tiny_config();
    const TransformerParams p = init_params(config, 12);
    const std::vector<double> window(4, 0.0);
    const Matrix e = embed(window, p, config);
    const Matrix pe = positional_encoding(config.seq_len, config.d_model);
    CHECK(e == pe);
}

TEST_CASE("embed rejects a wrong-length window") {
    const ModelConfig config = tiny_config();
    const TransformerParams p = init_params(config, 13);
    const std::vector<double> window(5, 0.0);
    CHECK_THROWS_AS(embed(window, p, config), ShapeError);
}

TEST_CASE("attention weight rows sum to one") {
    const ModelConfig config = tiny_config();
    const TransformerParams p = init_params(config, 14);
    const Matrix x = embed(random_window(4, 15), p, config);
    const AttentionResult attn = multi_head_attention(x, p.blocks[0], config);
    REQUIRE(attn.head_weights.size() == 2);
    for (const auto& head : attn.head_weights) {
        for (std::size_t i = 0; i < head.rows(); ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < head.cols(); ++j) {
                CHECK(head(i, j) > 0.0);
                CHECK(head(i, j) <= 1.0);
                sum += head(i, j);
            }
            CHECK(std::abs(sum - 1.0) <= 1e-10);
        }
    }
}

TEST_CASE("single-position attention reduces to x*Wv*Wo") {
    ModelConfig config = tiny_config();
    config.seq_len = 1;
    const TransformerParams p = init_params(config, 16);
    Matrix x(1, static_cast<std::size_t>(config.d_model));
    Rng rng(17);
    for (std::size_t j = 0; j < x.cols(); ++j) x(0, j) = rng.uniform(-1.0, 1.0);

    const AttentionResult attn = multi_head_attention(x, p.blocks[0], config);
    for (const auto& head : attn.head_weights) {
        REQUIRE(head.rows() == 1);
        REQUIRE(head.cols() == 1);
        CHECK(head(0, 0) == 1.0);
    }
    const Matrix expected = matmul(matmul(x, p.blocks[0].w_v), p.blocks[0].w_o);
    for (std::size_t j = 0; j < expected.cols(); ++j) {
        CHECK(attn.output(0, j) == doctest::Approx(expected(0, j)).epsilon(1e-12));
    }
}

TEST_CASE("forward is permutation equivariant without positional encoding") {
    const ModelConfig config = tiny_config(PositionalEncodingKind::None);
    const TransformerParams p = init_params(config, 18);
    const auto window = random_window(4, 19);
    const std::vector<std::size_t> perm = {2, 0, 3, 1};
    std::vector<double> permuted(4);
    for (std::size_t i = 0; i < 4; ++i) permuted[i] = window[perm[i]];

    const auto out = forward(p, config, window).output;
    const auto out_permuted = forward(p, config, permuted).output;
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(std::abs(out_permuted[i] - out[perm[i]]) <= 1e-10);
    }
}

TEST_CASE("positional encoding breaks permutation equivariance") {
    const ModelConfig config = tiny_config(PositionalEncodingKind::Sinusoidal);
    const TransformerParams p = init_params(config, 18);
    const auto window = random_window(4, 19);
    const std::vector<std::size_t> perm = {2, 0, 3, 1};
    std::vector<double> permuted(4);
    for (std::size_t i = 0; i < 4; ++i) permuted[i] = window[perm[i]];

    const auto out = forward(p, config, window).output;
    const auto out_permuted = forward(p, config, permuted).output;
    double max_diff = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        max_diff = std::max(max_diff, std::abs(out_permuted[i] - out[perm[i]]));
    }
    CHECK(max_diff > 1e-6);
}

TEST_CASE("transformer_block preserves shape and final-LN row statistics") {
    const ModelConfig config = tiny_config();
    const TransformerParams p = init_params(config, 20);
    const Matrix x = embed(random_window(4, 21), p, config);
    const Matrix y = transformer_block(x, p.blocks[0], config);
    REQUIRE(y.rows() == x.rows());
    REQUIRE(y.cols() == x.cols());
    // With beta = 0 and gamma = 1 at init, each output row is layer-normed.
    for (std::size_t i = 0; i < y.rows(); ++i) {
        double mean = 0.0;
        for (std::size_t j = 0; j < y.cols(); ++j) mean += y(i, j);
        mean /= static_cast<double>(y.cols());
        CHECK(std::abs(mean) <= 1e-8);
    }
}

TEST_CASE("zeroed projections reduce the block to stacked layer norms") {
    const ModelConfig config = tiny_config();
    TransformerParams p = init_params(config, 22);
    auto& block = p.blocks[0];
    block.w_o = Matrix(block.w_o.rows(), block.w_o.cols());
    block.w_ff2 = Matrix(block.w_ff2.rows(), block.w_ff2.cols());
    block.b_ff1.assign(block.b_ff1.size(), 0.0);
    block.b_ff2.assign(block.b_ff2.size(), 0.0);

    const Matrix x = embed(random_window(4, 23), p, config);
    const Matrix y = transformer_block(x, block, config);

    const std::vector<double> gamma(static_cast<std::size_t>(config.d_model), 1.0);
    const std::vector<double> beta(static_cast<std::size_t>(config.d_model), 0.0);
    for (std::size_t i = 0; i < x.rows(); ++i) {
        const auto once = layer_norm(x.row(i), gamma, beta, config.ln_eps);
        const auto twice = layer_norm(once, gamma, beta, config.ln_eps);
        for (std::size_t j = 0; j < x.cols(); ++j) {
            CHECK(y(i, j) == doctest::Approx(twice[j]).epsilon(1e-12));
        }
    }
}

TEST_CASE("forward emits seq_len finite scalars, deterministically") {
    ModelConfig config;
    config.seq_len = 128;
    config.d_model = 64;
    config.n_heads = 8;
    config.d_ff = 64;
    const TransformerParams p = init_params(config, 24);
    const auto window = random_window(128, 25);
    const auto a = forward(p, config, window);
    const auto b = forward(p, config, window);
    REQUIRE(a.output.size() == 128);
    for (double v : a.output) CHECK(std::isfinite(v));
    CHECK(a.output == b.output);
}

TEST_CASE("forward rejects non-finite input") {
    const ModelConfig config = tiny_config();
    const TransformerParams p = init_params(config, 26);
    auto window = random_window(4, 27);
    window[2] = std::nan("");
    CHECK_THROWS_AS(forward(p, config, window), NumericError);
}

TEST_CASE("activations cache attention rows that sum to one") {
    const ModelConfig config = tiny_config();
    const TransformerParams p = init_params(config, 28);
    const auto fwd = forward(p, config, random_window(4, 29));
    REQUIRE(fwd.acts.blocks.size() == 1);
    for (const auto& head : fwd.acts.blocks[0].attn) {
        for (std::size_t i = 0; i < head.rows(); ++i) {
            double sum = 0.0;
            for (std::size_t j = 0; j < head.cols(); ++j) sum += head(i, j);
            CHECK(std::abs(sum - 1.0) <= 1e-10);
        }
    }
}

TEST_CASE("analytic gradients match central finite differences") {
    const ModelConfig config = tiny_config();
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
        const GradCheckResult result = gradient_check(config, seed);
        INFO("seed ", seed, " worst ", result.worst_tensor, " err ", result.max_rel_err);
        CHECK(result.pass);
    }
}

TEST_CASE("gradient check also passes with positional encoding disabled and two blocks") {
    ModelConfig config = tiny_config(PositionalEncodingKind::None);
    config.n_blocks = 2;
    const GradCheckResult result = gradient_check(config, 4);
    INFO("worst ", result.worst_tensor, " err ", result.max_rel_err);
    CHECK(result.pass);
}

TEST_CASE("corrupt hook makes the gradient check fail") {
    GradCheckConfig check;
    check.corrupt = true;
    CHECK(!gradient_check(tiny_config(), 0, check).pass);
}

TEST_CASE("loss is zero and the output-bias gradient vanishes at the optimum") {
    const ModelConfig config = tiny_config();
    const TransformerParams p = init_params(config, 30);
    const auto window = random_window(4, 31);
    const auto target = forward(p, config, window).output;
    const BackwardResult bw = backward(p, config, window, target);
    CHECK(bw.loss == 0.0);
    CHECK(bw.grads.b_out == 0.0);
}

TEST_CASE("doubling the residual doubles the output-bias gradient") {
    const ModelConfig config = tiny_config();
    const TransformerParams p = init_params(config, 32);
    const auto window = random_window(4, 33);
    const auto out = forward(p, config, window).output;
    auto target = random_window(4, 34);
    std::vector<double> doubled(target.size());
    for (std::size_t i = 0; i < target.size(); ++i) doubled[i] = 2.0 * target[i] - out[i];

    const BackwardResult base = backward(p, config, window, target);
    const BackwardResult twice = backward(p, config, window, doubled);
    CHECK(twice.grads.b_out == doctest::Approx(2.0 * base.grads.b_out).epsilon(1e-12));
}

TEST_CASE("backward rejects mismatched target lengths") {
    const ModelConfig config = tiny_config();
    const TransformerParams p = init_params(config, 35);
    const auto window = random_window(4, 36);
    const std::vector<double> target(3, 0.0);
    CHECK_THROWS_AS(backward(p, config, window, target), ShapeError);
}
