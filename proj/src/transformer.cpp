#include "vclean/transformer.hpp"

#include <cmath>
#include <string>

#include "vclean/errors.hpp"
#include "vclean/rng.hpp"

namespace vclean {

void ModelConfig::validate() const {
    if (seq_len < 1 || d_model < 1 || n_heads < 1 || d_ff < 1 || n_blocks < 1) {
        throw DataError("ModelConfig: all dimensions must be >= 1");
    }
    if (d_model % n_heads != 0) {
        throw DataError("ModelConfig: n_heads must divide d_model");
    }
    if (!(ln_eps > 0.0)) throw DataError("ModelConfig: ln_eps must be positive");
}

std::vector<TensorRef> tensor_refs(TransformerParams& params) {
    std::vector<TensorRef> refs;
    const auto add_matrix = [&refs](const std::string& name, Matrix& m) {
        refs.push_back({name, m.data(), m.rows(), m.cols()});
    };
    const auto add_vector = [&refs](const std::string& name, std::vector<double>& v) {
        refs.push_back({name, v.data(), 1, v.size()});
    };
    add_matrix("embed.w", params.w_embed);
    add_vector("embed.b", params.b_embed);
    for (std::size_t i = 0; i < params.blocks.size(); ++i) {
        auto& b = params.blocks[i];
        const std::string prefix = "block" + std::to_string(i) + ".";
        add_matrix(prefix + "w_q", b.w_q);
        add_matrix(prefix + "w_k", b.w_k);
        add_matrix(prefix + "w_v", b.w_v);
        add_matrix(prefix + "w_o", b.w_o);
        add_vector(prefix + "ln1_gamma", b.ln1_gamma);
        add_vector(prefix + "ln1_beta", b.ln1_beta);
        add_matrix(prefix + "w_ff1", b.w_ff1);
        add_vector(prefix + "b_ff1", b.b_ff1);
        add_matrix(prefix + "w_ff2", b.w_ff2);
        add_vector(prefix + "b_ff2", b.b_ff2);
        add_vector(prefix + "ln2_gamma", b.ln2_gamma);
        add_vector(prefix + "ln2_beta", b.ln2_beta);
    }
    add_matrix("head.w", params.w_head);
    add_vector("head.b", params.b_head);
    add_matrix("out.w", params.w_out);
    refs.push_back({"out.b", &params.b_out, 1, 1});
    return refs;
}

std::vector<ConstTensorRef> tensor_refs(const TransformerParams& params) {
    const auto mutable_refs = tensor_refs(const_cast<TransformerParams&>(params));
    std::vector<ConstTensorRef> refs;
    refs.reserve(mutable_refs.size());
    for (const auto& r : mutable_refs) refs.push_back({r.name, r.data, r.rows, r.cols});
    return refs;
}

TransformerParams zero_params(const ModelConfig& config) {
    config.validate();
    const auto d = static_cast<std::size_t>(config.d_model);
    const auto f = static_cast<std::size_t>(config.d_ff);
    TransformerParams p;
    p.w_embed = Matrix(1, d);
    p.b_embed.assign(d, 0.0);
    p.blocks.resize(static_cast<std::size_t>(config.n_blocks));
    for (auto& b : p.blocks) {
        b.w_q = Matrix(d, d);
        b.w_k = Matrix(d, d);
        b.w_v = Matrix(d, d);
        b.w_o = Matrix(d, d);
        b.ln1_gamma.assign(d, 0.0);
        b.ln1_beta.assign(d, 0.0);
        b.w_ff1 = Matrix(d, f);
        b.b_ff1.assign(f, 0.0);
        b.w_ff2 = Matrix(f, d);
        b.b_ff2.assign(d, 0.0);
        b.ln2_gamma.assign(d, 0.0);
        b.ln2_beta.assign(d, 0.0);
    }
    p.w_head = Matrix(d, d);
    p.b_head.assign(d, 0.0);
    p.w_out = Matrix(d, 1);
    p.b_out = 0.0;
    return p;
}

namespace {

void glorot_fill(Matrix& m, Rng& rng) {
    const double bound =
        std::sqrt(6.0 / (static_cast<double>(m.rows()) + static_cast<double>(m.cols())));
    for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(-bound, bound);
}

}  // namespace

TransformerParams init_params(const ModelConfig& config, std::uint64_t seed) {
    TransformerParams p = zero_params(config);
    Rng rng(seed);
    glorot_fill(p.w_embed, rng);
    for (auto& b : p.blocks) {
        glorot_fill(b.w_q, rng);
        glorot_fill(b.w_k, rng);
        glorot_fill(b.w_v, rng);
        glorot_fill(b.w_o, rng);
        glorot_fill(b.w_ff1, rng);
        glorot_fill(b.w_ff2, rng);
        b.ln1_gamma.assign(b.ln1_gamma.size(), 1.0);
        b.ln2_gamma.assign(b.ln2_gamma.size(), 1.0);
    }
    glorot_fill(p.w_head, rng);
    glorot_fill(p.w_out, rng);
    return p;
}

Matrix positional_encoding(int seq_len, int d_model) {
    Matrix pe(static_cast<std::size_t>(seq_len), static_cast<std::size_t>(d_model));
    for (int t = 0; t < seq_len; ++t) {
        for (int i = 0; 2 * i < d_model; ++i) {
            const double rate = std::pow(10000.0, 2.0 * i / static_cast<double>(d_model));
            const double angle = static_cast<double>(t) / rate;
            pe(static_cast<std::size_t>(t), static_cast<std::size_t>(2 * i)) = std::sin(angle);
            if (2 * i + 1 < d_model) {
                pe(static_cast<std::size_t>(t), static_cast<std::size_t>(2 * i + 1)) =
                    std::cos(angle);
            }
        }
    }
    return pe;
}

Matrix embed(std::span<const double> window, const TransformerParams& params,
             const ModelConfig& config) {
    if (window.size() != static_cast<std::size_t>(config.seq_len)) {
        throw ShapeError("embed: window length " + std::to_string(window.size()) +
                         " does not match seq_len " + std::to_string(config.seq_len));
    }
    const auto d = static_cast<std::size_t>(config.d_model);
    Matrix out(window.size(), d);
    const Matrix pe = config.positional == PositionalEncodingKind::Sinusoidal
                          ? positional_encoding(config.seq_len, config.d_model)
                          : Matrix(window.size(), d);
    for (std::size_t t = 0; t < window.size(); ++t) {
        for (std::size_t j = 0; j < d; ++j) {
            out(t, j) = window[t] * params.w_embed(0, j) + params.b_embed[j] + pe(t, j);
        }
    }
    return out;
}

namespace {

// a * b^T with ascending-k accumulation.
Matrix matmul_bt(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw ShapeError("matmul_bt: inner dimensions differ");
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < b.rows(); ++j) {
            double acc = 0.0;
            const double* arow = a.data() + i * a.cols();
            const double* brow = b.data() + j * b.cols();
            for (std::size_t k = 0; k < a.cols(); ++k) acc += arow[k] * brow[k];
            c(i, j) = acc;
        }
    }
    return c;
}

// a^T * b with ascending-k accumulation.
Matrix matmul_at(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) throw ShapeError("matmul_at: inner dimensions differ");
    Matrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* arow = a.data() + k * a.cols();
        const double* brow = b.data() + k * b.cols();
        for (std::size_t i = 0; i < a.cols(); ++i) {
            double* crow = c.data() + i * c.cols();
            const double aki = arow[i];
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

Matrix slice_cols(const Matrix& m, std::size_t first, std::size_t width) {
    Matrix out(m.rows(), width);
    for (std::size_t i = 0; i < m.rows(); ++i) {
        for (std::size_t j = 0; j < width; ++j) out(i, j) = m(i, first + j);
    }
    return out;
}

void add_into_cols(Matrix& dst, const Matrix& src, std::size_t first) {
    for (std::size_t i = 0; i < src.rows(); ++i) {
        for (std::size_t j = 0; j < src.cols(); ++j) dst(i, first + j) += src(i, j);
    }
}

void add_inplace(Matrix& dst, const Matrix& src) {
    for (std::size_t i = 0; i < dst.size(); ++i) dst.data()[i] += src.data()[i];
}

AttentionResult attention_forward(const Matrix& x, const BlockParams& block,
                                  const ModelConfig& config, Matrix* q_out, Matrix* k_out,
                                  Matrix* v_out, Matrix* concat_out) {
    const auto d_head = static_cast<std::size_t>(config.d_head());
    const double scale = 1.0 / std::sqrt(static_cast<double>(config.d_head()));

    const Matrix q = matmul(x, block.w_q);
    const Matrix k = matmul(x, block.w_k);
    const Matrix v = matmul(x, block.w_v);

    Matrix concat(x.rows(), static_cast<std::size_t>(config.d_model));
    AttentionResult result;
    result.head_weights.reserve(static_cast<std::size_t>(config.n_heads));
    for (int h = 0; h < config.n_heads; ++h) {
        const std::size_t first = static_cast<std::size_t>(h) * d_head;
        const Matrix qh = slice_cols(q, first, d_head);
        const Matrix kh = slice_cols(k, first, d_head);
        const Matrix vh = slice_cols(v, first, d_head);
        Matrix scores = matmul_bt(qh, kh);
        for (std::size_t i = 0; i < scores.size(); ++i) scores.data()[i] *= scale;
        Matrix weights = softmax_rows(scores);
        const Matrix head = matmul(weights, vh);
        for (std::size_t i = 0; i < head.rows(); ++i) {
            for (std::size_t j = 0; j < d_head; ++j) concat(i, first + j) = head(i, j);
        }
        result.head_weights.push_back(std::move(weights));
    }
    result.output = matmul(concat, block.w_o);
    if (q_out) *q_out = q;
    if (k_out) *k_out = k;
    if (v_out) *v_out = v;
    if (concat_out) *concat_out = concat;
    return result;
}

Matrix layer_norm_rows(const Matrix& x, const std::vector<double>& gamma,
                       const std::vector<double>& beta, double eps,
                       std::vector<LayerNormCache>* caches) {
    Matrix out(x.rows(), x.cols());
    if (caches) caches->resize(x.rows());
    for (std::size_t i = 0; i < x.rows(); ++i) {
        LayerNormCache* cache = caches ? &(*caches)[i] : nullptr;
        const auto y = layer_norm(x.row(i), gamma, beta, eps, cache);
        for (std::size_t j = 0; j < x.cols(); ++j) out(i, j) = y[j];
    }
    return out;
}

Matrix block_forward(const Matrix& x, const BlockParams& block, const ModelConfig& config,
                     BlockActivations* acts) {
    Matrix q, k, v, concat;
    AttentionResult attn = attention_forward(x, block, config, acts ? &q : nullptr,
                                             acts ? &k : nullptr, acts ? &v : nullptr,
                                             acts ? &concat : nullptr);

    Matrix sum1 = attn.output;
    add_inplace(sum1, x);
    std::vector<LayerNormCache> ln1;
    Matrix u = layer_norm_rows(sum1, block.ln1_gamma, block.ln1_beta, config.ln_eps,
                               acts ? &ln1 : nullptr);

    Matrix ffn_pre = matmul(u, block.w_ff1);
    for (std::size_t i = 0; i < ffn_pre.rows(); ++i) {
        for (std::size_t j = 0; j < ffn_pre.cols(); ++j) ffn_pre(i, j) += block.b_ff1[j];
    }
    Matrix ffn_hidden(ffn_pre.rows(), ffn_pre.cols());
    for (std::size_t i = 0; i < ffn_pre.size(); ++i) {
        ffn_hidden.data()[i] = ffn_pre.data()[i] > 0.0 ? ffn_pre.data()[i] : 0.0;
    }
    Matrix ffn_out = matmul(ffn_hidden, block.w_ff2);
    for (std::size_t i = 0; i < ffn_out.rows(); ++i) {
        for (std::size_t j = 0; j < ffn_out.cols(); ++j) ffn_out(i, j) += block.b_ff2[j];
    }

    Matrix sum2 = ffn_out;
    add_inplace(sum2, u);
    std::vector<LayerNormCache> ln2;
    Matrix out = layer_norm_rows(sum2, block.ln2_gamma, block.ln2_beta, config.ln_eps,
                                 acts ? &ln2 : nullptr);

    if (acts) {
        acts->input = x;
        acts->q = std::move(q);
        acts->k = std::move(k);
        acts->v = std::move(v);
        acts->attn = std::move(attn.head_weights);
        acts->heads_concat = std::move(concat);
        acts->attn_out = std::move(attn.output);
        acts->sum1 = std::move(sum1);
        acts->ln1 = std::move(ln1);
        acts->u = u;
        acts->ffn_pre = std::move(ffn_pre);
        acts->ffn_hidden = std::move(ffn_hidden);
        acts->ffn_out = std::move(ffn_out);
        acts->sum2 = std::move(sum2);
        acts->ln2 = std::move(ln2);
        acts->out = out;
    }
    return out;
}

// dgamma/dbeta accumulate; returns gradient w.r.t. the layer_norm input row.
void layer_norm_backward_row(std::span<const double> dy, const LayerNormCache& cache,
                             const std::vector<double>& gamma, std::vector<double>& dgamma,
                             std::vector<double>& dbeta, std::span<double> dx) {
    const std::size_t n = dy.size();
    double mean_g = 0.0;
    double mean_gx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        dgamma[i] += dy[i] * cache.xhat[i];
        dbeta[i] += dy[i];
        const double g = dy[i] * gamma[i];
        mean_g += g;
        mean_gx += g * cache.xhat[i];
    }
    mean_g /= static_cast<double>(n);
    mean_gx /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double g = dy[i] * gamma[i];
        dx[i] = cache.inv_sigma * (g - mean_g - cache.xhat[i] * mean_gx);
    }
}

Matrix layer_norm_backward(const Matrix& dy, const std::vector<LayerNormCache>& caches,
                           const std::vector<double>& gamma, std::vector<double>& dgamma,
                           std::vector<double>& dbeta) {
    Matrix dx(dy.rows(), dy.cols());
    for (std::size_t i = 0; i < dy.rows(); ++i) {
        layer_norm_backward_row(dy.row(i), caches[i], gamma, dgamma, dbeta, dx.row(i));
    }
    return dx;
}

// Returns gradient w.r.t. the block input; parameter gradients accumulate
// into `gb`.
Matrix block_backward(const Matrix& dout, const BlockActivations& acts,
                      const BlockParams& block, const ModelConfig& config,
                      BlockParams& gb) {
    const auto d_head = static_cast<std::size_t>(config.d_head());
    const double scale = 1.0 / std::sqrt(static_cast<double>(config.d_head()));

    // Final layer norm, then the residual split into u and ffn paths.
    Matrix dsum2 = layer_norm_backward(dout, acts.ln2, block.ln2_gamma, gb.ln2_gamma,
                                       gb.ln2_beta);
    Matrix du = dsum2;          // residual branch
    const Matrix& dffn = dsum2; // ffn branch shares the same upstream gradient

    // FFN: ffn_out = relu(u*w_ff1 + b_ff1)*w_ff2 + b_ff2.
    add_inplace(gb.w_ff2, matmul_at(acts.ffn_hidden, dffn));
    for (std::size_t i = 0; i < dffn.rows(); ++i) {
        for (std::size_t j = 0; j < dffn.cols(); ++j) gb.b_ff2[j] += dffn(i, j);
    }
    Matrix dhidden = matmul_bt(dffn, block.w_ff2);
    for (std::size_t i = 0; i < dhidden.size(); ++i) {
        if (!(acts.ffn_pre.data()[i] > 0.0)) dhidden.data()[i] = 0.0;
    }
    add_inplace(gb.w_ff1, matmul_at(acts.u, dhidden));
    for (std::size_t i = 0; i < dhidden.rows(); ++i) {
        for (std::size_t j = 0; j < dhidden.cols(); ++j) gb.b_ff1[j] += dhidden(i, j);
    }
    add_inplace(du, matmul_bt(dhidden, block.w_ff1));

    // First layer norm, then the residual split into x and attention paths.
    Matrix dsum1 = layer_norm_backward(du, acts.ln1, block.ln1_gamma, gb.ln1_gamma,
                                       gb.ln1_beta);
    Matrix dx = dsum1;              // residual branch
    const Matrix& dattn = dsum1;    // attention branch

    // Output projection of the concatenated heads.
    add_inplace(gb.w_o, matmul_at(acts.heads_concat, dattn));
    const Matrix dconcat = matmul_bt(dattn, block.w_o);

    Matrix dq(acts.q.rows(), acts.q.cols());
    Matrix dk(acts.k.rows(), acts.k.cols());
    Matrix dv(acts.v.rows(), acts.v.cols());
    for (int h = 0; h < config.n_heads; ++h) {
        const std::size_t first = static_cast<std::size_t>(h) * d_head;
        const Matrix dhead = slice_cols(dconcat, first, d_head);
        const Matrix vh = slice_cols(acts.v, first, d_head);
        const Matrix& weights = acts.attn[static_cast<std::size_t>(h)];

        const Matrix dweights = matmul_bt(dhead, vh);
        add_into_cols(dv, matmul_at(weights, dhead), first);

        // Softmax rows: ds = a .* (da - dot(da, a)).
        Matrix dscores(dweights.rows(), dweights.cols());
        for (std::size_t i = 0; i < dweights.rows(); ++i) {
            double dot = 0.0;
            for (std::size_t j = 0; j < dweights.cols(); ++j) {
                dot += dweights(i, j) * weights(i, j);
            }
            for (std::size_t j = 0; j < dweights.cols(); ++j) {
                dscores(i, j) = weights(i, j) * (dweights(i, j) - dot) * scale;
            }
        }
        const Matrix qh = slice_cols(acts.q, first, d_head);
        const Matrix kh = slice_cols(acts.k, first, d_head);
        add_into_cols(dq, matmul(dscores, kh), first);
        add_into_cols(dk, matmul_at(dscores, qh), first);
    }

    add_inplace(gb.w_q, matmul_at(acts.input, dq));
    add_inplace(gb.w_k, matmul_at(acts.input, dk));
    add_inplace(gb.w_v, matmul_at(acts.input, dv));
    add_inplace(dx, matmul_bt(dq, block.w_q));
    add_inplace(dx, matmul_bt(dk, block.w_k));
    add_inplace(dx, matmul_bt(dv, block.w_v));
    return dx;
}

ForwardResult forward_impl(const TransformerParams& params, const ModelConfig& config,
                           std::span<const double> window, bool keep_acts) {
    config.validate();
    check_finite(window, "forward input");

    ForwardResult result;
    Matrix x = embed(window, params, config);
    if (keep_acts) result.acts.embedded = x;
    result.acts.blocks.resize(keep_acts ? params.blocks.size() : 0);
    for (std::size_t b = 0; b < params.blocks.size(); ++b) {
        x = block_forward(x, params.blocks[b], config,
                          keep_acts ? &result.acts.blocks[b] : nullptr);
    }

    Matrix z = matmul(x, params.w_head);
    for (std::size_t i = 0; i < z.rows(); ++i) {
        for (std::size_t j = 0; j < z.cols(); ++j) z(i, j) += params.b_head[j];
    }
    result.output.resize(window.size());
    for (std::size_t t = 0; t < z.rows(); ++t) {
        double acc = params.b_out;
        for (std::size_t j = 0; j < z.cols(); ++j) acc += z(t, j) * params.w_out(j, 0);
        result.output[t] = acc;
    }
    check_finite(result.output, "forward output");
    if (keep_acts) {
        result.acts.head_z = std::move(z);
        result.acts.output = result.output;
    }
    return result;
}

}  // namespace

AttentionResult multi_head_attention(const Matrix& x, const BlockParams& block,
                                     const ModelConfig& config) {
    if (x.cols() != static_cast<std::size_t>(config.d_model)) {
        throw ShapeError("multi_head_attention: input width does not match d_model");
    }
    return attention_forward(x, block, config, nullptr, nullptr, nullptr, nullptr);
}

Matrix transformer_block(const Matrix& x, const BlockParams& block,
                         const ModelConfig& config) {
    if (x.cols() != static_cast<std::size_t>(config.d_model)) {
        throw ShapeError("transformer_block: input width does not match d_model");
    }
    return block_forward(x, block, config, nullptr);
}

ForwardResult forward(const TransformerParams& params, const ModelConfig& config,
                      std::span<const double> window) {
    return forward_impl(params, config, window, true);
}

BackwardResult backward(const TransformerParams& params, const ModelConfig& config,
                        std::span<const double> window, std::span<const double> target) {
    if (target.size() != window.size()) {
        throw ShapeError("backward: target length does not match window length");
    }
    check_finite(target, "backward target");
    const ForwardResult fwd = forward_impl(params, config, window, true);
    const auto seq = static_cast<double>(window.size());

    BackwardResult result;
    result.grads = zero_params(config);

    double loss = 0.0;
    std::vector<double> dout(window.size());
    for (std::size_t t = 0; t < window.size(); ++t) {
        const double r = fwd.output[t] - target[t];
        loss += r * r;
        dout[t] = 2.0 * r / seq;
    }
    result.loss = loss / seq;

    // Output head: out_t = z_t * w_out + b_out.
    const Matrix& z = fwd.acts.head_z;
    Matrix dz(z.rows(), z.cols());
    for (std::size_t t = 0; t < z.rows(); ++t) {
        result.grads.b_out += dout[t];
        for (std::size_t j = 0; j < z.cols(); ++j) {
            result.grads.w_out(j, 0) += z(t, j) * dout[t];
            dz(t, j) = dout[t] * params.w_out(j, 0);
        }
    }

    // Dense head: z = x * w_head + b_head.
    const Matrix& head_in = params.blocks.empty()
                                ? fwd.acts.embedded
                                : fwd.acts.blocks.back().out;
    add_inplace(result.grads.w_head, matmul_at(head_in, dz));
    for (std::size_t i = 0; i < dz.rows(); ++i) {
        for (std::size_t j = 0; j < dz.cols(); ++j) result.grads.b_head[j] += dz(i, j);
    }
    Matrix dx = matmul_bt(dz, params.w_head);

    for (std::size_t b = params.blocks.size(); b-- > 0;) {
        dx = block_backward(dx, fwd.acts.blocks[b], params.blocks[b], config,
                            result.grads.blocks[b]);
    }

    // Embedding: row t = window[t] * w_embed + b_embed (+ PE, constant).
    for (std::size_t t = 0; t < window.size(); ++t) {
        for (std::size_t j = 0; j < dx.cols(); ++j) {
            result.grads.w_embed(0, j) += window[t] * dx(t, j);
            result.grads.b_embed[j] += dx(t, j);
        }
    }
    return result;
}

}  // namespace vclean
