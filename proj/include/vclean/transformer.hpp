#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "vclean/matrix.hpp"

namespace vclean {

enum class PositionalEncodingKind { None, Sinusoidal };

struct ModelConfig {
    int seq_len = 128;
    int d_model = 64;
    int n_heads = 8;
    int d_ff = 64;
    double ln_eps = 1e-6;
    int n_blocks = 1;
    PositionalEncodingKind positional = PositionalEncodingKind::Sinusoidal;

    int d_head() const { return d_model / n_heads; }
    void validate() const;
};

// One encoder block: self-attention, post-add layer norm, feed-forward,
// post-add layer norm. Attention projections carry no biases.
struct BlockParams {
    Matrix w_q, w_k, w_v, w_o;                  // d_model x d_model
    std::vector<double> ln1_gamma, ln1_beta;    // d_model
    Matrix w_ff1;                               // d_model x d_ff
    std::vector<double> b_ff1;                  // d_ff
    Matrix w_ff2;                               // d_ff x d_model
    std::vector<double> b_ff2;                  // d_model
    std::vector<double> ln2_gamma, ln2_beta;    // d_model
};

// Full parameter tree. Gradients and Adam moments reuse the same shape.
struct TransformerParams {
    Matrix w_embed;               // 1 x d_model
    std::vector<double> b_embed;  // d_model
    std::vector<BlockParams> blocks;
    Matrix w_head;                // d_model x d_model
    std::vector<double> b_head;   // d_model
    Matrix w_out;                 // d_model x 1
    double b_out = 0.0;
};

using Gradients = TransformerParams;

// Flat view over every tensor in the tree, in the fixed order used by both
// the optimizer and the checkpoint format.
struct TensorRef {
    std::string name;
    double* data;
    std::size_t rows;
    std::size_t cols;
    std::size_t size() const { return rows * cols; }
};

struct ConstTensorRef {
    std::string name;
    const double* data;
    std::size_t rows;
    std::size_t cols;
    std::size_t size() const { return rows * cols; }
};

std::vector<TensorRef> tensor_refs(TransformerParams& params);
std::vector<ConstTensorRef> tensor_refs(const TransformerParams& params);

// Glorot-uniform weights, zero biases, unit layer-norm gains.
TransformerParams init_params(const ModelConfig& config, std::uint64_t seed);

// Shape-congruent all-zero tree (gradient/moment accumulators).
TransformerParams zero_params(const ModelConfig& config);

// Sinusoidal table entry: even columns sin(t / 10000^(2i/d)), odd cos(same).
Matrix positional_encoding(int seq_len, int d_model);

// Row t = window[t] * w_embed + b_embed + PE(t).
Matrix embed(std::span<const double> window, const TransformerParams& params,
             const ModelConfig& config);

struct AttentionResult {
    Matrix output;                    // seq_len x d_model
    std::vector<Matrix> head_weights; // n_heads matrices, seq_len x seq_len
};

// Unmasked scaled dot-product attention over d_head-wide column slices of
// the shared d_model x d_model projections.
AttentionResult multi_head_attention(const Matrix& x, const BlockParams& block,
                                     const ModelConfig& config);

// Post-norm block: LN(x + MHA(x)) -> u, LN(u + FFN(u)).
Matrix transformer_block(const Matrix& x, const BlockParams& block,
                         const ModelConfig& config);

struct BlockActivations {
    Matrix input;
    Matrix q, k, v;                 // seq_len x d_model
    std::vector<Matrix> attn;       // per-head attention weights
    Matrix heads_concat;
    Matrix attn_out;                // heads_concat * w_o
    Matrix sum1;                    // input + attn_out
    std::vector<LayerNormCache> ln1;
    Matrix u;                       // layer-normed sum1
    Matrix ffn_pre;                 // u*w_ff1 + b_ff1, before ReLU
    Matrix ffn_hidden;              // after ReLU
    Matrix ffn_out;
    Matrix sum2;                    // u + ffn_out
    std::vector<LayerNormCache> ln2;
    Matrix out;
};

struct Activations {
    Matrix embedded;
    std::vector<BlockActivations> blocks;
    Matrix head_z;                  // x*w_head + b_head
    std::vector<double> output;
};

struct ForwardResult {
    std::vector<double> output;     // seq_len scalars
    Activations acts;
};

ForwardResult forward(const TransformerParams& params, const ModelConfig& config,
                      std::span<const double> window);

struct BackwardResult {
    double loss = 0.0;              // mean squared error over positions
    Gradients grads;
};

// Reverse-mode gradients of the MSE objective for every parameter tensor.
BackwardResult backward(const TransformerParams& params, const ModelConfig& config,
                        std::span<const double> window, std::span<const double> target);

}  // namespace vclean
