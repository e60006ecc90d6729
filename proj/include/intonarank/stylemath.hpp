#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace intonarank {

inline constexpr int kDefaultStyleDim = 16;
inline constexpr int kDefaultTokenCount = 10;

enum class StyleRole {
    sentence_ref,    // reference embedding of the whole sentence
    final_ref,       // reference embedding of the final syllable
    final_residual,  // final-syllable embedding minus sentence embedding
    emotion_style,
    intonation_style,
    intensity,
};

struct StyleEmbedding {
    StyleRole role = StyleRole::sentence_ref;
    std::vector<double> data;
};

struct TokenBank {
    std::vector<std::vector<double>> tokens;  // K rows of d_style
};

// Binary cross entropy with the question class weighted by sigma; probs and
// onehot are ordered (statement, question).
double weighted_ce(std::array<double, 2> probs, std::array<double, 2> onehot,
                   double sigma);
std::array<double, 2> weighted_ce_grad(std::array<double, 2> probs,
                                       std::array<double, 2> onehot, double sigma);

std::vector<double> softmax(std::span<const double> logits);
// Pullback of upstream through softmax evaluated at probs.
std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> upstream);

// Gradient reversal: identity forward, -lambda * g backward.
std::vector<double> grl_forward(std::span<const double> x);
std::vector<double> grl_backward(std::span<const double> upstream_grad,
                                 double lambda = 1.0);

// Mean absolute error and its subgradient in the first argument.
double content_l1(std::span<const double> c_hat, std::span<const double> c);
std::vector<double> content_l1_grad(std::span<const double> c_hat,
                                    std::span<const double> c);

// R_f - R_s, tagged as the final-syllable residual.
StyleEmbedding residual_style(const StyleEmbedding& r_f, const StyleEmbedding& r_s);

struct AttentionResult {
    StyleEmbedding embedding;
    std::vector<double> weights;  // nonnegative, sums to 1
};

// Single-head scaled dot-product attention over the token bank:
// a = softmax(ref . tokens^T / sqrt(d)), G = a^T tokens.
AttentionResult style_token_attention(const StyleEmbedding& ref,
                                      const TokenBank& bank);
// d(upstream . G)/d(ref) for a fixed bank.
std::vector<double> style_token_attention_backward(const StyleEmbedding& ref,
                                                   const TokenBank& bank,
                                                   std::span<const double> upstream);

// h_i = intensity * weights + bias; intensity must lie in [0, 1].
StyleEmbedding intensity_embed(double intensity, std::span<const double> weights,
                               std::span<const double> bias);

// (G_s, G_f, h_i) in order.
std::vector<double> concat_multistyle(const StyleEmbedding& g_s,
                                      const StyleEmbedding& g_f,
                                      const StyleEmbedding& h_i);

using ScalarFn = std::function<double(std::span<const double>)>;
using VecFn = std::function<std::vector<double>(std::span<const double>)>;

// Central-difference check of an analytic gradient. Returns
// max_i |g_fd_i - g_i| / max(1, |g_fd_i|).
double grad_check(const ScalarFn& fn, const VecFn& analytic_grad,
                  std::span<const double> x, double eps = 1e-5);

// Checks that routing head_grad through grl_backward yields -lambda times the
// finite-difference gradient of the (identity-forward) composite.
double grl_composite_check(const ScalarFn& head_fn, const VecFn& head_grad,
                           std::span<const double> x, double lambda);

struct GradCheckReport {
    std::string name;
    double max_rel_error = 0.0;
    int points = 0;
};

// Finite-difference sweep over the differentiable ops at seeded random points:
// weighted_ce∘softmax, content_l1, intensity_embed, style_token_attention and
// a GRL-composed head.
std::vector<GradCheckReport> run_grad_check_suite(std::uint64_t seed,
                                                  int points_per_check = 50,
                                                  int d_style = kDefaultStyleDim);

}  // namespace intonarank
