#include "intonarank/stylemath.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "intonarank/kernels.hpp"

namespace intonarank {

namespace {

bool is_one_hot(const std::array<double, 2>& y) {
    return (y[0] == 0.0 || y[0] == 1.0) && (y[1] == 0.0 || y[1] == 1.0) &&
           y[0] + y[1] == 1.0;
}

void check_ce_inputs(const std::array<double, 2>& probs,
                     const std::array<double, 2>& onehot, double sigma) {
    if (!(probs[0] > 0.0 && probs[1] > 0.0)) {
        throw std::invalid_argument("weighted_ce: probabilities must be positive");
    }
    if (std::abs(probs[0] + probs[1] - 1.0) > 1e-9) {
        throw std::invalid_argument("weighted_ce: probabilities must sum to 1");
    }
    if (!is_one_hot(onehot)) {
        throw std::invalid_argument("weighted_ce: target must be one-hot");
    }
    if (!(sigma >= 0.0)) {
        throw std::invalid_argument("weighted_ce: sigma must be >= 0");
    }
}

}  // namespace

double weighted_ce(std::array<double, 2> probs, std::array<double, 2> onehot,
                   double sigma) {
    check_ce_inputs(probs, onehot, sigma);
    return -onehot[0] * std::log(probs[0]) - sigma * onehot[1] * std::log(probs[1]);
}

std::array<double, 2> weighted_ce_grad(std::array<double, 2> probs,
                                       std::array<double, 2> onehot, double sigma) {
    check_ce_inputs(probs, onehot, sigma);
    return {-onehot[0] / probs[0], -sigma * onehot[1] / probs[1]};
}

std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax: empty input");
    const double peak = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double total = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - peak);
        total += out[i];
    }
    for (double& v : out) v /= total;
    return out;
}

std::vector<double> softmax_backward(std::span<const double> probs,
                                     std::span<const double> upstream) {
    if (probs.size() != upstream.size()) {
        throw std::invalid_argument("softmax_backward: size mismatch");
    }
    const double mix = kernels::dot(probs, upstream);
    std::vector<double> out(probs.size());
    for (std::size_t i = 0; i < probs.size(); ++i) {
        out[i] = probs[i] * (upstream[i] - mix);
    }
    return out;
}

std::vector<double> grl_forward(std::span<const double> x) {
    return {x.begin(), x.end()};
}

std::vector<double> grl_backward(std::span<const double> upstream_grad, double lambda) {
    std::vector<double> out(upstream_grad.size());
    for (std::size_t i = 0; i < upstream_grad.size(); ++i) {
        out[i] = -lambda * upstream_grad[i];
    }
    return out;
}

double content_l1(std::span<const double> c_hat, std::span<const double> c) {
    if (c_hat.size() != c.size() || c.empty()) {
        throw std::invalid_argument("content_l1: length mismatch or empty");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) total += std::abs(c_hat[i] - c[i]);
    return total / static_cast<double>(c.size());
}

std::vector<double> content_l1_grad(std::span<const double> c_hat,
                                    std::span<const double> c) {
    if (c_hat.size() != c.size() || c.empty()) {
        throw std::invalid_argument("content_l1: length mismatch or empty");
    }
    const double inv_n = 1.0 / static_cast<double>(c.size());
    std::vector<double> out(c.size());
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double d = c_hat[i] - c[i];
        out[i] = (d > 0.0 ? inv_n : (d < 0.0 ? -inv_n : 0.0));
    }
    return out;
}

StyleEmbedding residual_style(const StyleEmbedding& r_f, const StyleEmbedding& r_s) {
    if (r_f.data.size() != r_s.data.size()) {
        throw std::invalid_argument("residual_style: dimension mismatch");
    }
    StyleEmbedding out;
    out.role = StyleRole::final_residual;
    out.data.resize(r_f.data.size());
    for (std::size_t i = 0; i < out.data.size(); ++i) {
        out.data[i] = r_f.data[i] - r_s.data[i];
    }
    return out;
}

AttentionResult style_token_attention(const StyleEmbedding& ref,
                                      const TokenBank& bank) {
    if (bank.tokens.empty()) {
        throw std::invalid_argument("style_token_attention: empty token bank");
    }
    const std::size_t d = ref.data.size();
    for (const auto& tok : bank.tokens) {
        if (tok.size() != d) {
            throw std::invalid_argument("style_token_attention: dimension mismatch");
        }
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<double> logits(bank.tokens.size());
    for (std::size_t k = 0; k < bank.tokens.size(); ++k) {
        logits[k] = scale * kernels::dot(ref.data, bank.tokens[k]);
    }

    AttentionResult res;
    res.weights = softmax(logits);
    res.embedding.role = (ref.role == StyleRole::sentence_ref)
                             ? StyleRole::emotion_style
                             : StyleRole::intonation_style;
    res.embedding.data.assign(d, 0.0);
    for (std::size_t k = 0; k < bank.tokens.size(); ++k) {
        kernels::axpy(res.weights[k], bank.tokens[k], res.embedding.data);
    }
    return res;
}

std::vector<double> style_token_attention_backward(const StyleEmbedding& ref,
                                                   const TokenBank& bank,
                                                   std::span<const double> upstream) {
    const AttentionResult res = style_token_attention(ref, bank);
    const std::size_t d = ref.data.size();
    if (upstream.size() != d) {
        throw std::invalid_argument("style_token_attention_backward: size mismatch");
    }
    // dL/da_k = upstream . token_k, then pull back through softmax and the
    // scaled logits.
    std::vector<double> da(bank.tokens.size());
    for (std::size_t k = 0; k < bank.tokens.size(); ++k) {
        da[k] = kernels::dot(upstream, bank.tokens[k]);
    }
    const std::vector<double> dlogits = softmax_backward(res.weights, da);
    const double scale = 1.0 / std::sqrt(static_cast<double>(d));
    std::vector<double> grad(d, 0.0);
    for (std::size_t k = 0; k < bank.tokens.size(); ++k) {
        kernels::axpy(scale * dlogits[k], bank.tokens[k], grad);
    }
    return grad;
}

StyleEmbedding intensity_embed(double intensity, std::span<const double> weights,
                               std::span<const double> bias) {
    if (!(intensity >= 0.0 && intensity <= 1.0)) {
        throw std::invalid_argument("intensity_embed: intensity outside [0, 1]");
    }
    if (weights.size() != bias.size()) {
        throw std::invalid_argument("intensity_embed: dimension mismatch");
    }
    StyleEmbedding out;
    out.role = StyleRole::intensity;
    out.data.resize(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) {
        out.data[i] = intensity * weights[i] + bias[i];
    }
    return out;
}

std::vector<double> concat_multistyle(const StyleEmbedding& g_s,
                                      const StyleEmbedding& g_f,
                                      const StyleEmbedding& h_i) {
    const std::size_t d = g_s.data.size();
    if (g_f.data.size() != d || h_i.data.size() != d) {
        throw std::invalid_argument("concat_multistyle: dimension mismatch");
    }
    std::vector<double> out;
    out.reserve(3 * d);
    out.insert(out.end(), g_s.data.begin(), g_s.data.end());
    out.insert(out.end(), g_f.data.begin(), g_f.data.end());
    out.insert(out.end(), h_i.data.begin(), h_i.data.end());
    return out;
}

double grad_check(const ScalarFn& fn, const VecFn& analytic_grad,
                  std::span<const double> x, double eps) {
    const std::vector<double> g = analytic_grad(x);
    if (g.size() != x.size()) {
        throw std::invalid_argument("grad_check: gradient size mismatch");
    }
    std::vector<double> probe(x.begin(), x.end());
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + eps;
        const double above = fn(probe);
        probe[i] = saved - eps;
        const double below = fn(probe);
        probe[i] = saved;
        if (!std::isfinite(above) || !std::isfinite(below)) {
            throw std::runtime_error("grad_check: non-finite evaluation");
        }
        const double fd = (above - below) / (2.0 * eps);
        worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(fd)));
    }
    return worst;
}

double grl_composite_check(const ScalarFn& head_fn, const VecFn& head_grad,
                           std::span<const double> x, double lambda) {
    const auto composite = [&](std::span<const double> v) {
        const std::vector<double> fwd = grl_forward(v);
        return head_fn(fwd);
    };
    const std::vector<double> machinery = grl_backward(head_grad(x), lambda);

    std::vector<double> probe(x.begin(), x.end());
    constexpr double eps = 1e-5;
    double worst = 0.0;
    for (std::size_t i = 0; i < probe.size(); ++i) {
        const double saved = probe[i];
        probe[i] = saved + eps;
        const double above = composite(probe);
        probe[i] = saved - eps;
        const double below = composite(probe);
        probe[i] = saved;
        const double fd = (above - below) / (2.0 * eps);
        const double expected = -lambda * fd;
        worst = std::max(worst,
                         std::abs(machinery[i] - expected) / std::max(1.0, std::abs(expected)));
    }
    return worst;
}

std::vector<GradCheckReport> run_grad_check_suite(std::uint64_t seed,
                                                  int points_per_check,
                                                  int d_style) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const auto d = static_cast<std::size_t>(d_style);

    const auto random_vec = [&](std::size_t n) {
        std::vector<double> v(n);
        for (double& x : v) x = gauss(rng);
        return v;
    };

    std::vector<GradCheckReport> reports;

    {
        GradCheckReport r{"weighted_ce_softmax", 0.0, points_per_check};
        for (int p = 0; p < points_per_check; ++p) {
            const std::vector<double> logits = random_vec(2);
            const double sigma = 0.5 + 2.5 * unit(rng);
            const std::array<double, 2> target =
                (unit(rng) < 0.5) ? std::array<double, 2>{1.0, 0.0}
                                  : std::array<double, 2>{0.0, 1.0};
            const ScalarFn fn = [&](std::span<const double> z) {
                const std::vector<double> probs = softmax(z);
                return weighted_ce({probs[0], probs[1]}, target, sigma);
            };
            const VecFn grad = [&](std::span<const double> z) {
                const std::vector<double> probs = softmax(z);
                const std::array<double, 2> dprobs =
                    weighted_ce_grad({probs[0], probs[1]}, target, sigma);
                return softmax_backward(probs, std::array{dprobs[0], dprobs[1]});
            };
            r.max_rel_error = std::max(r.max_rel_error, grad_check(fn, grad, logits));
        }
        reports.push_back(std::move(r));
    }

    {
        GradCheckReport r{"content_l1", 0.0, points_per_check};
        for (int p = 0; p < points_per_check; ++p) {
            std::vector<double> c_hat = random_vec(d);
            const std::vector<double> c = random_vec(d);
            // Keep every coordinate away from the |.| kink so central
            // differences stay valid.
            for (std::size_t i = 0; i < d; ++i) {
                if (std::abs(c_hat[i] - c[i]) < 1e-3) {
                    c_hat[i] = c[i] + (c_hat[i] >= c[i] ? 1e-3 : -1e-3) + gauss(rng) * 0.1;
                    if (std::abs(c_hat[i] - c[i]) < 1e-3) c_hat[i] = c[i] + 0.5;
                }
            }
            const ScalarFn fn = [&](std::span<const double> x) { return content_l1(x, c); };
            const VecFn grad = [&](std::span<const double> x) { return content_l1_grad(x, c); };
            r.max_rel_error = std::max(r.max_rel_error, grad_check(fn, grad, c_hat));
        }
        reports.push_back(std::move(r));
    }

    {
        GradCheckReport r{"intensity_embed", 0.0, points_per_check};
        for (int p = 0; p < points_per_check; ++p) {
            const std::vector<double> weights = random_vec(d);
            const std::vector<double> bias = random_vec(d);
            const std::vector<double> head = random_vec(d);
            const std::vector<double> x{0.1 + 0.8 * unit(rng)};
            const ScalarFn fn = [&](std::span<const double> v) {
                const StyleEmbedding h = intensity_embed(v[0], weights, bias);
                return kernels::dot(head, h.data);
            };
            const VecFn grad = [&](std::span<const double>) {
                return std::vector<double>{kernels::dot(head, weights)};
            };
            r.max_rel_error = std::max(r.max_rel_error, grad_check(fn, grad, x));
        }
        reports.push_back(std::move(r));
    }

    {
        GradCheckReport r{"style_token_attention", 0.0, points_per_check};
        for (int p = 0; p < points_per_check; ++p) {
            TokenBank bank;
            for (int k = 0; k < kDefaultTokenCount; ++k) bank.tokens.push_back(random_vec(d));
            const std::vector<double> head = random_vec(d);
            const std::vector<double> ref = random_vec(d);
            const ScalarFn fn = [&](std::span<const double> v) {
                const StyleEmbedding e{StyleRole::sentence_ref, {v.begin(), v.end()}};
                return kernels::dot(head, style_token_attention(e, bank).embedding.data);
            };
            const VecFn grad = [&](std::span<const double> v) {
                const StyleEmbedding e{StyleRole::sentence_ref, {v.begin(), v.end()}};
                return style_token_attention_backward(e, bank, head);
            };
            r.max_rel_error = std::max(r.max_rel_error, grad_check(fn, grad, ref));
        }
        reports.push_back(std::move(r));
    }

    {
        GradCheckReport r{"grl_composite", 0.0, points_per_check};
        for (int p = 0; p < points_per_check; ++p) {
            const std::vector<double> quad = random_vec(d);
            const std::vector<double> lin = random_vec(d);
            const std::vector<double> x = random_vec(d);
            const double lambda = 2.0 * unit(rng);
            const ScalarFn head = [&](std::span<const double> v) {
                double acc = 0.0;
                for (std::size_t i = 0; i < v.size(); ++i) {
                    acc += quad[i] * v[i] * v[i] + lin[i] * v[i];
                }
                return acc;
            };
            const VecFn head_grad = [&](std::span<const double> v) {
                std::vector<double> g(v.size());
                for (std::size_t i = 0; i < v.size(); ++i) {
                    g[i] = 2.0 * quad[i] * v[i] + lin[i];
                }
                return g;
            };
            r.max_rel_error =
                std::max(r.max_rel_error, grl_composite_check(head, head_grad, x, lambda));
        }
        reports.push_back(std::move(r));
    }

    return reports;
}

}  // namespace intonarank
