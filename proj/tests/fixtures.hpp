#pragma once
// Fixtures and brute-force oracles shared by the unit tests and the
// acceptance runner.

#include "kdcvg/motion.hpp"
#include "kdcvg/policy.hpp"
#include "kdcvg/rng.hpp"
#include "kdcvg/scgat.hpp"

#include <cmath>
#include <vector>

namespace fixtures {

using kdcvg::Matrix;
using kdcvg::Vector;

// Three candidates, k = 1, fixed rewards and a small fixed perturbation of
// the identity projections.
struct BanditInstance {
    kdcvg::AttentionParams params;
    Vector query;
    std::vector<Vector> candidates;
    std::vector<double> rewards;
};

inline BanditInstance bandit_instance() {
    BanditInstance b;
    b.params.w_q.resize(2, 2);
    b.params.w_q << 1.1, 0.2, -0.3, 0.9;
    b.params.w_k.resize(2, 2);
    b.params.w_k << 0.8, -0.1, 0.4, 1.2;
    b.query.resize(2);
    b.query << 1.0, 0.6;
    Vector c0(2), c1(2), c2(2);
    c0 << 1.0, 0.0;
    c1 << 0.0, 1.0;
    c2 << -0.7, 0.7;
    b.candidates = {c0, c1, c2};
    b.rewards = {0.9, 0.2, 0.5};
    return b;
}

// Selection probabilities computed directly from the score formula.
inline std::vector<double> bandit_probs(const BanditInstance& b, const kdcvg::AttentionParams& p) {
    const double scale = 1.0 / std::sqrt(static_cast<double>(b.query.size()));
    std::vector<double> e;
    double z = 0.0;
    for (const auto& c : b.candidates) {
        e.push_back(std::exp((p.w_q * b.query).dot(p.w_k * c) * scale));
        z += e.back();
    }
    for (auto& x : e) x /= z;
    return e;
}

inline double bandit_expected_reward(const BanditInstance& b, const kdcvg::AttentionParams& p) {
    const auto pi = bandit_probs(b, p);
    double j = 0.0;
    for (std::size_t i = 0; i < pi.size(); ++i) j += pi[i] * b.rewards[i];
    return j;
}

// Exact gradient of E[R] by enumerating the three outcomes inside a central
// difference of the closed-form expectation.
inline kdcvg::PolicyGradient bandit_exact_gradient(const BanditInstance& b, double h = 1e-6) {
    kdcvg::PolicyGradient g{Matrix::Zero(2, 2), Matrix::Zero(2, 2)};
    for (int which = 0; which < 2; ++which) {
        for (int r = 0; r < 2; ++r) {
            for (int c = 0; c < 2; ++c) {
                auto plus = b.params;
                auto minus = b.params;
                (which == 0 ? plus.w_q : plus.w_k)(r, c) += h;
                (which == 0 ? minus.w_q : minus.w_k)(r, c) -= h;
                const double d = (bandit_expected_reward(b, plus) - bandit_expected_reward(b, minus)) / (2 * h);
                (which == 0 ? g.d_q : g.d_k)(r, c) = d;
            }
        }
    }
    return g;
}

// Monte-Carlo mean of R * grad log pi over seeded draws.
inline kdcvg::PolicyGradient bandit_monte_carlo(const BanditInstance& b, int samples, std::uint64_t seed) {
    std::vector<kdcvg::Embedding> cands;
    for (const auto& c : b.candidates) cands.emplace_back(c);
    const auto weights = kdcvg::softmax_weights(kdcvg::raw_scores(kdcvg::Embedding(b.query), cands, b.params));
    kdcvg::Rng rng(seed);
    std::vector<kdcvg::Episode> episodes;
    episodes.reserve(static_cast<std::size_t>(samples));
    for (int s = 0; s < samples; ++s) {
        const auto sel = kdcvg::sample_selection(weights, 1, rng);
        episodes.push_back({b.query, b.candidates, sel.indices, b.rewards[sel.indices[0]]});
    }
    return kdcvg::reinforce_gradient(episodes, b.params, 0.0);
}

// Trajectory whose entries are multiples of 2^-10 in [-8, 8): differences and
// their sums are exact in binary floating point.
inline kdcvg::LatentTrajectory dyadic_trajectory(int frames, int d, std::uint64_t seed) {
    kdcvg::Rng rng(seed);
    Matrix m(frames, d);
    for (int i = 0; i < frames; ++i) {
        for (int j = 0; j < d; ++j) m(i, j) = (static_cast<double>(rng.below(16384)) - 8192.0) / 1024.0;
    }
    return kdcvg::LatentTrajectory(m);
}

inline kdcvg::LatentTrajectory gaussian_trajectory(int frames, int d, kdcvg::Rng& rng) {
    Matrix m(frames, d);
    for (int i = 0; i < frames; ++i) {
        for (int j = 0; j < d; ++j) m(i, j) = rng.normal();
    }
    return kdcvg::LatentTrajectory(m);
}

// L_md by scalar loops over t, n and latent index, in scalar type T. An
// optional perturbation `delta` is added to one adapter entry (field 0 = A,
// 1 = B, column-major index) after conversion to T.
template <class T>
T brute_md_loss_t(const kdcvg::VelocityModel& model, const kdcvg::LatentTrajectory& x0,
                  const kdcvg::LatentTrajectory& x1, const std::vector<double>& ts, int field = -1,
                  Eigen::Index index = 0, T delta = T(0)) {
    const int n_frames = x0.frame_count();
    const int d = x0.latent_dim();
    const auto& lora = model.lora;
    std::vector<T> a(static_cast<std::size_t>(lora.a.size()));
    std::vector<T> b(static_cast<std::size_t>(lora.b.size()));
    for (Eigen::Index i = 0; i < lora.a.size(); ++i) a[static_cast<std::size_t>(i)] = T(lora.a.data()[i]);
    for (Eigen::Index i = 0; i < lora.b.size(); ++i) b[static_cast<std::size_t>(i)] = T(lora.b.data()[i]);
    if (field == 0) a[static_cast<std::size_t>(index)] += delta;
    if (field == 1) b[static_cast<std::size_t>(index)] += delta;

    const int cols = d + 2;
    std::vector<T> w(static_cast<std::size_t>(d * cols));
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < cols; ++j) {
            T acc = T(0);
            for (int k = 0; k < lora.rank; ++k) {
                acc += b[static_cast<std::size_t>(i + k * d)] * a[static_cast<std::size_t>(k + j * lora.rank)];
            }
            w[static_cast<std::size_t>(i * cols + j)] = T(model.w_base(i, j)) + T(lora.scale) / T(lora.rank) * acc;
        }
    }

    T total = T(0);
    for (const double t_double : ts) {
        const T t = T(t_double);
        std::vector<T> v(static_cast<std::size_t>(n_frames * d));
        for (int n = 0; n < n_frames; ++n) {
            for (int i = 0; i < d; ++i) {
                T acc = T(0);
                for (int j = 0; j < d; ++j) {
                    acc += w[static_cast<std::size_t>(i * cols + j)] *
                           (t * T(x1.frames()(n, j)) + (T(1) - t) * T(x0.frames()(n, j)));
                }
                acc += w[static_cast<std::size_t>(i * cols + d)] * t;
                acc += w[static_cast<std::size_t>(i * cols + d + 1)] * T(n + 1) / T(n_frames);
                v[static_cast<std::size_t>(n * d + i)] = acc;
            }
        }
        for (int n = 0; n + 1 < n_frames; ++n) {
            for (int i = 0; i < d; ++i) {
                const T dm = (T(x1.frames()(n + 1, i)) - T(x1.frames()(n, i))) -
                             (T(x0.frames()(n + 1, i)) - T(x0.frames()(n, i)));
                const T r = dm - (v[static_cast<std::size_t>((n + 1) * d + i)] - v[static_cast<std::size_t>(n * d + i)]);
                total += r * r;
            }
        }
    }
    return total / (T(static_cast<double>(ts.size())) * T(n_frames - 1));
}

inline double brute_md_loss(const kdcvg::VelocityModel& model, const kdcvg::LatentTrajectory& x0,
                            const kdcvg::LatentTrajectory& x1, const std::vector<double>& ts) {
    return brute_md_loss_t<double>(model, x0, x1, ts);
}

// Model with random base and adapter (B nonzero) for gradient checks.
inline kdcvg::VelocityModel random_model(int d, int rank, kdcvg::Rng& rng) {
    kdcvg::VelocityModel m;
    m.w_base = Matrix(d, d + 2);
    m.lora.a = Matrix(rank, d + 2);
    m.lora.b = Matrix(d, rank);
    for (int i = 0; i < m.w_base.size(); ++i) m.w_base.data()[i] = 0.3 * rng.normal();
    for (int i = 0; i < m.lora.a.size(); ++i) m.lora.a.data()[i] = 0.5 * rng.normal();
    for (int i = 0; i < m.lora.b.size(); ++i) m.lora.b.data()[i] = 0.5 * rng.normal();
    m.lora.rank = rank;
    m.lora.scale = 1.0;
    return m;
}

struct GradCheck {
    double max_rel_error = 0.0;
};

// Analytic md_loss gradient against central differences (h = 1e-5) on every
// adapter entry. The differences are taken on the scalar loss in quad
// precision so cancellation noise stays far below the 1e-8 denominator floor.
inline GradCheck md_gradient_check(const kdcvg::VelocityModel& model, const kdcvg::LatentTrajectory& x0,
                                   const kdcvg::LatentTrajectory& x1, const std::vector<double>& ts, double h = 1e-5) {
    using Quad = __float128;
    const auto g = kdcvg::md_loss_grad(model, x0, x1, ts);
    GradCheck out;
    auto check = [&](int field, const Matrix& analytic) {
        for (Eigen::Index i = 0; i < analytic.size(); ++i) {
            const Quad plus = brute_md_loss_t<Quad>(model, x0, x1, ts, field, i, Quad(h));
            const Quad minus = brute_md_loss_t<Quad>(model, x0, x1, ts, field, i, -Quad(h));
            const double fd = static_cast<double>((plus - minus) / (2 * Quad(h)));
            const double a = analytic.data()[i];
            const double rel = std::abs(a - fd) / std::max({std::abs(a), std::abs(fd), 1e-8});
            out.max_rel_error = std::max(out.max_rel_error, rel);
        }
    };
    check(0, g.d_a);
    check(1, g.d_b);
    return out;
}

}  // namespace fixtures
