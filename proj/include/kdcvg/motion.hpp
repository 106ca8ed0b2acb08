#pragma once

#include "kdcvg/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace kdcvg {

/// Frame-to-frame latent differences, (N - 1) x d_lat.
using MotionVectors = Matrix;

MotionVectors motion_vectors(const LatentTrajectory& traj);

/// x_t = t * x1 + (1 - t) * x0, elementwise.
LatentTrajectory interpolate_latent(const LatentTrajectory& x0, const LatentTrajectory& x1, double t);

/// Low-rank additive update scale / rank * B * A. B starts at zero.
struct LoraAdapter {
    Matrix a;  // rank x (d_lat + 2)
    Matrix b;  // d_lat x rank
    int rank = 0;
    double scale = 1.0;

    Matrix delta() const { return (scale / rank) * b * a; }
};

/// Affine velocity field over [frame latent; diffusion time; n / N] with an
/// MR-LoRA adapter on the same map. Only the adapter is trained.
struct VelocityModel {
    Matrix w_base;  // d_lat x (d_lat + 2)
    LoraAdapter lora;
    bool adapted = false;

    int latent_dim() const { return static_cast<int>(w_base.rows()); }
    Matrix effective_weight() const { return w_base + lora.delta(); }

    void validate() const;
};

struct VelocityModelSpec {
    int d_lat = 16;
    int rank = 128;  // capped at the model's inner dimension
    double scale = 1.0;
    double base_std = -1.0;  // <= 0 selects 1 / sqrt(d_lat + 2)
    std::uint64_t seed = 7;
};

/// Seeded Gaussian base weights, Gaussian A (std 1 / sqrt(d_lat + 2)), zero B.
/// A rank above min(d_lat, d_lat + 2) is capped with a logged warning.
VelocityModel make_velocity_model(const VelocityModelSpec& spec);

/// Rows v^n = W_eff [x^n; t; n / N] for n = 1..N.
Matrix velocity(const VelocityModel& model, const Matrix& frames, double t);
inline Matrix velocity(const VelocityModel& model, const LatentTrajectory& traj, double t) {
    return velocity(model, traj.frames(), t);
}

/// Mean over t in t_set and n in 1..N-1 of |dM^n - (v_t^{n+1} - v_t^n)|^2,
/// with dM = motion_vectors(x1) - motion_vectors(x0) and v evaluated at x_t.
double md_loss(const VelocityModel& model, const LatentTrajectory& x0, const LatentTrajectory& x1,
               std::span<const double> t_set);

struct LoraGradient {
    Matrix d_a;
    Matrix d_b;
    double loss = 0.0;
};

/// Closed-form gradient of md_loss with respect to the adapter.
LoraGradient md_loss_grad(const VelocityModel& model, const LatentTrajectory& x0, const LatentTrajectory& x1,
                          std::span<const double> t_set);

struct MdTrainConfig {
    int steps = 400;
    double learning_rate = 1e-4;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    int t_samples = 8;
    std::uint64_t seed = 11;

    void validate() const;
};

/// Fixed quadrature grid used to report the loss before and after training:
/// midpoints of `count` equal bins of [0, 1].
std::vector<double> evaluation_t_grid(int count = 16);

struct MdTrainResult {
    VelocityModel model;
    LatentTrajectory noise;            // x0 used for training
    std::vector<double> loss_log;      // per-step loss on the sampled t values
    double initial_loss = 0.0;         // on evaluation_t_grid()
    double final_loss = 0.0;
};

/// Adam on L_md over the adapter only. x0 is seeded standard Gaussian noise
/// shaped like the reference; t is sampled uniformly each step.
MdTrainResult train_mr_lora(const LatentTrajectory& reference, const VelocityModel& model, const MdTrainConfig& config);

/// Standard normal N x d_lat trajectory.
LatentTrajectory gaussian_trajectory(int frames, int d_lat, std::uint64_t seed);

/// Explicit Euler from t = 0 to t = 1 with `steps` uniform steps.
Matrix rf_integrate(const VelocityModel& model, const Matrix& x0, int steps);
LatentTrajectory rf_integrate(const VelocityModel& model, const LatentTrajectory& x0, int steps);

/// Explicit Euler from t = 1 back to t = 0: x <- x - h v(x, t).
Matrix rf_invert(const VelocityModel& model, const Matrix& x1, int steps);
LatentTrajectory rf_invert(const VelocityModel& model, const LatentTrajectory& x1, int steps);

enum class GenerationMode { from_noise, from_inversion };

std::string to_string(GenerationMode mode);
GenerationMode generation_mode_from_string(std::string_view name);

/// from_noise integrates seeded Gaussian noise with `frames` rows;
/// from_inversion inverts the reference and integrates back.
LatentTrajectory generate(const VelocityModel& model, GenerationMode mode,
                          const std::optional<LatentTrajectory>& reference, int steps, std::uint64_t seed,
                          int frames = 17);

/// Smooth seeded sinusoidal path ("water drop" motion fixture).
LatentTrajectory water_drop_reference(int frames = 17, int d_lat = 16, std::uint64_t seed = 2024);

/// Cosine between flattened motion vectors of two trajectories.
double motion_cosine(const LatentTrajectory& a, const LatentTrajectory& b);

inline constexpr const char* kModelFormat = "VMODEL/1";

void save_model(const VelocityModel& model, const std::filesystem::path& path);
VelocityModel load_model(const std::filesystem::path& path);

void save_trajectory(const LatentTrajectory& traj, const std::filesystem::path& path);
LatentTrajectory load_trajectory(const std::filesystem::path& path);

}  // namespace kdcvg
