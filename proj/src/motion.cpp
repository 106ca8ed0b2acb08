#include "kdcvg/motion.hpp"

#include "kdcvg/errors.hpp"
#include "kdcvg/json_io.hpp"
#include "kdcvg/log.hpp"
#include "kdcvg/optim.hpp"
#include "kdcvg/rng.hpp"

#include <cmath>
#include <numbers>

namespace kdcvg {

using json_io::json;

namespace {

void require_same_shape(const LatentTrajectory& a, const LatentTrajectory& b) {
    if (a.frame_count() != b.frame_count() || a.latent_dim() != b.latent_dim()) {
        throw DimensionError("trajectory shape mismatch: " + std::to_string(a.frame_count()) + "x" +
                             std::to_string(a.latent_dim()) + " vs " + std::to_string(b.frame_count()) + "x" +
                             std::to_string(b.latent_dim()));
    }
}

void require_model_fits(const VelocityModel& model, int d_lat) {
    model.validate();
    if (model.latent_dim() != d_lat) {
        throw DimensionError("model latent dim " + std::to_string(model.latent_dim()) + " != trajectory d_lat " +
                             std::to_string(d_lat));
    }
}

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, double std_dev, Rng& rng) {
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = std_dev * rng.normal();
    }
    return m;
}

// Rows [M_t^n, 0, 1/N]: frame differences of the model input at time t.
Matrix input_differences(const Matrix& xt) {
    const Eigen::Index n = xt.rows();
    const Eigen::Index d = xt.cols();
    Matrix dz(n - 1, d + 2);
    dz.leftCols(d) = xt.bottomRows(n - 1) - xt.topRows(n - 1);
    dz.col(d).setZero();
    dz.col(d + 1).setConstant(1.0 / static_cast<double>(n));
    return dz;
}

}  // namespace

MotionVectors motion_vectors(const LatentTrajectory& traj) {
    const Matrix& x = traj.frames();
    const Eigen::Index n = x.rows();
    if (n < 2) throw DimensionError("motion vectors need at least 2 frames");
    return x.bottomRows(n - 1) - x.topRows(n - 1);
}

LatentTrajectory interpolate_latent(const LatentTrajectory& x0, const LatentTrajectory& x1, double t) {
    require_same_shape(x0, x1);
    if (t == 0.0) return x0;
    if (t == 1.0) return x1;
    return LatentTrajectory(t * x1.frames() + (1.0 - t) * x0.frames());
}

void VelocityModel::validate() const {
    const auto d = w_base.rows();
    if (d < 1 || w_base.cols() != d + 2) throw DimensionError("base weight must be d_lat x (d_lat + 2)");
    if (lora.rank < 1 || lora.a.rows() != lora.rank || lora.a.cols() != d + 2 || lora.b.rows() != d ||
        lora.b.cols() != lora.rank) {
        throw DimensionError("LoRA adapter shapes are inconsistent with the base weight");
    }
}

VelocityModel make_velocity_model(const VelocityModelSpec& spec) {
    if (spec.d_lat < 1) throw ConfigError("d_lat must be positive");
    const int in = spec.d_lat + 2;
    const int cap = std::min(spec.d_lat, in);
    int rank = spec.rank;
    if (rank < 1) throw ConfigError("LoRA rank must be positive");
    if (rank > cap) {
        log::warn("LoRA rank " + std::to_string(rank) + " exceeds the toy model's inner dimension; capped at " +
                  std::to_string(cap));
        rank = cap;
    }
    Rng rng(spec.seed);
    const double base_std = spec.base_std > 0.0 ? spec.base_std : 1.0 / std::sqrt(static_cast<double>(in));
    VelocityModel model;
    model.w_base = gaussian_matrix(spec.d_lat, in, base_std, rng);
    model.lora.rank = rank;
    model.lora.scale = spec.scale;
    model.lora.a = gaussian_matrix(rank, in, 1.0 / std::sqrt(static_cast<double>(in)), rng);
    model.lora.b = Matrix::Zero(spec.d_lat, rank);
    return model;
}

Matrix velocity(const VelocityModel& model, const Matrix& frames, double t) {
    require_model_fits(model, static_cast<int>(frames.cols()));
    const Eigen::Index n = frames.rows();
    const Eigen::Index d = frames.cols();
    Matrix z(n, d + 2);
    z.leftCols(d) = frames;
    z.col(d).setConstant(t);
    for (Eigen::Index i = 0; i < n; ++i) z(i, d + 1) = static_cast<double>(i + 1) / static_cast<double>(n);
    // Skip the adapter product while B is still zero so the base path is exact.
    if (model.lora.b.isZero(0.0)) return z * model.w_base.transpose();
    return z * model.effective_weight().transpose();
}

double md_loss(const VelocityModel& model, const LatentTrajectory& x0, const LatentTrajectory& x1,
               std::span<const double> t_set) {
    require_same_shape(x0, x1);
    require_model_fits(model, x0.latent_dim());
    if (t_set.empty()) throw Error("md_loss needs at least one t sample");
    const Matrix target = motion_vectors(x1) - motion_vectors(x0);
    const Eigen::Index n = x0.frame_count();
    double total = 0.0;
    for (const double t : t_set) {
        const Matrix v = velocity(model, interpolate_latent(x0, x1, t), t);
        const Matrix dv = v.bottomRows(n - 1) - v.topRows(n - 1);
        total += (target - dv).squaredNorm();
    }
    return total / (static_cast<double>(t_set.size()) * static_cast<double>(n - 1));
}

LoraGradient md_loss_grad(const VelocityModel& model, const LatentTrajectory& x0, const LatentTrajectory& x1,
                          std::span<const double> t_set) {
    require_same_shape(x0, x1);
    require_model_fits(model, x0.latent_dim());
    if (t_set.empty()) throw Error("md_loss needs at least one t sample");
    const Matrix target = motion_vectors(x1) - motion_vectors(x0);
    const Eigen::Index n = x0.frame_count();
    const Matrix w = model.effective_weight();
    const double count = static_cast<double>(t_set.size()) * static_cast<double>(n - 1);

    // The model is affine, so v^{n+1} - v^n = W_eff (z^{n+1} - z^n).
    Matrix grad_w = Matrix::Zero(w.rows(), w.cols());
    double total = 0.0;
    for (const double t : t_set) {
        const Matrix dz = input_differences(t * x1.frames() + (1.0 - t) * x0.frames());
        const Matrix residual = target - dz * w.transpose();
        total += residual.squaredNorm();
        grad_w -= residual.transpose() * dz;
    }
    grad_w *= 2.0 / count;
    const double s = model.lora.scale / model.lora.rank;
    return {s * model.lora.b.transpose() * grad_w, s * grad_w * model.lora.a.transpose(), total / count};
}

void MdTrainConfig::validate() const {
    if (steps < 1) throw ConfigError("motion training steps must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("motion learning rate must be > 0");
    if (t_samples < 1) throw ConfigError("t_samples must be >= 1");
}

std::vector<double> evaluation_t_grid(int count) {
    std::vector<double> grid(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) grid[static_cast<std::size_t>(i)] = (i + 0.5) / count;
    return grid;
}

LatentTrajectory gaussian_trajectory(int frames, int d_lat, std::uint64_t seed) {
    Rng rng(seed);
    return LatentTrajectory(gaussian_matrix(frames, d_lat, 1.0, rng));
}

MdTrainResult train_mr_lora(const LatentTrajectory& reference, const VelocityModel& model,
                            const MdTrainConfig& config) {
    config.validate();
    require_model_fits(model, reference.latent_dim());

    MdTrainResult result{model, gaussian_trajectory(reference.frame_count(), reference.latent_dim(),
                                                    derive_seed(config.seed, 0)),
                         {}, 0.0, 0.0};
    const auto grid = evaluation_t_grid();
    result.initial_loss = md_loss(result.model, result.noise, reference, grid);

    Rng t_rng(derive_seed(config.seed, 1));
    const AdamHyper hyper{config.learning_rate, config.adam_beta1, config.adam_beta2, config.adam_eps};
    auto& lora = result.model.lora;
    Matrix m_a = Matrix::Zero(lora.a.rows(), lora.a.cols());
    Matrix v_a = m_a;
    Matrix m_b = Matrix::Zero(lora.b.rows(), lora.b.cols());
    Matrix v_b = m_b;
    std::vector<double> ts(static_cast<std::size_t>(config.t_samples));
    result.loss_log.reserve(static_cast<std::size_t>(config.steps));

    for (int step = 1; step <= config.steps; ++step) {
        for (auto& t : ts) t = t_rng.uniform();
        const LoraGradient g = md_loss_grad(result.model, result.noise, reference, ts);
        if (!std::isfinite(g.loss) || !g.d_a.allFinite() || !g.d_b.allFinite()) {
            throw TrainingError("non-finite motion distillation loss at step " + std::to_string(step));
        }
        result.loss_log.push_back(g.loss);
        adam_update(lora.a, m_a, v_a, g.d_a, step, hyper);
        adam_update(lora.b, m_b, v_b, g.d_b, step, hyper);
    }
    result.model.adapted = true;
    result.final_loss = md_loss(result.model, result.noise, reference, grid);
    return result;
}

Matrix rf_integrate(const VelocityModel& model, const Matrix& x0, int steps) {
    if (steps < 1) throw Error("Euler integration needs at least one step");
    const double h = 1.0 / steps;
    Matrix x = x0;
    for (int k = 0; k < steps; ++k) x += h * velocity(model, x, k * h);
    return x;
}

LatentTrajectory rf_integrate(const VelocityModel& model, const LatentTrajectory& x0, int steps) {
    return LatentTrajectory(rf_integrate(model, x0.frames(), steps));
}

Matrix rf_invert(const VelocityModel& model, const Matrix& x1, int steps) {
    if (steps < 1) throw Error("Euler inversion needs at least one step");
    const double h = 1.0 / steps;
    Matrix x = x1;
    for (int k = 0; k < steps; ++k) x -= h * velocity(model, x, 1.0 - k * h);
    return x;
}

LatentTrajectory rf_invert(const VelocityModel& model, const LatentTrajectory& x1, int steps) {
    return LatentTrajectory(rf_invert(model, x1.frames(), steps));
}

std::string to_string(GenerationMode mode) {
    return mode == GenerationMode::from_noise ? "noise" : "rfi";
}

GenerationMode generation_mode_from_string(std::string_view name) {
    if (name == "noise" || name == "from_noise") return GenerationMode::from_noise;
    if (name == "rfi" || name == "from_inversion") return GenerationMode::from_inversion;
    throw ConfigError("unknown generation mode '" + std::string(name) + "'");
}

LatentTrajectory generate(const VelocityModel& model, GenerationMode mode,
                          const std::optional<LatentTrajectory>& reference, int steps, std::uint64_t seed,
                          int frames) {
    if (mode == GenerationMode::from_inversion) {
        if (!reference) throw Error("generation from inversion requires a reference trajectory");
        return rf_integrate(model, rf_invert(model, *reference, steps), steps);
    }
    return rf_integrate(model, gaussian_trajectory(frames, model.latent_dim(), seed), steps);
}

LatentTrajectory water_drop_reference(int frames, int d_lat, std::uint64_t seed) {
    Rng rng(seed);
    Vector amplitude(d_lat);
    Vector phase(d_lat);
    for (int j = 0; j < d_lat; ++j) {
        amplitude[j] = 0.5 + rng.uniform();
        phase[j] = 2.0 * std::numbers::pi * rng.uniform();
    }
    Matrix x(frames, d_lat);
    for (int n = 0; n < frames; ++n) {
        const double angle = 2.0 * std::numbers::pi * (n + 1) / frames;
        for (int j = 0; j < d_lat; ++j) x(n, j) = amplitude[j] * std::sin(angle + phase[j]);
    }
    return LatentTrajectory(std::move(x));
}

double motion_cosine(const LatentTrajectory& a, const LatentTrajectory& b) {
    require_same_shape(a, b);
    const Matrix ma = motion_vectors(a);
    const Matrix mb = motion_vectors(b);
    const double na = ma.norm();
    const double nb = mb.norm();
    if (na == 0.0 || nb == 0.0) return 0.0;
    return ma.cwiseProduct(mb).sum() / (na * nb);
}

void save_model(const VelocityModel& model, const std::filesystem::path& path) {
    model.validate();
    json doc{{"format", kModelFormat},
             {"w_base", json_io::matrix_to_json(model.w_base)},
             {"lora_a", json_io::matrix_to_json(model.lora.a)},
             {"lora_b", json_io::matrix_to_json(model.lora.b)},
             {"rank", model.lora.rank},
             {"scale", model.lora.scale},
             {"adapted", model.adapted}};
    json_io::write_text_file(path, doc.dump() + "\n");
}

VelocityModel load_model(const std::filesystem::path& path) {
    const json doc = json_io::read_json_file(path);
    json_io::require_format(doc, kModelFormat);
    try {
        VelocityModel model;
        model.w_base = json_io::matrix_from_json(doc.at("w_base"), "w_base");
        model.lora.a = json_io::matrix_from_json(doc.at("lora_a"), "lora_a");
        model.lora.b = json_io::matrix_from_json(doc.at("lora_b"), "lora_b");
        model.lora.rank = doc.at("rank").get<int>();
        model.lora.scale = doc.at("scale").get<double>();
        model.adapted = doc.value("adapted", false);
        model.validate();
        return model;
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void save_trajectory(const LatentTrajectory& traj, const std::filesystem::path& path) {
    json_io::write_text_file(path, json_io::trajectory_to_json(traj).dump() + "\n");
}

LatentTrajectory load_trajectory(const std::filesystem::path& path) {
    try {
        return json_io::trajectory_from_json(json_io::read_json_file(path));
    } catch (const json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace kdcvg
