#pragma once

#include <Eigen/Dense>

#include <optional>
#include <string>

namespace kdcvg {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct SellingPoint {
    std::string id;
    std::string text;

    bool operator==(const SellingPoint&) const = default;
};

/// Subject / scene / motion decomposition of a video script.
struct ScriptComponents {
    std::string subject;
    std::string scene;
    std::string motion;

    /// Canonical labeled form: "subject: ...\nscene: ...\nmotion: ...".
    /// Embedded newlines are flattened to spaces so the form stays parseable.
    std::string to_labeled() const;

    bool operator==(const ScriptComponents&) const = default;
};

struct Script {
    std::string raw;
    std::optional<ScriptComponents> structured;

    static Script from_components(const ScriptComponents& components);

    /// Text the captioning metric sees: the component contents without
    /// labels when structured, otherwise the raw text.
    std::string content_text() const;

    bool operator==(const Script&) const = default;
};

/// Text embedding. Either unit L2 norm or exactly zero.
struct Embedding {
    Vector values;

    Embedding() = default;
    explicit Embedding(Vector v) : values(std::move(v)) {}

    static Embedding zeros(int dim) { return Embedding(Vector::Zero(dim)); }

    int dim() const { return static_cast<int>(values.size()); }
    double norm() const { return values.norm(); }
    bool is_zero() const { return values.isZero(0.0); }

    bool operator==(const Embedding& other) const {
        return values.size() == other.values.size() && values == other.values;
    }
};

/// N x d_lat matrix of per-frame latents, one frame per row. N >= 2.
class LatentTrajectory {
public:
    LatentTrajectory() = default;
    explicit LatentTrajectory(Matrix frames);

    const Matrix& frames() const { return frames_; }
    Matrix& frames() { return frames_; }
    int frame_count() const { return static_cast<int>(frames_.rows()); }
    int latent_dim() const { return static_cast<int>(frames_.cols()); }

    bool operator==(const LatentTrajectory& other) const {
        return frames_.rows() == other.frames_.rows() && frames_.cols() == other.frames_.cols() &&
               frames_ == other.frames_;
    }

private:
    Matrix frames_;
};

std::string trim(std::string_view text);
std::string to_lower_ascii(std::string_view text);

}  // namespace kdcvg
