#pragma once

#include "kdcvg/types.hpp"

#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace kdcvg {

/// Per-frame unit vectors (zero rows for zero frames).
struct FrameEmbeddings {
    Matrix frames;  // N x d
};

/// Seeded d x d_lat Gaussian projection shared across one evaluation run.
Matrix frame_projection(int d, int d_lat, std::uint64_t seed);

/// Projects each latent frame and L2-normalizes it.
FrameEmbeddings embed_frames(const LatentTrajectory& traj, const Matrix& projection);

/// 100 * max(0, mean cosine(frame, text)) over non-zero frames.
double textual_alignment(const FrameEmbeddings& frames, const Embedding& text);

/// 100 * max(0, mean cosine(frame_n, frame_{n+1})) over pairs of non-zero frames.
double temporal_consistency(const FrameEmbeddings& frames);

/// 100 * (1 - exp(-mean_n |x^{n+1} - x^n|)). Proxy, not the VBench metric.
double dynamic_degree_proxy(const LatentTrajectory& traj);

/// 100 / (1 + mean_n |x^{n+1} - 2 x^n + x^{n-1}|). Proxy, needs N >= 3.
double motion_smoothness_proxy(const LatentTrajectory& traj);

struct RawMetrics {
    std::string method;
    double textual_alignment = 0.0;
    double temporal_consistency = 0.0;
    double dynamic_degree = 0.0;
    double motion_smoothness = 0.0;
};

struct MinMaxResult {
    std::vector<double> scores;           // percent, aligned with the input rows
    std::vector<std::string> warnings;    // one per degenerate column
};

/// Per column v -> (v - min) / (max - min); per row 100 * mean of the
/// normalized columns. A column with max == min contributes 0 to every row.
/// Throws with fewer than two rows.
MinMaxResult minmax_aggregate(const Matrix& raw);
MinMaxResult minmax_aggregate(const std::vector<RawMetrics>& rows);

/// CSV with header method,textual_alignment,temporal_consistency,dynamic_degree,motion_smoothness.
std::vector<RawMetrics> read_raw_metrics_csv(std::istream& in);

/// Raw four-metric values of the six compared methods (percent), as published.
std::vector<RawMetrics> table2_raw_metrics();

struct MethodReport {
    RawMetrics raw;
    std::optional<double> min_max_score;
};

struct MetricReport {
    std::vector<MethodReport> methods;
    std::vector<std::string> warnings;
    std::uint64_t projection_seed = 0;
    bool proxies = true;

    std::string to_json() const;
    /// Aligned plain-text table, two decimals.
    std::string to_table() const;
};

/// Fills min_max_score when at least two methods are present.
MetricReport make_report(std::vector<RawMetrics> rows, std::uint64_t projection_seed, bool proxies);

}  // namespace kdcvg
