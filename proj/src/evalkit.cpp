#include "kdcvg/evalkit.hpp"

#include "kdcvg/errors.hpp"
#include "kdcvg/log.hpp"
#include "kdcvg/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

namespace kdcvg {

Matrix frame_projection(int d, int d_lat, std::uint64_t seed) {
    Rng rng(seed);
    Matrix p(d, d_lat);
    for (int r = 0; r < d; ++r) {
        for (int c = 0; c < d_lat; ++c) p(r, c) = rng.normal();
    }
    return p;
}

FrameEmbeddings embed_frames(const LatentTrajectory& traj, const Matrix& projection) {
    if (projection.cols() != traj.latent_dim()) {
        throw DimensionError("projection expects d_lat=" + std::to_string(projection.cols()) + ", got " +
                             std::to_string(traj.latent_dim()));
    }
    Matrix out = traj.frames() * projection.transpose();
    for (Eigen::Index i = 0; i < out.rows(); ++i) {
        const double n = out.row(i).norm();
        if (n > 0.0) out.row(i) /= n;
    }
    return {std::move(out)};
}

double textual_alignment(const FrameEmbeddings& frames, const Embedding& text) {
    if (frames.frames.cols() != text.dim()) {
        throw DimensionError("frame embeddings have d=" + std::to_string(frames.frames.cols()) +
                             ", text embedding has d=" + std::to_string(text.dim()));
    }
    const double tn = text.norm();
    if (tn == 0.0) throw Error("textual alignment is undefined for a zero text embedding");
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i < frames.frames.rows(); ++i) {
        const double fn = frames.frames.row(i).norm();
        if (fn == 0.0) continue;
        sum += frames.frames.row(i).dot(text.values) / (fn * tn);
        ++count;
    }
    if (count == 0) throw Error("textual alignment needs at least one non-zero frame");
    return 100.0 * std::max(0.0, sum / count);
}

double temporal_consistency(const FrameEmbeddings& frames) {
    const auto& f = frames.frames;
    if (f.rows() < 2) throw Error("temporal consistency needs at least 2 frames");
    double sum = 0.0;
    int count = 0;
    for (Eigen::Index i = 0; i + 1 < f.rows(); ++i) {
        const double a = f.row(i).norm();
        const double b = f.row(i + 1).norm();
        if (a == 0.0 || b == 0.0) continue;
        sum += f.row(i).dot(f.row(i + 1)) / (a * b);
        ++count;
    }
    if (count == 0) return 0.0;
    return 100.0 * std::max(0.0, sum / count);
}

double dynamic_degree_proxy(const LatentTrajectory& traj) {
    const Matrix& x = traj.frames();
    double total = 0.0;
    for (Eigen::Index n = 0; n + 1 < x.rows(); ++n) total += (x.row(n + 1) - x.row(n)).norm();
    const double mean = total / static_cast<double>(x.rows() - 1);
    return 100.0 * (1.0 - std::exp(-mean));
}

double motion_smoothness_proxy(const LatentTrajectory& traj) {
    const Matrix& x = traj.frames();
    if (x.rows() < 3) throw Error("motion smoothness needs at least 3 frames");
    double total = 0.0;
    for (Eigen::Index n = 1; n + 1 < x.rows(); ++n) total += (x.row(n + 1) - 2.0 * x.row(n) + x.row(n - 1)).norm();
    return 100.0 / (1.0 + total / static_cast<double>(x.rows() - 2));
}

MinMaxResult minmax_aggregate(const Matrix& raw) {
    if (raw.rows() < 2) throw Error("min-max normalization needs at least two methods");
    if (!raw.allFinite()) throw Error("raw metrics contain non-finite values");
    MinMaxResult result;
    Vector sums = Vector::Zero(raw.rows());
    for (Eigen::Index c = 0; c < raw.cols(); ++c) {
        const double lo = raw.col(c).minCoeff();
        const double hi = raw.col(c).maxCoeff();
        if (hi == lo) {
            std::string w = "metric column " + std::to_string(c) + " is constant across methods; it contributes 0";
            log::warn(w);
            result.warnings.push_back(std::move(w));
            continue;
        }
        sums += ((raw.col(c).array() - lo) / (hi - lo)).matrix();
    }
    for (Eigen::Index r = 0; r < raw.rows(); ++r) {
        result.scores.push_back(100.0 * sums[r] / static_cast<double>(raw.cols()));
    }
    return result;
}

namespace {

Matrix to_matrix(const std::vector<RawMetrics>& rows) {
    Matrix m(static_cast<Eigen::Index>(rows.size()), 4);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto r = static_cast<Eigen::Index>(i);
        m(r, 0) = rows[i].textual_alignment;
        m(r, 1) = rows[i].temporal_consistency;
        m(r, 2) = rows[i].dynamic_degree;
        m(r, 3) = rows[i].motion_smoothness;
    }
    return m;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(trim(cell));
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

double parse_number(const std::string& cell, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": '" + cell + "' is not a number");
    }
}

}  // namespace

MinMaxResult minmax_aggregate(const std::vector<RawMetrics>& rows) { return minmax_aggregate(to_matrix(rows)); }

std::vector<RawMetrics> read_raw_metrics_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::vector<RawMetrics> rows;
    bool header = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        const auto cells = split_csv_line(line);
        if (header) {
            header = false;
            if (cells.size() != 5 || cells[0] != "method") {
                throw ParseError("raw metrics CSV must start with the header "
                                 "method,textual_alignment,temporal_consistency,dynamic_degree,motion_smoothness");
            }
            continue;
        }
        if (cells.size() != 5) throw ParseError("line " + std::to_string(line_no) + ": expected 5 columns");
        rows.push_back({cells[0], parse_number(cells[1], line_no), parse_number(cells[2], line_no),
                        parse_number(cells[3], line_no), parse_number(cells[4], line_no)});
    }
    return rows;
}

std::vector<RawMetrics> table2_raw_metrics() {
    return {{"Show-1", 31.34, 96.83, 44.44, 98.04},      {"VideoCrafter2", 30.43, 97.03, 88.89, 91.91},
            {"Open Sora", 28.84, 97.94, 22.22, 98.92},   {"w/. MR-LoRA", 29.45, 98.15, 16.00, 99.24},
            {"w/. RFI", 30.59, 97.55, 60.00, 97.52},     {"KD-CVG", 30.68, 97.95, 72.00, 98.65}};
}

MetricReport make_report(std::vector<RawMetrics> rows, std::uint64_t projection_seed, bool proxies) {
    MetricReport report;
    report.projection_seed = projection_seed;
    report.proxies = proxies;
    std::optional<MinMaxResult> mm;
    if (rows.size() >= 2) {
        mm = minmax_aggregate(rows);
        report.warnings = mm->warnings;
    }
    for (std::size_t i = 0; i < rows.size(); ++i) {
        report.methods.push_back({std::move(rows[i]), mm ? std::optional<double>(mm->scores[i]) : std::nullopt});
    }
    return report;
}

namespace {

double round2(double v) { return std::round(v * 100.0) / 100.0; }

}  // namespace

std::string MetricReport::to_json() const {
    using nlohmann::json;
    json methods_json = json::array();
    for (const auto& m : methods) {
        json entry{{"method", m.raw.method},
                   {"textual_alignment", round2(m.raw.textual_alignment)},
                   {"temporal_consistency", round2(m.raw.temporal_consistency)},
                   {proxies ? "dynamic_degree_proxy" : "dynamic_degree", round2(m.raw.dynamic_degree)},
                   {proxies ? "motion_smoothness_proxy" : "motion_smoothness", round2(m.raw.motion_smoothness)},
                   {"min_max_score", m.min_max_score ? json(round2(*m.min_max_score)) : json(nullptr)}};
        methods_json.push_back(std::move(entry));
    }
    json doc{{"methods", methods_json}, {"warnings", warnings}};
    if (proxies) doc["projection_seed"] = projection_seed;
    return doc.dump(2);
}

std::string MetricReport::to_table() const {
    const std::vector<std::string> headers = {
        "method", "text_align", "temporal", proxies ? "dynamic*" : "dynamic", proxies ? "smooth*" : "smooth", "min_max"};
    std::size_t name_width = headers[0].size();
    for (const auto& m : methods) name_width = std::max(name_width, m.raw.method.size());
    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(name_width)) << headers[0];
    for (std::size_t i = 1; i < headers.size(); ++i) out << "  " << std::right << std::setw(10) << headers[i];
    out << "\n" << std::fixed << std::setprecision(2);
    for (const auto& m : methods) {
        out << std::left << std::setw(static_cast<int>(name_width)) << m.raw.method << std::right;
        for (const double v : {m.raw.textual_alignment, m.raw.temporal_consistency, m.raw.dynamic_degree,
                               m.raw.motion_smoothness}) {
            out << "  " << std::setw(10) << v;
        }
        if (m.min_max_score) out << "  " << std::setw(10) << *m.min_max_score;
        else out << "  " << std::setw(10) << "-";
        out << "\n";
    }
    if (proxies) out << "* latent-space proxy, not the VBench metric\n";
    for (const auto& w : warnings) out << "warning: " << w << "\n";
    return out.str();
}

}  // namespace kdcvg
