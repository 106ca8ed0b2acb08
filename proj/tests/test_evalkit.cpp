#include "kdcvg/errors.hpp"
#include "kdcvg/evalkit.hpp"
#include "kdcvg/motion.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

using namespace kdcvg;

namespace {

FrameEmbeddings frames_of(std::initializer_list<std::vector<double>> rows) {
    const auto cols = static_cast<Eigen::Index>(rows.begin()->size());
    Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
    Eigen::Index r = 0;
    for (const auto& row : rows) {
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = row[static_cast<std::size_t>(c)];
        ++r;
    }
    return {m};
}

Embedding vec(std::initializer_list<double> v) {
    Vector e(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) e(i++) = x;
    return Embedding(e);
}

const std::vector<double> kPublishedMinMax{55.66, 44.69, 47.06, 56.10, 65.36, 81.80};

}  // namespace

TEST_CASE("textual alignment") {
    const double c = std::sqrt(0.75);
    CHECK(textual_alignment(frames_of({{1, 0}, {1, 0}}), vec({1, 0})) == doctest::Approx(100.0));
    CHECK(textual_alignment(frames_of({{0, 1}, {0, -1}}), vec({1, 0})) == doctest::Approx(0.0));
    CHECK(textual_alignment(frames_of({{1, 0}, {0.5, c}}), vec({1, 0})) == doctest::Approx(75.0));
    CHECK(textual_alignment(frames_of({{-1, 0}}), vec({1, 0})) == 0.0);
    CHECK_THROWS(textual_alignment(frames_of({{1, 0}}), vec({0, 0})));
    CHECK_THROWS_AS(textual_alignment(frames_of({{1, 0}}), vec({1, 0, 0})), DimensionError);
}

TEST_CASE("temporal consistency") {
    CHECK(temporal_consistency(frames_of({{0, 1}, {0, 1}, {0, 1}})) == doctest::Approx(100.0));
    CHECK(temporal_consistency(frames_of({{1, 0}, {0, 1}, {1, 0}})) == doctest::Approx(0.0));
    CHECK(temporal_consistency(frames_of({{1, 0}, {1, 0}, {0.8, 0.6}})) == doctest::Approx(90.0));
    CHECK_THROWS(temporal_consistency(frames_of({{1, 0}})));
}

TEST_CASE("frame embeddings are unit rows of a seeded projection") {
    const auto traj = water_drop_reference();
    const Matrix p = frame_projection(64, 16, 5);
    CHECK(p == frame_projection(64, 16, 5));
    CHECK_FALSE(p == frame_projection(64, 16, 6));
    const auto f = embed_frames(traj, p);
    REQUIRE(f.frames.rows() == 17);
    for (Eigen::Index i = 0; i < f.frames.rows(); ++i) CHECK(f.frames.row(i).norm() == doctest::Approx(1.0));
    CHECK_THROWS_AS(embed_frames(traj, frame_projection(64, 8, 5)), DimensionError);
}

TEST_CASE("dynamic degree proxy") {
    CHECK(dynamic_degree_proxy(LatentTrajectory(Matrix::Constant(6, 3, 1.5))) == 0.0);

    const auto traj = water_drop_reference();
    double total = 0.0;
    for (int n = 0; n + 1 < traj.frame_count(); ++n) {
        double sq = 0.0;
        for (int j = 0; j < traj.latent_dim(); ++j) {
            const double d = traj.frames()(n + 1, j) - traj.frames()(n, j);
            sq += d * d;
        }
        total += std::sqrt(sq);
    }
    const double mean = total / (traj.frame_count() - 1);
    CHECK(dynamic_degree_proxy(traj) == doctest::Approx(100.0 * (1.0 - std::exp(-mean))).epsilon(1e-12));

    // Same mean step length, different paths.
    Matrix a(3, 2);
    a << 0, 0, 1, 0, 2, 0;
    Matrix b(3, 2);
    b << 0, 0, 0, 1, 1, 1;
    CHECK(dynamic_degree_proxy(LatentTrajectory(a)) == dynamic_degree_proxy(LatentTrajectory(b)));
}

TEST_CASE("motion smoothness proxy") {
    Matrix line(5, 2);
    for (int n = 0; n < 5; ++n) line.row(n) << 0.5 * n, -2.0 * n + 1;
    CHECK(motion_smoothness_proxy(LatentTrajectory(line)) == doctest::Approx(100.0));
    CHECK(motion_smoothness_proxy(LatentTrajectory(Matrix::Constant(4, 2, 3.0))) == 100.0);

    Matrix kink(4, 1);
    kink << 0, 1, 0, 2;  // second differences -2, 3
    CHECK(motion_smoothness_proxy(LatentTrajectory(kink)) == doctest::Approx(100.0 / (1.0 + 2.5)));
    CHECK_THROWS(motion_smoothness_proxy(LatentTrajectory(Matrix::Zero(2, 2))));
}

TEST_CASE("Min-Max reproduces the published six-row column") {
    const auto result = minmax_aggregate(table2_raw_metrics());
    REQUIRE(result.scores.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(std::abs(result.scores[i] - kPublishedMinMax[i]) <= 0.05);
    CHECK(result.warnings.empty());
}

TEST_CASE("Min-Max degenerate columns and errors") {
    testing::WarningCapture captured;
    Matrix same(2, 4);
    same << 1, 2, 3, 4, 1, 2, 3, 4;
    const auto result = minmax_aggregate(same);
    CHECK(result.scores == std::vector<double>{0.0, 0.0});
    CHECK(result.warnings.size() == 4);
    CHECK(captured.messages.size() == 4);
    CHECK_THROWS(minmax_aggregate(Matrix::Ones(1, 4)));
    Matrix bad = Matrix::Ones(3, 4);
    bad(1, 2) = std::nan("");
    CHECK_THROWS(minmax_aggregate(bad));
}

TEST_CASE("Min-Max is invariant to positive affine column maps") {
    const auto rows = table2_raw_metrics();
    const auto base = minmax_aggregate(rows).scores;
    for (int col = 0; col < 4; ++col) {
        auto moved = rows;
        for (auto& r : moved) {
            double* fields[] = {&r.textual_alignment, &r.temporal_consistency, &r.dynamic_degree, &r.motion_smoothness};
            *fields[col] = 3.7 * *fields[col] - 12.0;
        }
        const auto scores = minmax_aggregate(moved).scores;
        for (std::size_t i = 0; i < base.size(); ++i) CHECK(scores[i] == doctest::Approx(base[i]).epsilon(1e-12));
    }
}

TEST_CASE("raw metrics CSV") {
    std::ifstream in(std::string(KDCVG_DATA_DIR) + "/table2_raw.csv");
    REQUIRE(in);
    const auto rows = read_raw_metrics_csv(in);
    const auto embedded = table2_raw_metrics();
    REQUIRE(rows.size() == embedded.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(rows[i].method == embedded[i].method);
        CHECK(rows[i].dynamic_degree == embedded[i].dynamic_degree);
    }
    std::istringstream bad_header("name,a,b,c,d\nx,1,2,3,4\n");
    CHECK_THROWS_AS(read_raw_metrics_csv(bad_header), ParseError);
    std::istringstream bad_value(
        "method,textual_alignment,temporal_consistency,dynamic_degree,motion_smoothness\nx,1,two,3,4\n");
    CHECK_THROWS_AS(read_raw_metrics_csv(bad_value), ParseError);
}

TEST_CASE("report rendering") {
    const auto report = make_report(table2_raw_metrics(), 0, false);
    const auto j = nlohmann::json::parse(report.to_json());
    CHECK(j.dump().find("KD-CVG") != std::string::npos);
    CHECK(report.to_table().find("81.81") != std::string::npos);
    CHECK(report.to_json() == make_report(table2_raw_metrics(), 0, false).to_json());

    const auto proxy = make_report({table2_raw_metrics()[0]}, 17, true);
    CHECK_FALSE(proxy.methods[0].min_max_score.has_value());
    CHECK(proxy.to_json().find("dynamic_degree_proxy") != std::string::npos);
    CHECK(proxy.to_table().find("proxy") != std::string::npos);
}
