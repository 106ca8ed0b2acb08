#include "kdcvg/json_io.hpp"

#include "kdcvg/errors.hpp"

#include <fstream>
#include <sstream>

namespace kdcvg::json_io {

json matrix_to_json(const Matrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Matrix matrix_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + ": expected an array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    Eigen::Index cols = rows > 0 && j[0].is_array() ? static_cast<Eigen::Index>(j[0].size()) : 0;
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw ParseError(what + ": row " + std::to_string(r) + " is not an array of length " +
                             std::to_string(cols));
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            const auto& v = row[static_cast<std::size_t>(c)];
            if (!v.is_number()) throw ParseError(what + ": non-numeric entry");
            m(r, c) = v.get<double>();
        }
    }
    return m;
}

json vector_to_json(const Vector& v) {
    json arr = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
    return arr;
}

Vector vector_from_json(const json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + ": expected an array of numbers");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError(what + ": non-numeric entry");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

json trajectory_to_json(const LatentTrajectory& traj) {
    return json{{"d_lat", traj.latent_dim()}, {"frames", matrix_to_json(traj.frames())}};
}

LatentTrajectory trajectory_from_json(const json& j) {
    if (!j.is_object() || !j.contains("frames")) throw ParseError("trajectory: missing \"frames\"");
    Matrix frames = matrix_from_json(j.at("frames"), "trajectory frames");
    if (j.contains("d_lat") && j.at("d_lat").get<long>() != frames.cols()) {
        throw ParseError("trajectory: d_lat " + std::to_string(j.at("d_lat").get<long>()) +
                         " does not match frame width " + std::to_string(frames.cols()));
    }
    return LatentTrajectory(std::move(frames));
}

json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return json::parse(buf.str());
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp.string());
        out << text;
        if (!out.flush()) throw Error("failed writing " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
}

void require_format(const json& j, const std::string& expected) {
    if (!j.is_object() || !j.contains("format") || !j.at("format").is_string()) {
        throw FormatVersionError("missing format header, expected \"" + expected + "\"");
    }
    const auto found = j.at("format").get<std::string>();
    if (found != expected) {
        throw FormatVersionError("incompatible format \"" + found + "\", expected \"" + expected + "\"");
    }
}

}  // namespace kdcvg::json_io
