#include "kdcvg/types.hpp"

#include "kdcvg/errors.hpp"

#include <algorithm>
#include <cctype>

namespace kdcvg {
namespace {

std::string flatten(std::string_view text) {
    std::string out(text);
    std::replace(out.begin(), out.end(), '\n', ' ');
    std::replace(out.begin(), out.end(), '\r', ' ');
    return out;
}

}  // namespace

std::string ScriptComponents::to_labeled() const {
    return "subject: " + flatten(subject) + "\nscene: " + flatten(scene) + "\nmotion: " + flatten(motion);
}

Script Script::from_components(const ScriptComponents& components) {
    return Script{components.to_labeled(), components};
}

std::string Script::content_text() const {
    if (!structured) return raw;
    return structured->subject + " " + structured->scene + " " + structured->motion;
}

LatentTrajectory::LatentTrajectory(Matrix frames) : frames_(std::move(frames)) {
    if (frames_.rows() < 2) {
        throw DimensionError("trajectory needs at least 2 frames, got " + std::to_string(frames_.rows()));
    }
    if (frames_.cols() < 1) throw DimensionError("trajectory latent dimension must be positive");
    if (!frames_.allFinite()) throw Error("trajectory contains non-finite values");
}

std::string trim(std::string_view text) {
    const auto first = text.find_first_not_of(" \t\r\n\f\v");
    if (first == std::string_view::npos) return {};
    const auto last = text.find_last_not_of(" \t\r\n\f\v");
    return std::string(text.substr(first, last - first + 1));
}

std::string to_lower_ascii(std::string_view text) {
    std::string out(text);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    return out;
}

}  // namespace kdcvg
