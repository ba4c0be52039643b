#pragma once
#include <fstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "touchline/scene.hpp"

namespace touchline {

// Line-delimited scene records; key names are fixed in docs/formats.md.

namespace detail {

inline nlohmann::json point_json(const std::optional<Point2>& p) {
    if (!p) return nullptr;
    return nlohmann::json::array({p->x, p->y});
}

inline std::optional<Point2> point_from(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    if (!j.is_array() || j.size() != 2) throw Error("keypoint must be [x, y] or null");
    const Point2 p{j[0].get<double>(), j[1].get<double>()};
    if (p.x < 0.0 || p.x > 1.0 || p.y < 0.0 || p.y > 1.0)
        throw Error("keypoint outside [0,1]");
    return p;
}

inline int category_index(const std::string& name) {
    for (int i = 0; i < kNumCategories; ++i)
        if (name == kCategoryNames[i]) return i;
    throw Error("unknown category: " + name);
}

inline int color_index(const std::string& name) {
    for (int i = 0; i < kNumColors; ++i)
        if (name == kColorNames[i]) return i;
    throw Error("unknown color: " + name);
}

} // namespace detail

inline nlohmann::json scene_to_json(const Scene& s) {
    nlohmann::json j;
    j["id"] = s.id;
    j["condition"] = to_string(s.condition);
    nlohmann::json objs = nlohmann::json::array();
    for (const SceneObject& o : s.objects) {
        objs.push_back({{"cx", o.box.cx},
                        {"cy", o.box.cy},
                        {"w", o.box.w},
                        {"h", o.box.h},
                        {"category", kCategoryNames[o.category]},
                        {"color", kColorNames[o.color]},
                        {"is_referent", o.is_referent}});
    }
    j["objects"] = std::move(objs);
    if (s.pose) {
        j["pose"] = {{"eye", detail::point_json(s.pose->eye)},
                     {"fingertip", detail::point_json(s.pose->fingertip)},
                     {"elbow", detail::point_json(s.pose->elbow)},
                     {"wrist", detail::point_json(s.pose->wrist)},
                     {"shoulder", detail::point_json(s.pose->shoulder)}};
    } else {
        j["pose"] = nullptr;
    }
    j["utterance"] = s.utterance;
    j["utterance_text"] = s.utterance_text;
    j["referent_span"] = {s.span_begin, s.span_end};
    return j;
}

inline Scene scene_from_json(const nlohmann::json& j) {
    Scene s;
    s.id = j.at("id").get<std::int64_t>();
    s.condition = condition_from_string(j.at("condition").get<std::string>());
    int referents = 0;
    for (const auto& oj : j.at("objects")) {
        SceneObject o;
        o.box = {oj.at("cx").get<double>(), oj.at("cy").get<double>(),
                 oj.at("w").get<double>(), oj.at("h").get<double>()};
        if (o.box.w <= 0.0 || o.box.h <= 0.0) throw Error("box extents must be positive");
        if (o.box.cx < 0.0 || o.box.cx > 1.0 || o.box.cy < 0.0 || o.box.cy > 1.0)
            throw Error("box center outside [0,1]");
        o.category = detail::category_index(oj.at("category").get<std::string>());
        o.color = detail::color_index(oj.at("color").get<std::string>());
        o.is_referent = oj.at("is_referent").get<bool>();
        referents += o.is_referent;
        s.objects.push_back(o);
    }
    if (referents != 1) throw Error("scene must have exactly one referent");
    const auto& pj = j.at("pose");
    if (!pj.is_null()) {
        HumanPose p;
        p.eye = detail::point_from(pj.at("eye"));
        p.fingertip = detail::point_from(pj.at("fingertip"));
        p.elbow = detail::point_from(pj.at("elbow"));
        p.wrist = detail::point_from(pj.at("wrist"));
        p.shoulder = detail::point_from(pj.at("shoulder"));
        s.pose = p;
    }
    s.utterance = j.at("utterance").get<std::vector<int>>();
    if (static_cast<int>(s.utterance.size()) > kMaxUtteranceLen)
        throw Error("utterance longer than the supported maximum");
    for (int tok : s.utterance)
        if (tok < 0 || tok >= kVocabSize) throw Error("utterance token out of vocabulary");
    s.utterance_text = j.at("utterance_text").get<std::string>();
    const auto& span = j.at("referent_span");
    if (!span.is_array() || span.size() != 2) throw Error("referent_span must be [begin, end)");
    s.span_begin = span[0].get<int>();
    s.span_end = span[1].get<int>();
    if (s.span_begin < 0 || s.span_end > static_cast<int>(s.utterance.size()) ||
        s.span_begin >= s.span_end)
        throw Error("referent_span out of range");
    return s;
}

inline void write_scenes(const std::string& path, const std::vector<Scene>& scenes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    for (const Scene& s : scenes) out << scene_to_json(s).dump() << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline std::vector<Scene> read_scenes(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open for reading: " + path);
    std::vector<Scene> scenes;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        try {
            scenes.push_back(scene_from_json(nlohmann::json::parse(line)));
        } catch (const std::exception& e) {
            throw MalformedRecord(path + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return scenes;
}

} // namespace touchline
