#pragma once
#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "touchline/geometry.hpp"

namespace touchline {

// Fixed vocabulary shared by the generator and the model's text embedding.
inline constexpr int kNumCategories = 5;
inline constexpr int kNumColors = 5;
inline constexpr std::array<const char*, kNumCategories> kCategoryNames = {
    "cup", "chair", "book", "bottle", "frame"};
inline constexpr std::array<const char*, kNumColors> kColorNames = {
    "red", "green", "blue", "yellow", "white"};

// token ids: 0 "the", 1 "near", 2..6 colors, 7..11 categories
inline constexpr int kTokenThe = 0;
inline constexpr int kTokenNear = 1;
inline constexpr int kVocabSize = 2 + kNumColors + kNumCategories;
inline constexpr int kMaxUtteranceLen = 8;

inline int color_token(int color) { return 2 + color; }
inline int category_token(int category) { return 2 + kNumColors + category; }

inline std::string token_text(int id) {
    if (id == kTokenThe) return "the";
    if (id == kTokenNear) return "near";
    if (id >= 2 && id < 2 + kNumColors) return kColorNames[id - 2];
    if (id >= 2 + kNumColors && id < kVocabSize)
        return kCategoryNames[id - 2 - kNumColors];
    throw Error("token id out of vocabulary");
}

enum class Condition { Full, NoPoseChannels, Inpainted };

inline const char* to_string(Condition c) {
    switch (c) {
    case Condition::Full: return "full";
    case Condition::NoPoseChannels: return "nopose";
    default: return "inpainted";
    }
}

inline Condition condition_from_string(const std::string& s) {
    if (s == "full") return Condition::Full;
    if (s == "nopose") return Condition::NoPoseChannels;
    if (s == "inpainted") return Condition::Inpainted;
    throw ConfigError("unknown condition: " + s);
}

struct SceneObject {
    BoxCXYWH box;
    int category = 0;
    int color = 0;
    bool is_referent = false;
};

struct Scene {
    std::int64_t id = 0;
    std::vector<SceneObject> objects;
    std::optional<HumanPose> pose;
    std::vector<int> utterance;
    std::string utterance_text;
    int span_begin = 0;
    int span_end = 0;
    Condition condition = Condition::Full;

    const SceneObject& referent() const {
        const SceneObject* found = nullptr;
        for (const SceneObject& o : objects) {
            if (!o.is_referent) continue;
            if (found) throw Error("scene has multiple referents");
            found = &o;
        }
        if (!found) throw Error("scene has no referent");
        return *found;
    }

    /// Annotated gesture line; nullopt when the pose or the kind's keypoints
    /// are absent. Present regardless of the ablation condition.
    std::optional<GestureLine> annotation_line(GestureKind kind) const {
        if (!pose) return std::nullopt;
        if (kind == GestureKind::VTL && (!pose->eye || !pose->fingertip))
            return std::nullopt;
        if (kind == GestureKind::EWL && (!pose->elbow || !pose->wrist))
            return std::nullopt;
        return make_gesture_line(*pose, kind);
    }

    /// Line usable as a training target: excluded under non-Full conditions.
    std::optional<GestureLine> supervision_line(GestureKind kind) const {
        if (condition != Condition::Full) return std::nullopt;
        return annotation_line(kind);
    }
};

/// Copy with the ablation condition set; annotations are untouched.
inline Scene apply_condition(Scene scene, Condition condition) {
    scene.condition = condition;
    return scene;
}

} // namespace touchline
