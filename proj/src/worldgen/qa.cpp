#include "omniview/worldgen/qa.hpp"

#include <algorithm>
#include <limits>

#include "omniview/common.hpp"

namespace ov::world {

const char* qa_category_name(QaCategory c) {
    switch (c) {
        case QaCategory::kObjectCount: return "object_count";
        case QaCategory::kRelativeDistance: return "relative_distance";
        case QaCategory::kAbsoluteDistanceBin: return "absolute_distance_bin";
        case QaCategory::kAppearanceOrder: return "appearance_order";
    }
    throw InvalidInputError("qa_category_name: bad category");
}

namespace {

std::optional<QaPair> qa_object_count(const Scene& scene) {
    QaPair qa;
    qa.category = QaCategory::kObjectCount;
    qa.question = "how many objects are in the room";
    qa.answer = std::to_string(scene.objects.size());
    return qa;
}

std::optional<QaPair> qa_relative_distance(const Scene& scene, Rng& rng) {
    const int n = static_cast<int>(scene.objects.size());
    if (n < 3) return std::nullopt;
    const double margin = 0.05 * scene.diagonal();

    // Enumerate anchor/candidate triples from a random starting offset so
    // different scenes ask about different objects.
    int offset = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    for (int ai = 0; ai < n; ++ai) {
        int a = (ai + offset) % n;
        for (int b = 0; b < n; ++b) {
            if (b == a) continue;
            for (int c = b + 1; c < n; ++c) {
                if (c == a) continue;
                double db = (scene.objects[b].center - scene.objects[a].center).norm();
                double dc = (scene.objects[c].center - scene.objects[a].center).norm();
                if (std::abs(db - dc) < margin) continue;
                int nearer = db < dc ? b : c;
                QaPair qa;
                qa.category = QaCategory::kRelativeDistance;
                qa.question = std::string("which object is closer to the ") +
                              color_word(scene.objects[a].color_id) + " one the " +
                              color_word(scene.objects[b].color_id) + " or the " +
                              color_word(scene.objects[c].color_id);
                qa.answer = color_word(scene.objects[nearer].color_id);
                return qa;
            }
        }
    }
    return std::nullopt;
}

std::optional<QaPair> qa_absolute_distance_bin(const Scene& scene, const geo::Camera& first_cam,
                                               Rng& rng) {
    const double diag = scene.diagonal();
    const double edge1 = diag / 3.0, edge2 = 2.0 * diag / 3.0;
    const double clear = 0.02 * diag;
    const int n = static_cast<int>(scene.objects.size());
    int offset = static_cast<int>(rng.uniform_int(static_cast<std::uint64_t>(n)));
    for (int i = 0; i < n; ++i) {
        int k = (i + offset) % n;
        double d = (scene.objects[k].center - first_cam.translation).norm();
        if (std::abs(d - edge1) < clear || std::abs(d - edge2) < clear) continue;
        QaPair qa;
        qa.category = QaCategory::kAbsoluteDistanceBin;
        qa.question = std::string("how far is the ") + color_word(scene.objects[k].color_id) + " " +
                      shape_word(scene.objects[k].shape_id) + " from the camera";
        qa.answer = d < edge1 ? "near" : d < edge2 ? "mid" : "far";
        return qa;
    }
    return std::nullopt;
}

std::optional<QaPair> qa_appearance_order(const Scene& scene,
                                          const std::vector<RenderedView>& views) {
    const int n = static_cast<int>(scene.objects.size());
    constexpr int kNever = std::numeric_limits<int>::max();
    std::vector<int> first_seen(static_cast<std::size_t>(n), kNever);
    for (std::size_t f = 0; f < views.size(); ++f) {
        for (std::int16_t id : views[f].hit_id) {
            if (id >= 0 && first_seen[static_cast<std::size_t>(id)] == kNever)
                first_seen[static_cast<std::size_t>(id)] = static_cast<int>(f);
        }
    }
    int best = -1;
    bool unique = false;
    for (int k = 0; k < n; ++k) {
        if (first_seen[static_cast<std::size_t>(k)] == kNever) continue;
        if (best < 0 || first_seen[static_cast<std::size_t>(k)] < first_seen[static_cast<std::size_t>(best)]) {
            best = k;
            unique = true;
        } else if (first_seen[static_cast<std::size_t>(k)] == first_seen[static_cast<std::size_t>(best)]) {
            unique = false;
        }
    }
    if (best < 0 || !unique) return std::nullopt;
    QaPair qa;
    qa.category = QaCategory::kAppearanceOrder;
    qa.question = "which object appears first";
    qa.answer = color_word(scene.objects[static_cast<std::size_t>(best)].color_id);
    return qa;
}

}  // namespace

std::optional<std::vector<QaPair>> make_qa(const Scene& scene,
                                           const std::vector<geo::Camera>& cameras,
                                           const std::vector<RenderedView>& views, Rng& rng) {
    if (cameras.empty() || views.size() != cameras.size())
        throw InvalidInputError("make_qa: cameras/views mismatch");
    std::vector<QaPair> out;
    auto q0 = qa_object_count(scene);
    auto q1 = qa_relative_distance(scene, rng);
    auto q2 = qa_absolute_distance_bin(scene, cameras[0], rng);
    auto q3 = qa_appearance_order(scene, views);
    if (!q0 || !q1 || !q2 || !q3) return std::nullopt;
    out.push_back(*q0);
    out.push_back(*q1);
    out.push_back(*q2);
    out.push_back(*q3);
    return out;
}

}  // namespace ov::world
