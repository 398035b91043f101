#pragma once

#include <optional>
#include <string>
#include <vector>

#include "omniview/geometry/camera.hpp"
#include "omniview/worldgen/render.hpp"
#include "omniview/worldgen/scene.hpp"

namespace ov::world {

enum class QaCategory : std::uint8_t {
    kObjectCount = 0,
    kRelativeDistance = 1,
    kAbsoluteDistanceBin = 2,
    kAppearanceOrder = 3,
};

const char* qa_category_name(QaCategory c);

struct QaPair {
    QaCategory category;
    std::string question;
    std::string answer;  // single word
};

// One pair per category, all using only vocabulary words. Returns nullopt
// when a category cannot be posed unambiguously for this scene/trajectory
// (fewer than 3 objects for relative distance, distances too close to a
// margin or bin edge, or no unique first-appearing object); callers then
// resample the scene seed.
//
//   object_count          "how many objects are in the room" -> digit
//   relative_distance     "which object is closer to the <c> one the <c1>
//                          or the <c2>" -> color; requires a distance gap
//                          of at least 0.05 * room diagonal
//   absolute_distance_bin "how far is the <color> <shape> from the camera"
//                          -> near/mid/far, thirds of the room diagonal
//                          from the first frame's camera, 0.02 * diagonal
//                          clear of bin edges
//   appearance_order      "which object appears first" -> color of the
//                          object with the strictly earliest visible frame
std::optional<std::vector<QaPair>> make_qa(const Scene& scene,
                                           const std::vector<geo::Camera>& cameras,
                                           const std::vector<RenderedView>& views, Rng& rng);

}  // namespace ov::world
