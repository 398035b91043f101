#pragma once

#include <algorithm>

#include "omniview/common.hpp"

namespace ov::train {

// Dense-to-sparse reference schedule: staircase over F-1 equal phases from
// n_ref = F-1 (all frames but the last target) down to 1 (first frame only).
inline int d2s_refs(int iter, int total, int frames) {
    if (frames < 2) throw InvalidInputError("d2s_refs: frames must be >= 2");
    if (total <= 0) throw InvalidInputError("d2s_refs: total must be positive");
    if (iter < 0) throw InvalidInputError("d2s_refs: negative iteration");
    long long span = frames - 1;
    long long n = span - (span * static_cast<long long>(iter)) / total;
    return static_cast<int>(std::clamp(n, 1ll, span));
}

struct CurriculumState {
    int iteration = 0;
    int total = 0;
    int n_ref = 1;
};

// d2s_on selects the staircase; otherwise the fixed dense (F-1) or sparse (1)
// regime.
inline CurriculumState curriculum_at(int iter, int total, int frames, bool d2s_on, bool dense) {
    CurriculumState st;
    st.iteration = iter;
    st.total = total;
    st.n_ref = d2s_on ? d2s_refs(iter, total, frames) : (dense ? frames - 1 : 1);
    return st;
}

}  // namespace ov::train
