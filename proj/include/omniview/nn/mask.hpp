#pragma once

#include <cstdint>
#include <vector>

#include "omniview/common.hpp"

namespace ov::nn {

// Attention mask over [queries, keys]; 1 = attend. Construction enforces
// that every query row allows at least one key.
class AttentionMask {
  public:
    AttentionMask(int queries, int keys, std::vector<std::uint8_t> allow)
        : queries_(queries), keys_(keys), allow_(std::move(allow)) {
        if (queries < 1 || keys < 1 ||
            allow_.size() != static_cast<std::size_t>(queries) * static_cast<std::size_t>(keys))
            throw InvalidInputError("AttentionMask: bad shape");
        for (int q = 0; q < queries_; ++q) {
            bool any = false;
            for (int k = 0; k < keys_; ++k) any = any || allowed(q, k);
            if (!any) throw InvalidInputError("AttentionMask: query row with no allowed key");
        }
    }

    static AttentionMask full(int queries, int keys) {
        return AttentionMask(queries, keys,
                             std::vector<std::uint8_t>(
                                 static_cast<std::size_t>(queries) * static_cast<std::size_t>(keys), 1));
    }

    // Token-level causal mask: position q attends to keys 0..q.
    static AttentionMask causal(int n) {
        std::vector<std::uint8_t> allow(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
        for (int q = 0; q < n; ++q)
            for (int k = 0; k <= q; ++k) allow[static_cast<std::size_t>(q) * n + k] = 1;
        return AttentionMask(n, n, std::move(allow));
    }

    // Frame-block mask over tokens grouped by frame (frame_of[i] gives each
    // token's frame index). Reference-frame tokens are visible everywhere;
    // non-reference tokens attend within their own frame and to earlier
    // frames per `frame_causal`, or only to references and themselves when
    // `frame_causal` is false.
    static AttentionMask frame_blocks(const std::vector<int>& frame_of,
                                      const std::vector<std::uint8_t>& is_reference_frame,
                                      bool frame_causal) {
        int n = static_cast<int>(frame_of.size());
        std::vector<std::uint8_t> allow(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
        for (int q = 0; q < n; ++q) {
            int fq = frame_of[static_cast<std::size_t>(q)];
            for (int k = 0; k < n; ++k) {
                int fk = frame_of[static_cast<std::size_t>(k)];
                bool ok = is_reference_frame[static_cast<std::size_t>(fk)] || fk == fq ||
                          (frame_causal && fk < fq);
                allow[static_cast<std::size_t>(q) * n + k] = ok ? 1 : 0;
            }
        }
        return AttentionMask(n, n, std::move(allow));
    }

    bool allowed(int q, int k) const {
        return allow_[static_cast<std::size_t>(q) * static_cast<std::size_t>(keys_) + static_cast<std::size_t>(k)] != 0;
    }
    int queries() const { return queries_; }
    int keys() const { return keys_; }

  private:
    int queries_, keys_;
    std::vector<std::uint8_t> allow_;
};

}  // namespace ov::nn
