#pragma once

#include <cstdint>

#include "omniview/common.hpp"
#include "omniview/vocab.hpp"

namespace ov::model {

// Shared sizing for the three transformer modules. One width everywhere; the
// geometry stack defaults to four layers, the rest to four as well. All image
// tensors are square with a square patch grid.
struct ModelConfig {
    int dim = 64;
    int heads = 4;
    int und_layers = 4;
    int tex_layers = 4;
    int geo_layers = 4;
    int patch = 8;
    int image_size = 32;
    int frames = 8;
    int max_text = 32;  // token budget for [SEP] question [ANS] answer [EOS]
    int max_seq = 512;
    std::uint64_t codec_seed = 0x0c0dec5eedull;  // frozen latent bases
    double huber_delta = 0.1;

    int grid() const { return image_size / patch; }
    int tokens_per_frame() const { return grid() * grid(); }
    int n_visual() const { return frames * tokens_per_frame(); }
    int tex_latent() const { return patch * patch * 3; }
    int dep_latent() const { return patch * patch; }
    int vocab_size() const { return Vocab::kSize; }

    void validate() const {
        if (dim < 2 || dim % 2 != 0) throw InvalidInputError("ModelConfig: dim must be even and >= 2");
        if (heads < 1 || dim % heads != 0)
            throw InvalidInputError("ModelConfig: heads must divide dim");
        if (und_layers < 1 || tex_layers < 1 || geo_layers < 1)
            throw InvalidInputError("ModelConfig: layer counts must be positive");
        if (patch < 1 || image_size < patch || image_size % patch != 0)
            throw InvalidInputError("ModelConfig: patch must divide image_size");
        if (frames < 2) throw InvalidInputError("ModelConfig: frames must be >= 2");
        if (max_text < 8) throw InvalidInputError("ModelConfig: max_text too small");
        if (n_visual() + max_text > max_seq)
            throw InvalidInputError("ModelConfig: sequence exceeds max_seq");
        if (huber_delta <= 0) throw InvalidInputError("ModelConfig: huber_delta must be positive");
    }
};

}  // namespace ov::model
