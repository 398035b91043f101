#pragma once

#include <cctype>
#include <sstream>
#include <string>
#include <vector>

#include "omniview/model/config.hpp"
#include "omniview/nn/blocks.hpp"
#include "omniview/vocab.hpp"

namespace ov::model {

inline std::string normalize_answer(const std::string& s) {
    std::string out;
    bool in_word = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_word = false;
            continue;
        }
        if (!in_word && !out.empty()) out.push_back(' ');
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        in_word = true;
    }
    return out;
}

inline int exact_match(const std::string& pred, const std::string& gt) {
    return normalize_answer(pred) == normalize_answer(gt) ? 1 : 0;
}

// Autoregressive QA model over [visual tokens][SEP][question][ANS][answer][EOS]
// with a causal mask. The token table doubles as the output head and as the
// caption pathway of the texture module.
template <typename T>
struct Understanding {
    int embed = -1;      // [V, D]
    nn::Linear<T> patch_in;  // p*p*3 -> D
    int pos2d = -1;      // [tokens_per_frame, D]
    int frame_pos = -1;  // [frames, D]
    int text_pos = -1;   // [max_text, D]
    std::vector<nn::TransformerBlock<T>> blocks;
    nn::LayerNormBlock<T> ln_f;

    void create(nn::ParamStore<T>& store, const ModelConfig& cfg, Rng& rng) {
        auto g = nn::ParamGroup::kUnd;
        embed = store.add("und.embed", nn::randn<T>(cfg.vocab_size(), cfg.dim, rng, 0.02), g);
        patch_in = nn::Linear<T>::create(store, "und.patch_in", cfg.tex_latent(), cfg.dim, g, rng);
        pos2d = store.add("und.pos2d", nn::randn<T>(cfg.tokens_per_frame(), cfg.dim, rng, 0.02), g);
        frame_pos = store.add("und.frame_pos", nn::randn<T>(cfg.frames, cfg.dim, rng, 0.02), g);
        text_pos = store.add("und.text_pos", nn::randn<T>(cfg.max_text, cfg.dim, rng, 0.02), g);
        blocks.clear();
        for (int i = 0; i < cfg.und_layers; ++i)
            blocks.push_back(nn::TransformerBlock<T>::create(
                store, "und.block" + std::to_string(i), cfg.dim, cfg.heads, g, rng));
        ln_f = nn::LayerNormBlock<T>::create(store, "und.ln_f", cfg.dim, g);
    }
};

// Token tail for one QA pair. Loss lands on the positions that predict the
// answer tokens and the closing EOS; everything else is ignored.
struct QaTail {
    std::vector<int> ids;
    std::vector<int> targets;  // aligned with ids, -1 = ignored
};

inline QaTail build_qa_tail(const std::vector<int>& question, const std::vector<int>& answer) {
    if (answer.empty()) throw InvalidInputError("build_qa_tail: empty answer");
    QaTail tail;
    tail.ids.push_back(Vocab::kSep);
    for (int q : question) tail.ids.push_back(q);
    tail.ids.push_back(Vocab::kAns);
    for (int a : answer) tail.ids.push_back(a);
    tail.ids.push_back(Vocab::kEos);
    tail.targets.assign(tail.ids.size(), -1);
    std::size_t ans_pos = 1 + question.size();  // index of the ANS token
    for (std::size_t j = 0; j < answer.size() + 1; ++j)
        tail.targets[ans_pos + j] = tail.ids[ans_pos + j + 1];
    return tail;
}

template <typename T>
struct UndOut {
    int logits = -1;  // [n_visual + tail, V]
    int f_und = -1;   // [n_visual, D]
    int n_visual = 0;
};

// frames: one [tokens_per_frame, p*p*3] patch-row matrix per frame with pixel
// values in [0,1]. tail_ids may be any in-vocabulary token sequence (training
// uses build_qa_tail, decoding an unfinished prefix).
template <typename T>
UndOut<T> und_forward(const nn::Ctx<T>& ctx, const Understanding<T>& und, const ModelConfig& cfg,
                      const std::vector<nn::MatT<T>>& frames, const std::vector<int>& tail_ids) {
    if (static_cast<int>(frames.size()) != cfg.frames)
        throw ContractError("und_forward: frame count mismatch");
    if (static_cast<int>(tail_ids.size()) > cfg.max_text)
        throw ContractError("und_forward: text tail exceeds max_text");
    int n_tok = cfg.tokens_per_frame();
    int n_vis = cfg.n_visual();
    if (n_vis + static_cast<int>(tail_ids.size()) > cfg.max_seq)
        throw ContractError("und_forward: sequence exceeds max_seq");

    nn::Tape<T>& tp = ctx.tape;
    std::vector<int> rows;
    rows.reserve(frames.size() + 1);
    for (int f = 0; f < cfg.frames; ++f) {
        const nn::MatT<T>& pix = frames[static_cast<std::size_t>(f)];
        if (pix.rows() != n_tok || pix.cols() != cfg.tex_latent())
            throw ContractError("und_forward: bad frame patch shape");
        nn::MatT<T> centered = pix * static_cast<T>(2) - nn::MatT<T>::Ones(pix.rows(), pix.cols());
        int x = und.patch_in.apply(ctx, nn::constant(tp, std::move(centered)));
        x = nn::add(tp, x, ctx.p(und.pos2d));
        int frame_row = nn::slice_rows(tp, ctx.p(und.frame_pos), f, 1);
        x = nn::add_rowvec(tp, x, frame_row);
        rows.push_back(x);
    }
    if (!tail_ids.empty()) {
        int text = nn::gather_rows(tp, ctx.p(und.embed), tail_ids);
        std::vector<int> pos_idx(tail_ids.size());
        for (std::size_t i = 0; i < tail_ids.size(); ++i) pos_idx[i] = static_cast<int>(i);
        int pos = nn::gather_rows(tp, ctx.p(und.text_pos), pos_idx);
        rows.push_back(nn::add(tp, text, pos));
    }
    int x = nn::concat_rows(tp, rows);

    int n_seq = n_vis + static_cast<int>(tail_ids.size());
    nn::AttentionMask mask = nn::AttentionMask::causal(n_seq);

    int mid_layer = (cfg.und_layers + 1) / 2;  // 1-based index of the middle tap
    int h_mid = -1;
    for (int i = 0; i < cfg.und_layers; ++i) {
        x = und.blocks[static_cast<std::size_t>(i)].apply(ctx, x, &mask);
        if (i + 1 == mid_layer) h_mid = x;
    }

    UndOut<T> out;
    out.n_visual = n_vis;
    int mid_vis = nn::slice_rows(tp, h_mid, 0, n_vis);
    int last_vis = nn::slice_rows(tp, x, 0, n_vis);
    out.f_und = nn::scale(tp, nn::add(tp, mid_vis, last_vis), 0.5);
    out.logits = nn::matmul_nt(tp, und.ln_f.apply(ctx, x), ctx.p(und.embed));
    return out;
}

// Mean NLL over the tail's loss positions. tail_targets aligns with the tail
// passed to und_forward; visual positions never contribute.
template <typename T>
int und_loss(const nn::Ctx<T>& ctx, const UndOut<T>& out, const std::vector<int>& tail_targets) {
    std::vector<int> full(static_cast<std::size_t>(out.n_visual), -1);
    full.insert(full.end(), tail_targets.begin(), tail_targets.end());
    return nn::cross_entropy_rows(ctx.tape, out.logits, full);
}

// Greedy decode: argmax with ties broken toward the lowest id, stopping at
// EOS or after max_tokens answer tokens. Returns answer ids only.
template <typename T>
std::vector<int> greedy_answer(const nn::ParamStore<T>& store, const Understanding<T>& und,
                               const ModelConfig& cfg, const std::vector<nn::MatT<T>>& frames,
                               const std::vector<int>& question, int max_tokens) {
    if (max_tokens < 1) throw InvalidInputError("greedy_answer: max_tokens must be >= 1");
    std::vector<int> tail;
    tail.push_back(Vocab::kSep);
    for (int q : question) tail.push_back(q);
    tail.push_back(Vocab::kAns);

    std::vector<int> answer;
    for (int step = 0; step < max_tokens; ++step) {
        nn::Tape<T> tape(false);
        auto ids = store.push_all(tape);
        nn::Ctx<T> ctx{tape, ids};
        UndOut<T> out = und_forward(ctx, und, cfg, frames, tail);
        const nn::MatT<T>& logits = tape.val(out.logits);
        Eigen::Index last = logits.rows() - 1;
        int best = 0;
        for (int v = 1; v < static_cast<int>(logits.cols()); ++v)
            if (logits(last, v) > logits(last, best)) best = v;
        if (best == Vocab::kEos) break;
        answer.push_back(best);
        tail.push_back(best);
        if (static_cast<int>(tail.size()) + 1 > cfg.max_text) break;
    }
    return answer;
}

}  // namespace ov::model
