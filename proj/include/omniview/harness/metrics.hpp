#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "omniview/common.hpp"

namespace ov::harness {

// Peak signal-to-noise ratio between two [H*W*C] images with unit dynamic
// range, capped at 99 dB once the MSE drops below 1e-10.
inline double psnr(std::span<const float> a, std::span<const float> b) {
    if (a.size() != b.size() || a.empty()) throw ContractError("psnr: shape mismatch");
    double mse = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = static_cast<double>(a[i]) - static_cast<double>(b[i]);
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse < 1e-10) return 99.0;
    return 10.0 * std::log10(1.0 / mse);
}

namespace detail {

inline std::vector<double> to_luma(std::span<const float> img, int height, int width,
                                   int channels) {
    std::vector<double> out(static_cast<std::size_t>(height) * width);
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (channels == 1) {
            out[i] = img[i];
        } else {
            out[i] = 0.299 * img[i * 3] + 0.587 * img[i * 3 + 1] + 0.114 * img[i * 3 + 2];
        }
    }
    return out;
}

}  // namespace detail

// Structural similarity over the luma channel: 8x8 windows at stride 4,
// population statistics per window, C1 = 0.01^2 and C2 = 0.03^2 on unit
// range, averaged over windows.
inline double ssim(std::span<const float> a, std::span<const float> b, int height, int width,
                   int channels = 3) {
    constexpr int kWin = 8, kStride = 4;
    if (channels != 1 && channels != 3) throw ContractError("ssim: channels must be 1 or 3");
    std::size_t need = static_cast<std::size_t>(height) * width * static_cast<std::size_t>(channels);
    if (a.size() != need || b.size() != need) throw ContractError("ssim: shape mismatch");
    if (height < kWin || width < kWin) throw ContractError("ssim: image smaller than window");

    std::vector<double> la = detail::to_luma(a, height, width, channels);
    std::vector<double> lb = detail::to_luma(b, height, width, channels);

    constexpr double c1 = 0.01 * 0.01, c2 = 0.03 * 0.03;
    constexpr double inv_n = 1.0 / (kWin * kWin);
    double total = 0.0;
    int windows = 0;
    for (int y = 0; y + kWin <= height; y += kStride) {
        for (int x = 0; x + kWin <= width; x += kStride) {
            double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
            for (int i = 0; i < kWin; ++i)
                for (int j = 0; j < kWin; ++j) {
                    double va = la[static_cast<std::size_t>(y + i) * width + (x + j)];
                    double vb = lb[static_cast<std::size_t>(y + i) * width + (x + j)];
                    sx += va;
                    sy += vb;
                    sxx += va * va;
                    syy += vb * vb;
                    sxy += va * vb;
                }
            double mx = sx * inv_n, my = sy * inv_n;
            double vx = sxx * inv_n - mx * mx;
            double vy = syy * inv_n - my * my;
            double cov = sxy * inv_n - mx * my;
            total += ((2 * mx * my + c1) * (2 * cov + c2)) /
                     ((mx * mx + my * my + c1) * (vx + vy + c2));
            ++windows;
        }
    }
    return total / windows;
}

// Mean |pred - gt| / gt over pixels; the standard relative depth error.
inline double depth_abs_rel(std::span<const float> pred, std::span<const float> gt) {
    if (pred.size() != gt.size() || gt.empty()) throw ContractError("depth_abs_rel: shape mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < gt.size(); ++i) {
        if (!(gt[i] > 0.0f)) throw ContractError("depth_abs_rel: ground truth must be positive");
        total += std::abs(static_cast<double>(pred[i]) - gt[i]) / gt[i];
    }
    return total / static_cast<double>(gt.size());
}

// Running exact-match accuracy, overall and per category.
struct EmTally {
    std::map<std::string, int> hits;
    std::map<std::string, int> totals;

    void add(const std::string& category, int em) {
        if (em != 0 && em != 1) throw ContractError("EmTally: em must be 0 or 1");
        hits[category] += em;
        totals[category] += 1;
    }

    double category_accuracy(const std::string& category) const {
        auto it = totals.find(category);
        if (it == totals.end() || it->second == 0)
            throw InvalidInputError("EmTally: empty category " + category);
        return static_cast<double>(hits.at(category)) / it->second;
    }

    double overall() const {
        int h = 0, t = 0;
        for (const auto& [cat, n] : totals) {
            h += hits.at(cat);
            t += n;
        }
        if (t == 0) throw InvalidInputError("EmTally: no samples");
        return static_cast<double>(h) / t;
    }

    int count() const {
        int t = 0;
        for (const auto& [cat, n] : totals) t += n;
        return t;
    }
};

}  // namespace ov::harness
