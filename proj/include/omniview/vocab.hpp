#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace ov {

// Closed word-level vocabulary of exactly 64 tokens shared by captions,
// questions, and answers. Ids are stable: specials, colors, shapes, digits,
// distance bins, sentence words, then reserved padding ids.
class Vocab {
  public:
    static constexpr int kSize = 64;
    static constexpr std::uint16_t kPad = 0;
    static constexpr std::uint16_t kBos = 1;
    static constexpr std::uint16_t kEos = 2;
    static constexpr std::uint16_t kSep = 3;
    static constexpr std::uint16_t kImg = 4;
    static constexpr std::uint16_t kAns = 5;

    Vocab();

    // Throws InvalidInputError on a word outside the vocabulary.
    std::uint16_t id(const std::string& word) const;
    const std::string& word(std::uint16_t id) const;

    // Lossless for text made of vocabulary words separated by single spaces.
    std::vector<std::uint16_t> encode(const std::string& text) const;
    std::string decode(const std::vector<std::uint16_t>& ids) const;

  private:
    std::vector<std::string> words_;
    std::vector<std::pair<std::string, std::uint16_t>> index_;
};

const Vocab& vocab();

}  // namespace ov
