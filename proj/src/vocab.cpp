#include "omniview/vocab.hpp"

#include <algorithm>
#include <sstream>

#include "omniview/common.hpp"

namespace ov {

Vocab::Vocab() {
    words_ = {
        "<pad>", "<bos>", "<eos>", "<sep>", "<img>", "<ans>",
        // colors
        "red", "green", "blue", "yellow", "purple", "orange", "cyan", "pink",
        // shapes
        "cube", "box", "slab", "pillar",
        // digits
        "0", "1", "2", "3", "4", "5", "6", "7", "8", "9",
        // distance bins
        "near", "mid", "far",
        // sentence words
        "a", "room", "with", "and", "how", "many", "objects", "are", "in",
        "the", "which", "object", "is", "closer", "to", "one", "or",
        "appears", "first", "from", "camera",
    };
    while (words_.size() < kSize) words_.push_back("<r" + std::to_string(words_.size()) + ">");
    if (words_.size() != kSize) throw ContractError("Vocab: size mismatch");
    for (std::size_t i = 0; i < words_.size(); ++i)
        index_.emplace_back(words_[i], static_cast<std::uint16_t>(i));
    std::sort(index_.begin(), index_.end());
}

std::uint16_t Vocab::id(const std::string& word) const {
    auto it = std::lower_bound(index_.begin(), index_.end(), word,
                               [](const auto& entry, const std::string& w) { return entry.first < w; });
    if (it == index_.end() || it->first != word)
        throw InvalidInputError("Vocab: unknown word '" + word + "'");
    return it->second;
}

const std::string& Vocab::word(std::uint16_t id) const {
    if (id >= words_.size()) throw InvalidInputError("Vocab: id out of range");
    return words_[id];
}

std::vector<std::uint16_t> Vocab::encode(const std::string& text) const {
    std::vector<std::uint16_t> out;
    std::istringstream in(text);
    std::string w;
    while (in >> w) out.push_back(id(w));
    return out;
}

std::string Vocab::decode(const std::vector<std::uint16_t>& ids) const {
    std::string out;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i > 0) out += ' ';
        out += word(ids[i]);
    }
    return out;
}

const Vocab& vocab() {
    static const Vocab v;
    return v;
}

}  // namespace ov
