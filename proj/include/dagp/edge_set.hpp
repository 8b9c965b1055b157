#pragma once

#include <bit>
#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace dagp {

/// Fixed-universe bitset over edge ids. Cut-edge sets and blocked-edge sets
/// are represented this way so unions and symmetric differences stay cheap.
class EdgeSet {
public:
    EdgeSet() = default;

    explicit EdgeSet(std::size_t universe)
        : universe_(universe), words_((universe + 63) / 64, 0) {}

    std::size_t universe() const { return universe_; }

    bool test(std::size_t e) const {
        assert(e < universe_);
        return (words_[e >> 6] >> (e & 63)) & 1u;
    }

    void set(std::size_t e) {
        assert(e < universe_);
        words_[e >> 6] |= std::uint64_t{1} << (e & 63);
    }

    void reset(std::size_t e) {
        assert(e < universe_);
        words_[e >> 6] &= ~(std::uint64_t{1} << (e & 63));
    }

    std::size_t count() const {
        std::size_t c = 0;
        for (std::uint64_t w : words_) c += std::popcount(w);
        return c;
    }

    EdgeSet& operator|=(const EdgeSet& other) {
        assert(universe_ == other.universe_);
        for (std::size_t i = 0; i < words_.size(); ++i) words_[i] |= other.words_[i];
        return *this;
    }

    std::size_t symmetric_difference_count(const EdgeSet& other) const {
        assert(universe_ == other.universe_);
        std::size_t c = 0;
        for (std::size_t i = 0; i < words_.size(); ++i)
            c += std::popcount(words_[i] ^ other.words_[i]);
        return c;
    }

    template <typename Fn>
    void for_each(Fn&& fn) const {
        for (std::size_t i = 0; i < words_.size(); ++i) {
            std::uint64_t w = words_[i];
            while (w != 0) {
                unsigned bit = std::countr_zero(w);
                fn(i * 64 + bit);
                w &= w - 1;
            }
        }
    }

    bool operator==(const EdgeSet&) const = default;

private:
    std::size_t universe_ = 0;
    std::vector<std::uint64_t> words_;
};

} // namespace dagp
